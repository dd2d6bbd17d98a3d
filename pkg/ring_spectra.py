#!/usr/bin/env python3
"""
Spectra: Exact Diagonalization and Closed-Form Polariton Results
================================================================

Functions:
- eigendecompose(): all eigenpairs of a SymmetricOperator (scipy.linalg.eigh)
- ground_state(): lowest eigenpair with a degeneracy flag
- ground_projection(): weight of a state in the lowest eigenvalue cluster
- polariton_level(): single-site JC energies E_n^± and mixing angle θ_n
- u_eff(): on-site repulsion U_eff(1) = E_2^− − 2E_1^−
- kappa(): coupler-mediated hopping g_c²/Δc
- hopping_ratio(): κ/U_eff(1) at a (Δ, Δc) point
- hopping_band(): single-photon band −2κ cos(2πk/n)
- analytic_mi_state(): ⊗_i |1,−⟩_i
- analytic_sf_state(): (1/√N!)((1/√n) Σ_i a†_i)^N |vac⟩
- resonant_pumping_state(): state prepared by the global π-pulse

Sign conventions:
- Eigenvectors: first nonzero component positive.
- Lower polariton: |n,−⟩ = cosθ_n |n−1,e⟩ − sinθ_n |n,g⟩.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, NamedTuple

import numpy as np
import scipy.linalg

from ring_model import BasisSet, ModelParams, SymmetricOperator
from ring_observables import StateVector
from ring_utils import (
    DEGENERACY_GAP,
    DispersiveRegimeError,
    EigensolverError,
    ParameterError,
)

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-9
SIGN_THRESHOLD = 1e-12


# ============================================================================
# Part 1: Exact Diagonalization
# ============================================================================

@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray
    basis: BasisSet

    def __len__(self) -> int:
        return self.values.shape[0]

    def state(self, k: int) -> StateVector:
        return StateVector(self.vectors[:, k], self.basis)

    def ground_cluster(self) -> np.ndarray:
        """Indices of eigenvalues within the degeneracy gap of the lowest one."""
        return np.flatnonzero(self.values - self.values[0] < DEGENERACY_GAP)


class GroundState(NamedTuple):
    energy: float
    state: StateVector
    degenerate: bool


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    for k in range(vectors.shape[1]):
        column = vectors[:, k]
        nonzero = np.flatnonzero(np.abs(column) > SIGN_THRESHOLD)
        if nonzero.size and column[nonzero[0]] < 0:
            vectors[:, k] = -column
    return vectors


def eigendecompose(op: SymmetricOperator) -> EigenDecomposition:
    """
    Diagonalize a real symmetric operator.

    Args:
        op: Operator to diagonalize (dim ≥ 1)

    Returns:
        EigenDecomposition with ascending values and sign-fixed vectors

    Raises:
        EigensolverError: LAPACK failed or a residual ‖Hv − λv‖ exceeded 1e−9·max(1, |λ|)
    """
    if op.dim < 1:
        raise ParameterError("cannot diagonalize an empty operator")
    try:
        values, vectors = scipy.linalg.eigh(op.matrix)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"eigensolver failed on {op.label or 'operator'}: {exc}") from exc

    vectors = _fix_signs(np.array(vectors))
    residuals = np.linalg.norm(op.matrix @ vectors - vectors * values, axis=0)
    limits = RESIDUAL_TOLERANCE * np.maximum(1.0, np.abs(values))
    if np.any(residuals > limits):
        worst = int(np.argmax(residuals / limits))
        raise EigensolverError(
            f"eigenpair {worst} of {op.label or 'operator'} has residual {residuals[worst]:.2e}"
        )

    values.setflags(write=False)
    vectors.setflags(write=False)
    return EigenDecomposition(values=values, vectors=vectors, basis=op.basis)


def ground_state(op: SymmetricOperator) -> GroundState:
    """Lowest eigenpair; `degenerate` is set when the first gap is below 1e−10."""
    decomposition = eigendecompose(op)
    degenerate = len(decomposition) > 1 and (
        decomposition.values[1] - decomposition.values[0] < DEGENERACY_GAP
    )
    if degenerate:
        logger.debug("degenerate ground state of %s (gap < %g)", op.label, DEGENERACY_GAP)
    return GroundState(float(decomposition.values[0]), decomposition.state(0), bool(degenerate))


def ground_projection(decomposition: EigenDecomposition, state: StateVector) -> float:
    """Probability of `state` in the lowest eigenvalue cluster."""
    if state.basis_tag != decomposition.basis.tag:
        raise ParameterError("state and decomposition use different bases")
    cluster = decomposition.vectors[:, decomposition.ground_cluster()]
    overlaps = cluster.T @ state.amplitudes
    return float(min(1.0, np.sum(np.abs(overlaps) ** 2)))


# ============================================================================
# Part 2: Closed-Form Polariton Results
# ============================================================================

class Branch(str, Enum):
    UPPER = "upper"
    LOWER = "lower"

    @property
    def sign(self) -> int:
        return 1 if self is Branch.UPPER else -1


@dataclass(frozen=True)
class PolaritonLevel:
    n: int
    branch: Branch
    energy: float
    mixing_angle: float


def polariton_level(n: int, branch: Branch, delta_prime: float, g: float = 1.0) -> PolaritonLevel:
    """
    Single-site Jaynes-Cummings level with n excitations.

    E_n^± = Δ′/2 ± sqrt((Δ′/2)² + n g²), tanθ_n = (Δ′/2 + sqrt((Δ′/2)² + n g²)) / (√n g).
    The zero-polariton state |0,−⟩ has E = 0 and θ = 0; (n=0, upper) does not exist.
    """
    branch = Branch(branch)
    if n < 0:
        raise ParameterError(f"polariton number must be ≥ 0, got {n}")
    if n == 0:
        if branch is Branch.UPPER:
            raise ParameterError("there is no upper-branch zero-polariton state")
        return PolaritonLevel(0, branch, 0.0, 0.0)

    half = delta_prime / 2.0
    root = math.sqrt(half * half + n * g * g)
    energy = half + branch.sign * root
    mixing_angle = math.atan2(half + root, math.sqrt(n) * g)
    return PolaritonLevel(n, branch, energy, mixing_angle)


def u_eff(delta_prime: float, g: float = 1.0) -> float:
    """Energy cost of a second polariton on a singly occupied site."""
    return (
        -delta_prime / 2.0
        + math.sqrt(delta_prime ** 2 + 4.0 * g * g)
        - math.sqrt(delta_prime ** 2 / 4.0 + 2.0 * g * g)
    )


def kappa(g_c: float, delta_c: float) -> float:
    """Photon hopping rate g_c²/Δc; Δc must be positive."""
    if delta_c <= 0:
        raise DispersiveRegimeError(f"kappa needs delta_c > 0, got {delta_c:g}")
    return g_c * g_c / delta_c


def hopping_ratio(delta: float, delta_c: float, g: float = 1.0, g_c: float = 1.0) -> float:
    """κ/U_eff(1) at detunings (Δ, Δc) of a uniform ring."""
    k = kappa(g_c, delta_c)
    return k / u_eff(delta + 2.0 * k, g)


def hopping_band(n_sites: int, kappa_value: float) -> List[float]:
    """Single-photon energies −2κ cos(2πk/n), k = 0..n−1."""
    if n_sites < 1:
        raise ParameterError(f"n_sites must be ≥ 1, got {n_sites}")
    return [-2.0 * kappa_value * math.cos(2.0 * math.pi * k / n_sites) for k in range(n_sites)]


# ============================================================================
# Part 3: Analytic Many-Body States
# ============================================================================

def _require_unit_filling(basis: BasisSet, what: str) -> None:
    if basis.sector.include_couplers:
        raise ParameterError(f"{what} lives in a basis without coupler qubits")
    if basis.sector.n_total != basis.n_sites:
        raise ParameterError(
            f"{what} needs N_total = n_sites ({basis.n_sites}), basis has {basis.sector.n_total}"
        )


def analytic_mi_state(basis: BasisSet, params: ModelParams) -> StateVector:
    """One lower polariton per site, ⊗_i (cosθ_i |0,e⟩ − sinθ_i |1,g⟩), at each site's Δ′."""
    _require_unit_filling(basis, "the Mott-insulator state")
    if params.n_sites != basis.n_sites:
        raise ParameterError(f"params have {params.n_sites} sites, basis has {basis.n_sites}")

    angles = [
        polariton_level(1, Branch.LOWER, params.delta_prime(i), params.site_g(i)).mixing_angle
        for i in range(basis.n_sites)
    ]
    amplitudes = np.zeros(len(basis))
    for position, state in enumerate(basis.states):
        amplitude = 1.0
        for site, theta in enumerate(angles):
            photons, excited = state.photons[site], state.site_qubits[site]
            if photons == 0 and excited:
                amplitude *= math.cos(theta)
            elif photons == 1 and not excited:
                amplitude *= -math.sin(theta)
            else:
                amplitude = 0.0
                break
        amplitudes[position] = amplitude
    return StateVector.normalized(amplitudes, basis)


def analytic_sf_state(basis: BasisSet) -> StateVector:
    """N photons spread evenly over the ring, all qubits in |g⟩.

    Amplitude of |n_1..n_n; g..g⟩ is sqrt(N!/Π n_i!) / n^{N/2}.
    """
    _require_unit_filling(basis, "the superfluid state")
    n_sites, n_total = basis.n_sites, basis.sector.n_total
    amplitudes = np.zeros(len(basis))
    for position, state in enumerate(basis.states):
        if any(state.site_qubits):
            continue
        multinomial = math.factorial(n_total)
        for photons in state.photons:
            multinomial //= math.factorial(photons)
        amplitudes[position] = math.sqrt(multinomial) / n_sites ** (n_total / 2.0)
    return StateVector.normalized(amplitudes, basis)


def resonant_pumping_state(basis: BasisSet, params: ModelParams) -> StateVector:
    """
    State prepared by resonant pumping.

    A global π-pulse at the |0,g⟩ ↔ |1,−⟩ frequency takes every site from the
    vacuum to one lower polariton, i.e. the MI state. Pulse infidelity is not
    modelled.
    """
    return analytic_mi_state(basis, params)


__all__ = [
    "EigenDecomposition",
    "GroundState",
    "Branch",
    "PolaritonLevel",
    "eigendecompose",
    "ground_state",
    "ground_projection",
    "polariton_level",
    "u_eff",
    "kappa",
    "hopping_ratio",
    "hopping_band",
    "analytic_mi_state",
    "analytic_sf_state",
    "resonant_pumping_state",
]
