#!/usr/bin/env python3
"""
Observables: Expectations, var(N_i), Number Marginals and Fidelity
==================================================================

The order parameter of the MI/SF transition is the on-site polariton-number
variance var(N_i) = ⟨N_i²⟩ − ⟨N_i⟩². It vanishes in the Mott insulator
(exactly one polariton per site) and is 2/3 in the 3-site superfluid.

Functions:
- expectation(): ⟨ψ|A|ψ⟩ for a symmetric operator
- variance_polariton_number(): var(N_i)
- marginal_distribution(): p_l = Prob(N_i = l)
- fidelity(): |⟨a|b⟩|²
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from ring_model import BasisSet, SymmetricOperator
from ring_utils import (
    VARIANCE_ROUNDING,
    BasisMismatchError,
    NegativeVarianceError,
    ParameterError,
)

logger = logging.getLogger(__name__)

STATE_NORM_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitudes over a BasisSet; real for static states, complex in dynamics.

    `tolerance` bounds |‖ψ‖ − 1| at construction. Propagation snapshots pass a
    looser bound because their drift is monitored separately.
    """

    amplitudes: np.ndarray
    basis: BasisSet = field(repr=False)
    tolerance: float = field(default=STATE_NORM_TOLERANCE, repr=False)

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes)
        if amplitudes.ndim != 1 or amplitudes.shape[0] != len(self.basis):
            raise BasisMismatchError(
                f"{amplitudes.shape} amplitudes for a basis of {len(self.basis)} states"
            )
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)
        drift = abs(self.norm - 1.0)
        if drift > self.tolerance:
            raise ParameterError(f"state is not normalized (|‖ψ‖−1| = {drift:.2e})")

    @classmethod
    def normalized(cls, amplitudes, basis: BasisSet) -> "StateVector":
        amplitudes = np.asarray(amplitudes)
        norm = np.linalg.norm(amplitudes)
        if norm == 0.0:
            raise ParameterError("cannot normalize the zero vector")
        return cls(amplitudes / norm, basis)

    @classmethod
    def basis_state(cls, basis: BasisSet, position: int) -> "StateVector":
        amplitudes = np.zeros(len(basis))
        amplitudes[position] = 1.0
        return cls(amplitudes, basis)

    @property
    def basis_tag(self):
        return self.basis.tag

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def probabilities(self) -> np.ndarray:
        """|amplitude|², renormalized to sum to one."""
        weights = np.abs(self.amplitudes) ** 2
        return weights / weights.sum()


@dataclass(frozen=True)
class NumberDistribution:
    """p_0..p_{N_total} of the polariton number at one site."""

    probs: tuple
    site: int

    @property
    def mean(self) -> float:
        return float(sum(l * p for l, p in enumerate(self.probs)))

    @property
    def variance(self) -> float:
        """Σ l² p_l − (Σ l p_l)²."""
        second = sum(l * l * p for l, p in enumerate(self.probs))
        return _clamp_variance(float(second) - self.mean ** 2)


def _require_same_basis(tag_a, tag_b, dim_a: int, dim_b: int) -> None:
    if tag_a != tag_b or dim_a != dim_b:
        raise BasisMismatchError(f"basis {tag_a} (dim {dim_a}) does not match {tag_b} (dim {dim_b})")


def _require_site(state: StateVector, site: int) -> None:
    if not 0 <= site < state.basis.n_sites:
        raise ParameterError(f"site {site} out of range for {state.basis.n_sites} sites")


def _clamp_variance(value: float) -> float:
    if value >= 0.0:
        return value
    if value >= -VARIANCE_ROUNDING:
        return 0.0
    raise NegativeVarianceError(f"variance {value:.3e} is negative beyond rounding")


# ============================================================================
# Operations
# ============================================================================

def expectation(state: StateVector, op: SymmetricOperator) -> float:
    """⟨ψ|A|ψ⟩; real because A is real symmetric."""
    _require_same_basis(state.basis_tag, op.basis.tag, state.dim, op.dim)
    return float(np.real(np.vdot(state.amplitudes, op.matrix @ state.amplitudes)))


def mean_polariton_number(state: StateVector, site: int) -> float:
    _require_site(state, site)
    return float(state.probabilities @ state.basis.polariton_numbers[:, site])


def variance_polariton_number(state: StateVector, site: int) -> float:
    """
    Order parameter var(N_i) = ⟨N_i²⟩ − ⟨N_i⟩².

    N_i is diagonal in the occupation basis, so both moments are weighted sums
    over |amplitude|². Values within −1e−12 are clamped to zero.
    """
    _require_site(state, site)
    numbers = state.basis.polariton_numbers[:, site].astype(float)
    probs = state.probabilities
    mean = probs @ numbers
    second = probs @ (numbers * numbers)
    return _clamp_variance(float(second - mean * mean))


def marginal_distribution(state: StateVector, site: int) -> NumberDistribution:
    """Probability of finding exactly l polaritons at `site`, l = 0..N_total."""
    _require_site(state, site)
    numbers = state.basis.polariton_numbers[:, site]
    probs = np.bincount(numbers, weights=state.probabilities, minlength=state.basis.sector.n_total + 1)
    return NumberDistribution(probs=tuple(float(p) for p in probs), site=site)


def fidelity(a: StateVector, b: StateVector) -> float:
    """Squared overlap |⟨a|b⟩|², clipped into [0, 1]."""
    _require_same_basis(a.basis_tag, b.basis_tag, a.dim, b.dim)
    overlap = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    return float(min(1.0, max(0.0, overlap)))


__all__ = [
    "StateVector",
    "NumberDistribution",
    "expectation",
    "mean_polariton_number",
    "variance_polariton_number",
    "marginal_distribution",
    "fidelity",
]
