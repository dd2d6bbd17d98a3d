#!/usr/bin/env python3
"""
Model Core: Bases and Hamiltonians of the Coupled-Resonator Ring
================================================================

A ring of n resonators, each holding one transmon (site qubit), with another
transmon (coupler qubit) in every junction. Everything here works in the
rotating frame (H − w·N_tot) with energies in units of g.

Contents:
- ModelParams: couplings, detunings and per-site / per-junction overrides
- BasisState, SectorSpec, BasisSet: fixed-excitation occupation bases
- SymmetricOperator: dense real symmetric matrix over a BasisSet
- enumerate_basis(): all configurations of one excitation sector
- build_effective_hamiltonian(): H^eff = H^hop + H^repul
- build_full_hamiltonian(): site JC terms plus explicit coupler qubits
- build_number_operator(): N_i = a†_i a_i + |e⟩⟨e|_i

Ring conventions:
- Junction j joins sites j and j+1 (mod n). A 2-site ring therefore has two
  junctions joining the same pair; a 1-site ring has none.
- Basis order is lexicographic on (photons, site qubits, coupler qubits).
"""

import hashlib
import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterator, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ring_utils import (
    DISPERSIVE_RATIO_MIN,
    BasisMismatchError,
    DispersiveRegimeError,
    ParameterError,
    SectorLeakageError,
)

logger = logging.getLogger(__name__)


def junction_count(n_sites: int) -> int:
    """Number of coupler junctions on a ring of `n_sites` resonators."""
    return n_sites if n_sites >= 2 else 0


# ============================================================================
# Part 1: Model Parameters
# ============================================================================

class ModelParams(BaseModel):
    """Physical parameters of the ring, in units of g (g ≡ 1 by convention).

    Δ = ε − w is the site-qubit detuning, Δc = ε_c − w the coupler detuning.
    Optional per-site / per-junction lists override the global values and model
    fabrication disorder.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_sites: int = Field(ge=1, description="Number of resonators in the ring")
    g: float = Field(default=1.0, gt=0, description="Site qubit-resonator coupling g")
    g_c: float = Field(default=1.0, ge=0, description="Coupler qubit-resonator coupling g_c")
    delta: float = Field(default=0.0, description="Site qubit detuning Δ = ε − w")
    delta_c: float = Field(default=10.0, gt=0, description="Coupler detuning Δc = ε_c − w")
    per_site_delta: Optional[Tuple[float, ...]] = Field(
        default=None, description="Per-site Δ overrides (one per site)"
    )
    per_site_g: Optional[Tuple[float, ...]] = Field(
        default=None, description="Per-site g overrides (one per site)"
    )
    per_junction_gc: Optional[Tuple[float, ...]] = Field(
        default=None, description="Per-junction g_c overrides (one per junction)"
    )
    per_junction_delta_c: Optional[Tuple[float, ...]] = Field(
        default=None, description="Per-junction Δc overrides (one per junction)"
    )

    @model_validator(mode="after")
    def _check_overrides(self):
        n_junctions = junction_count(self.n_sites)
        for name, expected in (
            ("per_site_delta", self.n_sites),
            ("per_site_g", self.n_sites),
            ("per_junction_gc", n_junctions),
            ("per_junction_delta_c", n_junctions),
        ):
            values = getattr(self, name)
            if values is not None and len(values) != expected:
                raise ValueError(f"{name} needs {expected} values, got {len(values)}")
        if self.per_site_g is not None and any(v <= 0 for v in self.per_site_g):
            raise ValueError("per_site_g values must be positive")
        if self.per_junction_gc is not None and any(v < 0 for v in self.per_junction_gc):
            raise ValueError("per_junction_gc values must be non-negative")
        if self.per_junction_delta_c is not None and any(v <= 0 for v in self.per_junction_delta_c):
            raise ValueError("per_junction_delta_c values must be positive")
        return self

    # ------------------------------------------------------------------
    # Per-site / per-junction accessors
    # ------------------------------------------------------------------

    @property
    def n_junctions(self) -> int:
        return junction_count(self.n_sites)

    def junction_sites(self, junction: int) -> Tuple[int, int]:
        return junction, (junction + 1) % self.n_sites

    def site_delta(self, site: int) -> float:
        return self.per_site_delta[site] if self.per_site_delta is not None else self.delta

    def site_g(self, site: int) -> float:
        return self.per_site_g[site] if self.per_site_g is not None else self.g

    def junction_gc(self, junction: int) -> float:
        return self.per_junction_gc[junction] if self.per_junction_gc is not None else self.g_c

    def junction_delta_c(self, junction: int) -> float:
        if self.per_junction_delta_c is not None:
            return self.per_junction_delta_c[junction]
        return self.delta_c

    def junction_kappa(self, junction: int) -> float:
        """Coupler-mediated hopping rate κ = g_c²/Δc of one junction."""
        return self.junction_gc(junction) ** 2 / self.junction_delta_c(junction)

    @property
    def kappa(self) -> float:
        """Global hopping rate g_c²/Δc (ignores junction overrides)."""
        return self.g_c ** 2 / self.delta_c

    def stark_shift(self, site: int) -> float:
        """Sum of κ over the junctions touching `site` (s_i = κ_{i−1} + κ_i)."""
        self._check_site(site)
        total = 0.0
        for junction in range(self.n_junctions):
            for touched in self.junction_sites(junction):
                if touched == site:
                    total += self.junction_kappa(junction)
        return total

    def delta_prime(self, site: int = 0) -> float:
        """Shifted detuning Δ′_i = Δ_i + s_i (uniform ring: Δ + 2g_c²/Δc)."""
        return self.site_delta(site) + self.stark_shift(site)

    def residual_potential(self, site: int) -> float:
        """On-site polariton potential left over when junctions differ.

        The second interaction picture removes only the ring-averaged Stark
        shift s̄·N_tot; site i keeps −(s_i − s̄)·N_i. Zero on a uniform ring.
        """
        shifts = [self.stark_shift(i) for i in range(self.n_sites)]
        return -(shifts[site] - sum(shifts) / self.n_sites)

    @property
    def has_detuning_overrides(self) -> bool:
        return self.per_site_delta is not None or self.per_junction_delta_c is not None

    # ------------------------------------------------------------------
    # Use-time rules
    # ------------------------------------------------------------------

    def check_dispersive(self) -> None:
        """Raise DispersiveRegimeError unless every junction has Δc ≥ 10·g_c."""
        for junction in range(self.n_junctions):
            gc = self.junction_gc(junction)
            dc = self.junction_delta_c(junction)
            if dc < DISPERSIVE_RATIO_MIN * gc:
                raise DispersiveRegimeError(
                    f"junction {junction}: delta_c={dc:g} < {DISPERSIVE_RATIO_MIN:g}·g_c={DISPERSIVE_RATIO_MIN * gc:g}; "
                    "the effective Hamiltonian is only valid in the dispersive regime"
                )

    def with_detunings(self, delta: Optional[float] = None, delta_c: Optional[float] = None) -> "ModelParams":
        """Validated copy with new global detunings."""
        data = self.model_dump()
        if delta is not None:
            data["delta"] = delta
        if delta_c is not None:
            data["delta_c"] = delta_c
        return ModelParams.model_validate(data)

    def with_sites(self, n_sites: int) -> "ModelParams":
        """Validated copy on a ring of another size (overrides are dropped)."""
        return ModelParams(
            n_sites=n_sites, g=self.g, g_c=self.g_c, delta=self.delta, delta_c=self.delta_c
        )

    def _check_site(self, site: int) -> None:
        if not 0 <= site < self.n_sites:
            raise ParameterError(f"site {site} out of range for {self.n_sites} sites")


# ============================================================================
# Part 2: Basis States and Sectors
# ============================================================================

@dataclass(frozen=True)
class SectorSpec:
    """Conserved total excitation and whether coupler qubits are modelled."""

    n_total: int
    include_couplers: bool = False


@dataclass(frozen=True)
class BasisState:
    """One occupation configuration |n_1..n_n; s_1..s_n; c_1..c_m⟩."""

    photons: Tuple[int, ...]
    site_qubits: Tuple[bool, ...]
    coupler_qubits: Optional[Tuple[bool, ...]] = None

    @property
    def n_sites(self) -> int:
        return len(self.photons)

    @property
    def total_excitation(self) -> int:
        couplers = sum(self.coupler_qubits) if self.coupler_qubits is not None else 0
        return sum(self.photons) + sum(self.site_qubits) + couplers

    def polariton_number(self, site: int) -> int:
        return self.photons[site] + int(self.site_qubits[site])

    @property
    def occupation_key(self) -> Tuple[int, ...]:
        couplers = self.coupler_qubits or ()
        return self.photons + tuple(int(s) for s in self.site_qubits) + tuple(int(c) for c in couplers)

    def label(self) -> str:
        sites = ",".join(
            f"{n}{'e' if s else 'g'}" for n, s in zip(self.photons, self.site_qubits)
        )
        if self.coupler_qubits is None:
            return f"|{sites}⟩"
        couplers = "".join("e" if c else "g" for c in self.coupler_qubits)
        return f"|{sites};{couplers}⟩"

    # -- single-quantum moves, each returning (new_state, amplitude) or None --

    def hop(self, source: int, target: int):
        """a†_target a_source."""
        n_src = self.photons[source]
        if n_src == 0:
            return None
        photons = list(self.photons)
        photons[source] -= 1
        amplitude = math.sqrt(n_src) * math.sqrt(photons[target] + 1)
        photons[target] += 1
        return BasisState(tuple(photons), self.site_qubits, self.coupler_qubits), amplitude

    def site_exchange(self, site: int):
        """σ⁺_i a_i or σ⁻_i a†_i, whichever is allowed."""
        photons = list(self.photons)
        qubits = list(self.site_qubits)
        if qubits[site]:
            amplitude = math.sqrt(photons[site] + 1)
            photons[site] += 1
            qubits[site] = False
        else:
            if photons[site] == 0:
                return None
            amplitude = math.sqrt(photons[site])
            photons[site] -= 1
            qubits[site] = True
        return BasisState(tuple(photons), tuple(qubits), self.coupler_qubits), amplitude

    def coupler_exchange(self, junction: int, site: int):
        """σ⁺_cj a_site or σ⁻_cj a†_site, whichever is allowed."""
        photons = list(self.photons)
        couplers = list(self.coupler_qubits)
        if couplers[junction]:
            amplitude = math.sqrt(photons[site] + 1)
            photons[site] += 1
            couplers[junction] = False
        else:
            if photons[site] == 0:
                return None
            amplitude = math.sqrt(photons[site])
            photons[site] -= 1
            couplers[junction] = True
        return BasisState(tuple(photons), self.site_qubits, tuple(couplers)), amplitude

    def shifted(self, shift: int) -> "BasisState":
        """Cyclic translation: site i moves to site i + shift (junctions follow)."""
        def roll(values):
            n = len(values)
            return tuple(values[(i - shift) % n] for i in range(n))

        couplers = roll(self.coupler_qubits) if self.coupler_qubits else self.coupler_qubits
        return BasisState(roll(self.photons), roll(self.site_qubits), couplers)


@dataclass(frozen=True, eq=False)
class BasisSet:
    """Ordered basis of one sector with its state → position index."""

    states: Tuple[BasisState, ...]
    index: Dict[BasisState, int] = field(repr=False)
    sector: SectorSpec
    n_sites: int

    def __len__(self) -> int:
        return len(self.states)

    @cached_property
    def tag(self) -> Tuple[int, int, bool, str]:
        """Sector plus a digest of the state order; equal tags mean identical bases."""
        order = repr([state.occupation_key for state in self.states]).encode()
        digest = hashlib.blake2b(order, digest_size=6).hexdigest()
        return self.n_sites, self.sector.n_total, self.sector.include_couplers, digest

    @cached_property
    def polariton_numbers(self) -> np.ndarray:
        """(dim, n_sites) integer array of N_i for every basis state."""
        table = np.array(
            [[state.polariton_number(i) for i in range(self.n_sites)] for state in self.states],
            dtype=np.int64,
        )
        table.setflags(write=False)
        return table

    def translation_permutation(self, shift: int = 1) -> np.ndarray:
        """perm[k] = index of the basis state obtained by shifting state k."""
        return np.array([self.index[state.shifted(shift)] for state in self.states], dtype=np.int64)


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """All tuples of `parts` non-negative integers summing to `total`."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        previous = -1
        counts = []
        for bar in bars:
            counts.append(bar - previous - 1)
            previous = bar
        counts.append(total + parts - 1 - previous - 1)
        yield tuple(counts)


def sector_dimension(n_sites: int, sector: SectorSpec) -> int:
    """Size of a sector without enumerating it: Σ_k C(qubits, k)·C(N−k+n−1, n−1)."""
    n_qubits = n_sites + (junction_count(n_sites) if sector.include_couplers else 0)
    return sum(
        math.comb(n_qubits, k) * math.comb(sector.n_total - k + n_sites - 1, n_sites - 1)
        for k in range(min(n_qubits, sector.n_total) + 1)
    )


def enumerate_basis(n_sites: int, sector: SectorSpec) -> BasisSet:
    """
    Enumerate every configuration with exactly `sector.n_total` excitations.

    Qubit patterns are drawn first, photons fill the remainder (stars and
    bars), and the result is sorted on the flattened occupation tuple.

    Examples:
        3 sites, N=3, no couplers → 38 states
        3 sites, N=3, couplers    → 111 states
    """
    if n_sites < 1:
        raise ParameterError(f"n_sites must be ≥ 1, got {n_sites}")
    if sector.n_total < 0:
        raise ParameterError(f"n_total must be ≥ 0, got {sector.n_total}")

    n_couplers = junction_count(n_sites) if sector.include_couplers else 0
    states = []
    for qubits in itertools.product((False, True), repeat=n_sites + n_couplers):
        remaining = sector.n_total - sum(qubits)
        if remaining < 0:
            continue
        site_qubits = tuple(qubits[:n_sites])
        couplers = tuple(qubits[n_sites:]) if sector.include_couplers else None
        for photons in _compositions(remaining, n_sites):
            states.append(BasisState(photons, site_qubits, couplers))

    states.sort(key=lambda state: state.occupation_key)
    index = {state: position for position, state in enumerate(states)}
    logger.debug("enumerated %d states for %d sites, sector %s", len(states), n_sites, sector)
    return BasisSet(states=tuple(states), index=index, sector=sector, n_sites=n_sites)


# ============================================================================
# Part 3: Symmetric Operators
# ============================================================================

@dataclass(frozen=True, eq=False)
class SymmetricOperator:
    """Dense real symmetric matrix over a BasisSet (read-only after build)."""

    matrix: np.ndarray
    basis: BasisSet = field(repr=False)
    label: str = ""

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self.matrix

    def __add__(self, other: "SymmetricOperator") -> "SymmetricOperator":
        if other.basis.tag != self.basis.tag:
            raise BasisMismatchError("cannot add operators over different bases")
        label = " + ".join(part for part in (self.label, other.label) if part)
        return SymmetricOperator(self.matrix + other.matrix, self.basis, label)

    def scaled(self, factor: float, label: str = "") -> "SymmetricOperator":
        return SymmetricOperator(factor * self.matrix, self.basis, label or self.label)


class _SymmetricBuilder:
    """Accumulates operator action into the lower triangle, then mirrors it.

    Every term is applied to every basis state (both halves of each h.c. pair
    are generated); only the copy landing below the diagonal is kept, so the
    upper triangle is an exact copy and the result is bit-exactly symmetric.
    A move that leaves the basis raises SectorLeakageError.
    """

    def __init__(self, basis: BasisSet, label: str):
        self.basis = basis
        self.label = label
        self.matrix = np.zeros((len(basis), len(basis)))

    def add_diagonal(self, column: int, value: float) -> None:
        self.matrix[column, column] += value

    def add_move(self, column: int, move, coefficient: float) -> None:
        if move is None:
            return
        target, amplitude = move
        row = self.basis.index.get(target)
        if row is None:
            raise SectorLeakageError(
                f"{self.label}: {self.basis.states[column].label()} → {target.label()} leaves the sector"
            )
        if row >= column:
            self.matrix[row, column] += coefficient * amplitude

    def build(self) -> SymmetricOperator:
        lower = np.tril(self.matrix)
        return SymmetricOperator(lower + np.tril(lower, -1).T, self.basis, self.label)


def _require_basis(params: ModelParams, basis: BasisSet, include_couplers: bool, what: str) -> None:
    if basis.n_sites != params.n_sites:
        raise ParameterError(
            f"{what}: basis has {basis.n_sites} sites, params have {params.n_sites}"
        )
    if basis.sector.include_couplers != include_couplers:
        wanted = "with" if include_couplers else "without"
        raise ParameterError(f"{what} needs a basis {wanted} coupler qubits")


# ============================================================================
# Part 4: Effective Hamiltonian H^eff = H^hop + H^repul
# ============================================================================

def build_hopping_hamiltonian(params: ModelParams, basis: BasisSet) -> SymmetricOperator:
    """H^hop = −Σ_j κ_j (a†_{j+1} a_j + a†_j a_{j+1}) on the periodic ring."""
    _require_basis(params, basis, include_couplers=False, what="hopping Hamiltonian")
    params.check_dispersive()

    builder = _SymmetricBuilder(basis, "H_hop")
    for column, state in enumerate(basis.states):
        for junction in range(params.n_junctions):
            kappa = params.junction_kappa(junction)
            if kappa == 0.0:
                continue
            left, right = params.junction_sites(junction)
            builder.add_move(column, state.hop(left, right), -kappa)
            builder.add_move(column, state.hop(right, left), -kappa)
    return builder.build()


def build_onsite_hamiltonian(params: ModelParams, basis: BasisSet) -> SymmetricOperator:
    """H^repul = Σ_i [Δ′_i |e⟩⟨e|_i + g_i(σ⁺_i a_i + h.c.)] plus any residual potential."""
    _require_basis(params, basis, include_couplers=False, what="on-site Hamiltonian")

    detunings = [params.delta_prime(i) for i in range(params.n_sites)]
    residual = [params.residual_potential(i) for i in range(params.n_sites)]
    builder = _SymmetricBuilder(basis, "H_repul")
    for column, state in enumerate(basis.states):
        diagonal = 0.0
        for site in range(params.n_sites):
            if state.site_qubits[site]:
                diagonal += detunings[site]
            if residual[site]:
                diagonal += residual[site] * state.polariton_number(site)
            builder.add_move(column, state.site_exchange(site), params.site_g(site))
        builder.add_diagonal(column, diagonal)
    return builder.build()


def build_effective_hamiltonian(params: ModelParams, basis: BasisSet) -> SymmetricOperator:
    """
    Matrix of the effective Hamiltonian in a coupler-free basis.

    H^eff = Σ_i [−κ(a†_{i+1}a_i + h.c.) + Δ′|e⟩⟨e|_i + g(σ⁺_i a_i + h.c.)],
    periodic (a_{n+1} = a_1). Requires Δc ≥ 10·g_c on every junction.
    """
    operator = build_hopping_hamiltonian(params, basis) + build_onsite_hamiltonian(params, basis)
    return SymmetricOperator(operator.matrix, basis, "H_eff")


# ============================================================================
# Part 5: Full Hamiltonian with Coupler Qubits
# ============================================================================

def build_full_hamiltonian(params: ModelParams, basis: BasisSet) -> SymmetricOperator:
    """
    Rotating-frame Hamiltonian with the junction transmons kept explicitly.

    Σ_i [Δ|e⟩⟨e|_i + g(σ⁺_i a_i + h.c.)] + Σ_j [Δc|e^c⟩⟨e^c|_j + g_c(σ⁺_cj (a_j + a_{j+1}) + h.c.)]
    """
    _require_basis(params, basis, include_couplers=True, what="full Hamiltonian")

    builder = _SymmetricBuilder(basis, "H_full")
    for column, state in enumerate(basis.states):
        diagonal = 0.0
        for site in range(params.n_sites):
            if state.site_qubits[site]:
                diagonal += params.site_delta(site)
            builder.add_move(column, state.site_exchange(site), params.site_g(site))
        for junction in range(params.n_junctions):
            if state.coupler_qubits[junction]:
                diagonal += params.junction_delta_c(junction)
            gc = params.junction_gc(junction)
            if gc == 0.0:
                continue
            for site in params.junction_sites(junction):
                builder.add_move(column, state.coupler_exchange(junction, site), gc)
        builder.add_diagonal(column, diagonal)
    return builder.build()


# ============================================================================
# Part 6: Site Observables
# ============================================================================

def build_number_operator(site: int, basis: BasisSet) -> SymmetricOperator:
    """Polariton number N_site = a†a + |e⟩⟨e| as a diagonal operator."""
    if not 0 <= site < basis.n_sites:
        raise ParameterError(f"site {site} out of range for {basis.n_sites} sites")
    diagonal = basis.polariton_numbers[:, site].astype(float)
    return SymmetricOperator(np.diag(diagonal), basis, f"N_{site}")


def build_qubit_excitation_operator(basis: BasisSet) -> SymmetricOperator:
    """Σ_i |e⟩⟨e|_i, the operator multiplying Δ in H^eff."""
    excited = np.array([sum(state.site_qubits) for state in basis.states], dtype=float)
    return SymmetricOperator(np.diag(excited), basis, "Q")


__all__ = [
    "ModelParams",
    "SectorSpec",
    "BasisState",
    "BasisSet",
    "SymmetricOperator",
    "junction_count",
    "sector_dimension",
    "enumerate_basis",
    "build_hopping_hamiltonian",
    "build_onsite_hamiltonian",
    "build_effective_hamiltonian",
    "build_full_hamiltonian",
    "build_number_operator",
    "build_qubit_excitation_operator",
]
