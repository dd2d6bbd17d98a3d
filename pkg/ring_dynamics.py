#!/usr/bin/env python3
"""
Dynamics: Adiabatic Ramps and the Photon-Statistics Measurement
===============================================================

The transition is crossed by slowly ramping Δ (or Δc) with the ring starting
in its Mott-insulator ground state. Afterwards the polariton statistics of one
site are frozen by switching the hopping off and read out by number-resolved
dispersive measurement, which is simulated here as ideal sampling of the
number marginal.

Functions:
- propagate(): fixed-step RK4 integration of i d|ψ⟩/dt = H^eff(t)|ψ⟩
- dispersive_drive_frequency(): qubit drive tone resolving l photons
- measurement_drive_plan(): drive tones for l = 0..n_max
- simulate_measurement_protocol(): seeded Monte-Carlo of the readout
- bootstrap_standard_error(): sampling error of the estimated var
- timescale_report(): hopping time and ramp length in ns vs the polariton lifetime
- write_trajectory_csv(): `t,fidelity,norm,var_site0`
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ring_hooks import AfterPropagationEvent, HookProvider, PropagationStepEvent, build_registry, emit
from ring_model import (
    BasisSet,
    ModelParams,
    SymmetricOperator,
    build_effective_hamiltonian,
    build_onsite_hamiltonian,
    build_qubit_excitation_operator,
)
from ring_observables import NumberDistribution, StateVector, marginal_distribution, variance_polariton_number
from ring_spectra import eigendecompose, ground_projection
from ring_utils import (
    NORM_DRIFT_ABORT,
    NORM_DRIFT_TARGET,
    READOUT_DETUNING_MIN,
    NormDriftError,
    ParameterError,
    round_significant,
    write_csv,
)

logger = logging.getLogger(__name__)

MIN_STEPS_PER_RAMP = 100


# ============================================================================
# Part 1: Ramp Schedules
# ============================================================================

class RampShape(str, Enum):
    LINEAR = "linear"
    SMOOTHSTEP = "smoothstep"


class RampSchedule(BaseModel):
    """Δ(t) from delta_start to delta_end over `duration` (units of 1/g).

    Δc stays at `delta_c` unless `delta_c_end` is set, in which case it follows
    the same profile.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    shape: RampShape = Field(default=RampShape.LINEAR, description="linear or smoothstep (3s²−2s³)")
    delta_start: float = Field(description="Δ at t=0")
    delta_end: float = Field(description="Δ at t=duration")
    duration: float = Field(gt=0, description="Ramp length in units of 1/g")
    delta_c: float = Field(gt=0, description="Δc at t=0 (held fixed unless delta_c_end is set)")
    delta_c_end: Optional[float] = Field(default=None, gt=0, description="Δc at t=duration")

    def progress(self, t: float) -> float:
        s = min(1.0, max(0.0, t / self.duration))
        if self.shape is RampShape.SMOOTHSTEP:
            return s * s * (3.0 - 2.0 * s)
        return s

    def delta_at(self, t: float) -> float:
        return self.delta_start + (self.delta_end - self.delta_start) * self.progress(t)

    def delta_c_at(self, t: float) -> float:
        if self.delta_c_end is None:
            return self.delta_c
        return self.delta_c + (self.delta_c_end - self.delta_c) * self.progress(t)


class RampHamiltonian:
    """H^eff(Δ, Δc) assembled from fixed components.

    H = JC + (Δc_ref/Δc)·K + Δ·Q, where K holds everything proportional to
    g_c²/Δc (hopping, Stark shifts, residual potential) evaluated at Δc_ref
    and Q = Σ_i |e⟩⟨e|_i.
    """

    def __init__(self, params: ModelParams, basis: BasisSet, reference_delta_c: float):
        reference = params.with_detunings(delta=0.0, delta_c=reference_delta_c)
        decoupled = ModelParams.model_validate(
            {**reference.model_dump(), "g_c": 0.0, "per_junction_gc": None}
        )
        complete = build_effective_hamiltonian(reference, basis)
        self.basis = basis
        self.reference_delta_c = reference_delta_c
        self.jaynes_cummings = build_onsite_hamiltonian(decoupled, basis).matrix
        self.coupling = complete.matrix - self.jaynes_cummings
        self.excitation = build_qubit_excitation_operator(basis).matrix

    def matrix(self, delta: float, delta_c: float) -> np.ndarray:
        return (
            self.jaynes_cummings
            + (self.reference_delta_c / delta_c) * self.coupling
            + delta * self.excitation
        )

    def operator(self, delta: float, delta_c: float) -> SymmetricOperator:
        return SymmetricOperator(self.matrix(delta, delta_c), self.basis, "H_eff(t)")


# ============================================================================
# Part 2: Propagation
# ============================================================================

@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots of a ramp, including t=0 and the final time."""

    times: Tuple[float, ...]
    states: Tuple[StateVector, ...]
    instantaneous_fidelity: Tuple[float, ...]
    norms: Tuple[float, ...]
    energies: Tuple[float, ...]
    var_site0: Tuple[float, ...]
    dt: float
    max_norm_drift: float

    @property
    def final_state(self) -> StateVector:
        return self.states[-1]

    @property
    def final_fidelity(self) -> float:
        return self.instantaneous_fidelity[-1]

    @property
    def within_tolerance(self) -> bool:
        """True when |‖ψ‖ − 1| stayed at or below 1e−6 on every step."""
        return self.max_norm_drift <= NORM_DRIFT_TARGET

    def suggested_dt(self) -> Optional[float]:
        """A step expected to bring the drift under 1e−6; None when already within it."""
        if self.within_tolerance:
            return None
        return _suggest_dt(self.dt, self.max_norm_drift)


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """min over φ of ‖a − e^{iφ} b‖."""
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def _suggest_dt(dt: float, drift: float) -> float:
    return min(dt / 2.0, dt * (NORM_DRIFT_TARGET / drift) ** 0.2)


def propagate(
    initial: StateVector,
    schedule: RampSchedule,
    params: ModelParams,
    dt: float,
    snapshots: int = 100,
    hooks: Optional[Iterable[HookProvider]] = None,
) -> Trajectory:
    """
    Integrate the Schrödinger equation through a ramp with classical RK4.

    The step count is ceil(duration/dt) and the step is shrunk to land exactly
    on `duration`. Within each step the step-start energy ⟨H⟩ is subtracted
    from H, which only changes the global phase. The state is never
    renormalized; |‖ψ‖ − 1| is the accuracy monitor.

    Args:
        initial: Normalized start state in a coupler-free basis
        schedule: Δ(t) (and optionally Δc(t)) profile
        params: Couplings; per_site_delta / per_junction_delta_c are not allowed
        dt: Requested step, at most duration/100
        snapshots: Approximate number of stored snapshots
        hooks: Providers receiving PropagationStep / AfterPropagation events

    Returns:
        Trajectory with snapshot states and instantaneous ground-state fidelity;
        `within_tolerance` is False when the drift passed 1e−6 but stayed below 1e−4

    Raises:
        NormDriftError: norm drift above 1e−4 (message suggests a smaller dt)
    """
    basis = initial.basis
    if basis.sector.include_couplers:
        raise ParameterError("propagation runs in the effective model (no coupler qubits)")
    if params.has_detuning_overrides:
        raise ParameterError("per_site_delta and per_junction_delta_c cannot be combined with a ramp")
    if dt <= 0 or dt > schedule.duration / MIN_STEPS_PER_RAMP:
        raise ParameterError(
            f"dt={dt:g} must be positive and at most duration/{MIN_STEPS_PER_RAMP} = "
            f"{schedule.duration / MIN_STEPS_PER_RAMP:g}"
        )
    for delta_c in {schedule.delta_c, schedule.delta_c_at(schedule.duration)}:
        params.with_detunings(delta_c=delta_c).check_dispersive()

    hamiltonian = RampHamiltonian(params, basis, schedule.delta_c)
    registry = build_registry(hooks)
    n_steps = math.ceil(schedule.duration / dt - 1e-9)
    step_dt = schedule.duration / n_steps
    stride = max(1, n_steps // max(1, snapshots))

    def h_at(t: float) -> np.ndarray:
        return hamiltonian.matrix(schedule.delta_at(t), schedule.delta_c_at(t))

    times, states, fidelities, norms, energies, variances = [], [], [], [], [], []

    def record(t: float, psi: np.ndarray, h: np.ndarray) -> None:
        norm = float(np.linalg.norm(psi))
        state = StateVector(psi.copy(), basis, tolerance=NORM_DRIFT_ABORT)
        decomposition = eigendecompose(SymmetricOperator(h.copy(), basis, "H_eff(t)"))
        times.append(t)
        states.append(state)
        fidelities.append(min(1.0, ground_projection(decomposition, state) / norm ** 2))
        norms.append(norm)
        energies.append(float(np.real(np.vdot(psi, h @ psi))) / norm ** 2)
        variances.append(variance_polariton_number(state, 0))

    psi = np.array(initial.amplitudes, dtype=complex)
    record(0.0, psi, h_at(0.0))
    max_drift = 0.0

    for step in range(1, n_steps + 1):
        t0 = (step - 1) * step_dt
        h0 = h_at(t0)
        h_mid = h_at(t0 + 0.5 * step_dt)
        h1 = h_at(t0 + step_dt)
        offset = float(np.real(np.vdot(psi, h0 @ psi))) / float(np.real(np.vdot(psi, psi)))

        k1 = -1j * (h0 @ psi - offset * psi)
        y = psi + 0.5 * step_dt * k1
        k2 = -1j * (h_mid @ y - offset * y)
        y = psi + 0.5 * step_dt * k2
        k3 = -1j * (h_mid @ y - offset * y)
        y = psi + step_dt * k3
        k4 = -1j * (h1 @ y - offset * y)
        psi = psi + (step_dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        t = step * step_dt
        drift = abs(float(np.linalg.norm(psi)) - 1.0)
        max_drift = max(max_drift, drift)
        emit(registry, PropagationStepEvent(step=step, time=t, norm_drift=drift))
        if drift > NORM_DRIFT_ABORT:
            suggested = _suggest_dt(step_dt, drift)
            raise NormDriftError(
                f"norm drift {drift:.2e} at t={t:.4g} exceeds {NORM_DRIFT_ABORT:.0e}; "
                f"retry with dt ≤ {suggested:.3g}",
                suggested_dt=suggested,
            )
        if step % stride == 0 or step == n_steps:
            record(t, psi, h1)

    trajectory = Trajectory(
        times=tuple(times),
        states=tuple(states),
        instantaneous_fidelity=tuple(fidelities),
        norms=tuple(norms),
        energies=tuple(energies),
        var_site0=tuple(variances),
        dt=step_dt,
        max_norm_drift=max_drift,
    )
    emit(registry, AfterPropagationEvent(trajectory=trajectory))
    logger.info(
        "ramp %s: %d steps of %.4g, final fidelity %.6f, max norm drift %.2e",
        schedule.shape.value, n_steps, step_dt, trajectory.final_fidelity, max_drift,
    )
    return trajectory


def write_trajectory_csv(trajectory: Trajectory, stream) -> None:
    rows = zip(trajectory.times, trajectory.instantaneous_fidelity, trajectory.norms, trajectory.var_site0)
    write_csv(stream, ("t", "fidelity", "norm", "var_site0"), rows)


# ============================================================================
# Part 3: Measurement Protocol
# ============================================================================
# (1) switch the hopping off instantaneously, freezing the site statistics
# (2) map polaritons adiabatically onto photons by detuning the site qubit
# (3) drive the qubit at ε + 2l g²/Δ, which flips it only with l photons present
# (4) read the qubit out through a low-Q resonator
# (5) repeat M times; M_l/M estimates p_l
# Steps (1), (2) and (4) are idealized as perfect, so the run reduces to
# sampling the number marginal of the frozen state.

class DriveTone(BaseModel):
    model_config = ConfigDict(frozen=True)

    photons: int
    frequency: float
    dispersive: bool


def dispersive_drive_frequency(l: int, params: ModelParams, site: int = 0) -> float:
    """
    Qubit drive resolving exactly `l` photons, as an offset from w (units of g).

    ε + 2l·g²/Δ with ε − w = Δ. Δ = 0 is rejected; |Δ|/g below 5 is logged
    because the dispersive shift formula no longer holds there.
    """
    if l < 0:
        raise ParameterError(f"photon number must be ≥ 0, got {l}")
    delta = params.site_delta(site)
    g = params.site_g(site)
    if delta == 0:
        raise ParameterError("dispersive readout needs a nonzero qubit detuning")
    if abs(delta) / g < READOUT_DETUNING_MIN:
        logger.warning(
            "|Δ|/g = %.3g < %g: dispersive approximation is not valid for readout",
            abs(delta) / g, READOUT_DETUNING_MIN,
        )
    return delta + 2.0 * l * g * g / delta


def measurement_drive_plan(params: ModelParams, site: int = 0, n_max: Optional[int] = None) -> List[DriveTone]:
    """Drive tones for l = 0..n_max (default: n_sites)."""
    n_max = params.n_sites if n_max is None else n_max
    dispersive = abs(params.site_delta(site)) / params.site_g(site) >= READOUT_DETUNING_MIN
    return [
        DriveTone(photons=l, frequency=dispersive_drive_frequency(l, params, site), dispersive=dispersive)
        for l in range(n_max + 1)
    ]


class MeasurementRun(BaseModel):
    """Outcome histogram of `shots` repetitions of the readout at one site."""

    model_config = ConfigDict(frozen=True)

    seed: Optional[int]
    shots: int = Field(ge=1)
    site: int = 0
    counts: Tuple[int, ...]
    estimated_p: Tuple[float, ...]
    estimated_var: float

    @model_validator(mode="after")
    def _check_counts(self):
        if sum(self.counts) != self.shots:
            raise ValueError("counts must sum to shots")
        return self

    def to_payload(self) -> dict:
        """`{seed, shots, counts, p, var}` with 12 significant digits."""
        return {
            "seed": self.seed,
            "shots": self.shots,
            "counts": list(self.counts),
            "p": [round_significant(p) for p in self.estimated_p],
            "var": round_significant(self.estimated_var),
        }


def _run_from_counts(counts: Sequence[int], shots: int, seed: Optional[int], site: int) -> MeasurementRun:
    estimated_p = tuple(float(c) / shots for c in counts)
    variance = NumberDistribution(probs=estimated_p, site=site).variance
    return MeasurementRun(
        seed=seed,
        shots=shots,
        site=site,
        counts=tuple(int(c) for c in counts),
        estimated_p=estimated_p,
        estimated_var=variance,
    )


def simulate_measurement_protocol(state: StateVector, site: int, shots: int, seed: Optional[int]) -> MeasurementRun:
    """Draw `shots` polariton-number outcomes at `site` with a seeded generator."""
    if shots < 1:
        raise ParameterError(f"shots must be ≥ 1, got {shots}")
    distribution = marginal_distribution(state, site)
    probs = np.clip(np.array(distribution.probs), 0.0, None)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs / probs.sum())
    return _run_from_counts(counts, shots, seed, site)


def bootstrap_standard_error(run: MeasurementRun, resamples: int = 1000, seed: Optional[int] = 0) -> float:
    """Standard deviation of estimated_var over histograms resampled from the run."""
    if resamples < 2:
        raise ParameterError("bootstrap needs at least two resamples")
    rng = np.random.default_rng(seed)
    samples = rng.multinomial(run.shots, np.array(run.estimated_p), size=resamples) / run.shots
    levels = np.arange(samples.shape[1])
    means = samples @ levels
    variances = samples @ (levels * levels) - means * means
    return float(np.std(variances, ddof=1))


# ============================================================================
# Part 4: Physical Timescales
# ============================================================================

DEFAULT_G_C_MHZ = 200.0
DEFAULT_POLARITON_LIFETIME_US = 2.0
FEASIBILITY_RATIO = 10.0


class TimescaleRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta_c_ratio: float
    hopping_time_ns: float
    lifetime_ratio: float
    ramp_ns: Optional[float] = None


class TimescaleReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    g_c_mhz: float
    polariton_lifetime_ns: float
    time_unit_ns: float
    rows: Tuple[TimescaleRow, ...]

    @property
    def feasible(self) -> bool:
        """Every hopping time is at least ten times shorter than the lifetime."""
        return all(row.lifetime_ratio >= FEASIBILITY_RATIO for row in self.rows)


def timescale_report(
    g_c_mhz: float = DEFAULT_G_C_MHZ,
    delta_c_ratios: Sequence[float] = (10.0, 100.0),
    polariton_lifetime_us: float = DEFAULT_POLARITON_LIFETIME_US,
    ramp_duration_kappa: Optional[float] = None,
) -> TimescaleReport:
    """
    Hopping time 1/κ in nanoseconds for Δc = r·g_c.

    g_c is given as g_c/2π in MHz. With κ = g_c²/Δc = g_c/r the hopping time
    is r/g_c. A ramp of `ramp_duration_kappa` hopping times is converted too.
    """
    if g_c_mhz <= 0 or polariton_lifetime_us <= 0:
        raise ParameterError("g_c and the polariton lifetime must be positive")
    angular_per_ns = 2.0 * math.pi * g_c_mhz * 1e-3
    lifetime_ns = polariton_lifetime_us * 1e3
    rows = []
    for ratio in delta_c_ratios:
        if ratio <= 0:
            raise ParameterError(f"delta_c ratio must be positive, got {ratio}")
        hopping_ns = ratio / angular_per_ns
        rows.append(
            TimescaleRow(
                delta_c_ratio=ratio,
                hopping_time_ns=hopping_ns,
                lifetime_ratio=lifetime_ns / hopping_ns,
                ramp_ns=None if ramp_duration_kappa is None else ramp_duration_kappa * hopping_ns,
            )
        )
    return TimescaleReport(
        g_c_mhz=g_c_mhz,
        polariton_lifetime_ns=lifetime_ns,
        time_unit_ns=1.0 / angular_per_ns,
        rows=tuple(rows),
    )


__all__ = [
    "RampShape",
    "RampSchedule",
    "RampHamiltonian",
    "Trajectory",
    "propagate",
    "phase_aligned_distance",
    "write_trajectory_csv",
    "DriveTone",
    "dispersive_drive_frequency",
    "measurement_drive_plan",
    "MeasurementRun",
    "simulate_measurement_protocol",
    "bootstrap_standard_error",
    "TimescaleRow",
    "TimescaleReport",
    "timescale_report",
]
