#!/usr/bin/env python3
"""
Phase Scan: (Δ, Δc) Sweeps, Boundaries and Model Comparisons
============================================================

Every grid point is an independent diagonalization, so the scan can hand
points to a thread pool. Results are gathered in grid order (Δc outer, Δ
inner) whatever order the workers finish in, and hook callbacks run on the
calling thread in that same order.

Functions:
- scan_grid(): ground-state var(N_0) over a grid (effective or full model)
- ratio_map(): analytic κ/U_eff(1) over a grid, no diagonalization
- find_boundary(): Δ* per Δc slice where var crosses a threshold
- compare_eff_full(): effective vs full model var along Δ
- size_comparison(): var(Δ) curves for several ring sizes
- sensitivity_summary(): mean |∂var/∂Δ| and |∂var/∂Δc|
- write_records_csv() / write_records_json(): record export
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from functools import partial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ring_hooks import AfterScanEvent, BeforeScanEvent, HookProvider, ScanPointEvent, build_registry, emit
from ring_model import (
    BasisSet,
    ModelParams,
    SectorSpec,
    build_effective_hamiltonian,
    build_full_hamiltonian,
    enumerate_basis,
    sector_dimension,
)
from ring_observables import variance_polariton_number
from ring_spectra import ground_state, hopping_ratio
from ring_utils import (
    DISPERSIVE_RATIO_MIN,
    DimensionGuardError,
    DispersiveRegimeError,
    ParameterError,
    round_significant,
    write_csv,
    write_json,
)

logger = logging.getLogger(__name__)

FULL_MODEL_MAX_SITES = 3
FULL_MODEL_MAX_DIMENSION = 4000
SYMMETRY_CHECK_STRIDE = 10
SYMMETRY_TOLERANCE = 1e-9
FLAT_SLICE_SPAN = 1e-9

RECORD_FIELDS = ("delta", "delta_c", "n_sites", "model", "var", "ratio", "ground_energy", "degenerate")


# ============================================================================
# Part 1: Grid and Record Types
# ============================================================================

class ModelKind(str, Enum):
    EFFECTIVE = "effective"
    FULL = "full"


class ScanGrid(BaseModel):
    """Detuning axes of a scan; both strictly increasing."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    delta_values: Tuple[float, ...] = Field(min_length=1, description="Δ axis (units of g)")
    delta_c_values: Tuple[float, ...] = Field(min_length=1, description="Δc axis (units of g)")
    n_sites: int = Field(ge=1, description="Ring size")
    model: ModelKind = Field(default=ModelKind.EFFECTIVE, description="effective or full Hamiltonian")

    @field_validator("delta_values", "delta_c_values")
    @classmethod
    def _strictly_increasing(cls, values):
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("grid values must be strictly increasing")
        return values

    @classmethod
    def linspace(cls, delta_range, delta_count, delta_c_range, delta_c_count, n_sites, model=ModelKind.EFFECTIVE):
        return cls(
            delta_values=tuple(float(x) for x in np.linspace(*delta_range, delta_count)),
            delta_c_values=tuple(float(x) for x in np.linspace(*delta_c_range, delta_c_count)),
            n_sites=n_sites,
            model=model,
        )

    @property
    def size(self) -> int:
        return len(self.delta_values) * len(self.delta_c_values)

    def points(self) -> List[Tuple[float, float]]:
        """(Δ, Δc) pairs in row-major order, Δc outer."""
        return [(delta, delta_c) for delta_c in self.delta_c_values for delta in self.delta_values]


class ScanRecord(BaseModel):
    """One grid point; var and ground_energy are None in ratio-only maps.

    `ratio` is the uniform-ring κ/U_eff(1) from the global g and g_c, even when
    per-site g or per-junction g_c overrides shape the Hamiltonian.
    """

    model_config = ConfigDict(frozen=True)

    delta: float
    delta_c: float
    var: Optional[float] = None
    ratio: float
    ground_energy: Optional[float] = None
    degenerate: bool = False


class PhaseDiagram(BaseModel):
    model_config = ConfigDict(frozen=True)

    grid: ScanGrid
    records: Tuple[ScanRecord, ...]

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.grid.delta_c_values), len(self.grid.delta_values)

    def as_array(self, name: str) -> np.ndarray:
        """(n_Δc, n_Δ) array of one record field; None becomes NaN."""
        values = [getattr(r, name) for r in self.records]
        return np.array([np.nan if v is None else v for v in values], dtype=float).reshape(self.shape)

    def row_records(self, row: int) -> Tuple[ScanRecord, ...]:
        width = len(self.grid.delta_values)
        return self.records[row * width:(row + 1) * width]


# ============================================================================
# Part 2: Grid Scans
# ============================================================================

def _check_scan_inputs(grid: ScanGrid, params: ModelParams) -> None:
    if params.n_sites != grid.n_sites:
        raise ParameterError(f"grid has {grid.n_sites} sites, params have {params.n_sites}")
    if params.has_detuning_overrides:
        raise ParameterError(
            "per_site_delta and per_junction_delta_c cannot be combined with a detuning scan"
        )
    if grid.model is ModelKind.EFFECTIVE:
        gc_max = max([params.g_c, *(params.per_junction_gc or ())])
        if grid.delta_c_values[0] < DISPERSIVE_RATIO_MIN * gc_max:
            raise DispersiveRegimeError(
                f"delta_c grid starts at {grid.delta_c_values[0]:g} < {DISPERSIVE_RATIO_MIN:g}·g_c; "
                "the effective model needs the dispersive regime"
            )


def _scan_basis(grid: ScanGrid, max_full_dimension: int, max_full_sites: int) -> BasisSet:
    full = grid.model is ModelKind.FULL
    sector = SectorSpec(n_total=grid.n_sites, include_couplers=full)
    if full:
        dimension = sector_dimension(grid.n_sites, sector)
        if grid.n_sites > max_full_sites or dimension > max_full_dimension:
            raise DimensionGuardError(
                f"full model with {grid.n_sites} sites has dimension {dimension} "
                f"(limit {max_full_sites} sites / {max_full_dimension})",
                dimension,
            )
    return enumerate_basis(grid.n_sites, sector)


def _solve_point(point: Tuple[int, Tuple[float, float]], params: ModelParams, basis: BasisSet, model: ModelKind) -> ScanRecord:
    index, (delta, delta_c) = point
    point_params = params.with_detunings(delta=delta, delta_c=delta_c)
    if model is ModelKind.FULL:
        hamiltonian = build_full_hamiltonian(point_params, basis)
    else:
        hamiltonian = build_effective_hamiltonian(point_params, basis)
    energy, state, degenerate = ground_state(hamiltonian)
    var = variance_polariton_number(state, 0)
    # ratio stays the uniform-ring value; overrides only enter the Hamiltonian

    if basis.n_sites > 1 and index % SYMMETRY_CHECK_STRIDE == 0 and params.per_site_g is None and params.per_junction_gc is None:
        other = variance_polariton_number(state, 1)
        if abs(other - var) > SYMMETRY_TOLERANCE:
            logger.warning(
                "site symmetry broken at Δ=%g, Δc=%g: var(N_0)=%.12g, var(N_1)=%.12g",
                delta, delta_c, var, other,
            )

    return ScanRecord(
        delta=delta,
        delta_c=delta_c,
        var=var,
        ratio=hopping_ratio(delta, delta_c, params.g, params.g_c),
        ground_energy=energy,
        degenerate=degenerate,
    )


def scan_grid(
    grid: ScanGrid,
    params: ModelParams,
    threads: int = 1,
    hooks: Optional[Iterable[HookProvider]] = None,
    max_full_dimension: int = FULL_MODEL_MAX_DIMENSION,
    max_full_sites: int = FULL_MODEL_MAX_SITES,
) -> PhaseDiagram:
    """
    Ground-state order parameter over a (Δ, Δc) grid.

    Args:
        grid: Detuning axes, ring size and model kind
        params: Couplings (g, g_c and per-site g / per-junction g_c overrides)
        threads: Worker threads; results are gathered in grid order
        hooks: Providers receiving BeforeScan / ScanPoint / AfterScan events
        max_full_dimension, max_full_sites: full-model size guard

    Returns:
        PhaseDiagram with one record per grid point, row-major (Δc outer)

    Raises:
        DimensionGuardError: Full model above the guard
        DispersiveRegimeError: Effective model with Δc < 10·g_c
    """
    _check_scan_inputs(grid, params)
    basis = _scan_basis(grid, max_full_dimension, max_full_sites)
    registry = build_registry(hooks)
    points = list(enumerate(grid.points()))
    solve = partial(_solve_point, params=params, basis=basis, model=grid.model)

    logger.info("scanning %d points (%s, %d sites, dim %d, %d threads)",
                len(points), grid.model.value, grid.n_sites, len(basis), threads)
    emit(registry, BeforeScanEvent(total=len(points), n_sites=grid.n_sites, model=grid.model.value))

    records = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            for index, record in enumerate(executor.map(solve, points)):
                records.append(record)
                emit(registry, ScanPointEvent(index=index, total=len(points), record=record))
    else:
        for index, record in enumerate(map(solve, points)):
            records.append(record)
            emit(registry, ScanPointEvent(index=index, total=len(points), record=record))

    diagram = PhaseDiagram(grid=grid, records=tuple(records))
    emit(registry, AfterScanEvent(diagram=diagram))
    return diagram


def ratio_map(grid: ScanGrid, params: ModelParams) -> PhaseDiagram:
    """κ/U_eff(1) at every grid point from the closed forms alone."""
    records = tuple(
        ScanRecord(delta=delta, delta_c=delta_c, ratio=hopping_ratio(delta, delta_c, params.g, params.g_c))
        for delta, delta_c in grid.points()
    )
    return PhaseDiagram(grid=grid, records=records)


# ============================================================================
# Part 3: Boundary Extraction
# ============================================================================

class BoundaryPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta_c: float
    delta_star: float
    ratio: float
    threshold: float


class BoundaryResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: Tuple[BoundaryPoint, ...]
    flagged: Tuple[float, ...] = ()

    @property
    def coverage(self) -> float:
        total = len(self.points) + len(self.flagged)
        return len(self.points) / total if total else 0.0


def _first_crossing(deltas: Sequence[float], values: Sequence[float], threshold: float) -> Optional[float]:
    for j in range(len(values)):
        if values[j] == threshold:
            return deltas[j]
        if j + 1 < len(values) and (values[j] - threshold) * (values[j + 1] - threshold) < 0:
            weight = (threshold - values[j]) / (values[j + 1] - values[j])
            return deltas[j] + weight * (deltas[j + 1] - deltas[j])
    return None


def find_boundary(diagram: PhaseDiagram, params: ModelParams, threshold: Optional[float] = None) -> BoundaryResult:
    """
    Locate the MI/SF crossing Δ* on every Δc slice.

    The crossing is where var passes the threshold (default: midway between
    the slice minimum and maximum), searched from the low-var end and
    linearly interpolated. Each Δ* also gets κ/U_eff(1) evaluated there.
    Flat slices and slices that never cross are skipped and listed in
    `flagged`.
    """
    deltas = list(diagram.grid.delta_values)
    if len(deltas) < 2:
        raise ParameterError("find_boundary needs at least two delta values per slice")
    if any(r.var is None for r in diagram.records):
        raise ParameterError("find_boundary needs var records; ratio maps carry none")

    points, flagged = [], []
    for row, delta_c in enumerate(diagram.grid.delta_c_values):
        values = [r.var for r in diagram.row_records(row)]
        low, high = min(values), max(values)
        if high - low < FLAT_SLICE_SPAN:
            logger.warning("Δc=%g: flat var slice, no boundary", delta_c)
            flagged.append(delta_c)
            continue
        cut = threshold if threshold is not None else (low + high) / 2.0

        if values[0] <= values[-1]:
            delta_star = _first_crossing(deltas, values, cut)
        else:
            delta_star = _first_crossing(deltas[::-1], values[::-1], cut)
        if delta_star is None:
            logger.warning("Δc=%g: var never crosses %.4g", delta_c, cut)
            flagged.append(delta_c)
            continue

        ratio = hopping_ratio(delta_star, delta_c, params.g, params.g_c)
        points.append(BoundaryPoint(delta_c=delta_c, delta_star=delta_star, ratio=ratio, threshold=cut))

    return BoundaryResult(points=tuple(points), flagged=tuple(flagged))


# ============================================================================
# Part 4: Model and Size Comparisons
# ============================================================================

class ComparisonRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta: float
    var_eff: float
    var_full: float

    @property
    def abs_difference(self) -> float:
        return abs(self.var_eff - self.var_full)


class ComparisonTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta_c: float
    rows: Tuple[ComparisonRow, ...]

    @property
    def max_abs_difference(self) -> float:
        return max(row.abs_difference for row in self.rows)


def compare_eff_full(
    delta_values: Sequence[float],
    params: ModelParams,
    threads: int = 1,
    hooks: Optional[Iterable[HookProvider]] = None,
) -> ComparisonTable:
    """var(N_0) of the effective and the full Hamiltonian along Δ at params.delta_c."""
    hooks = list(hooks or ())
    diagrams = {}
    for model in (ModelKind.EFFECTIVE, ModelKind.FULL):
        grid = ScanGrid(
            delta_values=tuple(delta_values),
            delta_c_values=(params.delta_c,),
            n_sites=params.n_sites,
            model=model,
        )
        diagrams[model] = scan_grid(grid, params, threads=threads, hooks=hooks)

    rows = tuple(
        ComparisonRow(delta=eff.delta, var_eff=eff.var, var_full=full.var)
        for eff, full in zip(diagrams[ModelKind.EFFECTIVE].records, diagrams[ModelKind.FULL].records)
    )
    table = ComparisonTable(delta_c=params.delta_c, rows=rows)
    logger.info("effective vs full: max |Δvar| = %.3g", table.max_abs_difference)
    return table


class SizeCurve(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_sites: int
    deltas: Tuple[float, ...]
    variances: Tuple[float, ...]
    max_slope: float
    crossing: Optional[float] = None


def _max_slope(deltas: Sequence[float], values: Sequence[float]) -> float:
    slopes = np.abs(np.diff(values) / np.diff(deltas))
    return float(slopes.max()) if slopes.size else 0.0


def size_comparison(
    delta_values: Sequence[float],
    params: ModelParams,
    sizes: Sequence[int] = (2, 3, 4),
    threads: int = 1,
    hooks: Optional[Iterable[HookProvider]] = None,
) -> Dict[int, SizeCurve]:
    """Effective-model var(Δ) per ring size, with steepest slope and mid-crossing."""
    hooks = list(hooks or ())
    curves = {}
    for n_sites in sizes:
        size_params = params.with_sites(n_sites)
        grid = ScanGrid(
            delta_values=tuple(delta_values),
            delta_c_values=(params.delta_c,),
            n_sites=n_sites,
        )
        diagram = scan_grid(grid, size_params, threads=threads, hooks=hooks)
        variances = tuple(r.var for r in diagram.records)
        crossing = None
        if len(delta_values) >= 2:
            boundary = find_boundary(diagram, size_params)
            if boundary.points:
                crossing = boundary.points[0].delta_star
        curves[n_sites] = SizeCurve(
            n_sites=n_sites,
            deltas=tuple(delta_values),
            variances=variances,
            max_slope=_max_slope(delta_values, variances),
            crossing=crossing,
        )
        logger.info("n=%d: max slope %.4g, crossing %s", n_sites, curves[n_sites].max_slope, crossing)
    return curves


def sensitivity_summary(diagram: PhaseDiagram) -> Tuple[float, float]:
    """Mean |∂var/∂Δ| and mean |∂var/∂Δc| over the grid (central differences)."""
    deltas = np.array(diagram.grid.delta_values)
    delta_cs = np.array(diagram.grid.delta_c_values)
    if deltas.size < 2 or delta_cs.size < 2:
        raise ParameterError("sensitivity_summary needs at least two values on each axis")
    var = diagram.as_array("var")
    if np.isnan(var).any():
        raise ParameterError("sensitivity_summary needs var records")
    d_delta_c, d_delta = np.gradient(var, delta_cs, deltas)
    return float(np.mean(np.abs(d_delta))), float(np.mean(np.abs(d_delta_c)))


# ============================================================================
# Part 5: Export
# ============================================================================

def _record_row(record: ScanRecord, grid: ScanGrid) -> tuple:
    return (
        record.delta,
        record.delta_c,
        grid.n_sites,
        grid.model.value,
        record.var,
        record.ratio,
        record.ground_energy,
        bool(record.degenerate),
    )


def write_records_csv(diagram: PhaseDiagram, stream) -> None:
    """`delta,delta_c,n_sites,model,var,ratio,ground_energy,degenerate`, 12 significant digits.

    `ratio` is always the uniform-ring value built from the global g and g_c.
    """
    write_csv(stream, RECORD_FIELDS, (_record_row(r, diagram.grid) for r in diagram.records))


def write_records_json(diagram: PhaseDiagram, stream) -> None:
    """JSON list mirroring the CSV columns."""
    payload = [
        {name: round_significant(value) for name, value in zip(RECORD_FIELDS, _record_row(r, diagram.grid))}
        for r in diagram.records
    ]
    write_json(stream, payload)


__all__ = [
    "ModelKind",
    "ScanGrid",
    "ScanRecord",
    "PhaseDiagram",
    "BoundaryPoint",
    "BoundaryResult",
    "ComparisonRow",
    "ComparisonTable",
    "SizeCurve",
    "scan_grid",
    "ratio_map",
    "find_boundary",
    "compare_eff_full",
    "size_comparison",
    "sensitivity_summary",
    "write_records_csv",
    "write_records_json",
    "RECORD_FIELDS",
    "FULL_MODEL_MAX_SITES",
    "FULL_MODEL_MAX_DIMENSION",
]
