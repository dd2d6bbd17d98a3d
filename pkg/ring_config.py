#!/usr/bin/env python3
"""
Run Configuration: TOML Recipes Validated with Pydantic
=======================================================

A recipe is a TOML file with one table per concern:

    [model]       ModelParams (n_sites, g, g_c, delta, delta_c, overrides)
    [spectrum]    sector and model kind of a single diagonalization
    [grid]        (Δ, Δc) scan axes
    [boundary]    crossing threshold
    [compare]     Δ axis of the effective-vs-full comparison
    [sizes]       ring sizes and Δ axis of the size comparison
    [ramp]        adiabatic sweep schedule and step
    [measure]     readout Monte-Carlo
    [timescales]  physical unit conversion
    [output]      destination, format, SVG, threads

Unknown keys are rejected by name. Command-line flags override file values.
"""

import sys
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ring_dynamics import RampShape
from ring_model import ModelParams
from ring_scan import ModelKind, ScanGrid
from ring_utils import DEFAULT_DELTA_C_RANGE, DEFAULT_DELTA_RANGE, REFERENCE_BOUNDARY_RATIO, ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class SpectrumSection(_Section):
    n_total: Optional[int] = Field(default=None, ge=0, description="Excitation number (default: n_sites)")
    model: ModelKind = Field(default=ModelKind.EFFECTIVE, description="effective or full Hamiltonian")


class GridSection(_Section):
    delta_min: float = Field(default=DEFAULT_DELTA_RANGE[0], description="Lowest Δ of the scan")
    delta_max: float = Field(default=DEFAULT_DELTA_RANGE[1], description="Highest Δ of the scan")
    delta_points: int = Field(default=61, ge=1, description="Number of Δ values")
    delta_c_min: float = Field(default=DEFAULT_DELTA_C_RANGE[0], gt=0, description="Lowest Δc of the scan")
    delta_c_max: float = Field(default=DEFAULT_DELTA_C_RANGE[1], gt=0, description="Highest Δc of the scan")
    delta_c_points: int = Field(default=31, ge=1, description="Number of Δc values")
    model: ModelKind = Field(default=ModelKind.EFFECTIVE, description="effective or full Hamiltonian")

    def to_grid(self, n_sites: int) -> ScanGrid:
        return ScanGrid.linspace(
            (self.delta_min, self.delta_max), self.delta_points,
            (self.delta_c_min, self.delta_c_max), self.delta_c_points,
            n_sites, self.model,
        )


class BoundarySection(_Section):
    threshold: Optional[float] = Field(default=None, description="Fixed var threshold (default: slice midpoint)")
    reference_ratio: float = Field(default=REFERENCE_BOUNDARY_RATIO, gt=0, description="Contour value κ/U_eff shown for comparison")


class _DeltaAxis(_Section):
    delta_min: float = Field(default=-5.0, description="Lowest Δ")
    delta_max: float = Field(default=10.0, description="Highest Δ")
    delta_points: int = Field(default=31, ge=2, description="Number of Δ values")

    def deltas(self) -> Tuple[float, ...]:
        return tuple(float(x) for x in np.linspace(self.delta_min, self.delta_max, self.delta_points))


class CompareSection(_DeltaAxis):
    pass


class SizesSection(_DeltaAxis):
    sizes: Tuple[int, ...] = Field(default=(2, 3, 4), min_length=1, description="Ring sizes to compare")


class InitialState(str, Enum):
    GROUND = "ground"
    MI = "mi"
    SF = "sf"
    RAMP = "ramp"


class RampSection(_Section):
    shape: RampShape = Field(default=RampShape.LINEAR, description="linear or smoothstep")
    delta_start: float = Field(default=-2.0, description="Δ at the start of the ramp")
    delta_end: float = Field(default=10.0, description="Δ at the end of the ramp")
    duration_kappa: Optional[float] = Field(default=50.0, gt=0, description="Ramp length in hopping times 1/κ")
    duration: Optional[float] = Field(default=None, gt=0, description="Ramp length in 1/g (overrides duration_kappa)")
    delta_c_end: Optional[float] = Field(default=None, gt=0, description="Final Δc for a Δc ramp (default: fixed Δc)")
    dt: float = Field(default=0.025, gt=0, description="RK4 step in 1/g")
    snapshots: int = Field(default=100, ge=1, description="Stored trajectory snapshots")
    initial: InitialState = Field(default=InitialState.GROUND, description="Start state: ground or mi")

    @model_validator(mode="after")
    def _check_initial(self):
        if self.initial not in (InitialState.GROUND, InitialState.MI):
            raise ValueError("ramp.initial must be 'ground' or 'mi'")
        if self.duration is None and self.duration_kappa is None:
            raise ValueError("set ramp.duration or ramp.duration_kappa")
        return self

    def duration_in_g(self, kappa: float) -> float:
        if self.duration is not None:
            return self.duration
        if kappa <= 0:
            raise ConfigError("ramp.duration_kappa needs g_c > 0; set ramp.duration instead", key="ramp.duration_kappa")
        return self.duration_kappa / kappa


class MeasureSection(_Section):
    site: int = Field(default=0, ge=0, description="Site whose polariton number is read out")
    shots: int = Field(default=10000, ge=1, description="Repetitions M of the protocol")
    seed: Optional[int] = Field(default=None, description="RNG seed (required)")
    state: InitialState = Field(default=InitialState.SF, description="ground, mi, sf or ramp (final state of [ramp])")
    bootstrap_resamples: int = Field(default=1000, ge=2, description="Resamples for the standard error")


class TimescalesSection(_Section):
    g_c_mhz: float = Field(default=200.0, gt=0, description="g_c/2π in MHz")
    delta_c_ratios: Tuple[float, ...] = Field(default=(10.0, 100.0), min_length=1, description="Δc/g_c values to report")
    polariton_lifetime_us: float = Field(default=2.0, gt=0, description="Polariton lifetime τ_p in μs")


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class OutputSection(_Section):
    path: Optional[str] = Field(default=None, description="Output file (default: stdout)")
    format: Optional[OutputFormat] = Field(default=None, description="csv or json (default: csv, json for measure)")
    svg: Optional[str] = Field(default=None, description="Also write an SVG figure to this path")
    threads: Optional[int] = Field(default=None, ge=1, description="Scan worker threads (default: POLARITON_RING_THREADS or 1)")


class RunConfig(_Section):
    model: ModelParams = Field(default_factory=lambda: ModelParams(n_sites=3))
    spectrum: SpectrumSection = Field(default_factory=SpectrumSection)
    grid: GridSection = Field(default_factory=GridSection)
    boundary: BoundarySection = Field(default_factory=BoundarySection)
    compare: CompareSection = Field(default_factory=CompareSection)
    sizes: SizesSection = Field(default_factory=SizesSection)
    ramp: RampSection = Field(default_factory=RampSection)
    measure: MeasureSection = Field(default_factory=MeasureSection)
    timescales: TimescalesSection = Field(default_factory=TimescalesSection)
    output: OutputSection = Field(default_factory=OutputSection)


SECTION_MODELS: Dict[str, type] = {name: field.annotation for name, field in RunConfig.model_fields.items()}


# ============================================================================
# Loading and Overrides
# ============================================================================

def _config_error(exc: ValidationError, prefix: str = "") -> ConfigError:
    first = exc.errors()[0]
    key = ".".join(str(part) for part in (prefix, *first["loc"]) if part != "")
    return ConfigError(f"invalid config key '{key}': {first['msg']}", key=key)


def parse_config(data: dict) -> RunConfig:
    """Validate a parsed TOML document."""
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise _config_error(exc) from exc


def load_config(path: Optional[Path]) -> RunConfig:
    """Read a TOML recipe; None gives the defaults."""
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc
    return parse_config(data)


def apply_overrides(config: RunConfig, overrides: Dict[str, Dict[str, object]]) -> RunConfig:
    """Return a re-validated config with `{section: {key: value}}` replaced; None values are skipped."""
    data = config.model_dump()
    for section, values in overrides.items():
        for key, value in values.items():
            if value is not None:
                data.setdefault(section, {})[key] = value
    return parse_config(data)


# ============================================================================
# Help Text
# ============================================================================

def _type_name(annotation) -> str:
    text = getattr(annotation, "__name__", None) or str(annotation)
    return text.replace("typing.", "")


def describe_sections(sections: Sequence[str]) -> str:
    """One line per config key of `sections`, from the field descriptions."""
    lines: List[str] = ["config keys:"]
    for section in sections:
        model = SECTION_MODELS[section]
        for name, field in model.model_fields.items():
            default = "required" if field.is_required() else f"default {field.get_default(call_default_factory=True)!r}"
            description = field.description or ""
            lines.append(f"  {section}.{name} ({_type_name(field.annotation)}, {default}): {description}")
    return "\n".join(lines)


__all__ = [
    "RunConfig",
    "SpectrumSection",
    "GridSection",
    "BoundarySection",
    "CompareSection",
    "SizesSection",
    "RampSection",
    "MeasureSection",
    "TimescalesSection",
    "OutputSection",
    "OutputFormat",
    "InitialState",
    "SECTION_MODELS",
    "parse_config",
    "load_config",
    "apply_overrides",
    "describe_sections",
]
