#!/usr/bin/env python3
"""
polariton-ring: Command-Line Front End
======================================

Subcommands reproduce the static phase diagram, the model and size
comparisons, the adiabatic sweep and the readout Monte-Carlo:

    spectrum    eigenvalues and ground-state var at one point
    scan        var(N_i) over the (Δ, Δc) grid
    ratio       log10(κ/U_eff) over the grid (closed form)
    boundary    MI/SF crossing Δ* per Δc slice
    compare     effective vs full Hamiltonian along Δ
    sizes       var(Δ) for several ring sizes
    sweep       adiabatic Δ (or Δc) ramp
    measure     Monte-Carlo of the photon-statistics readout
    timescales  hopping time and ramp length in ns

Data goes to --out (or stdout); status lines go to stderr.
Exit codes: 0 ok, 2 config error, 3 dimension guard, 4 numerical abort.
"""

import argparse
import contextlib
import logging
import sys
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from rich.table import Table

from ring_config import InitialState, OutputFormat, RunConfig, apply_overrides, describe_sections, load_config
from ring_dynamics import (
    RampSchedule,
    bootstrap_standard_error,
    propagate,
    simulate_measurement_protocol,
    timescale_report,
    write_trajectory_csv,
)
from ring_hooks import NormMonitorHook, ScanProgressHook
from ring_model import SectorSpec, build_effective_hamiltonian, build_full_hamiltonian, enumerate_basis, sector_dimension
from ring_observables import StateVector, variance_polariton_number
from ring_scan import (
    FULL_MODEL_MAX_DIMENSION,
    FULL_MODEL_MAX_SITES,
    ModelKind,
    compare_eff_full,
    find_boundary,
    ratio_map,
    scan_grid,
    size_comparison,
    write_records_csv,
    write_records_json,
)
from ring_spectra import analytic_mi_state, analytic_sf_state, eigendecompose, ground_state
from ring_utils import (
    EXIT_OK,
    NORM_DRIFT_TARGET,
    ConfigError,
    DimensionGuardError,
    PolaritonRingError,
    configure_logging,
    default_thread_count,
    get_console,
    load_environment,
    print_troubleshooting,
    round_significant,
    write_csv,
    write_json,
)

logger = logging.getLogger("polariton_ring")


# ============================================================================
# Output Helpers
# ============================================================================

def _status():
    return get_console(stderr=True)


@contextlib.contextmanager
def _open_output(config: RunConfig):
    if config.output.path is None:
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(config.output.path, "w", newline="", encoding="utf-8") as handle:
            yield handle


def _format(config: RunConfig, default: OutputFormat = OutputFormat.CSV) -> OutputFormat:
    return config.output.format or default


def _write_table(config: RunConfig, header: Sequence[str], rows) -> None:
    rows = [tuple(row) for row in rows]
    with _open_output(config) as stream:
        if _format(config) is OutputFormat.JSON:
            write_json(stream, [{name: round_significant(v) for name, v in zip(header, row)} for row in rows])
        else:
            write_csv(stream, header, rows)


def _threads(config: RunConfig) -> int:
    return config.output.threads or default_thread_count()


def _svg(config: RunConfig, render: Callable[[str], None]) -> None:
    if config.output.svg:
        render(config.output.svg)
        _status().print(f"🖼️  SVG written to {config.output.svg}")


# ============================================================================
# Static Subcommands
# ============================================================================

def cmd_spectrum(config: RunConfig) -> int:
    """Eigenvalues and ground-state var at the [model] point."""
    params = config.model
    full = config.spectrum.model is ModelKind.FULL
    n_total = config.spectrum.n_total if config.spectrum.n_total is not None else params.n_sites
    sector = SectorSpec(n_total=n_total, include_couplers=full)
    if full:
        dimension = sector_dimension(params.n_sites, sector)
        if params.n_sites > FULL_MODEL_MAX_SITES or dimension > FULL_MODEL_MAX_DIMENSION:
            raise DimensionGuardError(f"full model with {params.n_sites} sites has dimension {dimension}", dimension)

    basis = enumerate_basis(params.n_sites, sector)
    builder = build_full_hamiltonian if full else build_effective_hamiltonian
    hamiltonian = builder(params, basis)
    decomposition = eigendecompose(hamiltonian)
    energy, state, degenerate = ground_state(hamiltonian)
    var = variance_polariton_number(state, 0)

    values = [float(v) for v in decomposition.values]
    with _open_output(config) as stream:
        if _format(config) is OutputFormat.JSON:
            write_json(stream, {
                "n_sites": params.n_sites,
                "n_total": n_total,
                "model": config.spectrum.model.value,
                "dimension": len(basis),
                "eigenvalues": [round_significant(v) for v in values],
                "ground_energy": round_significant(energy),
                "var": round_significant(var),
                "degenerate": degenerate,
            })
        else:
            write_csv(stream, ("index", "energy"), enumerate(values))

    flag = " (degenerate)" if degenerate else ""
    _status().print(
        f"✅ {len(values)} eigenvalues, ground energy {energy:.10g}{flag}, var(N_0) = {var:.6g}"
    )
    return EXIT_OK


def cmd_scan(config: RunConfig) -> int:
    """var(N_0) over the [grid]."""
    grid = config.grid.to_grid(config.model.n_sites)
    diagram = scan_grid(grid, config.model, threads=_threads(config), hooks=[ScanProgressHook()])
    with _open_output(config) as stream:
        if _format(config) is OutputFormat.JSON:
            write_records_json(diagram, stream)
        else:
            write_records_csv(diagram, stream)

    def render(path):
        from ring_plots import render_heatmap_svg
        render_heatmap_svg(diagram, path, "var", contour_ratio=config.boundary.reference_ratio)

    _svg(config, render)
    var = diagram.as_array("var")
    _status().print(f"✅ {grid.size} points, var range [{var.min():.4f}, {var.max():.4f}]")
    return EXIT_OK


def cmd_ratio(config: RunConfig) -> int:
    """log10(κ/U_eff(1)) over the [grid], no diagonalization."""
    grid = config.grid.to_grid(config.model.n_sites)
    diagram = ratio_map(grid, config.model)
    with _open_output(config) as stream:
        if _format(config) is OutputFormat.JSON:
            write_records_json(diagram, stream)
        else:
            write_records_csv(diagram, stream)

    def render(path):
        from ring_plots import render_heatmap_svg
        render_heatmap_svg(diagram, path, "ratio", contour_ratio=config.boundary.reference_ratio)

    _svg(config, render)
    logs = np.log10(diagram.as_array("ratio"))
    _status().print(f"✅ log10(κ/U_eff) spans [{logs.min():.3f}, {logs.max():.3f}]")
    return EXIT_OK


def cmd_boundary(config: RunConfig) -> int:
    """Δ* and κ/U_eff(Δ*) for every Δc slice of the [grid] scan."""
    grid = config.grid.to_grid(config.model.n_sites)
    diagram = scan_grid(grid, config.model, threads=_threads(config), hooks=[ScanProgressHook()])
    result = find_boundary(diagram, config.model, threshold=config.boundary.threshold)
    _write_table(
        config,
        ("delta_c", "delta_star", "ratio", "threshold"),
        ((p.delta_c, p.delta_star, p.ratio, p.threshold) for p in result.points),
    )

    def render(path):
        from ring_plots import render_heatmap_svg
        render_heatmap_svg(diagram, path, "var", contour_ratio=config.boundary.reference_ratio)

    _svg(config, render)
    reference = config.boundary.reference_ratio
    inside = sum(1 for p in result.points if 0.2 <= p.ratio <= 0.4)
    _status().print(
        f"✅ {len(result.points)} crossings, {len(result.flagged)} flagged slices; "
        f"{inside} with κ/U_eff in [0.2, 0.4] (reference {reference:g})"
    )
    for delta_c in result.flagged:
        _status().print(f"⚠️  no crossing at Δc = {delta_c:g}")
    return EXIT_OK


def cmd_compare(config: RunConfig) -> int:
    """Effective vs full var(N_0) along the [compare] Δ axis at the [model] Δc."""
    deltas = config.compare.deltas()
    table = compare_eff_full(deltas, config.model, threads=_threads(config), hooks=[ScanProgressHook()])
    _write_table(
        config,
        ("delta", "var_eff", "var_full", "abs_diff"),
        ((r.delta, r.var_eff, r.var_full, r.abs_difference) for r in table.rows),
    )

    def render(path):
        from ring_plots import render_curves_svg
        render_curves_svg(
            {
                "effective": (deltas, [r.var_eff for r in table.rows]),
                "full": (deltas, [r.var_full for r in table.rows]),
            },
            path, "Δ / g", "var(N_i)", f"Δc = {table.delta_c:g} g",
        )

    _svg(config, render)
    _status().print(f"✅ max |var_eff − var_full| = {table.max_abs_difference:.4g}")
    return EXIT_OK


def cmd_sizes(config: RunConfig) -> int:
    """Effective-model var(Δ) for each ring size in [sizes]."""
    deltas = config.sizes.deltas()
    curves = size_comparison(
        deltas, config.model, sizes=config.sizes.sizes, threads=_threads(config), hooks=[ScanProgressHook()]
    )
    _write_table(
        config,
        ("n_sites", "delta", "var"),
        ((n, d, v) for n, curve in curves.items() for d, v in zip(curve.deltas, curve.variances)),
    )

    def render(path):
        from ring_plots import render_curves_svg
        render_curves_svg(
            {str(n): (curve.deltas, curve.variances) for n, curve in curves.items()},
            path, "Δ / g", "var(N_i)", f"Δc = {config.model.delta_c:g} g",
        )

    _svg(config, render)
    summary = Table(title="Size comparison")
    summary.add_column("sites", justify="right")
    summary.add_column("max |dvar/dΔ|", justify="right")
    summary.add_column("Δ*", justify="right")
    for n, curve in curves.items():
        crossing = "-" if curve.crossing is None else f"{curve.crossing:.4f}"
        summary.add_row(str(n), f"{curve.max_slope:.4f}", crossing)
    _status().print(summary)
    return EXIT_OK


# ============================================================================
# Dynamics Subcommands
# ============================================================================

def _schedule(config: RunConfig) -> RampSchedule:
    ramp = config.ramp
    return RampSchedule(
        shape=ramp.shape,
        delta_start=ramp.delta_start,
        delta_end=ramp.delta_end,
        duration=ramp.duration_in_g(config.model.kappa),
        delta_c=config.model.delta_c,
        delta_c_end=ramp.delta_c_end,
    )


def _run_ramp(config: RunConfig):
    params = config.model.with_detunings(delta=config.ramp.delta_start)
    basis = enumerate_basis(params.n_sites, SectorSpec(n_total=params.n_sites))
    if config.ramp.initial is InitialState.MI:
        initial = analytic_mi_state(basis, params)
    else:
        initial = ground_state(build_effective_hamiltonian(params, basis)).state
    schedule = _schedule(config)
    monitor = NormMonitorHook()
    trajectory = propagate(initial, schedule, params, config.ramp.dt, config.ramp.snapshots, hooks=[monitor])
    return schedule, trajectory


def cmd_sweep(config: RunConfig) -> int:
    """Adiabatic ramp from [ramp]; writes `t,fidelity,norm,var_site0`."""
    schedule, trajectory = _run_ramp(config)
    with _open_output(config) as stream:
        if _format(config) is OutputFormat.JSON:
            write_json(stream, [
                {"t": round_significant(t), "fidelity": round_significant(f),
                 "norm": round_significant(n), "var_site0": round_significant(v)}
                for t, f, n, v in zip(trajectory.times, trajectory.instantaneous_fidelity,
                                      trajectory.norms, trajectory.var_site0)
            ])
        else:
            write_trajectory_csv(trajectory, stream)

    def render(path):
        from ring_plots import render_curves_svg
        render_curves_svg(
            {
                "ground-state fidelity": (trajectory.times, trajectory.instantaneous_fidelity),
                "var(N_0)": (trajectory.times, trajectory.var_site0),
            },
            path, "t · g", "", f"{schedule.shape.value} ramp Δ: {schedule.delta_start:g} → {schedule.delta_end:g}",
        )

    _svg(config, render)
    marker = "✅" if trajectory.final_fidelity >= 0.99 and trajectory.within_tolerance else "⚠️ "
    console = _status()
    console.print(
        f"{marker} final fidelity {trajectory.final_fidelity:.6f} after t = {schedule.duration:.6g}/g "
        f"({schedule.duration * config.model.kappa:.4g}/κ), max norm drift {trajectory.max_norm_drift:.2e}"
    )
    if not trajectory.within_tolerance:
        console.print(
            f"⚠️  norm drift above {NORM_DRIFT_TARGET:.0e}: trajectory is outside tolerance, "
            f"rerun with ramp.dt ≤ {trajectory.suggested_dt():.3g}"
        )
    return EXIT_OK


def _measured_state(config: RunConfig) -> StateVector:
    params = config.model
    basis = enumerate_basis(params.n_sites, SectorSpec(n_total=params.n_sites))
    choice = config.measure.state
    if choice is InitialState.MI:
        return analytic_mi_state(basis, params)
    if choice is InitialState.SF:
        return analytic_sf_state(basis)
    if choice is InitialState.GROUND:
        return ground_state(build_effective_hamiltonian(params, basis)).state
    return _run_ramp(config)[1].final_state


def cmd_measure(config: RunConfig) -> int:
    """Seeded Monte-Carlo of the readout; writes `{seed, shots, counts, p, var}`."""
    if config.measure.seed is None:
        raise ConfigError("measure needs a seed (--seed or measure.seed)", key="measure.seed")
    state = _measured_state(config)
    run = simulate_measurement_protocol(state, config.measure.site, config.measure.shots, config.measure.seed)
    error = bootstrap_standard_error(run, config.measure.bootstrap_resamples, seed=config.measure.seed)

    with _open_output(config) as stream:
        if _format(config, OutputFormat.JSON) is OutputFormat.JSON:
            write_json(stream, run.to_payload())
        else:
            write_csv(stream, ("l", "count", "p"),
                      ((l, c, p) for l, (c, p) in enumerate(zip(run.counts, run.estimated_p))))

    exact = variance_polariton_number(state, config.measure.site)
    _status().print(
        f"✅ {run.shots} shots: var = {run.estimated_var:.6f} ± {error:.6f} (exact {exact:.6f})"
    )
    return EXIT_OK


def cmd_timescales(config: RunConfig) -> int:
    """Hopping time 1/κ in ns against the polariton lifetime."""
    section = config.timescales
    ramp_kappa = config.ramp.duration_kappa if config.ramp.duration is None else None
    report = timescale_report(section.g_c_mhz, section.delta_c_ratios, section.polariton_lifetime_us, ramp_kappa)
    _write_table(
        config,
        ("delta_c_ratio", "hopping_time_ns", "lifetime_ratio", "ramp_ns"),
        ((r.delta_c_ratio, r.hopping_time_ns, r.lifetime_ratio, r.ramp_ns) for r in report.rows),
    )

    table = Table(title=f"g_c/2π = {report.g_c_mhz:g} MHz, τ_p = {report.polariton_lifetime_ns:g} ns")
    table.add_column("Δc/g_c", justify="right")
    table.add_column("1/κ [ns]", justify="right")
    table.add_column("τ_p·κ", justify="right")
    table.add_column("ramp [ns]", justify="right")
    for row in report.rows:
        ramp = "-" if row.ramp_ns is None else f"{row.ramp_ns:.1f}"
        table.add_row(f"{row.delta_c_ratio:g}", f"{row.hopping_time_ns:.2f}", f"{row.lifetime_ratio:.1f}", ramp)
    _status().print(table)
    marker = "✅" if report.feasible else "⚠️ "
    _status().print(f"{marker} hopping time {'≪' if report.feasible else 'not ≪'} polariton lifetime")
    return EXIT_OK


# ============================================================================
# Argument Parsing
# ============================================================================

COMMANDS: Dict[str, tuple] = {
    "spectrum": (cmd_spectrum, ("model", "spectrum", "output")),
    "scan": (cmd_scan, ("model", "grid", "boundary", "output")),
    "ratio": (cmd_ratio, ("model", "grid", "boundary", "output")),
    "boundary": (cmd_boundary, ("model", "grid", "boundary", "output")),
    "compare": (cmd_compare, ("model", "compare", "output")),
    "sizes": (cmd_sizes, ("model", "sizes", "output")),
    "sweep": (cmd_sweep, ("model", "ramp", "output")),
    "measure": (cmd_measure, ("model", "measure", "ramp", "output")),
    "timescales": (cmd_timescales, ("timescales", "ramp", "output")),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polariton-ring",
        description="Polariton Mott-insulator / superfluid simulator for a coupled-resonator ring.",
    )
    parser.add_argument("--log-level", default=None, help="Logging level (default: POLARITON_RING_LOG_LEVEL or WARNING)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name, (handler, sections) in COMMANDS.items():
        sub = subparsers.add_parser(
            name,
            help=handler.__doc__.splitlines()[0],
            description=handler.__doc__,
            epilog=describe_sections(sections),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        sub.add_argument("--config", type=str, default=None, help="TOML recipe (see configs/)")
        sub.add_argument("--out", type=str, default=None, help="Output file (default: stdout)")
        sub.add_argument("--format", choices=[f.value for f in OutputFormat], default=None, help="Output format")
        sub.add_argument("--svg", type=str, default=None, help="Also write an SVG figure to this path")
        sub.add_argument("--seed", type=int, default=None, help="RNG seed (measure)")
        sub.add_argument("--threads", type=int, default=None, help="Scan worker threads")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Dict[str, object]]:
    return {
        "output": {"path": args.out, "format": args.format, "svg": args.svg, "threads": args.threads},
        "measure": {"seed": args.seed},
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_environment()
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    handler, _ = COMMANDS[args.command]
    try:
        config = apply_overrides(load_config(args.config), _overrides(args))
        return handler(config)
    except PolaritonRingError as exc:
        console = _status()
        console.print(f"❌ {type(exc).__name__}: {exc}", markup=False)
        print_troubleshooting(console)
        return exc.exit_code


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
