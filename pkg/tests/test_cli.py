"""End-to-end runs of the polariton-ring command line."""

import json
from pathlib import Path

import pytest

from ring_cli import COMMANDS, main
from ring_config import SECTION_MODELS

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def data_lines(text):
    return [line for line in text.splitlines() if line]


# ============================================================================
# spectrum
# ============================================================================

def test_spectrum_lists_every_eigenvalue(write_config, capsys):
    path = write_config("""
        [model]
        n_sites = 3
        delta = -2.0
        delta_c = 10.0
    """)
    assert main(["spectrum", "--config", path]) == 0
    out, err = capsys.readouterr()
    lines = data_lines(out)
    assert lines[0] == "index,energy"
    assert len(lines) == 39
    assert "eigenvalues" in err


def test_single_site_spectrum(write_config, capsys):
    path = write_config("""
        [model]
        n_sites = 1
        delta = 0.0
    """)
    assert main(["spectrum", "--config", path, "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["dimension"] == 2
    assert payload["eigenvalues"] == pytest.approx([-1.0, 1.0], abs=1e-12)


def test_full_spectrum_guard(write_config, capsys):
    path = write_config("""
        [model]
        n_sites = 4

        [spectrum]
        model = "full"
    """)
    assert main(["spectrum", "--config", path]) == 3
    assert "DimensionGuardError" in capsys.readouterr().err


# ============================================================================
# Errors
# ============================================================================

def test_unknown_key_exits_with_config_error(write_config, capsys):
    path = write_config("""
        [grid]
        foo = 1
    """)
    assert main(["scan", "--config", path]) == 2
    err = capsys.readouterr().err
    assert "grid.foo" in err
    assert "Troubleshooting" in err


def test_full_scan_of_four_sites_is_refused(write_config, capsys):
    path = write_config("""
        [model]
        n_sites = 4

        [grid]
        model = "full"
        delta_points = 2
        delta_c_points = 2
    """)
    assert main(["scan", "--config", path]) == 3


def test_non_dispersive_scan_is_refused(write_config, capsys):
    path = write_config("""
        [grid]
        delta_c_min = 5.0
        delta_points = 2
        delta_c_points = 2
    """)
    assert main(["scan", "--config", path]) == 2
    assert "DispersiveRegimeError" in capsys.readouterr().err


def test_unstable_sweep_exits_with_numerical_error(write_config, capsys):
    path = write_config("""
        [model]
        n_sites = 3

        [ramp]
        delta_start = 200.0
        delta_end = 200.0
        duration = 10.0
        dt = 0.1
        initial = "mi"
    """)
    assert main(["sweep", "--config", path]) == 4
    assert "NormDriftError" in capsys.readouterr().err


@pytest.mark.parametrize("command", sorted(COMMANDS))
def test_help_lists_every_config_key(command, capsys):
    with pytest.raises(SystemExit) as info:
        main([command, "--help"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    for section in COMMANDS[command][1]:
        for key in SECTION_MODELS[section].model_fields:
            assert f"{section}.{key}" in out


# ============================================================================
# Scans
# ============================================================================

def test_scan_writes_records_and_svg(write_config, tmp_path, capsys):
    path = write_config("""
        [model]
        n_sites = 2

        [grid]
        delta_points = 4
        delta_c_points = 3
    """)
    svg = tmp_path / "scan.svg"
    out = tmp_path / "scan.csv"
    assert main(["scan", "--config", path, "--out", str(out), "--svg", str(svg)]) == 0
    lines = data_lines(out.read_text())
    assert lines[0].startswith("delta,delta_c,n_sites,model,var")
    assert len(lines) == 13
    first = svg.read_bytes()
    assert b"<svg" in first

    assert main(["scan", "--config", path, "--out", str(out), "--svg", str(svg)]) == 0
    assert svg.read_bytes() == first


def test_ratio_map_as_json(write_config, capsys):
    path = write_config("""
        [grid]
        delta_points = 3
        delta_c_points = 2
    """)
    assert main(["ratio", "--config", path, "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload) == 6
    assert all(row["var"] is None and row["ratio"] > 0 for row in payload)


def test_scan_as_json_keeps_the_model_column(write_config, capsys):
    path = write_config("""
        [model]
        n_sites = 2

        [grid]
        delta_points = 2
        delta_c_points = 1
    """)
    assert main(["scan", "--config", path, "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload) == 2
    assert [row["model"] for row in payload] == ["effective", "effective"]
    assert all(row["n_sites"] == 2 and 0.0 <= row["var"] <= 1.0 for row in payload)


def test_boundary_rows(write_config, capsys):
    path = write_config("""
        [grid]
        delta_points = 31
        delta_c_points = 2
    """)
    assert main(["boundary", "--config", path]) == 0
    lines = data_lines(capsys.readouterr().out)
    assert lines[0] == "delta_c,delta_star,ratio,threshold"
    assert len(lines) == 3


def test_compare_rows(write_config, capsys):
    path = write_config("""
        [compare]
        delta_points = 4
    """)
    assert main(["compare", "--config", path]) == 0
    lines = data_lines(capsys.readouterr().out)
    assert lines[0] == "delta,var_eff,var_full,abs_diff"
    assert len(lines) == 5


def test_sizes_produce_one_curve_per_ring(write_config, capsys):
    path = write_config("""
        [sizes]
        delta_points = 4
        sizes = [2, 3, 4]
    """)
    assert main(["sizes", "--config", path]) == 0
    lines = data_lines(capsys.readouterr().out)
    assert lines[0] == "n_sites,delta,var"
    assert {line.split(",")[0] for line in lines[1:]} == {"2", "3", "4"}


# ============================================================================
# Dynamics
# ============================================================================

def test_short_sweep(write_config, capsys):
    path = write_config("""
        [model]
        n_sites = 2

        [ramp]
        delta_start = -2.0
        delta_end = 0.0
        duration = 2.0
        dt = 0.02
        snapshots = 10
    """)
    assert main(["sweep", "--config", path]) == 0
    out, err = capsys.readouterr()
    lines = data_lines(out)
    assert lines[0] == "t,fidelity,norm,var_site0"
    assert len(lines) == 12
    assert "final fidelity" in err


def test_sweep_reports_drift_outside_tolerance(write_config, capsys):
    path = write_config("""
        [model]
        n_sites = 3
        delta_c = 10.0

        [ramp]
        delta_start = -2.0
        delta_end = 10.0
        duration_kappa = 5.0
        dt = 0.05
        snapshots = 5
    """)
    assert main(["sweep", "--config", path]) == 0
    err = " ".join(capsys.readouterr().err.split())
    assert "outside tolerance" in err
    assert "ramp.dt" in err


def test_measure_needs_a_seed(write_config, capsys):
    path = write_config("""
        [measure]
        shots = 10
    """)
    assert main(["measure", "--config", path]) == 2
    assert "measure.seed" in capsys.readouterr().err


def test_measure_is_reproducible(tmp_path, capsys):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for target in (first, second):
        assert main(["measure", "--config", str(CONFIGS / "measurement.toml"), "--out", str(target)]) == 0
    assert first.read_bytes() == second.read_bytes()
    payload = json.loads(first.read_text())
    assert list(payload) == ["seed", "shots", "counts", "p", "var"]
    assert payload["seed"] == 42
    assert sum(payload["counts"]) == payload["shots"] == 10000


def test_measure_mott_state(write_config, capsys):
    path = write_config("""
        [model]
        n_sites = 3
        delta = -2.0

        [measure]
        state = "mi"
        shots = 200
    """)
    assert main(["measure", "--config", path, "--seed", "5"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["var"] == 0.0
    assert payload["counts"] == [0, 200, 0, 0]


def test_timescales(capsys):
    assert main(["timescales", "--config", str(CONFIGS / "timescales.toml")]) == 0
    out, err = capsys.readouterr()
    lines = data_lines(out)
    assert lines[0] == "delta_c_ratio,hopping_time_ns,lifetime_ratio,ramp_ns"
    hopping = [float(line.split(",")[1]) for line in lines[1:]]
    assert hopping[0] == pytest.approx(7.96, rel=0.01)
