"""Shared utilities: environment, logging, errors and table output."""

import io
import json
import logging

import pytest
from rich.logging import RichHandler

import ring_utils
from ring_utils import (
    EXIT_CONFIG,
    EXIT_DIMENSION_GUARD,
    EXIT_NUMERICAL,
    BasisMismatchError,
    ConfigError,
    DimensionGuardError,
    DispersiveRegimeError,
    EigensolverError,
    NormDriftError,
    ParameterError,
    SectorLeakageError,
    configure_logging,
    default_thread_count,
    format_cell,
    round_significant,
    write_csv,
    write_json,
)


def test_thread_count_from_environment(monkeypatch):
    monkeypatch.delenv(ring_utils.ENV_THREADS, raising=False)
    assert default_thread_count() == 1
    monkeypatch.setenv(ring_utils.ENV_THREADS, "4")
    assert default_thread_count() == 4
    for bad in ("zero", "0", "-2"):
        monkeypatch.setenv(ring_utils.ENV_THREADS, bad)
        with pytest.raises(ConfigError):
            default_thread_count()


def test_configure_logging_installs_one_handler():
    root = logging.getLogger()
    previous = root.level
    try:
        configure_logging("info")
        configure_logging("debug")
        handlers = [h for h in root.handlers if isinstance(h, RichHandler)]
        assert len(handlers) == 1
        assert root.level == logging.DEBUG
    finally:
        root.setLevel(previous)


@pytest.mark.parametrize(
    "error, code",
    [
        (ConfigError("bad key", key="grid.foo"), EXIT_CONFIG),
        (ParameterError("bad"), EXIT_CONFIG),
        (DispersiveRegimeError("bad"), EXIT_CONFIG),
        (BasisMismatchError("bad"), EXIT_CONFIG),
        (DimensionGuardError("too big", 769), EXIT_DIMENSION_GUARD),
        (SectorLeakageError("leak"), EXIT_NUMERICAL),
        (EigensolverError("residual"), EXIT_NUMERICAL),
        (NormDriftError("drift", suggested_dt=0.01), EXIT_NUMERICAL),
    ],
)
def test_exit_codes(error, code):
    assert error.exit_code == code


def test_error_payloads():
    assert ConfigError("bad key", key="grid.foo").key == "grid.foo"
    assert DimensionGuardError("too big", 769).dimension == 769
    assert NormDriftError("drift", suggested_dt=0.01).suggested_dt == 0.01


def test_cell_formatting():
    assert format_cell(None) == ""
    assert format_cell(True) == "true"
    assert format_cell(3) == "3"
    assert format_cell("full") == "full"
    assert format_cell(1 / 3) == "0.333333333333"
    assert round_significant(2 / 3) == 0.666666666667
    assert round_significant(None) is None
    assert round_significant(False) is False
    assert round_significant("effective") == "effective"
    assert round_significant(7) == 7


def test_write_csv_and_json():
    stream = io.StringIO()
    write_csv(stream, ("a", "b"), [(1, 0.5), (2, None)])
    assert stream.getvalue() == "a,b\n1,0.5\n2,\n"

    stream = io.StringIO()
    write_json(stream, {"var": 0.5, "counts": [1, 2]})
    assert stream.getvalue().endswith("\n")
    assert json.loads(stream.getvalue()) == {"var": 0.5, "counts": [1, 2]}
