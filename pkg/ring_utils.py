#!/usr/bin/env python3
"""
Polariton Ring - Shared Utilities
=================================

This module provides common functionality used across the simulator so that
environment setup, logging, console output and error reporting look the same
in every module. All other modules import from here.

Functions:
- load_environment(): Handle dotenv loading gracefully
- configure_logging(): Install the rich log handler once
- default_thread_count(): Worker count from POLARITON_RING_THREADS
- get_console(): Shared rich console for user-facing output
- print_troubleshooting(): Common troubleshooting guidance
- write_csv() / write_json(): Table output with 12 significant digits

Errors:
- PolaritonRingError and subclasses, each carrying the CLI exit code

Constants:
- Exit codes, numerical tolerances and the default (Δ, Δc) scan box
"""

import csv
import json
import logging
import os

from rich.console import Console
from rich.logging import RichHandler

# ============================================================================
# Environment Setup
# ============================================================================

ENV_THREADS = "POLARITON_RING_THREADS"
ENV_LOG_LEVEL = "POLARITON_RING_LOG_LEVEL"


def load_environment():
    """
    Load environment variables from a .env file if available.
    Gracefully handles a missing python-dotenv package.

    Returns:
        bool: True if dotenv was loaded, False if not available
    """
    try:
        from dotenv import load_dotenv
        load_dotenv()
        return True
    except ImportError:
        logging.getLogger(__name__).debug(
            "python-dotenv not available, using environment variables directly"
        )
        return False


def default_thread_count():
    """
    Number of scan workers when no --threads flag is given.

    Reads POLARITON_RING_THREADS; falls back to 1.
    """
    raw = os.getenv(ENV_THREADS, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{ENV_THREADS} must be a positive integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError(f"{ENV_THREADS} must be a positive integer, got {raw!r}")
    return value


# ============================================================================
# Logging and Console
# ============================================================================

_console = None
_logging_configured = False


def get_console(stderr=False):
    """Shared rich console; a fresh stderr console is returned for diagnostics."""
    global _console
    if stderr:
        return Console(stderr=True)
    if _console is None:
        _console = Console()
    return _console


def configure_logging(level=None):
    """
    Install a RichHandler on the root logger.

    Args:
        level: Logging level name or number. Defaults to POLARITON_RING_LOG_LEVEL,
            else WARNING.

    Calling it twice only updates the level.
    """
    global _logging_configured
    if level is None:
        level = os.getenv(ENV_LOG_LEVEL, "WARNING")
    if isinstance(level, str):
        level = level.upper()

    root = logging.getLogger()
    if not _logging_configured:
        handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=True)
        handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        root.addHandler(handler)
        _logging_configured = True
    root.setLevel(level)


# ============================================================================
# Errors
# ============================================================================

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIMENSION_GUARD = 3
EXIT_NUMERICAL = 4


class PolaritonRingError(Exception):
    """Base class; `exit_code` is what the CLI returns for this failure."""

    exit_code = EXIT_NUMERICAL


class ConfigError(PolaritonRingError):
    """Invalid or unknown configuration key or flag value."""

    exit_code = EXIT_CONFIG

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class ParameterError(PolaritonRingError):
    """A physical parameter or argument breaks a model rule at use time."""

    exit_code = EXIT_CONFIG


class DispersiveRegimeError(ParameterError):
    """Coupler detuning outside the dispersive regime the effective model needs."""


class BasisMismatchError(ParameterError):
    """Operands were built over different basis sets."""


class SectorLeakageError(PolaritonRingError):
    """An operator mapped a basis state outside its excitation sector."""


class DimensionGuardError(PolaritonRingError):
    """Dense full-model diagonalization refused above the size ceiling."""

    exit_code = EXIT_DIMENSION_GUARD

    def __init__(self, message, dimension):
        super().__init__(message)
        self.dimension = dimension


class EigensolverError(PolaritonRingError):
    """Eigenpairs failed the residual check."""


class NormDriftError(PolaritonRingError):
    """Propagation lost too much norm; the step size is too large."""

    def __init__(self, message, suggested_dt=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class NegativeVarianceError(PolaritonRingError):
    """A variance came out negative beyond rounding."""


# ============================================================================
# Numerical Constants
# ============================================================================

# Dispersive validity: the effective model needs Δc ≥ 10·g_c
DISPERSIVE_RATIO_MIN = 10.0

# Dispersive readout of step (2): Δ/g ≃ 5
READOUT_DETUNING_MIN = 5.0

DEGENERACY_GAP = 1e-10
VARIANCE_ROUNDING = 1e-12
NORM_DRIFT_ABORT = 1e-4
NORM_DRIFT_TARGET = 1e-6

# Default scan box, in units of g (g = g_c), and the κ/U_eff contour drawn on it
DEFAULT_DELTA_RANGE = (-5.0, 10.0)
DEFAULT_DELTA_C_RANGE = (10.0, 100.0)
REFERENCE_BOUNDARY_RATIO = 0.28


# ============================================================================
# Table Output
# ============================================================================

SIGNIFICANT_DIGITS = 12


def round_significant(value, digits=SIGNIFICANT_DIGITS):
    """Float rounded to `digits` significant digits; None, bools, ints and strings pass through."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    return float(f"{float(value):.{digits}g}")


def format_cell(value, digits=SIGNIFICANT_DIGITS):
    """CSV text of one value: empty for None, lowercase booleans, %.12g floats."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, str)):
        return str(value)
    return f"{float(value):.{digits}g}"


def write_csv(stream, header, rows):
    """Write a header and rows of plain values to a text stream."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(value) for value in row])


def write_json(stream, payload):
    """Indented JSON with a trailing newline; key order is preserved."""
    stream.write(json.dumps(payload, indent=2, ensure_ascii=False))
    stream.write("\n")


# ============================================================================
# User Guidance
# ============================================================================

def print_troubleshooting(console=None):
    """Print common troubleshooting guidance after a failed run."""
    console = console or get_console(stderr=True)
    console.print("\nTroubleshooting:")
    console.print("1. Run `uv sync` to install dependencies")
    console.print("2. Check the config file against `polariton-ring <command> --help`")
    console.print("3. Effective-model runs need delta_c ≥ 10·g_c in every junction")
    console.print("4. Norm-drift aborts: lower `ramp.dt` (the message suggests a value)")
    console.print("5. Full-model runs are limited to 3 sites / dimension 4000")


__all__ = [
    "load_environment",
    "configure_logging",
    "default_thread_count",
    "get_console",
    "print_troubleshooting",
    "round_significant",
    "format_cell",
    "write_csv",
    "write_json",
    "PolaritonRingError",
    "ConfigError",
    "ParameterError",
    "DispersiveRegimeError",
    "BasisMismatchError",
    "SectorLeakageError",
    "DimensionGuardError",
    "EigensolverError",
    "NormDriftError",
    "NegativeVarianceError",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_DIMENSION_GUARD",
    "EXIT_NUMERICAL",
]
