"""Shared fixtures for the polariton-ring test suite."""

import textwrap

import numpy as np
import pytest

from ring_model import BasisSet, ModelParams, SectorSpec, enumerate_basis


@pytest.fixture
def basis3():
    """3 sites, unit filling, no couplers (38 states)."""
    return enumerate_basis(3, SectorSpec(n_total=3))


@pytest.fixture
def full_basis3():
    """3 sites, unit filling, with coupler qubits (111 states)."""
    return enumerate_basis(3, SectorSpec(n_total=3, include_couplers=True))


@pytest.fixture
def mi_params():
    """Deep Mott-insulator point Δ = −2g, Δc = 10g."""
    return ModelParams(n_sites=3, delta=-2.0, delta_c=10.0)


@pytest.fixture
def sf_params():
    """Hopping-dominated point Δ′ = 10g at Δc = 10g."""
    return ModelParams(n_sites=3, delta=9.8, delta_c=10.0)


@pytest.fixture
def sub_basis():
    """Build a BasisSet from the states of `basis` that satisfy `keep`, in the given order."""

    def make(basis, keep=lambda state: True, reverse=False):
        states = [state for state in basis.states if keep(state)]
        if reverse:
            states.reverse()
        index = {state: position for position, state in enumerate(states)}
        return BasisSet(states=tuple(states), index=index, sector=basis.sector, n_sites=basis.n_sites)

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def write_config(tmp_path):
    """Write a TOML recipe into tmp_path and return its path."""

    def write(text, name="run.toml"):
        path = tmp_path / name
        path.write_text(textwrap.dedent(text), encoding="utf-8")
        return str(path)

    return write
