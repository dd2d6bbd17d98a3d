"""Exact diagonalization and the closed-form polariton results."""

import math

import numpy as np
import pytest
import scipy.linalg

from ring_model import (
    ModelParams,
    SectorSpec,
    SymmetricOperator,
    build_effective_hamiltonian,
    build_hopping_hamiltonian,
    enumerate_basis,
)
from ring_observables import fidelity, marginal_distribution, variance_polariton_number
from ring_spectra import (
    Branch,
    analytic_mi_state,
    analytic_sf_state,
    eigendecompose,
    ground_projection,
    ground_state,
    hopping_band,
    hopping_ratio,
    kappa,
    polariton_level,
    resonant_pumping_state,
    u_eff,
)
from ring_utils import DispersiveRegimeError, EigensolverError, ParameterError

DELTA_PRIMES = [-5.0, -2.5, 0.0, 2.5, 5.0, 7.5, 10.0]


def single_site(n_total, delta):
    basis = enumerate_basis(1, SectorSpec(n_total=n_total))
    return build_effective_hamiltonian(ModelParams(n_sites=1, delta=delta), basis)


# ============================================================================
# eigendecompose / ground_state
# ============================================================================

def test_two_level_decomposition():
    decomposition = eigendecompose(single_site(1, 0.0))
    np.testing.assert_allclose(decomposition.values, [-1.0, 1.0], atol=1e-12)
    for k in range(2):
        np.testing.assert_allclose(np.abs(decomposition.vectors[:, k]), [1 / math.sqrt(2)] * 2, atol=1e-12)


def test_identity_decomposition():
    basis = enumerate_basis(3, SectorSpec(n_total=1))
    decomposition = eigendecompose(SymmetricOperator(np.eye(len(basis)), basis, "I"))
    np.testing.assert_allclose(decomposition.values, np.ones(len(basis)))
    # unit vectors, each basis direction exactly once
    magnitudes = np.abs(decomposition.vectors)
    np.testing.assert_allclose(np.sort(magnitudes.max(axis=0)), np.ones(len(basis)), atol=1e-12)
    np.testing.assert_allclose(magnitudes.sum(axis=0), np.ones(len(basis)), atol=1e-12)
    assert ground_state(SymmetricOperator(np.eye(len(basis)), basis)).degenerate


@pytest.mark.parametrize("n_sites, n_total", [(3, 3), (4, 4)])
def test_random_symmetric_reconstruction(rng, n_sites, n_total):
    basis = enumerate_basis(n_sites, SectorSpec(n_total=n_total))
    raw = rng.normal(size=(len(basis), len(basis)))
    matrix = (raw + raw.T) / 2.0
    decomposition = eigendecompose(SymmetricOperator(matrix, basis))

    values, vectors = decomposition.values, decomposition.vectors
    assert np.all(np.diff(values) >= 0)
    rebuilt = vectors @ np.diag(values) @ vectors.T
    assert np.max(np.abs(rebuilt - matrix)) <= 1e-8 * np.max(np.abs(matrix))
    assert np.max(np.abs(vectors.T @ vectors - np.eye(len(basis)))) <= 1e-10


def test_eigenvector_sign_rule(basis3, mi_params):
    vectors = eigendecompose(build_effective_hamiltonian(mi_params, basis3)).vectors
    for k in range(vectors.shape[1]):
        column = vectors[:, k]
        assert column[np.flatnonzero(np.abs(column) > 1e-12)[0]] > 0


def test_decomposition_is_read_only(basis3, mi_params):
    decomposition = eigendecompose(build_effective_hamiltonian(mi_params, basis3))
    with pytest.raises(ValueError):
        decomposition.values[0] = 0.0


def test_bad_eigenpairs_are_rejected(monkeypatch, basis3, mi_params):
    hamiltonian = build_effective_hamiltonian(mi_params, basis3)
    dim = hamiltonian.dim
    monkeypatch.setattr(scipy.linalg, "eigh", lambda matrix: (np.zeros(dim), np.eye(dim)))
    with pytest.raises(EigensolverError):
        eigendecompose(hamiltonian)


def test_jc_ground_state():
    energy, state, degenerate = ground_state(single_site(1, 0.0))
    assert energy == pytest.approx(-1.0, abs=1e-12)
    assert not degenerate


def test_free_boson_ground_energy(basis3, sub_basis):
    """Qubits frozen in |g⟩: three bosons in the k = 0 mode at −2κ each."""
    params = ModelParams(n_sites=3, delta_c=10.0)
    photons_only = sub_basis(basis3, keep=lambda s: not any(s.site_qubits))
    energy, _, _ = ground_state(build_hopping_hamiltonian(params, photons_only))
    assert energy == pytest.approx(-6 * params.kappa, abs=1e-9)


@pytest.mark.parametrize("n_sites", [2, 3, 4, 5])
def test_single_photon_band_matches_diagonalization(n_sites, sub_basis):
    params = ModelParams(n_sites=n_sites, delta_c=25.0)
    basis = sub_basis(enumerate_basis(n_sites, SectorSpec(n_total=1)), keep=lambda s: not any(s.site_qubits))
    values = eigendecompose(build_hopping_hamiltonian(params, basis)).values
    np.testing.assert_allclose(values, sorted(hopping_band(n_sites, params.kappa)), atol=1e-9)


def test_deep_mott_ground_state_is_the_product_state(basis3, mi_params):
    _, state, _ = ground_state(build_effective_hamiltonian(mi_params, basis3))
    assert fidelity(state, analytic_mi_state(basis3, mi_params)) >= 0.99


def test_hopping_dominated_ground_energy(basis3, sf_params):
    """Measured from the free-polariton level N·E_1^−, the ground energy follows the −2Nκ band."""
    energy, _, _ = ground_state(build_effective_hamiltonian(sf_params, basis3))
    free = 3 * polariton_level(1, Branch.LOWER, sf_params.delta_prime()).energy
    band = -2 * 3 * sf_params.kappa
    assert abs((energy - free) - band) <= 0.1 * abs(band)


def test_ground_projection_of_ground_state(basis3, mi_params):
    decomposition = eigendecompose(build_effective_hamiltonian(mi_params, basis3))
    assert ground_projection(decomposition, decomposition.state(0)) == pytest.approx(1.0, abs=1e-12)
    assert ground_projection(decomposition, decomposition.state(5)) == pytest.approx(0.0, abs=1e-12)


# ============================================================================
# Closed forms
# ============================================================================

@pytest.mark.parametrize(
    "n, branch, delta_prime, expected",
    [
        (1, Branch.LOWER, 0.0, -1.0),
        (1, Branch.UPPER, 0.0, 1.0),
        (0, Branch.LOWER, 3.0, 0.0),
        (2, Branch.LOWER, 0.0, -math.sqrt(2)),
    ],
)
def test_polariton_level_examples(n, branch, delta_prime, expected):
    assert polariton_level(n, branch, delta_prime).energy == pytest.approx(expected, abs=1e-15)


def test_polariton_level_rejects_missing_states():
    with pytest.raises(ParameterError):
        polariton_level(0, Branch.UPPER, 0.0)
    with pytest.raises(ParameterError):
        polariton_level(-1, Branch.LOWER, 0.0)


def test_resonant_mixing_angle():
    assert polariton_level(1, Branch.LOWER, 0.0).mixing_angle == pytest.approx(math.pi / 4)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("delta_prime", DELTA_PRIMES)
def test_polariton_levels_match_jc_blocks(n, delta_prime):
    values = eigendecompose(single_site(n, delta_prime)).values
    lower = polariton_level(n, Branch.LOWER, delta_prime).energy
    upper = polariton_level(n, Branch.UPPER, delta_prime).energy
    np.testing.assert_allclose(values, [lower, upper], atol=1e-10)


@pytest.mark.parametrize("delta_prime", DELTA_PRIMES)
def test_lower_polariton_vector(delta_prime):
    """Basis order is (|0,e⟩, |1,g⟩); the lower state is cosθ|0,e⟩ − sinθ|1,g⟩."""
    vector = eigendecompose(single_site(1, delta_prime)).vectors[:, 0]
    theta = polariton_level(1, Branch.LOWER, delta_prime).mixing_angle
    assert abs(vector @ np.array([math.cos(theta), -math.sin(theta)])) == pytest.approx(1.0, abs=1e-12)


def test_u_eff_examples():
    assert u_eff(0.0) == pytest.approx(2 - math.sqrt(2), abs=1e-12)
    assert u_eff(10.0) == pytest.approx(0.00189, abs=1e-5)
    assert u_eff(-10.0) == pytest.approx(10.00189, abs=1e-5)


@pytest.mark.parametrize("delta_prime", DELTA_PRIMES)
def test_u_eff_is_the_second_polariton_cost(delta_prime):
    two = polariton_level(2, Branch.LOWER, delta_prime).energy
    one = polariton_level(1, Branch.LOWER, delta_prime).energy
    assert u_eff(delta_prime) == pytest.approx(two - 2 * one, abs=1e-12)


def test_u_eff_positive_and_decreasing():
    values = np.array([u_eff(x) for x in np.linspace(-10.0, 10.0, 201)])
    assert np.all(values > 0)
    assert np.all(np.diff(values) < 0)


def test_kappa():
    assert kappa(1.0, 10.0) == pytest.approx(0.1)
    assert kappa(1.0, 100.0) == pytest.approx(0.01)
    with pytest.raises(DispersiveRegimeError):
        kappa(1.0, 0.0)


def test_hopping_ratio_at_resonance():
    """Δ = −2κ puts Δ′ at zero, so the ratio is κ/(2 − √2)."""
    assert hopping_ratio(-0.2, 10.0) == pytest.approx(0.1 / (2 - math.sqrt(2)), rel=1e-12)


def test_hopping_band_examples():
    np.testing.assert_allclose(sorted(hopping_band(3, 0.1)), [-0.2, 0.1, 0.1], atol=1e-15)
    np.testing.assert_allclose(sorted(hopping_band(2, 0.1)), [-0.2, 0.2], atol=1e-15)
    for n in range(1, 7):
        assert min(hopping_band(n, 0.3)) == pytest.approx(-0.6)


# ============================================================================
# Analytic states
# ============================================================================

def test_mi_state_on_a_single_resonant_site():
    basis = enumerate_basis(1, SectorSpec(n_total=1))
    amplitudes = analytic_mi_state(basis, ModelParams(n_sites=1, delta=0.0)).amplitudes
    np.testing.assert_allclose(np.abs(amplitudes), [1 / math.sqrt(2)] * 2, atol=1e-15)
    assert amplitudes[0] * amplitudes[1] < 0


def test_mi_state_has_no_number_fluctuations(basis3, mi_params):
    state = analytic_mi_state(basis3, mi_params)
    assert fidelity(state, state) == pytest.approx(1.0)
    for site in range(3):
        assert variance_polariton_number(state, site) == pytest.approx(0.0, abs=1e-12)
        assert marginal_distribution(state, site).probs == pytest.approx((0.0, 1.0, 0.0, 0.0))


def test_resonant_pumping_prepares_the_mi_state(basis3, mi_params):
    pumped = resonant_pumping_state(basis3, mi_params)
    assert fidelity(pumped, analytic_mi_state(basis3, mi_params)) == pytest.approx(1.0)


def test_analytic_states_need_unit_filling(mi_params, full_basis3):
    two_photons = enumerate_basis(3, SectorSpec(n_total=2))
    with pytest.raises(ParameterError):
        analytic_mi_state(two_photons, mi_params)
    with pytest.raises(ParameterError):
        analytic_sf_state(two_photons)
    with pytest.raises(ParameterError):
        analytic_sf_state(full_basis3)


@pytest.mark.parametrize("n_sites", [2, 3, 4])
def test_sf_variance(n_sites):
    basis = enumerate_basis(n_sites, SectorSpec(n_total=n_sites))
    state = analytic_sf_state(basis)
    expected = n_sites * (1 / n_sites) * (1 - 1 / n_sites)
    for site in range(n_sites):
        assert variance_polariton_number(state, site) == pytest.approx(expected, abs=1e-12)


def test_sf_marginal_on_three_sites(basis3):
    probs = marginal_distribution(analytic_sf_state(basis3), 0).probs
    assert probs == pytest.approx((8 / 27, 12 / 27, 6 / 27, 1 / 27), abs=1e-12)


def test_sf_single_site_is_one_photon():
    basis = enumerate_basis(1, SectorSpec(n_total=1))
    state = analytic_sf_state(basis)
    assert variance_polariton_number(state, 0) == 0.0
    assert state.probabilities[basis.index[basis.states[1]]] == pytest.approx(1.0)
