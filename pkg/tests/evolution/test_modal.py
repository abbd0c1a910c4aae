import jax.numpy as jnp
import numpy as np
import pytest

from transwave.config import validate_config, validated_default, with_values
from transwave.core.physics.metrics import energy
from transwave.evolution.initialization import default_initial_state
from transwave.evolution.modal import decay_window, midpoint_factors, modal_basis, modal_initial_state, propagate
from transwave.evolution.simulate import simulate
from transwave.generator.operator import discretize


@pytest.fixture
def basis(coarse_gen):
    return modal_basis(coarse_gen)


def test_modal_basis_diagonalizes_generator(coarse_gen, basis):
    A = np.asarray(coarse_gen.matrix)
    V = np.asarray(basis.vectors)
    assert np.allclose(A @ V, V * np.asarray(basis.values)[None, :], atol=1e-8 * np.abs(A).max())
    gram = np.asarray(coarse_gen.gram.matrix)
    norms = np.real(np.einsum("ik,ij,jk->k", V.conj(), gram, V))
    assert np.allclose(norms, 1.0)
    assert np.all(np.asarray(basis.rates) >= -1e-10)


def test_midpoint_factors_contract_for_damped_modes(basis):
    factors = np.abs(np.asarray(midpoint_factors(basis.values, 0.01)))
    assert np.all(factors <= 1.0 + 1e-12)


def test_propagate_zero_steps_restores_state(coarse_gen, basis):
    U0 = default_initial_state(coarse_gen).pack()
    states = propagate(basis, basis.coefficients(U0), 0.01, jnp.array([0]))
    assert np.allclose(np.asarray(states[0]), np.asarray(U0), atol=1e-10)


@pytest.mark.parametrize("sampling", ["uniform", "geometric"])
def test_modal_matches_step_by_step_midpoint(coarse_gen, basis, sampling):
    U0 = default_initial_state(coarse_gen)
    kwargs = dict(dt=0.01, T=5.0, sampling=sampling, sample_every=25, num_samples=40)
    scanned = simulate(coarse_gen, U0, **kwargs)
    modal = simulate(coarse_gen, U0, method="modal", basis=basis, **kwargs)
    assert np.array_equal(np.asarray(scanned.times), np.asarray(modal.times))
    assert np.allclose(np.asarray(modal.energies), np.asarray(scanned.energies), rtol=1e-9, atol=1e-12)
    assert modal.max_balance_residual < 1e-10
    assert modal.is_nonincreasing()
    assert modal.num_steps == scanned.num_steps


def test_modal_keeps_states(coarse_gen):
    U0 = default_initial_state(coarse_gen)
    trace = simulate(coarse_gen, U0, dt=0.01, T=1.0, sample_every=50, method="modal", keep_states=True)
    assert trace.states.shape == (3, coarse_gen.dim)
    assert np.allclose(np.asarray(trace.states[0]), np.asarray(U0.pack()), atol=1e-10)


def test_unknown_propagation_method(coarse_gen):
    with pytest.raises(ValueError):
        simulate(coarse_gen, default_initial_state(coarse_gen), dt=0.01, T=1.0, method="leapfrog")


def test_modal_initial_state_is_band_limited(coarse_gen, basis):
    U0 = modal_initial_state(coarse_gen, (2.0, 8.0), basis=basis)
    assert energy(coarse_gen.mats, U0) == pytest.approx(1.0)
    coefficients = np.abs(np.asarray(basis.coefficients(U0.pack())))
    freqs = np.abs(np.asarray(basis.frequencies))
    inside = (freqs >= 2.0) & (freqs <= 8.0)
    assert np.all(coefficients[~inside] < 1e-8 * coefficients.max())
    # energy per mode falls off with frequency
    low = coefficients[inside & (freqs < 4.0)]
    high = coefficients[inside & (freqs > 6.0)]
    assert low.mean() > high.mean()


def test_modal_initial_state_is_reproducible(coarse_gen, basis):
    first = modal_initial_state(coarse_gen, (2.0, 8.0), seed=3, basis=basis).pack()
    again = modal_initial_state(coarse_gen, (2.0, 8.0), seed=3, basis=basis).pack()
    other = modal_initial_state(coarse_gen, (2.0, 8.0), seed=4, basis=basis).pack()
    assert jnp.array_equal(first, again)
    assert not jnp.allclose(first, other)


def test_modal_initial_state_empty_band(coarse_gen, basis):
    with pytest.raises(ValueError):
        modal_initial_state(coarse_gen, (1000.0, 2000.0), basis=basis)


def test_decay_window(basis):
    start, end = decay_window(basis, (2.0, 8.0), decades=2.0, quantile=0.1)
    freqs = np.asarray(basis.frequencies)
    rates = np.asarray(basis.rates)[(freqs >= 2.0) & (freqs <= 8.0)]
    assert end == pytest.approx(1.0 / (2.0 * np.quantile(rates, 0.1)))
    assert end / start == pytest.approx(100.0)


def test_decay_window_needs_damping():
    cfg = validate_config(with_values(validated_default(), d2=0.0))
    basis = modal_basis(discretize(cfg, 0.1))
    with pytest.raises(ValueError):
        decay_window(basis, (2.0, 8.0))
