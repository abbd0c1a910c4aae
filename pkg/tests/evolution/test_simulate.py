import jax.numpy as jnp
import numpy as np
import pytest

from transwave.config import validate_config, validated_default, with_values
from transwave.errors import DimensionMismatch
from transwave.evolution.initialization import default_initial_state
from transwave.evolution.simulate import simulate
from transwave.fem.state import StateVector
from transwave.generator.operator import discretize, graph_norm


@pytest.fixture
def trace(coarse_gen):
    return simulate(coarse_gen, default_initial_state(coarse_gen), dt=0.01, T=2.0, sample_every=10)


def test_uniform_sampling(trace):
    assert trace.num_steps == 200
    assert trace.times.shape == (21,)
    assert trace.times[0] == 0.0
    assert trace.times[-1] == pytest.approx(2.0)
    assert trace.energies.shape == trace.balance_residuals.shape
    assert trace.states is None
    assert trace.config_tag == "a2_equal_1"


def test_energy_balance(trace):
    assert trace.initial_energy == pytest.approx(1.0)
    assert trace.max_balance_residual < 1e-10
    assert trace.is_nonincreasing()
    assert float(trace.energies[-1]) < trace.initial_energy


def test_initial_graph_norm(coarse_gen, trace):
    assert trace.initial_graph_norm == pytest.approx(graph_norm(coarse_gen, default_initial_state(coarse_gen)))


def test_geometric_sampling(coarse_gen):
    trace = simulate(coarse_gen, default_initial_state(coarse_gen), dt=0.01, T=10.0, sampling="geometric", num_samples=30)
    times = np.asarray(trace.times)
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(10.0)
    assert np.all(np.diff(times) > 0)
    assert len(times) <= 30
    assert trace.is_nonincreasing()


def test_runs_across_scan_blocks(coarse_gen):
    # 2500 steps span two compiled blocks
    trace = simulate(coarse_gen, default_initial_state(coarse_gen), dt=0.01, T=25.0, sample_every=500)
    assert trace.num_steps == 2500
    assert list(np.round(np.asarray(trace.times), 8)) == [0.0, 5.0, 10.0, 15.0, 20.0, 25.0]
    assert trace.max_balance_residual < 1e-10


def test_keep_states(coarse_gen):
    U0 = default_initial_state(coarse_gen)
    trace = simulate(coarse_gen, U0, dt=0.01, T=0.5, sample_every=10, keep_states=True)
    assert trace.states.shape == (trace.times.shape[0], coarse_gen.dim)
    assert jnp.allclose(trace.states[0], U0.pack())
    gram = coarse_gen.gram.matrix
    for state, E in zip(trace.states, trace.energies):
        assert float(0.5 * state @ gram @ state) == pytest.approx(float(E))


def test_energy_conserved_without_damping():
    cfg = validate_config(with_values(validated_default(), d2=0.0))
    gen = discretize(cfg, 0.1)
    trace = simulate(gen, default_initial_state(gen), dt=0.05, T=5.0)
    assert jnp.allclose(trace.energies, 1.0, rtol=1e-10)


def test_invalid_arguments(coarse_gen):
    U0 = default_initial_state(coarse_gen)
    with pytest.raises(ValueError):
        simulate(coarse_gen, U0, dt=0.01, T=0.0)
    with pytest.raises(ValueError):
        simulate(coarse_gen, U0, dt=0.01, T=1.0, sampling="random")
    with pytest.raises(DimensionMismatch):
        simulate(coarse_gen, StateVector.zeros(coarse_gen.n + 1), dt=0.01, T=1.0)


@pytest.mark.slow
def test_energy_balance_over_long_run(cfg):
    gen = discretize(cfg, 0.02)
    trace = simulate(gen, default_initial_state(gen), dt=0.01, T=100.0, sample_every=100)
    assert trace.num_steps == 10_000
    assert trace.max_balance_residual <= 1e-10 * trace.initial_energy
    assert trace.is_nonincreasing()


@pytest.mark.slow
def test_energy_drift_without_damping_or_coupling(cfg):
    gen = discretize(with_values(cfg, c2=0.0, d2=0.0), 0.02)
    trace = simulate(gen, default_initial_state(gen), dt=0.01, T=100.0, sample_every=100)
    assert trace.num_steps == 10_000
    assert float(jnp.max(jnp.abs(trace.energies - trace.initial_energy))) <= 1e-10
