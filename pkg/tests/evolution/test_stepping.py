import jax
import jax.numpy as jnp
import numpy as np
import pytest
import scipy.linalg

from transwave.config import validate_config, validated_default, with_values
from transwave.core.physics.metrics import energy
from transwave.evolution.initialization import default_initial_state
from transwave.evolution.stepping import make_stepper, step_midpoint
from transwave.fem.state import StateVector
from transwave.generator.operator import discretize


def random_packed(n: int, seed: int = 0) -> jax.Array:
    return jax.random.normal(jax.random.PRNGKey(seed), (4 * n,), dtype=jnp.float64)


def test_step_solves_midpoint_system(coarse_gen):
    stepper = make_stepper(coarse_gen, 0.01)
    U = random_packed(coarse_gen.n)
    U_next = stepper.step(U)
    A = coarse_gen.matrix
    lhs = U_next - 0.005 * A @ U_next
    rhs = U + 0.005 * A @ U
    assert jnp.allclose(lhs, rhs, atol=1e-10)


def test_discrete_energy_law(coarse_gen):
    dt = 0.05
    stepper = make_stepper(coarse_gen, dt)
    U = random_packed(coarse_gen.n, 1)
    U_next = stepper.step(U)
    gram = coarse_gen.gram.matrix
    n = coarse_gen.n
    q_mid = 0.5 * (U[2 * n : 3 * n] + U_next[2 * n : 3 * n])
    delta = 0.5 * U_next @ gram @ U_next - 0.5 * U @ gram @ U
    assert float(delta) == pytest.approx(-dt * float(q_mid @ coarse_gen.mats.damping @ q_mid), rel=1e-9, abs=1e-12)
    assert float(delta) <= 0


def test_energy_conserved_without_damping():
    cfg = validate_config(with_values(validated_default(), d2=0.0))
    gen = discretize(cfg, 0.1)
    stepper = make_stepper(gen, 0.1)
    U = StateVector.unpack(random_packed(gen.n, 2))
    V = StateVector.unpack(stepper.step(U.pack()))
    assert energy(gen.mats, V) == pytest.approx(energy(gen.mats, U), rel=1e-12)


def test_step_back_inverts_step(coarse_gen):
    stepper = make_stepper(coarse_gen, 0.02, reversible=True)
    assert stepper.reversible
    U = random_packed(coarse_gen.n, 3)
    assert jnp.allclose(stepper.step_back(stepper.step(U)), U, atol=1e-10)


def test_step_back_needs_reversible(coarse_gen):
    stepper = make_stepper(coarse_gen, 0.02)
    assert not stepper.reversible
    with pytest.raises(ValueError):
        stepper.step_back(random_packed(coarse_gen.n))


@pytest.mark.parametrize("dt", [0.0, -0.1])
def test_invalid_time_step(coarse_gen, dt):
    with pytest.raises(ValueError):
        make_stepper(coarse_gen, dt)


def test_step_midpoint_matches_stepper(coarse_gen):
    U = StateVector.unpack(random_packed(coarse_gen.n, 4))
    V = step_midpoint(coarse_gen, U, 0.01)
    assert jnp.allclose(V.pack(), make_stepper(coarse_gen, 0.01).step(U.pack()))


def test_local_error_is_third_order(coarse_gen):
    U = default_initial_state(coarse_gen).pack()
    A = np.asarray(coarse_gen.matrix)

    def local_error(dt):
        exact = scipy.linalg.expm(dt * A) @ np.asarray(U)
        return np.linalg.norm(np.asarray(make_stepper(coarse_gen, dt).step(U)) - exact)

    ratio = local_error(1e-3) / local_error(5e-4)
    assert 7.0 <= ratio <= 9.0
