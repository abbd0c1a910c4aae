import jax
import jax.numpy as jnp
import pytest

from transwave.config import validate_config, validated_default, with_values
from transwave.core.physics.metrics import energy
from transwave.errors import DimensionMismatch
from transwave.evolution.modal import modal_basis
from transwave.fem.state import StateVector
from transwave.generator.operator import (
    apply_generator,
    discretize,
    dissipation_identity,
    graph_norm,
    h_norm_of,
    static_block_matrix,
    static_solve,
)


def random_state(n: int, seed: int = 0) -> StateVector:
    return StateVector.unpack(jax.random.normal(jax.random.PRNGKey(seed), (4 * n,), dtype=jnp.float64))


def test_generator_shape(coarse_gen):
    assert coarse_gen.matrix.shape == (coarse_gen.dim, coarse_gen.dim)
    assert coarse_gen.dim == 4 * coarse_gen.n
    assert coarse_gen.regime == "a2_equal_1"


def test_displacement_rows_copy_velocity(coarse_gen):
    U = random_state(coarse_gen.n)
    AU = apply_generator(coarse_gen, U)
    assert jnp.allclose(AU.p_w, U.q_w)
    assert jnp.allclose(AU.p_s, U.q_s)


def test_velocity_rows(coarse_gen):
    mats = coarse_gen.mats
    U = random_state(coarse_gen.n, seed=1)
    AU = apply_generator(coarse_gen, U)
    force_w = mats.stiffness_w @ U.p_w + mats.coupling_c1 @ U.p_s + mats.damping @ U.q_w + mats.coupling_c2 @ U.q_s
    force_s = mats.stiffness_s @ U.p_s + mats.coupling_c1 @ U.p_w - mats.coupling_c2 @ U.q_w
    assert jnp.allclose(mats.mass @ AU.q_w, -force_w, atol=1e-9)
    assert jnp.allclose(mats.mass @ AU.q_s, -force_s, atol=1e-9)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_dissipation_identity(coarse_gen, seed):
    lhs, rhs = dissipation_identity(coarse_gen, random_state(coarse_gen.n, seed))
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-10)
    assert lhs <= 0


def test_velocity_coupling_is_energy_neutral():
    cfg = validate_config(with_values(validated_default(), d2=0.0))
    gen = discretize(cfg, 0.1)
    lhs, rhs = dissipation_identity(gen, random_state(gen.n, 3))
    assert rhs == 0.0
    assert abs(lhs) < 1e-8


def test_h_norm_is_twice_energy(coarse_gen):
    U = random_state(coarse_gen.n, 4)
    assert h_norm_of(coarse_gen, U) ** 2 == pytest.approx(2 * energy(coarse_gen.mats, U))
    assert graph_norm(coarse_gen, U) >= h_norm_of(coarse_gen, U)


def test_static_block_matrix(coarse_gen):
    n = coarse_gen.n
    A = coarse_gen.matrix
    M = coarse_gen.mats.mass
    B = static_block_matrix(coarse_gen.mats)
    assert jnp.allclose(B[: 2 * n], -A[: 2 * n])
    assert jnp.allclose(B[2 * n : 3 * n], -M @ A[2 * n : 3 * n], atol=1e-9)
    assert jnp.allclose(B[3 * n :], -M @ A[3 * n :], atol=1e-9)


def test_static_solve_residual(coarse_gen):
    F = random_state(coarse_gen.n, 5)
    U = static_solve(coarse_gen, F)
    residual = -apply_generator(coarse_gen, U).pack() - F.pack()
    assert jnp.linalg.norm(residual) <= 1e-8 * jnp.linalg.norm(F.pack())
    assert jnp.allclose(U.q_w, -F.p_w)
    assert jnp.allclose(U.q_s, -F.p_s)


def test_static_solve_rejects_nonfinite(coarse_gen):
    F = StateVector.zeros(coarse_gen.n)
    F = F.aset("p_w", F.p_w.at[0].set(jnp.nan))
    with pytest.raises(ValueError):
        static_solve(coarse_gen, F)


def test_dimension_mismatch(coarse_gen):
    with pytest.raises(DimensionMismatch):
        apply_generator(coarse_gen, StateVector.zeros(coarse_gen.n + 1))


def test_polynomial_regime():
    gen = discretize(validated_default(a2=2.0), 0.1)
    assert gen.regime == "a2_not_1"
    lhs, rhs = dissipation_identity(gen, random_state(gen.n, 6))
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-10)


def test_dissipation_identity_on_random_states(cfg):
    gen = discretize(cfg, 0.02)
    n = gen.n
    states = jax.random.normal(jax.random.PRNGKey(7), (1000, 4 * n), dtype=jnp.float64)
    gram, A, damping = gen.gram.matrix, gen.matrix, gen.mats.damping
    lhs = jnp.einsum("si,ij,sj->s", states, gram, states @ A.T)
    q_w = states[:, 2 * n : 3 * n]
    rhs = -jnp.einsum("si,ij,sj->s", q_w, damping, q_w)
    norms_sq = jnp.einsum("si,ij,sj->s", states, gram, states)
    assert float(jnp.max(jnp.abs(lhs - rhs) / norms_sq)) <= 1e-10
    first = dissipation_identity(gen, StateVector.unpack(states[0]))
    assert first[0] == pytest.approx(float(lhs[0]), rel=1e-10)
    assert first[1] == pytest.approx(float(rhs[0]), rel=1e-10)


def test_graph_norm_of_unit_eigenvector(coarse_gen):
    basis = modal_basis(coarse_gen)
    for k in (0, coarse_gen.dim // 2, coarse_gen.dim - 1):
        mode = StateVector.unpack(basis.vectors[:, k])
        expected = float(jnp.sqrt(1.0 + jnp.abs(basis.values[k]) ** 2))
        assert graph_norm(coarse_gen, mode) == pytest.approx(expected, rel=1e-8)
