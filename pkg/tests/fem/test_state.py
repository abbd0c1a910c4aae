import jax.numpy as jnp
import pytest

from transwave.errors import DimensionMismatch
from transwave.fem.state import StateVector


def test_pack_layout():
    U = StateVector(p_w=jnp.array([1.0]), p_s=jnp.array([2.0]), q_w=jnp.array([3.0]), q_s=jnp.array([4.0]))
    assert jnp.array_equal(U.pack(), jnp.array([1.0, 2.0, 3.0, 4.0]))
    assert U.n == 1


def test_unpack_inverts_pack():
    vector = jnp.arange(12.0)
    U = StateVector.unpack(vector, n=3)
    assert jnp.array_equal(U.q_w, jnp.array([6.0, 7.0, 8.0]))
    assert jnp.array_equal(U.pack(), vector)


def test_unpack_rejects_wrong_size():
    with pytest.raises(DimensionMismatch):
        StateVector.unpack(jnp.arange(10.0))
    with pytest.raises(DimensionMismatch):
        StateVector.unpack(jnp.arange(12.0), n=4)


def test_blocks_must_match():
    with pytest.raises(DimensionMismatch):
        StateVector(p_w=jnp.zeros(2), p_s=jnp.zeros(3), q_w=jnp.zeros(2), q_s=jnp.zeros(2))


def test_zeros_scaled_and_check_size():
    U = StateVector.zeros(4)
    assert U.n == 4
    U.check_size(4)
    with pytest.raises(DimensionMismatch):
        U.check_size(5)
    V = StateVector.unpack(jnp.ones(8)).scaled(2.0)
    assert jnp.allclose(V.pack(), 2.0)


def test_complex_state():
    U = StateVector.unpack(jnp.ones(8) * (1 + 1j))
    assert U.p_w.dtype == jnp.complex128
