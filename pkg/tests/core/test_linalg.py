import jax.numpy as jnp
import pytest

from transwave.core.linalg import cholesky_factor, fit_line, h_inner, h_norm, smallest_singular_value
from transwave.errors import IndefiniteGram


def test_fit_line_exact():
    x = jnp.linspace(0.0, 1.0, 11)
    fit = fit_line(x, 3.0 * x - 2.0)
    assert fit.slope == pytest.approx(3.0)
    assert fit.intercept == pytest.approx(-2.0)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.num_points == 11


def test_fit_line_constant_data_has_zero_r_squared():
    x = jnp.arange(5.0)
    fit = fit_line(x, jnp.ones(5))
    assert fit.slope == pytest.approx(0.0, abs=1e-12)
    assert fit.r_squared == 0.0


def test_fit_line_noisy_data_r_squared_below_one():
    x = jnp.arange(6.0)
    y = x + jnp.array([0.3, -0.3, 0.3, -0.3, 0.3, -0.3])
    fit = fit_line(x, y)
    assert 0.9 < fit.r_squared < 1.0


def test_fit_line_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_line(jnp.arange(3.0), jnp.arange(4.0))
    with pytest.raises(ValueError):
        fit_line(jnp.ones(1), jnp.ones(1))


def test_cholesky_factor_reconstructs():
    gram = jnp.array([[4.0, 1.0], [1.0, 3.0]])
    factor = cholesky_factor(gram)
    assert jnp.allclose(factor @ factor.T, gram)
    assert factor[0, 1] == 0.0


def test_cholesky_factor_indefinite():
    with pytest.raises(IndefiniteGram):
        cholesky_factor(jnp.array([[1.0, 2.0], [2.0, 1.0]]))


def test_h_inner_and_norm():
    gram = jnp.diag(jnp.array([1.0, 4.0]))
    u = jnp.array([1.0, 1.0])
    v = jnp.array([0.0, 1.0])
    assert h_inner(gram, u, v) == pytest.approx(4.0)
    assert h_norm(gram, u) == pytest.approx(jnp.sqrt(5.0))


def test_h_inner_conjugates_second_argument():
    gram = jnp.eye(1)
    u = jnp.array([1.0 + 0j])
    v = jnp.array([1j])
    assert complex(h_inner(gram, u, v)) == pytest.approx(-1j)


def test_smallest_singular_value():
    matrix = jnp.diag(jnp.array([3.0, -0.5, 2.0]))
    assert smallest_singular_value(matrix) == pytest.approx(0.5)
