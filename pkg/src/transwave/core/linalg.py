import jax
import jax.numpy as jnp

from transwave.core.jax.pytrees import TreeClass, autoinit, frozen_field
from transwave.errors import IndefiniteGram


@autoinit
class LineFit(TreeClass):
    """Least-squares line y ≈ slope·x + intercept."""

    slope: float = frozen_field()
    intercept: float = frozen_field()

    #: Coefficient of determination, clipped to [0, 1]. 0 if the data have no variance.
    r_squared: float = frozen_field()

    num_points: int = frozen_field()


def fit_line(x: jax.Array, y: jax.Array) -> LineFit:
    """Fits a straight line by least squares.

    Args:
        x (jax.Array): Abscissae, shape (m,)
        y (jax.Array): Ordinates, shape (m,)

    Returns:
        LineFit: slope, intercept and R² of the fit
    """
    x = jnp.asarray(x, dtype=jnp.float64)
    y = jnp.asarray(y, dtype=jnp.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"Expected two 1D arrays of equal length, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise ValueError(f"Need at least two points for a line fit, got {x.size}")
    design = jnp.stack([x, jnp.ones_like(x)], axis=1)
    (slope, intercept), *_ = jnp.linalg.lstsq(design, y)
    residual = y - (slope * x + intercept)
    ss_res = float(jnp.sum(residual**2))
    ss_tot = float(jnp.sum((y - jnp.mean(y)) ** 2))
    r_squared = 0.0 if ss_tot == 0.0 else min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return LineFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r_squared,
        num_points=int(x.size),
    )


def cholesky_factor(gram: jax.Array) -> jax.Array:
    """Lower Cholesky factor L of a symmetric positive definite matrix, gram = L Lᵀ.

    Raises:
        IndefiniteGram: if the factorization breaks down (JAX signals this with NaNs).
    """
    factor = jnp.linalg.cholesky(gram)
    if not bool(jnp.all(jnp.isfinite(factor))):
        raise IndefiniteGram("Energy Gram matrix is not positive definite (coercivity lost)")
    return factor


def h_inner(gram: jax.Array, u: jax.Array, v: jax.Array) -> jax.Array:
    """Energy inner product ⟨u, v⟩ = vᴴ·gram·u, linear in the first argument."""
    return jnp.vdot(v, gram @ u)


def h_norm(gram: jax.Array, u: jax.Array) -> jax.Array:
    """Energy norm sqrt(uᴴ·gram·u)."""
    return jnp.sqrt(jnp.maximum(jnp.real(h_inner(gram, u, u)), 0.0))


def smallest_singular_value(matrix: jax.Array) -> jax.Array:
    return jnp.linalg.svd(matrix, compute_uv=False)[-1]
