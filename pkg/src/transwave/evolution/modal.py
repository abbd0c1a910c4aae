"""Modal description of the discrete evolution.

A_h is diagonalizable for the configurations of interest, A_h = V diag(μ) V⁻¹. One implicit midpoint step
multiplies each modal coefficient by g = (1 + dt·μ/2)/(1 − dt·μ/2), so the state after k steps is
V diag(gᵏ) V⁻¹ U₀ exactly. This gives midpoint iterates at arbitrary step counts without stepping, which
is what long polynomial tails need, and it gives band-limited smooth initial data.
"""

import math

import jax
import jax.numpy as jnp
import numpy as np
import scipy.linalg
from loguru import logger

from transwave import constants
from transwave.core.jax.pytrees import TreeClass, autoinit, field, frozen_field
from transwave.core.physics.metrics import normalize_by_energy
from transwave.errors import SizeExceeded, SolveFailure
from transwave.fem.state import StateVector
from transwave.generator.operator import GeneratorOperator
from transwave.typing import Interval


@autoinit
class ModalBasis(TreeClass):
    """Eigenpairs of A_h with eigenvectors of unit energy norm."""

    values: jax.Array = field()

    #: Columns are the eigenvectors, packed like a state.
    vectors: jax.Array = field()

    #: 2-norm condition number of the eigenvector matrix.
    condition: float = frozen_field()

    @property
    def rates(self) -> jax.Array:
        """Amplitude decay rates −Re μ; modal energies decay at twice this rate."""
        return -jnp.real(self.values)

    @property
    def frequencies(self) -> jax.Array:
        return jnp.imag(self.values)

    def coefficients(self, U: jax.Array) -> jax.Array:
        """Modal coefficients c with U = V c."""
        return jnp.asarray(scipy.linalg.solve(np.asarray(self.vectors), np.asarray(U, dtype=complex)))


def modal_basis(gen: GeneratorOperator) -> ModalBasis:
    """Dense eigendecomposition of A_h.

    Raises:
        SizeExceeded: above the dense size limit.
        SolveFailure: if the eigenvector matrix is numerically singular (A_h not diagonalizable).
    """
    if gen.n > constants.MAX_DENSE_DOF:
        raise SizeExceeded(f"n={gen.n} DOFs per chain exceeds the dense limit {constants.MAX_DENSE_DOF}")
    values, vectors = scipy.linalg.eig(np.asarray(gen.matrix))
    gram = np.asarray(gen.gram.matrix)
    norms = np.sqrt(np.real(np.einsum("ik,ij,jk->k", vectors.conj(), gram, vectors)))
    vectors = vectors / norms[None, :]
    condition = float(np.linalg.cond(vectors))
    if not math.isfinite(condition) or condition > 1.0 / np.finfo(float).eps:
        raise SolveFailure(f"Eigenvector matrix of A_h is numerically singular (condition {condition:.3g})")
    logger.debug(f"Modal basis of dimension {values.size}, eigenvector condition {condition:.3g}")
    return ModalBasis(values=jnp.asarray(values), vectors=jnp.asarray(vectors), condition=condition)


def midpoint_factors(values: jax.Array, dt: float) -> jax.Array:
    """Per-mode amplification g = (1 + dt·μ/2)/(1 − dt·μ/2) of one implicit midpoint step."""
    half = 0.5 * dt * values
    return (1.0 + half) / (1.0 - half)


def propagate(basis: ModalBasis, coefficients: jax.Array, dt: float, steps: jax.Array) -> jax.Array:
    """Real states after ``steps`` midpoint steps, one row per entry of ``steps``."""
    log_g = jnp.log(midpoint_factors(basis.values, dt))
    powers = jnp.exp(jnp.asarray(steps, dtype=jnp.float64)[:, None] * log_g[None, :])
    return jnp.real((powers * coefficients[None, :]) @ basis.vectors.T)


def modal_initial_state(
    gen: GeneratorOperator,
    band: Interval,
    exponent: float = constants.MODAL_DATA_EXPONENT,
    seed: int = 0,
    basis: ModalBasis | None = None,
) -> StateVector:
    """Smooth band-limited initial data with modal energy decaying like ω^(−exponent).

    Every eigenmode with frequency ω = Im μ in ``band`` (ω > 0; the conjugate mode comes with the real part)
    gets energy proportional to ω^(−exponent) and a random phase drawn from ``seed``. For exponents above 3
    the continuous counterpart of this data lies in the domain of the generator. The result has unit energy.

    Raises:
        ValueError: if no mode lies in ``band``.
    """
    basis = modal_basis(gen) if basis is None else basis
    freqs = np.asarray(basis.frequencies)
    selected = np.nonzero((freqs >= band[0]) & (freqs <= band[1]) & (freqs > 0))[0]
    if selected.size == 0:
        raise ValueError(f"No eigenfrequency of A_h lies in {band}")
    amplitudes = freqs[selected] ** (-0.5 * exponent)
    phases = jax.random.uniform(jax.random.PRNGKey(seed), (selected.size,), maxval=2 * math.pi)
    modes = basis.vectors[:, selected] * (amplitudes * jnp.exp(1j * phases))[None, :]
    U = jnp.real(jnp.sum(modes, axis=1))
    logger.debug(f"Modal initial data from {selected.size} modes with frequencies in {band}")
    return normalize_by_energy(gen.mats, StateVector.unpack(U, gen.n))


def decay_window(
    basis: ModalBasis,
    band: Interval,
    decades: float = constants.POLY_WINDOW_DECADES,
    quantile: float = constants.POLY_HORIZON_QUANTILE,
) -> Interval:
    """Time window over which modal data from ``band`` decays through its slow modes.

    A mode with rate r has lost a factor e of its energy at t = 1/(2r). The window ends when only the
    slowest ``quantile`` fraction of the modes in ``band`` has not yet reached that point, and it starts
    ``decades`` decades earlier.

    Raises:
        ValueError: if no mode lies in ``band`` or the slow modes do not decay.
    """
    freqs = np.asarray(basis.frequencies)
    rates = np.asarray(basis.rates)[(freqs >= band[0]) & (freqs <= band[1]) & (freqs > 0)]
    if rates.size == 0:
        raise ValueError(f"No eigenfrequency of A_h lies in {band}")
    rate = float(np.quantile(rates, quantile))
    if not rate > constants.IMAG_AXIS_TOL:
        raise ValueError(f"Modes in {band} include undamped ones (rate quantile {rate:.3g}), no decay window")
    end = 1.0 / (2.0 * rate)
    return (end / 10**decades, end)
