"""Resolvent norm of A_h along the imaginary axis in the energy norm.

With H = L Lᵀ the energy norm is ‖x‖_H = ‖Lᵀx‖₂, so the H-operator norm of (iλ − A_h)⁻¹ equals the
spectral norm of (iλ − Ã)⁻¹ with Ã = Lᵀ A_h L⁻ᵀ, i.e. 1/σ_min(iλ − Ã).

Resonance peaks of weakly damped modes are far narrower than any practical frequency grid. The sweep
therefore adds the in-band eigenfrequencies to the grid and sharpens every local maximum by a bounded
scalar search for the minimum of σ_min before fitting the growth of the envelope.
"""

import math
import warnings
from typing import Callable

import jax
import jax.numpy as jnp
import jax.scipy.linalg as jsl
import numpy as np
import scipy.optimize
from loguru import logger
from rich.progress import Progress

from transwave import constants
from transwave.core.jax.pytrees import TreeClass, autoinit, field, frozen_field
from transwave.core.linalg import fit_line, smallest_singular_value
from transwave.core.misc import local_maxima_indices
from transwave.errors import BandTooNarrow, NearSingularWarning, SizeExceeded
from transwave.generator.operator import GeneratorOperator
from transwave.spectrum.eigen import eigenvalues
from transwave.typing import Interval

# number of frequencies per vectorized batch, between progress updates
_SWEEP_BATCH = 16


@autoinit
class ResolventSamples(TreeClass):
    """Resolvent norms on a frequency grid with the fitted envelope growth exponent."""

    lambdas: jax.Array = field()
    norms: jax.Array = field()

    #: True where the grid sample is a local maximum of the sampled curve.
    is_envelope: jax.Array = field()

    #: True where the evaluation was numerically on the spectrum.
    near_singular: jax.Array = field()

    #: Peak frequencies of the refined envelope, ascending.
    envelope_lambdas: jax.Array = field()

    #: Resolvent norm at each refined peak.
    envelope_norms: jax.Array = field()

    envelope_near_singular: jax.Array = field()

    #: True for the per-bin maxima entering the growth fit.
    envelope_in_fit: jax.Array = field()

    #: ℓ with norms ~ λ^ℓ on the envelope, None if the fit abstained.
    fitted_exponent: float | None = frozen_field()

    #: R² of the log-log envelope regression, None if the fit abstained.
    r_squared: float | None = frozen_field()

    valid_band: Interval = frozen_field()

    #: Number of requested frequencies dropped because they lie outside the resolved band.
    num_clipped: int = frozen_field(default=0)

    #: True if the envelope lies numerically on the spectrum and no exponent is reported.
    abstained: bool = frozen_field(default=False)

    @property
    def num_envelope(self) -> int:
        return int(self.envelope_lambdas.size)

    @property
    def predicted_energy_slope(self) -> float | None:
        """Energy decay slope −2/ℓ implied by resolvent growth λ^ℓ (None unless ℓ > 0)."""
        if self.fitted_exponent is None or self.fitted_exponent <= 0:
            return None
        return -2.0 / self.fitted_exponent


def energy_similarity(gen: GeneratorOperator) -> jax.Array:
    """Ã = Lᵀ A_h L⁻ᵀ, the generator in coordinates where the energy norm is Euclidean."""
    chol = gen.gram.cholesky
    right = jsl.solve_triangular(chol, gen.matrix.T, lower=True).T
    return chol.T @ right


def valid_band(gen: GeneratorOperator) -> Interval:
    """Frequencies (0, 0.2·π/h] for which the discrete dispersion still follows the continuous one."""
    return (0.0, constants.BAND_SAFETY_FACTOR * math.pi / gen.mesh.h_max)


def _min_singular_values(similar: jax.Array, lambdas: jax.Array) -> jax.Array:
    eye = jnp.eye(similar.shape[0], dtype=jnp.complex128)

    def sigma_min(lam: jax.Array) -> jax.Array:
        return smallest_singular_value(1j * lam * eye - similar)

    return jax.lax.map(sigma_min, lambdas)


def _scalar_sigma(similar: jax.Array) -> Callable[[float], float]:
    eye = jnp.eye(similar.shape[0], dtype=jnp.complex128)
    sigma_min = jax.jit(lambda lam: smallest_singular_value(1j * lam * eye - similar))
    return lambda lam: float(sigma_min(jnp.float64(lam)))


def _near_singular(sigmas: jax.Array, lambdas: jax.Array) -> jax.Array:
    return sigmas <= constants.NEAR_SINGULAR_TOL * (1.0 + jnp.abs(lambdas))


def _report_near_singular(lambdas: np.ndarray):
    message = (
        f"Resolvent evaluated on the spectrum at {lambdas.size} frequencies "
        f"(first: lambda={lambdas[0]:.12g}); norms there are dominated by roundoff"
    )
    logger.warning(message)
    warnings.warn(message, NearSingularWarning, stacklevel=3)


def _inverse(sigmas: np.ndarray) -> np.ndarray:
    # exact zeros only happen on the spectrum; keep the norm finite
    return 1.0 / np.maximum(sigmas, np.finfo(float).tiny)


def resolvent_norm(gen: GeneratorOperator, lam: float, similar: jax.Array | None = None) -> float:
    """‖(iλ − A_h)⁻¹‖ in the energy norm.

    Emits :class:`NearSingularWarning` if iλ is numerically an eigenvalue; the (huge) value is still returned.

    Args:
        gen (GeneratorOperator): Discrete generator.
        lam (float): Real frequency λ.
        similar (jax.Array | None, optional): Precomputed :func:`energy_similarity` of ``gen``.

    Returns:
        float: the resolvent norm.
    """
    similar = energy_similarity(gen) if similar is None else similar
    lambdas = jnp.asarray([lam], dtype=jnp.float64)
    sigma = _min_singular_values(similar, lambdas)
    if bool(_near_singular(sigma, lambdas)[0]):
        _report_near_singular(np.asarray(lambdas))
    if float(sigma[0]) == 0.0:
        return math.inf
    return float(1.0 / sigma[0])


def _in_band_eigenfrequencies(gen: GeneratorOperator, low: float, high: float) -> np.ndarray:
    try:
        values = np.asarray(eigenvalues(gen).eigenvalues)
    except SizeExceeded as e:
        logger.debug(f"Peak seeding without eigenfrequencies: {e}")
        return np.zeros((0,))
    freqs = np.imag(values)
    return np.unique(freqs[(freqs > low) & (freqs < high)])


def _refine_peaks(
    sigma_fn: Callable[[float], float], lambdas: np.ndarray, sigmas: np.ndarray, peaks: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Bounded minimization of σ_min over each peak bracket (λᵢ₋₁, λᵢ₊₁), clamped at the ends."""
    last = lambdas.size - 1
    refined_lambdas = lambdas[peaks].copy()
    refined_sigmas = sigmas[peaks].copy()
    for k, i in enumerate(peaks):
        low, high = lambdas[max(i - 1, 0)], lambdas[min(i + 1, last)]
        if not high > low:
            continue
        result = scipy.optimize.minimize_scalar(
            sigma_fn,
            bounds=(low, high),
            method="bounded",
            options={
                "xatol": constants.PEAK_REFINE_XTOL * max(1.0, lambdas[i]),
                "maxiter": constants.PEAK_REFINE_MAXITER,
            },
        )
        if result.fun < refined_sigmas[k]:
            refined_lambdas[k], refined_sigmas[k] = float(result.x), float(result.fun)
    return refined_lambdas, refined_sigmas


def _bin_maxima(lambdas: np.ndarray, norms: np.ndarray, usable: np.ndarray) -> np.ndarray:
    """Mask of the largest usable norm in every log-frequency bin."""
    bins = np.floor(np.log10(lambdas) * constants.ENVELOPE_BINS_PER_DECADE).astype(int)
    mask = np.zeros(lambdas.shape, dtype=bool)
    for b in np.unique(bins[usable]):
        members = np.nonzero(usable & (bins == b))[0]
        mask[members[np.argmax(norms[members])]] = True
    return mask


def resolvent_sweep(
    gen: GeneratorOperator,
    grid: jax.Array,
    progress: Progress | None = None,
    eigenfrequencies: np.ndarray | None = None,
) -> ResolventSamples:
    """Samples the resolvent norm on a frequency grid and fits the growth of its upper envelope.

    Frequencies outside the valid band (0, 0.2·π/h] are dropped with a warning. Grid points are evaluated in
    batches of independent solves; the output order follows the grid.

    The envelope is built from the local maxima of the grid merged with the in-band eigenfrequencies, each
    sharpened by a bounded search over its bracket. The exponent ℓ is the log-log slope through the
    largest peak of every log-frequency bin, so it measures the growth of sup ‖(iλ − A_h)⁻¹‖. If more than
    half of the peaks are numerically on the spectrum (no damping reaches those modes) the fit abstains.

    Args:
        gen (GeneratorOperator): Discrete generator.
        grid (jax.Array): Ascending positive frequencies.
        progress (Progress | None, optional): Rich progress bar to report to.
        eigenfrequencies (np.ndarray | None, optional): Imaginary parts of the spectrum used to seed the
            peaks. Computed with a dense eigensolve if omitted.

    Returns:
        ResolventSamples: grid norms, refined envelope and the fitted exponent.

    Raises:
        BandTooNarrow: if fewer than 8 envelope points remain inside the valid band.
    """
    grid = jnp.asarray(grid, dtype=jnp.float64)
    band = valid_band(gen)
    nonpositive = np.asarray(grid <= band[0])
    above = np.asarray(grid > band[1])
    if np.any(nonpositive):
        logger.warning(f"Dropped {int(np.sum(nonpositive))} nonpositive frequencies")
    if np.any(above):
        logger.warning(f"Dropped {int(np.sum(above))} frequencies above the resolved band limit {band[1]:.6g}")
    inside = ~(nonpositive | above)
    num_clipped = int(np.sum(~inside))
    lambdas = grid[inside]
    if lambdas.size == 0:
        raise BandTooNarrow(f"No grid frequency lies inside the resolved band {band}")

    similar = energy_similarity(gen)
    task = None if progress is None else progress.add_task("Resolvent sweep", total=int(lambdas.size))
    chunks = []
    for start in range(0, int(lambdas.size), _SWEEP_BATCH):
        batch = lambdas[start : start + _SWEEP_BATCH]
        chunks.append(_min_singular_values(similar, batch))
        if progress is not None and task is not None:
            progress.update(task, advance=int(batch.size))
    sigmas = jnp.concatenate(chunks)
    if progress is not None and task is not None:
        progress.update(task, visible=False)

    near = _near_singular(sigmas, lambdas)
    if bool(jnp.any(near)):
        _report_near_singular(np.asarray(lambdas[near]))
    norms = 1.0 / sigmas
    grid_peaks = local_maxima_indices(norms)
    envelope = np.zeros(lambdas.shape, dtype=bool)
    envelope[grid_peaks] = True

    # seed with the eigenfrequencies, then sharpen every local maximum of the merged curve
    low, high = float(lambdas[0]), float(lambdas[-1])
    if eigenfrequencies is None:
        seeds = _in_band_eigenfrequencies(gen, low, high)
    else:
        seeds = np.asarray(eigenfrequencies, dtype=float)
        seeds = np.unique(seeds[(seeds > low) & (seeds < high)])
    seed_sigmas = np.asarray(_min_singular_values(similar, jnp.asarray(seeds))) if seeds.size else np.zeros((0,))
    merged = np.concatenate([np.asarray(lambdas), seeds])
    merged_sigmas = np.concatenate([np.asarray(sigmas), seed_sigmas])
    order = np.argsort(merged, kind="stable")
    merged, merged_sigmas = merged[order], merged_sigmas[order]

    peaks = local_maxima_indices(_inverse(merged_sigmas))
    if peaks.size < constants.MIN_ENVELOPE_POINTS:
        raise BandTooNarrow(
            f"Only {peaks.size} envelope points in the resolved band {band}, need {constants.MIN_ENVELOPE_POINTS}"
        )
    logger.debug(f"Refining {peaks.size} resolvent peaks ({seeds.size} eigenfrequency seeds)")
    peak_lambdas, peak_sigmas = _refine_peaks(_scalar_sigma(similar), merged, merged_sigmas, peaks)
    order = np.argsort(peak_lambdas, kind="stable")
    peak_lambdas, peak_sigmas = peak_lambdas[order], peak_sigmas[order]
    peak_norms = _inverse(peak_sigmas)
    peak_near = np.asarray(_near_singular(jnp.asarray(peak_sigmas), jnp.asarray(peak_lambdas)))
    in_fit = _bin_maxima(peak_lambdas, peak_norms, ~peak_near)

    fitted_exponent, r_squared = None, None
    abstained = bool(np.mean(peak_near) > constants.ABSTAIN_NEAR_SINGULAR_FRACTION) or int(np.sum(in_fit)) < 2
    if abstained:
        in_fit[:] = False
        logger.warning(
            f"Resolvent growth fit abstains: {int(np.sum(peak_near))} of {peak_near.size} envelope points "
            "lie numerically on the spectrum"
        )
    else:
        fit = fit_line(jnp.log(peak_lambdas[in_fit]), jnp.log(peak_norms[in_fit]))
        fitted_exponent, r_squared = fit.slope, fit.r_squared
        logger.info(
            f"Resolvent envelope exponent {fit.slope:.4f} (R²={fit.r_squared:.4f}, "
            f"{fit.num_points} bins from {peak_lambdas.size} refined peaks)"
        )
    return ResolventSamples(
        lambdas=lambdas,
        norms=norms,
        is_envelope=jnp.asarray(envelope),
        near_singular=near,
        envelope_lambdas=jnp.asarray(peak_lambdas),
        envelope_norms=jnp.asarray(peak_norms),
        envelope_near_singular=jnp.asarray(peak_near),
        envelope_in_fit=jnp.asarray(in_fit),
        fitted_exponent=fitted_exponent,
        r_squared=r_squared,
        valid_band=band,
        num_clipped=num_clipped,
        abstained=abstained,
    )
