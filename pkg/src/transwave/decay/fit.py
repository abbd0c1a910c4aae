"""Decay-law fits of energy traces and the exponential / polynomial regime classifier.

Exponential decay E(t) ≤ M·e^(−εt)·E(0) appears as a straight line in (t, log E); polynomial decay
E(t) ≤ C/t·‖U₀‖²_D(A) as a straight line of slope −1 in (log t, log E). The classifier fits both on the tail
of a trace and keeps the clearly better one.
"""

import math
from typing import Literal

import jax.numpy as jnp
import numpy as np
from loguru import logger

from transwave import constants
from transwave.core.jax.pytrees import TreeClass, autoinit, frozen_field
from transwave.core.linalg import fit_line
from transwave.errors import AnalysisError, EnergyUnderflow, WindowTooSmall
from transwave.evolution.simulate import EnergyTrace
from transwave.typing import DecayModel, Interval

VerdictKind = Literal["exponential", "polynomial", "inconclusive"]


@autoinit
class DecayFit(TreeClass):
    """Least-squares decay law fitted on a time window of a trace."""

    model: DecayModel = frozen_field()

    #: Exponential: decay rate ε = −slope of log E over t. Polynomial: slope s of log E over log t.
    rate: float = frozen_field()

    intercept: float = frozen_field()
    r_squared: float = frozen_field()

    #: (t_start, t_end) of the samples actually used.
    window: Interval = frozen_field()

    num_points: int = frozen_field()

    #: max over the window of t·E(t)/‖U₀‖²_D(A) (polynomial fits only).
    poly_bound: float | None = frozen_field(default=None)

    #: max/min of t·E(t) over the window (polynomial fits only).
    bound_ratio: float | None = frozen_field(default=None)

    #: Late-half minus early-half log-log slope; strongly negative values flag faster than polynomial decay.
    slope_drift: float | None = frozen_field(default=None)

    def to_dict(self) -> dict:
        result = super().to_dict()
        result["window"] = list(self.window)
        return result


@autoinit
class DecayVerdict(TreeClass):
    """Outcome of :func:`classify_decay`."""

    kind: VerdictKind = frozen_field()

    #: Rate (exponential) or slope (polynomial), None if inconclusive.
    value: float | None = frozen_field(default=None)

    exponential: DecayFit | None = frozen_field(default=None)
    polynomial: DecayFit | None = frozen_field(default=None)
    window: Interval = frozen_field()

    def __str__(self) -> str:
        if self.kind == "exponential":
            return f"Exponential({self.value:.6g})"
        if self.kind == "polynomial":
            return f"Polynomial({self.value:.6g})"
        return "Inconclusive"


def _window_samples(trace: EnergyTrace, window: Interval | None) -> tuple[np.ndarray, np.ndarray]:
    times = np.asarray(trace.times, dtype=float)
    energies = np.asarray(trace.energies, dtype=float)
    if window is None:
        return times, energies
    start, end = window
    if start > end:
        raise WindowTooSmall(f"Empty window {window}")
    mask = (times >= start) & (times <= end)
    return times[mask], energies[mask]


def fit_exponential(trace: EnergyTrace, window: Interval | None = None) -> DecayFit:
    """Fits log E = log M − ε·t.

    Args:
        trace (EnergyTrace): Energy trace.
        window (Interval | None, optional): Closed time window. Defaults to the whole trace.

    Returns:
        DecayFit: fit with ``rate`` = ε.

    Raises:
        WindowTooSmall: fewer than 20 samples in the window.
        EnergyUnderflow: fewer than 20 samples remain after dropping energies below 1e−300.
    """
    times, energies = _window_samples(trace, window)
    if times.size < constants.MIN_FIT_SAMPLES:
        raise WindowTooSmall(f"Exponential fit needs {constants.MIN_FIT_SAMPLES} samples, window has {times.size}")
    keep = energies > constants.ENERGY_FLOOR
    if int(np.sum(keep)) < constants.MIN_FIT_SAMPLES:
        raise EnergyUnderflow(
            f"Only {int(np.sum(keep))} of {times.size} energies in the window exceed {constants.ENERGY_FLOOR}"
        )
    times, energies = times[keep], energies[keep]
    line = fit_line(jnp.asarray(times), jnp.log(jnp.asarray(energies)))
    return DecayFit(
        model="exponential",
        rate=-line.slope,
        intercept=line.intercept,
        r_squared=line.r_squared,
        window=(float(times[0]), float(times[-1])),
        num_points=line.num_points,
    )


def fit_polynomial(trace: EnergyTrace, window: Interval | None = None) -> DecayFit:
    """Fits log E = log C + s·log t on a window spanning at least two decades.

    Samples at t ≤ 0 and energies below 1e−300 are ignored.

    Raises:
        WindowTooSmall: if the usable samples span less than two decades in t.
    """
    times, energies = _window_samples(trace, window)
    keep = (times > 0) & (energies > constants.ENERGY_FLOOR)
    times, energies = times[keep], energies[keep]
    if times.size < 3:
        raise WindowTooSmall(f"Polynomial fit needs at least 3 positive samples, window has {times.size}")
    decades = math.log10(times[-1] / times[0])
    if decades < constants.MIN_POLY_DECADES:
        raise WindowTooSmall(
            f"Polynomial fit needs {constants.MIN_POLY_DECADES} decades in t, window spans {decades:.3g}"
        )
    log_t, log_e = jnp.log(jnp.asarray(times)), jnp.log(jnp.asarray(energies))
    line = fit_line(log_t, log_e)

    weighted = times * energies
    graph_sq = trace.initial_graph_norm**2
    poly_bound = float(np.max(weighted) / graph_sq) if graph_sq > 0 else None
    bound_ratio = float(np.max(weighted) / np.min(weighted))

    split = math.sqrt(times[0] * times[-1])
    early, late = times <= split, times >= split
    slope_drift = None
    if int(np.sum(early)) >= 2 and int(np.sum(late)) >= 2:
        early_fit = fit_line(log_t[early], log_e[early])
        late_fit = fit_line(log_t[late], log_e[late])
        slope_drift = late_fit.slope - early_fit.slope

    return DecayFit(
        model="polynomial",
        rate=line.slope,
        intercept=line.intercept,
        r_squared=line.r_squared,
        window=(float(times[0]), float(times[-1])),
        num_points=line.num_points,
        poly_bound=poly_bound,
        bound_ratio=bound_ratio,
        slope_drift=slope_drift,
    )


def tail_window(trace: EnergyTrace, tail_fraction: float = constants.TAIL_FRACTION) -> Interval:
    """Last ``tail_fraction`` of the trace measured in log-time (samples at t > 0)."""
    if not 0 < tail_fraction <= 1:
        raise ValueError(f"tail_fraction must lie in (0, 1], got {tail_fraction}")
    times = np.asarray(trace.times, dtype=float)
    positive = times[times > 0]
    if positive.size == 0:
        raise WindowTooSmall("Trace has no samples at positive times")
    first, last = math.log(positive[0]), math.log(positive[-1])
    return (math.exp(last - tail_fraction * (last - first)), float(positive[-1]))


def _try_fit(fit, trace: EnergyTrace, window: Interval) -> DecayFit | None:
    try:
        return fit(trace, window)
    except AnalysisError as e:
        logger.debug(f"{fit.__name__} unavailable on tail window {window}: {e}")
        return None


def classify_decay(
    trace: EnergyTrace, tail_fraction: float = constants.TAIL_FRACTION, window: Interval | None = None
) -> DecayVerdict:
    """Decides between exponential and polynomial decay on the tail of a trace.

    The window is the last ``tail_fraction`` of the trace in log-time unless ``window`` is given.

    A model wins if its R² is at least 0.98 and beats the other model's R² by at least 0.02; a model whose
    fit is impossible on the window counts with R² = 0. An exponential verdict also needs a positive rate, a
    polynomial verdict a negative slope. Everything else is inconclusive.
    """
    window = tail_window(trace, tail_fraction) if window is None else window
    exp_fit = _try_fit(fit_exponential, trace, window)
    poly_fit = _try_fit(fit_polynomial, trace, window)
    r2_exp = exp_fit.r_squared if exp_fit is not None else 0.0
    r2_poly = poly_fit.r_squared if poly_fit is not None else 0.0

    kind: VerdictKind = "inconclusive"
    value = None
    if exp_fit is not None and r2_exp >= constants.R2_ACCEPT and r2_exp - r2_poly >= constants.R2_MARGIN:
        if exp_fit.rate > 0:
            kind, value = "exponential", exp_fit.rate
    elif poly_fit is not None and r2_poly >= constants.R2_ACCEPT and r2_poly - r2_exp >= constants.R2_MARGIN:
        if poly_fit.rate < 0:
            kind, value = "polynomial", poly_fit.rate
    verdict = DecayVerdict(kind=kind, value=value, exponential=exp_fit, polynomial=poly_fit, window=window)
    logger.info(f"Decay verdict {verdict} (R² exponential={r2_exp:.4f}, polynomial={r2_poly:.4f})")
    return verdict
