import math

import jax
import jax.numpy as jnp
import numpy as np


def log_spaced_grid(start: float, stop: float, num: int) -> jax.Array:
    """Logarithmically spaced grid including both ends.

    Args:
        start (float): First value, must be positive.
        stop (float): Last value, must exceed ``start``.
        num (int): Number of points, at least 2.

    Returns:
        jax.Array: Grid of shape (num,)
    """
    if not 0 < start < stop:
        raise ValueError(f"Need 0 < start < stop, got start={start}, stop={stop}")
    if num < 2:
        raise ValueError(f"Need at least two grid points, got {num}")
    return jnp.logspace(math.log10(start), math.log10(stop), num)


def local_maxima_indices(values: jax.Array) -> np.ndarray:
    """Indices of the upper envelope of a sampled curve.

    A sample belongs to the envelope if it is not smaller than either neighbour and strictly larger
    than at least one of them. The two end samples count if they exceed their single neighbour.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return np.zeros((0,), dtype=int)
    if v.size == 1:
        return np.zeros((1,), dtype=int)
    # end samples are compared against their single neighbour twice
    left = np.concatenate([v[1:2], v[:-1]])
    right = np.concatenate([v[1:], v[-2:-1]])
    is_peak = (v >= left) & (v >= right) & ((v > left) | (v > right))
    return np.nonzero(is_peak)[0]


def geometric_sample_indices(num_steps: int, num_samples: int) -> np.ndarray:
    """Step indices 0..num_steps spaced geometrically, duplicates removed.

    Index 0 and the final step are always included.
    """
    if num_steps < 1:
        raise ValueError(f"Need at least one step, got {num_steps}")
    if num_samples < 2:
        raise ValueError(f"Need at least two samples, got {num_samples}")
    raw = np.geomspace(1, num_steps, num_samples - 1)
    indices = np.unique(np.concatenate([[0], np.round(raw).astype(int), [num_steps]]))
    return indices


def uniform_sample_indices(num_steps: int, sample_every: int) -> np.ndarray:
    """Every ``sample_every``-th step index, always including 0 and the final step."""
    if sample_every < 1:
        raise ValueError(f"sample_every must be positive, got {sample_every}")
    indices = np.arange(0, num_steps + 1, sample_every)
    if indices[-1] != num_steps:
        indices = np.append(indices, num_steps)
    return indices


def format_float(value: float) -> str:
    """Shortest round-trip decimal representation (``repr`` of a Python float)."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if value == 0.0:
        return "0.0"
    return repr(value)


def observed_orders(sizes: list[float], errors: list[float]) -> list[float]:
    """Convergence orders log(e_i/e_{i+1}) / log(h_i/h_{i+1}) between consecutive refinements."""
    if len(sizes) != len(errors):
        raise ValueError(f"Got {len(sizes)} sizes but {len(errors)} errors")
    orders = []
    for (h0, e0), (h1, e1) in zip(zip(sizes[:-1], errors[:-1]), zip(sizes[1:], errors[1:])):
        if e0 <= 0 or e1 <= 0:
            orders.append(float("nan"))
            continue
        orders.append(math.log(e0 / e1) / math.log(h0 / h1))
    return orders
