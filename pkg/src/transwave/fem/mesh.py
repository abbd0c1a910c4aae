import math

import jax
import jax.numpy as jnp
import numpy as np
from loguru import logger

from transwave.config import SystemConfig, validate_config
from transwave.core.jax.pytrees import TreeClass, autoinit, field, frozen_field
from transwave.errors import HTooCoarse

# guards against ceil(0.1 / 0.05) turning into 3 through roundoff
_SEGMENT_ROUNDING_SLACK = 1e-9


@autoinit
class Mesh(TreeClass):
    """Breakpoint-aligned 1D P1 mesh on (0, L).

    Every breakpoint of the configuration is a node, so each piecewise-constant coefficient is constant
    on every element. Element-wise coefficient values are stored alongside the nodes.
    """

    #: Ascending node positions, nodes[0] = 0 and nodes[-1] = L.
    nodes: jax.Array = field()

    #: Node index of the interface L₀.
    interface_index: int = frozen_field()

    #: a(x) per element (a₁ left of L₀, a₂ right of it).
    a_values: jax.Array = field()

    d1_values: jax.Array = field()
    d2_values: jax.Array = field()
    c1_values: jax.Array = field()
    c2_values: jax.Array = field()

    #: Element size the mesh was built for.
    h_target: float = frozen_field()

    @property
    def num_nodes(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def num_elements(self) -> int:
        return self.num_nodes - 1

    @property
    def n(self) -> int:
        """Interior DOF count per chain (Dirichlet ends removed)."""
        return self.num_nodes - 2

    @property
    def element_lengths(self) -> jax.Array:
        return jnp.diff(self.nodes)

    @property
    def h_max(self) -> float:
        return float(jnp.max(self.element_lengths))

    @property
    def interior_nodes(self) -> jax.Array:
        return self.nodes[1:-1]

    def coefficient_values(self, which: str) -> jax.Array:
        """Per-element values of ``a``, ``d1``, ``d2``, ``c1`` or ``c2``."""
        try:
            return getattr(self, f"{which}_values")
        except AttributeError:
            raise ValueError(f"Unknown coefficient '{which}'") from None


def _segment_nodes(points: tuple[float, ...], h_target: float) -> np.ndarray:
    pieces = []
    for left, right in zip(points[:-1], points[1:]):
        num = max(1, math.ceil((right - left) / h_target - _SEGMENT_ROUNDING_SLACK))
        segment = np.linspace(left, right, num + 1)
        pieces.append(segment[:-1])
    pieces.append(np.array([points[-1]]))
    return np.concatenate(pieces)


def build_mesh(cfg: SystemConfig, h_target: float) -> Mesh:
    """Builds a mesh whose nodes contain every breakpoint.

    Each segment between consecutive breakpoints is split uniformly into ceil(gap / h_target) elements,
    at least one. A target larger than the smallest gap is therefore accepted and yields one element on
    the short segments.

    Args:
        cfg (SystemConfig): Configuration, validated on the fly if needed.
        h_target (float): Largest admissible element size.

    Returns:
        Mesh: mesh with element-wise coefficient values and the interface node index set.
    """
    cfg = validate_config(cfg)
    if not (math.isfinite(h_target) and h_target > 0):
        raise HTooCoarse(f"Mesh size must be positive and finite, got h_target={h_target}")
    if h_target >= cfg.min_gap:
        logger.debug(f"h_target={h_target} >= smallest breakpoint gap {cfg.min_gap}: one element on short segments")

    points = cfg.breakpoints
    nodes = _segment_nodes(points, h_target)
    interface_index = int(np.argmin(np.abs(nodes - cfg.L0)))
    nodes[interface_index] = cfg.L0

    mids = 0.5 * (nodes[:-1] + nodes[1:])
    coefficient = {name: cfg.coefficient(name) for name in ("d1", "d2", "c1", "c2")}  # type: ignore[arg-type]
    values = {name: np.array([coef(x) for x in mids]) for name, coef in coefficient.items()}
    a_values = np.array([cfg.wave_speed_squared(x) for x in mids])

    mesh = Mesh(
        nodes=jnp.asarray(nodes),
        interface_index=interface_index,
        a_values=jnp.asarray(a_values),
        d1_values=jnp.asarray(values["d1"]),
        d2_values=jnp.asarray(values["d2"]),
        c1_values=jnp.asarray(values["c1"]),
        c2_values=jnp.asarray(values["c2"]),
        h_target=float(h_target),
    )
    logger.debug(f"Built mesh with {mesh.num_elements} elements (h_max={mesh.h_max:.4g}), interface node {interface_index}")
    return mesh
