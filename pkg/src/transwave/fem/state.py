from typing_extensions import Self

import jax
import jax.numpy as jnp

from transwave.core.jax.pytrees import TreeClass, autoinit, field
from transwave.errors import DimensionMismatch


@autoinit
class StateVector(TreeClass):
    """Discrete state (u|φ, y|ψ, u_t|φ_t, y_t|ψ_t) on the interior nodes.

    ``p_w``/``q_w`` are displacement and velocity of the first chain, ``p_s``/``q_s`` of the second. The
    interface value is a single entry of each array. Entries may be complex (eigenvectors).
    """

    p_w: jax.Array = field()
    p_s: jax.Array = field()
    q_w: jax.Array = field()
    q_s: jax.Array = field()

    def __post_init__(self):
        sizes = {part.shape for part in (self.p_w, self.p_s, self.q_w, self.q_s)}
        if len(sizes) != 1 or len(next(iter(sizes))) != 1:
            raise DimensionMismatch(
                "State blocks must be 1D arrays of equal length, got shapes "
                f"{[p.shape for p in (self.p_w, self.p_s, self.q_w, self.q_s)]}"
            )

    @property
    def n(self) -> int:
        return int(self.p_w.shape[0])

    def pack(self) -> jax.Array:
        """Flat vector (p_w, p_s, q_w, q_s) of length 4n."""
        return jnp.concatenate([self.p_w, self.p_s, self.q_w, self.q_s])

    @classmethod
    def unpack(cls, vector: jax.Array, n: int | None = None) -> Self:
        """Inverse of :meth:`pack`. If ``n`` is given, the vector length must be 4n."""
        vector = jnp.asarray(vector)
        if vector.ndim != 1 or vector.shape[0] % 4 != 0:
            raise DimensionMismatch(f"Packed state must be 1D with length divisible by 4, got {vector.shape}")
        size = vector.shape[0] // 4
        if n is not None and size != n:
            raise DimensionMismatch(f"Packed state has {size} DOFs per block, expected {n}")
        return cls(
            p_w=vector[:size],
            p_s=vector[size : 2 * size],
            q_w=vector[2 * size : 3 * size],
            q_s=vector[3 * size :],
        )

    @classmethod
    def zeros(cls, n: int) -> Self:
        z = jnp.zeros((n,), dtype=jnp.float64)
        return cls(p_w=z, p_s=z, q_w=z, q_s=z)

    def check_size(self, n: int) -> None:
        if self.n != n:
            raise DimensionMismatch(f"State has {self.n} DOFs per block, the discretization has {n}")

    def scaled(self, factor: float | jax.Array) -> Self:
        return StateVector.unpack(factor * self.pack())  # type: ignore[return-value]
