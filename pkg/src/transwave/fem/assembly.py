"""P1 finite element assembly for the two conforming chains.

Both chains live on the same mesh. The first chain (u on (0, L₀), φ on (L₀, L)) uses the stiffness weight
a(x), the second (y, ψ) the weight 1. The interface node is a single shared DOF per chain, which encodes
continuity at L₀; flux matching is the natural condition of the weak form. Dirichlet nodes at x=0 and x=L
are eliminated after assembly.
"""

import jax
import jax.numpy as jnp
from loguru import logger

from transwave.config import SystemConfig
from transwave.core.jax.pytrees import TreeClass, autoinit, field, frozen_field
from transwave.core.linalg import cholesky_factor
from transwave.fem.mesh import Mesh

_LOCAL_MASS = jnp.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
_LOCAL_STIFFNESS = jnp.array([[1.0, -1.0], [-1.0, 1.0]])


@autoinit
class SystemMatrices(TreeClass):
    """Interior (Dirichlet-eliminated) P1 matrices, all of shape (n, n)."""

    n: int = frozen_field()

    #: Mass matrix ∫ φᵢφⱼ.
    mass: jax.Array = field()

    #: Stiffness ∫ a(x) φᵢ'φⱼ' of the first chain.
    stiffness_w: jax.Array = field()

    #: Stiffness ∫ φᵢ'φⱼ' of the second chain.
    stiffness_s: jax.Array = field()

    #: ∫ c₁(x) φᵢφⱼ
    coupling_c1: jax.Array = field()

    #: ∫ c₂(x) φᵢφⱼ
    coupling_c2: jax.Array = field()

    #: ∫ d₁(x) φᵢφⱼ
    damping_d1: jax.Array = field()

    #: ∫ d₂(x) φᵢφⱼ
    damping_d2: jax.Array = field()

    @property
    def damping(self) -> jax.Array:
        """Total damping of the first chain, D1 + D2."""
        return self.damping_d1 + self.damping_d2

    def as_dict(self) -> dict[str, jax.Array]:
        return {
            "mass": self.mass,
            "stiffness_w": self.stiffness_w,
            "stiffness_s": self.stiffness_s,
            "coupling_c1": self.coupling_c1,
            "coupling_c2": self.coupling_c2,
            "damping_d1": self.damping_d1,
            "damping_d2": self.damping_d2,
        }


@autoinit
class GramMatrix(TreeClass):
    """Energy Gram matrix H over (p_w, p_s, q_w, q_s) with its lower Cholesky factor, H = L Lᵀ."""

    n: int = frozen_field()
    matrix: jax.Array = field()
    cholesky: jax.Array = field()

    @property
    def position_block(self) -> jax.Array:
        return self.matrix[: 2 * self.n, : 2 * self.n]

    @property
    def velocity_block(self) -> jax.Array:
        return self.matrix[2 * self.n :, 2 * self.n :]

    @property
    def min_eigenvalue(self) -> float:
        return float(jnp.linalg.eigvalsh(self.matrix)[0])


def assemble_element_matrices(
    nodes: jax.Array,
    weights: jax.Array,
    local: jax.Array,
    power: int,
) -> jax.Array:
    """Assembles the full (node by node) matrix of element contributions weight·h^power·local.

    Args:
        nodes (jax.Array): Node positions, shape (N+1,)
        weights (jax.Array): Element-constant coefficient, shape (N,)
        local (jax.Array): Reference 2x2 element matrix
        power (int): 1 for mass-type, -1 for stiffness-type element matrices

    Returns:
        jax.Array: Full matrix of shape (N+1, N+1), boundary rows included
    """
    lengths = jnp.diff(nodes)
    num_nodes = nodes.shape[0]
    scale = weights * lengths**power
    element_idx = jnp.arange(num_nodes - 1)
    full = jnp.zeros((num_nodes, num_nodes), dtype=jnp.float64)
    for a in range(2):
        for b in range(2):
            full = full.at[element_idx + a, element_idx + b].add(scale * local[a, b])
    return full


def _interior(full: jax.Array) -> jax.Array:
    return full[1:-1, 1:-1]


def assemble_matrices(mesh: Mesh, cfg: SystemConfig | None = None) -> SystemMatrices:
    """Assembles mass, stiffness, coupling and damping matrices with exact P1 element integrals.

    The coefficients are read from the mesh, which stores their element-wise values. ``cfg`` is only
    used to cross-check that the mesh was built for the same configuration.
    """
    if cfg is not None:
        interface = float(mesh.nodes[mesh.interface_index])
        if abs(interface - cfg.L0) > 1e-12 or abs(float(mesh.nodes[-1]) - cfg.L) > 1e-12:
            raise ValueError("Mesh was not built for this configuration (interface or length differ)")

    ones = jnp.ones(mesh.num_elements)

    def mass_type(w: jax.Array) -> jax.Array:
        return _interior(assemble_element_matrices(mesh.nodes, w, _LOCAL_MASS, power=1))

    def stiffness_type(w: jax.Array) -> jax.Array:
        return _interior(assemble_element_matrices(mesh.nodes, w, _LOCAL_STIFFNESS, power=-1))

    mats = SystemMatrices(
        n=mesh.n,
        mass=mass_type(ones),
        stiffness_w=stiffness_type(mesh.a_values),
        stiffness_s=stiffness_type(ones),
        coupling_c1=mass_type(mesh.c1_values),
        coupling_c2=mass_type(mesh.c2_values),
        damping_d1=mass_type(mesh.d1_values),
        damping_d2=mass_type(mesh.d2_values),
    )
    logger.debug(f"Assembled system matrices with n={mats.n} interior DOFs per chain")
    return mats


def energy_gram(mats: SystemMatrices) -> GramMatrix:
    """Energy Gram H = blockdiag([[S_w, C1], [C1, S_s]], [[M, 0], [0, M]]).

    Raises:
        IndefiniteGram: if H is not positive definite, which signals loss of coercivity.
    """
    n = mats.n
    zeros = jnp.zeros((n, n))
    position = jnp.block([[mats.stiffness_w, mats.coupling_c1], [mats.coupling_c1, mats.stiffness_s]])
    velocity = jnp.block([[mats.mass, zeros], [zeros, mats.mass]])
    zeros2 = jnp.zeros((2 * n, 2 * n))
    matrix = jnp.block([[position, zeros2], [zeros2, velocity]])
    return GramMatrix(n=n, matrix=matrix, cholesky=cholesky_factor(matrix))
