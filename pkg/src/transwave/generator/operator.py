"""Discrete semigroup generator A_h of the two-wave transmission system.

States are packed as U = (p_w, p_s, q_w, q_s). The generator acts as

    p' = q
    q_w' = −M⁻¹(S_w p_w + C1 p_s + (D1 + D2) q_w + C2 q_s)
    q_s' = −M⁻¹(S_s p_s + C1 p_w − C2 q_w)

The velocity coupling enters with opposite signs in the two rows, which makes it energy neutral:
Re⟨A_hU, U⟩_H = −q_wᵀ(D1 + D2)q_w for every U.
"""

import jax
import jax.numpy as jnp
import jax.scipy.linalg as jsl
from loguru import logger

from transwave.config import SystemConfig, ValidatedConfig, validate_config
from transwave.core.jax.pytrees import TreeClass, autoinit, field, frozen_field
from transwave.core.linalg import h_inner, h_norm
from transwave.errors import DimensionMismatch, SingularSystem
from transwave.fem.assembly import GramMatrix, SystemMatrices, assemble_matrices, energy_gram
from transwave.fem.mesh import Mesh, build_mesh
from transwave.fem.state import StateVector
from transwave.typing import Regime


@autoinit
class GeneratorOperator(TreeClass):
    """Dense discrete generator with its energy Gram matrix and reusable factorizations."""

    config: ValidatedConfig = field()
    mesh: Mesh = field()
    mats: SystemMatrices = field()
    gram: GramMatrix = field()

    #: Dense A_h of shape (4n, 4n).
    matrix: jax.Array = field()

    #: Lower Cholesky factor of the mass matrix.
    mass_cholesky: jax.Array = field()

    #: LU factorization (lu, pivots) of the static block system.
    static_lu: jax.Array = field()
    static_pivots: jax.Array = field()

    regime: Regime = frozen_field()

    @property
    def n(self) -> int:
        return self.mats.n

    @property
    def dim(self) -> int:
        return 4 * self.mats.n

    def solve_mass(self, rhs: jax.Array) -> jax.Array:
        """M⁻¹ rhs using the stored Cholesky factor."""
        return jsl.cho_solve((self.mass_cholesky, True), rhs)


def _generator_matrix(mats: SystemMatrices, mass_cholesky: jax.Array) -> jax.Array:
    n = mats.n
    eye = jnp.eye(n)
    zeros = jnp.zeros((n, n))

    def minv(block: jax.Array) -> jax.Array:
        return jsl.cho_solve((mass_cholesky, True), block)

    return jnp.block(
        [
            [zeros, zeros, eye, zeros],
            [zeros, zeros, zeros, eye],
            [-minv(mats.stiffness_w), -minv(mats.coupling_c1), -minv(mats.damping), -minv(mats.coupling_c2)],
            [-minv(mats.coupling_c1), -minv(mats.stiffness_s), minv(mats.coupling_c2), zeros],
        ]
    )


def static_block_matrix(mats: SystemMatrices) -> jax.Array:
    """Block matrix B = −diag(I, I, M, M)·A_h of the static problem, free of M⁻¹.

    −A_hU = F is solved as B U = diag(I, I, M, M) F.
    """
    n = mats.n
    eye = jnp.eye(n)
    zeros = jnp.zeros((n, n))
    return jnp.block(
        [
            [zeros, zeros, -eye, zeros],
            [zeros, zeros, zeros, -eye],
            [mats.stiffness_w, mats.coupling_c1, mats.damping, mats.coupling_c2],
            [mats.coupling_c1, mats.stiffness_s, -mats.coupling_c2, zeros],
        ]
    )


def build_generator(mesh: Mesh, cfg: SystemConfig) -> GeneratorOperator:
    """Assembles A_h, its energy Gram matrix and the mass and static factorizations.

    Args:
        mesh (Mesh): Mesh built for ``cfg``.
        cfg (SystemConfig): Configuration, validated if it is not already.

    Returns:
        GeneratorOperator: ready-to-use generator.
    """
    cfg = validate_config(cfg)
    mats = assemble_matrices(mesh, cfg)
    gram = energy_gram(mats)
    mass_cholesky = jnp.linalg.cholesky(mats.mass)
    static_lu, static_pivots = jsl.lu_factor(static_block_matrix(mats))
    logger.debug(f"Factorized mass matrix and {4 * mats.n}x{4 * mats.n} static block system")
    return GeneratorOperator(
        config=cfg,
        mesh=mesh,
        mats=mats,
        gram=gram,
        matrix=_generator_matrix(mats, mass_cholesky),
        mass_cholesky=mass_cholesky,
        static_lu=static_lu,
        static_pivots=static_pivots,
        regime=cfg.regime,
    )


def discretize(cfg: SystemConfig, h_target: float) -> GeneratorOperator:
    """Meshes the configuration and builds its generator in one go."""
    cfg = validate_config(cfg)
    return build_generator(build_mesh(cfg, h_target), cfg)


def _packed(gen: GeneratorOperator, U: StateVector) -> jax.Array:
    if U.n != gen.n:
        raise DimensionMismatch(f"State has {U.n} DOFs per block, the generator has {gen.n}")
    return U.pack()


def apply_generator(gen: GeneratorOperator, U: StateVector) -> StateVector:
    """Returns A_hU."""
    return StateVector.unpack(gen.matrix @ _packed(gen, U))


def dissipation_identity(gen: GeneratorOperator, U: StateVector) -> tuple[float, float]:
    """Both sides of Re⟨A_hU, U⟩_H = −q_wᵀ(D1 + D2)q_w, computed independently.

    Returns:
        tuple[float, float]: (lhs, rhs). They agree up to roundoff; D1 vanishes unless d₁ ≠ 0.
    """
    packed = _packed(gen, U)
    lhs = jnp.real(h_inner(gen.gram.matrix, gen.matrix @ packed, packed))
    rhs = -jnp.real(jnp.vdot(U.q_w, gen.mats.damping @ U.q_w))
    return float(lhs), float(rhs)


def static_solve(gen: GeneratorOperator, F: StateVector) -> StateVector:
    """Solves −A_hU = F.

    The velocity blocks are U_q = −F_p; the displacement blocks solve the discrete variational problem.

    Raises:
        SingularSystem: if the solve produces non-finite values.
    """
    rhs = _packed(gen, F)
    if not bool(jnp.all(jnp.isfinite(rhs))):
        raise ValueError("Right-hand side of the static problem must be finite")
    n = gen.n
    scaled = jnp.concatenate([rhs[: 2 * n], gen.mats.mass @ rhs[2 * n : 3 * n], gen.mats.mass @ rhs[3 * n :]])
    solution = jsl.lu_solve((gen.static_lu, gen.static_pivots), scaled)
    if not bool(jnp.all(jnp.isfinite(solution))):
        raise SingularSystem("Static block system is singular")
    return StateVector.unpack(solution)


def h_norm_of(gen: GeneratorOperator, U: StateVector) -> float:
    """Energy norm ‖U‖_H = sqrt(UᴴHU), so that E = ½‖U‖²_H."""
    return float(h_norm(gen.gram.matrix, _packed(gen, U)))


def graph_norm(gen: GeneratorOperator, U: StateVector) -> float:
    """Graph norm sqrt(‖U‖²_H + ‖A_hU‖²_H)."""
    packed = _packed(gen, U)
    image = gen.matrix @ packed
    return float(jnp.sqrt(h_norm(gen.gram.matrix, packed) ** 2 + h_norm(gen.gram.matrix, image) ** 2))
