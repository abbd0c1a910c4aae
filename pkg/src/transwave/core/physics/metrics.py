"""Energy metrics of discrete states.

The discrete energy is E = ½ UᵀHU with H the energy Gram matrix: weighted stiffness of both chains, the
c₁ cross term and the kinetic (mass) terms. These functions evaluate it block-wise from the system
matrices, without forming H.
"""

import jax
import jax.numpy as jnp

from transwave.fem.assembly import SystemMatrices
from transwave.fem.state import StateVector


def _quad(matrix: jax.Array, u: jax.Array, v: jax.Array | None = None) -> jax.Array:
    v = u if v is None else v
    return jnp.real(jnp.vdot(v, matrix @ u))


def energy_components(mats: SystemMatrices, U: StateVector) -> dict[str, float]:
    """Splits the energy into its potential, cross and kinetic parts.

    Args:
        mats (SystemMatrices): Assembled matrices.
        U (StateVector): State with n DOFs per block.

    Returns:
        dict[str, float]: ``potential_w``, ``potential_s``, ``cross_c1``, ``kinetic_w``, ``kinetic_s`` and
        their sum ``total``.
    """
    U.check_size(mats.n)
    parts = {
        "potential_w": 0.5 * _quad(mats.stiffness_w, U.p_w),
        "potential_s": 0.5 * _quad(mats.stiffness_s, U.p_s),
        "cross_c1": _quad(mats.coupling_c1, U.p_s, U.p_w),
        "kinetic_w": 0.5 * _quad(mats.mass, U.q_w),
        "kinetic_s": 0.5 * _quad(mats.mass, U.q_s),
    }
    result = {k: float(v) for k, v in parts.items()}
    result["total"] = sum(result.values())
    return result


def energy(mats: SystemMatrices, U: StateVector) -> float:
    """Discrete energy E = ½ UᵀHU (nonnegative under the coercivity condition).

    Raises:
        DimensionMismatch: if U does not have n DOFs per block.
    """
    return energy_components(mats, U)["total"]


def normalize_by_energy(mats: SystemMatrices, U: StateVector) -> StateVector:
    """Scales a state to unit energy. The zero state is returned unchanged."""
    total = energy(mats, U)
    if total <= 0.0:
        return U
    return U.scaled(1.0 / jnp.sqrt(total))


def dissipation_rate(mats: SystemMatrices, U: StateVector) -> float:
    """Instantaneous energy loss q_wᵀ(D1+D2)q_w, i.e. −dE/dt along the exact flow."""
    U.check_size(mats.n)
    return float(_quad(mats.damping, U.q_w))
