"""Initial data for the evolution problem.

Profiles are closed-form functions of x, one displacement and one velocity per sub-interval and chain.
They are interpolated at the mesh nodes after checking the clamped ends and continuity at L₀.
"""

import math
from typing import Callable

import jax
import jax.numpy as jnp
import numpy as np

from transwave.config import SystemConfig
from transwave.core.jax.pytrees import TreeClass, autoinit, frozen_field
from transwave.core.physics.metrics import normalize_by_energy
from transwave.errors import BoundaryMismatch, InterfaceMismatch
from transwave.fem.mesh import Mesh
from transwave.fem.state import StateVector
from transwave.generator.operator import GeneratorOperator

Profile = Callable[[jax.Array], jax.Array]

# absolute tolerance for the end and interface checks, relative to the profile magnitude
_MATCH_TOL = 1e-10


def _zero(x: jax.Array) -> jax.Array:
    return jnp.zeros_like(x)


@autoinit
class InitialProfiles(TreeClass):
    """Initial displacements and velocities (u, y on (0, L₀); φ, ψ on (L₀, L)).

    Each callable maps an array of positions to values. Unset profiles are zero.
    """

    u0: Profile = frozen_field(default=_zero)
    y0: Profile = frozen_field(default=_zero)
    phi0: Profile = frozen_field(default=_zero)
    psi0: Profile = frozen_field(default=_zero)
    u1: Profile = frozen_field(default=_zero)
    y1: Profile = frozen_field(default=_zero)
    phi1: Profile = frozen_field(default=_zero)
    psi1: Profile = frozen_field(default=_zero)

    def chains(self) -> dict[str, tuple[Profile, Profile]]:
        """(left, right) profile pair of each packed block."""
        return {
            "p_w": (self.u0, self.phi0),
            "p_s": (self.y0, self.psi0),
            "q_w": (self.u1, self.phi1),
            "q_s": (self.y1, self.psi1),
        }


def default_profiles(cfg: SystemConfig) -> InitialProfiles:
    """Smooth data in the domain of the generator.

    u₀ = sin³(πx/L₀) on the first chain and ψ₀ = sin³(π(x − L₀)/(L − L₀)) on the second, all other
    profiles zero. Both vanish with their first derivative at the ends of their interval, so continuity and
    flux matching at L₀ hold.
    """
    L0, L = cfg.L0, cfg.L

    def u0(x: jax.Array) -> jax.Array:
        return jnp.sin(math.pi * x / L0) ** 3

    def psi0(x: jax.Array) -> jax.Array:
        return jnp.sin(math.pi * (x - L0) / (L - L0)) ** 3

    return InitialProfiles(u0=u0, psi0=psi0)


def _close(a: float, b: float, scale: float) -> bool:
    return abs(a - b) <= _MATCH_TOL * max(1.0, scale)


def project_initial_data(mesh: Mesh, profiles: InitialProfiles) -> StateVector:
    """Nodal interpolation of the initial profiles onto both chains.

    Args:
        mesh (Mesh): Target mesh.
        profiles (InitialProfiles): Closed-form initial data.

    Returns:
        StateVector: interpolated state on the interior nodes.

    Raises:
        BoundaryMismatch: if a profile does not vanish at its clamped end (x=0 for u, y; x=L for φ, ψ).
        InterfaceMismatch: if left and right profiles of a chain disagree at L₀.
    """
    nodes = np.asarray(mesh.nodes)
    x0, x_interface, x_end = nodes[0], nodes[mesh.interface_index], nodes[-1]
    left_nodes = jnp.asarray(nodes[: mesh.interface_index + 1])
    right_nodes = jnp.asarray(nodes[mesh.interface_index :])

    blocks = {}
    for name, (left, right) in profiles.chains().items():
        left_values = np.asarray(left(left_nodes), dtype=float)
        right_values = np.asarray(right(right_nodes), dtype=float)
        scale = float(max(np.max(np.abs(left_values)), np.max(np.abs(right_values))))
        if not _close(left_values[0], 0.0, scale):
            raise BoundaryMismatch(f"{name}: left profile is {left_values[0]:.6g} at x={x0}, expected 0")
        if not _close(right_values[-1], 0.0, scale):
            raise BoundaryMismatch(f"{name}: right profile is {right_values[-1]:.6g} at x={x_end}, expected 0")
        if not _close(left_values[-1], right_values[0], scale):
            raise InterfaceMismatch(
                f"{name}: profiles disagree at the interface x={x_interface} "
                f"({left_values[-1]:.6g} vs {right_values[0]:.6g})"
            )
        full = np.concatenate([left_values, right_values[1:]])
        blocks[name] = jnp.asarray(full[1:-1])
    return StateVector(**blocks)


def default_initial_state(gen: GeneratorOperator) -> StateVector:
    """Default profiles of the generator's configuration, interpolated and scaled to unit energy."""
    U0 = project_initial_data(gen.mesh, default_profiles(gen.config))
    return normalize_by_energy(gen.mats, U0)
