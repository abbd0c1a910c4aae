import jax.numpy as jnp
import pytest

from transwave.core.physics.metrics import energy
from transwave.errors import BoundaryMismatch, InterfaceMismatch
from transwave.evolution.initialization import (
    InitialProfiles,
    default_initial_state,
    default_profiles,
    project_initial_data,
)


def test_default_profiles_interpolated(coarse_gen, cfg):
    U = project_initial_data(coarse_gen.mesh, default_profiles(cfg))
    x = coarse_gen.mesh.interior_nodes
    expected = jnp.where(x <= cfg.L0, jnp.sin(jnp.pi * x / cfg.L0) ** 3, 0.0)
    assert jnp.allclose(U.p_w, expected)
    assert jnp.allclose(U.q_w, 0.0)
    assert jnp.allclose(U.q_s, 0.0)
    assert jnp.max(jnp.abs(U.p_s)) > 0


def test_unset_profiles_are_zero(coarse_gen):
    U = project_initial_data(coarse_gen.mesh, InitialProfiles())
    assert jnp.allclose(U.pack(), 0.0)


def test_boundary_mismatch(coarse_gen):
    profiles = InitialProfiles(u0=lambda x: 1.0 + 0.0 * x, phi0=lambda x: 1.0 + 0.0 * x)
    with pytest.raises(BoundaryMismatch):
        project_initial_data(coarse_gen.mesh, profiles)


def test_interface_mismatch(coarse_gen):
    profiles = InitialProfiles(y1=lambda x: x)
    with pytest.raises(InterfaceMismatch):
        project_initial_data(coarse_gen.mesh, profiles)


def test_continuous_profiles_accepted(coarse_gen, cfg):
    # tent profile: continuous at the interface, zero at both ends
    profiles = InitialProfiles(y0=lambda x: x / cfg.L0, psi0=lambda x: (cfg.L - x) / (cfg.L - cfg.L0))
    U = project_initial_data(coarse_gen.mesh, profiles)
    k = coarse_gen.mesh.interface_index - 1
    assert U.p_s[k] == pytest.approx(1.0)


def test_default_initial_state_has_unit_energy(coarse_gen):
    U = default_initial_state(coarse_gen)
    assert energy(coarse_gen.mats, U) == pytest.approx(1.0)
