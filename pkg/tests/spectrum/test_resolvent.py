import math

import jax.numpy as jnp
import numpy as np
import pytest

from transwave.config import validate_config, validated_default, with_values
from transwave.core.misc import log_spaced_grid
from transwave.errors import BandTooNarrow, NearSingularWarning
from transwave.generator.operator import discretize
from transwave.spectrum.eigen import eigenvalues
from transwave.spectrum.resolvent import energy_similarity, resolvent_norm, resolvent_sweep, valid_band


@pytest.fixture
def gen(cfg):
    return discretize(cfg, 0.05)


def test_energy_similarity_preserves_spectrum(coarse_gen):
    similar = np.asarray(energy_similarity(coarse_gen))
    direct = np.linalg.eigvals(np.asarray(coarse_gen.matrix))
    distance = np.abs(np.linalg.eigvals(similar)[:, None] - direct[None, :])
    assert np.max(np.min(distance, axis=1)) < 1e-6


def test_energy_similarity_is_dissipative(coarse_gen):
    similar = energy_similarity(coarse_gen)
    symmetric = 0.5 * (similar + similar.T)
    assert jnp.linalg.eigvalsh(symmetric)[-1] <= 1e-9


def test_valid_band(gen):
    low, high = valid_band(gen)
    assert low == 0.0
    assert high == pytest.approx(0.2 * math.pi / gen.mesh.h_max)


def test_resolvent_norm_bounded_below_by_distance(gen):
    values = np.asarray(eigenvalues(gen).eigenvalues)
    for lam in (1.3, 4.0, 7.7):
        distance = np.min(np.abs(1j * lam - values))
        assert resolvent_norm(gen, lam) >= (1 - 1e-8) / distance


def test_resolvent_norm_finite_off_spectrum(gen):
    norm = resolvent_norm(gen, 2.0)
    assert math.isfinite(norm)
    assert norm > 0


def test_sweep(gen):
    grid = log_spaced_grid(1.0, 50.0, 200)
    samples = resolvent_sweep(gen, grid)
    band = valid_band(gen)
    assert samples.valid_band == band
    assert jnp.all(samples.lambdas <= band[1])
    assert samples.num_clipped == int(jnp.sum(grid > band[1]))
    assert samples.num_clipped + samples.lambdas.size == grid.size
    assert samples.norms.shape == samples.lambdas.shape
    assert samples.num_envelope >= 8
    assert not bool(jnp.any(samples.near_singular))
    assert not samples.abstained
    assert 0.0 <= samples.r_squared <= 1.0
    assert jnp.all(jnp.diff(samples.envelope_lambdas) >= 0)
    assert int(jnp.sum(samples.envelope_in_fit)) >= 2
    expected = [resolvent_norm(gen, float(lam)) for lam in samples.lambdas[:3]]
    assert np.allclose(np.asarray(samples.norms[:3]), expected, rtol=1e-10)


def test_sweep_band_too_narrow(gen):
    with pytest.raises(BandTooNarrow):
        resolvent_sweep(gen, log_spaced_grid(1.0, 1.5, 8))
    with pytest.raises(BandTooNarrow):
        resolvent_sweep(gen, log_spaced_grid(100.0, 200.0, 8))


def test_predicted_energy_slope(gen):
    samples = resolvent_sweep(gen, log_spaced_grid(1.0, 50.0, 200))
    assert samples.fitted_exponent is not None
    if samples.fitted_exponent > 0:
        assert samples.predicted_energy_slope == pytest.approx(-2.0 / samples.fitted_exponent)
    else:
        assert samples.predicted_energy_slope is None
    assert samples.aset("fitted_exponent", 2.0).predicted_energy_slope == pytest.approx(-1.0)
    assert samples.aset("fitted_exponent", 0.0).predicted_energy_slope is None
    assert samples.aset("fitted_exponent", None).predicted_energy_slope is None


def test_near_singular_warning():
    cfg = validate_config(with_values(validated_default(), d2=0.0))
    gen = discretize(cfg, 0.1)
    values = np.asarray(eigenvalues(gen).eigenvalues)
    lam = float(np.imag(values[np.argmin(np.abs(np.imag(values) - 3.0))]))
    with pytest.warns(NearSingularWarning):
        norm = resolvent_norm(gen, lam)
    assert norm > 1e6


def test_refined_envelope_reaches_peaks_at_eigenfrequencies(gen):
    samples = resolvent_sweep(gen, log_spaced_grid(1.0, 12.0, 120))
    values = np.asarray(eigenvalues(gen).eigenvalues)
    freqs = np.imag(values)
    freqs = freqs[(freqs > 1.0) & (freqs < 12.0)]
    similar = energy_similarity(gen)
    at_modes = np.array([resolvent_norm(gen, float(w), similar) for w in freqs])
    envelope = np.asarray(samples.envelope_norms)
    assert envelope.max() >= (1 - 1e-9) * at_modes.max()
    assert envelope.max() >= float(jnp.max(samples.norms))
    # every refined peak sits within the bracket of the curve it came from
    assert np.all(np.asarray(samples.envelope_lambdas) >= 1.0)
    assert np.all(np.asarray(samples.envelope_lambdas) <= 12.0 + 1e-12)
    # the strongest resonance is found next to its eigenfrequency
    strongest = freqs[np.argmax(at_modes)]
    nearby = envelope[np.abs(np.asarray(samples.envelope_lambdas) - strongest) <= 0.03 * strongest]
    assert nearby.size and nearby.max() >= (1 - 1e-9) * at_modes.max()


def test_sweep_drops_nonpositive_frequencies(gen):
    grid = jnp.concatenate([jnp.array([-2.0, 0.0]), log_spaced_grid(1.0, 12.0, 100)])
    samples = resolvent_sweep(gen, grid)
    assert samples.num_clipped == 2
    assert samples.lambdas.size == 100
    assert bool(jnp.all(samples.lambdas > 0))


def test_sweep_rejects_grid_without_positive_frequency(gen):
    with pytest.raises(BandTooNarrow):
        resolvent_sweep(gen, jnp.array([-3.0, -1.0, 0.0]))


@pytest.mark.filterwarnings("ignore::transwave.errors.NearSingularWarning")
def test_sweep_abstains_without_damping():
    cfg = validate_config(with_values(validated_default(), d2=0.0))
    gen = discretize(cfg, 0.05)
    samples = resolvent_sweep(gen, log_spaced_grid(1.0, 12.0, 120))
    assert samples.abstained
    assert samples.fitted_exponent is None
    assert samples.r_squared is None
    assert samples.predicted_energy_slope is None
    assert float(jnp.mean(samples.envelope_near_singular)) > 0.5
    assert not bool(jnp.any(samples.envelope_in_fit))
