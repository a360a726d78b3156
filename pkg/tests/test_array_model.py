import numpy as np
import pytest

from errors import InvalidArgumentError
from sim.array_model import ArrayConfig, Scatterer, SnapshotMatrix, steering_vector, synthesize_snapshot

WAVELENGTH = 3.9e-3


def half_wave(m: int) -> ArrayConfig:
    return ArrayConfig.half_wavelength(m, WAVELENGTH)


def test_steering_vector_broadside_is_all_ones():
    assert np.allclose(steering_vector(half_wave(4), np.pi / 2), np.ones(4), atol=1e-12)


def test_steering_vector_quarter_turn_phase_steps():
    expected = np.array([1, 1j, -1, -1j])
    assert np.allclose(steering_vector(half_wave(4), np.pi / 3), expected, atol=1e-12)


def test_steering_vector_single_element():
    for theta in (0.0, 0.7, np.pi):
        assert np.array_equal(steering_vector(half_wave(1), theta), np.array([1.0 + 0j]))


def test_steering_vector_unit_modulus_and_cos_symmetry(rng):
    cfg = half_wave(8)
    for theta in rng.uniform(0, np.pi, size=20):
        a = steering_vector(cfg, theta)
        assert np.allclose(np.abs(a), 1.0, atol=1e-12)
        assert np.allclose(a, steering_vector(cfg, -theta), atol=1e-12)
        assert np.allclose(a, steering_vector(cfg, 2 * np.pi - theta), atol=1e-12)


def test_array_config_rejects_bad_geometry():
    with pytest.raises(InvalidArgumentError):
        ArrayConfig(num_elements=0, spacing=1.0, wavelength=1.0)
    with pytest.raises(InvalidArgumentError):
        ArrayConfig(num_elements=2, spacing=-1.0, wavelength=1.0)
    with pytest.raises(InvalidArgumentError):
        ArrayConfig(num_elements=2, spacing=1.0, wavelength=0.0)
    with pytest.raises(InvalidArgumentError):
        steering_vector(half_wave(2), float('nan'))


def test_snapshot_matrix_rejects_non_finite():
    with pytest.raises(InvalidArgumentError):
        SnapshotMatrix(data=np.array([[1.0, np.inf]]))
    with pytest.raises(InvalidArgumentError):
        SnapshotMatrix(data=np.ones(3))


def test_synthesize_single_broadside_scatterer():
    snapshot = synthesize_snapshot(half_wave(4), [Scatterer(azimuth=np.pi / 2)], np.ones(2), 0.0, rng_seed=0)
    assert snapshot.data.shape == (2, 4)
    assert np.allclose(snapshot.data, 1.0, atol=1e-12)


def test_synthesize_without_scatterers_is_zero():
    snapshot = synthesize_snapshot(half_wave(4), [], np.ones(16), 0.0, rng_seed=0)
    assert np.array_equal(snapshot.data, np.zeros((16, 4)))


def test_synthesize_noise_is_seeded():
    cfg = half_wave(4)
    scatterers = [Scatterer(azimuth=1.0)]
    a = synthesize_snapshot(cfg, scatterers, np.ones(64), 1.0, rng_seed=1)
    b = synthesize_snapshot(cfg, scatterers, np.ones(64), 1.0, rng_seed=1)
    c = synthesize_snapshot(cfg, scatterers, np.ones(64), 1.0, rng_seed=2)
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)


def test_synthesize_is_linear_in_amplitude(rng):
    cfg = half_wave(4)
    baseband = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    one = synthesize_snapshot(cfg, [Scatterer(azimuth=0.9, amplitude=1.0)], baseband, 0.0, rng_seed=0)
    scaled = synthesize_snapshot(cfg, [Scatterer(azimuth=0.9, amplitude=2.5 - 1j)], baseband, 0.0, rng_seed=0)
    assert np.allclose(scaled.data, (2.5 - 1j) * one.data, rtol=1e-12, atol=1e-12)


def test_synthesize_accepts_slow_time_amplitude_and_per_scatterer_baseband():
    cfg = half_wave(2)
    amplitude = np.exp(1j * np.linspace(0, 1, 8))
    baseband = np.stack([np.ones(8), 2 * np.ones(8)])
    snapshot = synthesize_snapshot(cfg, [Scatterer(np.pi / 2, amplitude), Scatterer(np.pi / 2, 1.0)], baseband,
                                   0.0, rng_seed=0)
    assert np.allclose(snapshot.data[:, 0], amplitude + 2.0)
    with pytest.raises(InvalidArgumentError):
        synthesize_snapshot(cfg, [Scatterer(np.pi / 2)], baseband, 0.0, rng_seed=0)
    with pytest.raises(InvalidArgumentError):
        synthesize_snapshot(cfg, [Scatterer(np.pi / 2, np.ones(3))], np.ones(8), 0.0, rng_seed=0)


def test_noise_power_matches_variance():
    sigma2 = 0.7
    snapshot = synthesize_snapshot(half_wave(4), [], np.zeros(50_000), sigma2, rng_seed=5)
    empirical = np.mean(np.abs(snapshot.data) ** 2)
    assert abs(empirical - sigma2) / sigma2 < 0.05


def test_negative_noise_variance_rejected():
    with pytest.raises(InvalidArgumentError):
        synthesize_snapshot(half_wave(2), [], np.zeros(4), -1.0, rng_seed=0)
