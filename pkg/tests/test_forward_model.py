import numpy as np
import pytest
from hypothesis import given, strategies as st

from thzrestore import filters, psf
from thzrestore.forward_model import (
    Disk, NoiseParams, Rect, beta_for_sigma_ratio, degrade, degrade_array, make_phantom,
    variance_at,
)


def test_variance_examples():
    assert variance_at(NoiseParams(0.0001, 0.0004, 2), 2.0) == pytest.approx(0.0017, rel=1e-12)
    assert variance_at(NoiseParams(0.0, 1.0, 1), 0.5) == 0.5
    for f in (0.0, 0.3, 2.0):
        assert variance_at(NoiseParams(0.01, 0.0, 2), f) == 0.01
        assert variance_at(NoiseParams(0.01, 0.2, 0), f) == pytest.approx(0.21)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 4),
       st.floats(0, 5), st.floats(0, 5))
def test_variance_monotone_in_frequency(s0, beta, p, f1, f2):
    lo, hi = sorted((f1, f2))
    noise = NoiseParams(s0, beta, p)
    assert variance_at(noise, lo) <= variance_at(noise, hi)


def test_noise_params_validation():
    for kwargs in ({"sigma0_sq": -1}, {"beta": -1}, {"p": -1}, {"poisson_gain": -0.1}):
        with pytest.raises(ValueError):
            NoiseParams(**kwargs)


def test_beta_for_sigma_ratio_doubles_sigma():
    s0 = (25 / 255) ** 2
    beta = beta_for_sigma_ratio(s0, 2.0, 0.1, 2.0, 2.0)
    noise = NoiseParams(s0, beta, 2.0)
    ratio = np.sqrt(variance_at(noise, 2.0) / variance_at(noise, 0.1))
    assert ratio == pytest.approx(2.0, rel=1e-12)


def test_empty_phantom_is_constant():
    ph = make_phantom(8, 9, 4, 0.1, 0.1, shapes=(), background=0.4, absorption=0.0)
    assert np.all(ph.data == 0.4)


def test_disk_geometry():
    disk = Disk(32, 32, 8, amplitude=0.9)
    ph = make_phantom(64, 64, 3, 0.1, 0.1, shapes=[disk], background=0.3)
    y, x = np.mgrid[0:64, 0:64]
    inside = (x - 32) ** 2 + (y - 32) ** 2 <= 64
    differs = np.any(ph.data != ph.data[0, 0][None, None, :], axis=2)
    assert np.array_equal(differs, inside)


def test_shapes_override_background_with_decay():
    ph = make_phantom(16, 16, 3, 0.5, 0.5, shapes=[Rect(2, 3, 6, 8, 0.8, 1.0)],
                      background=0.3, absorption=0.5)
    f = np.array([0.5, 1.0, 1.5])
    np.testing.assert_allclose(ph.data[4, 3], 0.8 * np.exp(-f))
    np.testing.assert_allclose(ph.data[0, 0], 0.3 * np.exp(-0.5 * f))


def test_phantom_deterministic_and_bounds_checked():
    kwargs = dict(height=16, width=16, bands=2, df=0.1, f_start=0.1, texture=0.2, seed=4)
    a = make_phantom(**kwargs)
    b = make_phantom(**kwargs)
    assert np.array_equal(a.data, b.data)
    with pytest.raises(ValueError):
        make_phantom(16, 16, 2, 0.1, 0.1, shapes=[Disk(2, 8, 5, 0.5)])
    with pytest.raises(ValueError):
        make_phantom(16, 16, 2, 0.1, 0.1, shapes=[Rect(0, 0, 17, 4, 0.5)])


def _delta_bank(n):
    return [psf.delta_kernel()] * n


def test_identity_degradation_is_bit_exact():
    ph = make_phantom(12, 10, 3, 0.1, 0.2, shapes=[Disk(5, 5, 3, 0.7, 0.2)], texture=0.3, seed=2)
    out = degrade_array(ph, _delta_bank(3), NoiseParams())
    assert out.tobytes() == ph.data.tobytes()


def test_additive_noise_variance_monte_carlo():
    ph = make_phantom(320, 320, 1, 0.1, 1.0, background=0.9, absorption=0.0)
    noise = NoiseParams(sigma0_sq=1e-4)
    out = degrade(ph, _delta_bank(1), noise, seed=7)
    resid = out.data[:, :, 0] - ph.data[:, :, 0]
    assert abs(resid.var() / 1e-4 - 1.0) < 0.02


def test_degrade_applies_signal_dependent_term():
    ph = make_phantom(200, 200, 1, 0.1, 1.0, background=0.5, absorption=0.0)
    noise = NoiseParams(sigma0_sq=1e-5, poisson_gain=1e-3)
    out = degrade(ph, _delta_bank(1), noise, seed=1)
    expected = 1e-5 + 1e-3 * 0.5
    assert abs((out.data[:, :, 0] - 0.5).var() / expected - 1.0) < 0.03


def test_degrade_clamps_and_is_deterministic():
    ph = make_phantom(32, 32, 2, 0.1, 0.5, background=0.01, absorption=0.0)
    noise = NoiseParams(sigma0_sq=0.01)
    a = degrade(ph, _delta_bank(2), noise, seed=3)
    b = degrade(ph, _delta_bank(2), noise, seed=3)
    assert a.data.min() >= 0.0
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, degrade(ph, _delta_bank(2), noise, seed=4).data)


def test_degrade_errors():
    ph = make_phantom(8, 8, 2, 0.1, 0.5)
    with pytest.raises(ValueError):
        degrade(ph, _delta_bank(1), NoiseParams())
    big = psf.gaussian_kernel(2.0)  # 13x13
    with pytest.raises(ValueError):
        degrade(ph, [big, big], NoiseParams())


def test_blur_conserves_mean(rng):
    kernel = psf.gaussian_kernel(1.5).values
    const = np.full((20, 24), 0.37)
    assert abs(filters.convolve(const, kernel).mean() - 0.37) < 1e-6
    img = rng.uniform(0, 1, (40, 40))
    assert abs(filters.convolve(img, kernel).mean() / img.mean() - 1.0) < 0.01


def test_per_band_streams_are_independent_of_band_count():
    small = make_phantom(16, 16, 2, 0.1, 0.5, background=0.5)
    large = make_phantom(16, 16, 4, 0.1, 0.5, background=0.5)
    noise = NoiseParams(sigma0_sq=1e-3)
    a = degrade_array(small, _delta_bank(2), noise, seed=9)
    b = degrade_array(large, _delta_bank(4), noise, seed=9)
    assert np.array_equal(a, b[:, :, :2])
