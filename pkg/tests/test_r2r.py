import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from thzrestore import r2r
from thzrestore.r2r import R2RConfig, estimate_sigma, make_pair, pair_stream

FIXED0 = R2RConfig(background_mode="fixed", background_value=0.0)


def test_sigma_constant_at_background_is_floor():
    cfg = R2RConfig(background_mode="fixed", background_value=3.0)
    s = estimate_sigma(np.full((8, 8), 3.0), cfg)
    np.testing.assert_array_equal(s, np.sqrt(cfg.variance_floor))


def test_sigma_constant_excess_four():
    cfg = R2RConfig(background_mode="fixed", background_value=6.0)
    np.testing.assert_allclose(estimate_sigma(np.full((7, 9), 10.0), cfg), 2.0, rtol=0, atol=1e-15)


def test_sigma_centre_impulse():
    y = np.zeros((5, 5))
    y[2, 2] = 25.0
    assert estimate_sigma(y, FIXED0)[2, 2] == pytest.approx(1.0, abs=1e-15)


def test_sigma_percentile_background():
    y = np.arange(100.0).reshape(10, 10)
    s = estimate_sigma(y, R2RConfig())
    assert s.min() == pytest.approx(np.sqrt(1e-6))
    assert np.all(np.diff(s.ravel()[:5]) >= 0)


def test_sigma_rejects_small_image():
    with pytest.raises(ValueError):
        estimate_sigma(np.ones((4, 8)), FIXED0)


def test_zero_noise_hook():
    y = np.random.default_rng(0).random((6, 6))
    p = make_pair(y, R2RConfig(alpha=0.7), noise=0.0)
    np.testing.assert_array_equal(p.y_hat, y)
    np.testing.assert_array_equal(p.y_tilde, y)


def test_sum_is_exactly_twice_y_on_float32_data():
    y = np.random.default_rng(1).random((32, 32)).astype(np.float32).astype(np.float64) * 200 + 1
    p = make_pair(y, FIXED0, np.random.default_rng(2))
    np.testing.assert_array_equal(p.y_hat + p.y_tilde, 2 * y)
    np.testing.assert_array_equal((p.y_hat + p.y_tilde) / 2, y)


@given(arrays(np.uint8, (6, 7)), st.integers(0, 2**32 - 1))
def test_sum_identity_on_8bit_images(img, seed):
    y = img.astype(np.float64)
    p = make_pair(y, R2RConfig(), np.random.default_rng(seed))
    np.testing.assert_array_equal(p.y_hat + p.y_tilde, 2 * y)


def _moments(alpha=1.0):
    # 320x320 pixels share one sigma_map value: 102400 independent draws
    y = np.full((320, 320), 4.0)
    p = make_pair(y, R2RConfig(alpha=alpha, background_mode="fixed", background_value=0.0),
                  np.random.default_rng(7))
    return y, p


def test_monte_carlo_moments():
    y, p = _moments()
    var = p.sigma_map[0, 0] ** 2
    assert var == pytest.approx(4.0)
    a, b = (p.y_hat - y).ravel(), (p.y_tilde - y).ravel()
    assert abs(a.var() / var - 1) < 0.02
    cov = np.mean((a - a.mean()) * (b - b.mean()))
    assert abs(cov / -var - 1) < 0.02


def test_monte_carlo_moments_nonuniform_sigma():
    rng = np.random.default_rng(3)
    y = rng.random((320, 320)) * 50 + 10
    p = make_pair(y, FIXED0, rng)
    z = (p.y_hat - y) / p.sigma_map
    assert abs(z.var() - 1) < 0.02


def test_unbiased():
    y, p = _moments()
    a = (p.y_hat - y).ravel()
    assert abs(a.mean()) < 3 * a.std() / np.sqrt(a.size)


@pytest.mark.parametrize("alpha", [0.5, 1.0, -2.0, 3.0])
def test_anticorrelation(alpha):
    y = np.random.default_rng(4).random((12, 12)) * 100
    p = make_pair(y, R2RConfig(alpha=alpha), np.random.default_rng(5))
    np.testing.assert_allclose((p.y_hat - y) / alpha, -(p.y_tilde - y) * alpha, rtol=1e-12, atol=1e-12)


@given(arrays(np.float64, (6, 6), elements=st.floats(-1e3, 1e3)),
       st.floats(1e-12, 1.0))
def test_sigma_lower_bound(y, eps):
    s = estimate_sigma(y, R2RConfig(variance_floor=eps))
    assert np.all(s >= np.sqrt(eps))


def test_normalized_pair_scales_back():
    y = np.random.default_rng(6).random((10, 10))
    cfg = R2RConfig()
    p = r2r.make_normalized_pair(y, cfg, np.random.default_rng(0))
    q = make_pair(y * 255.0, cfg, np.random.default_rng(0))
    np.testing.assert_allclose(p.y_hat * 255.0, q.y_hat, rtol=1e-14)
    np.testing.assert_allclose(p.sigma_map * 255.0, q.sigma_map, rtol=1e-14)


def test_pair_stream_empty_count():
    assert list(pair_stream([np.ones((5, 5))], R2RConfig(), 0)) == []


def test_pair_stream_deterministic_and_cycling():
    imgs = [np.random.default_rng(i).random((8, 8)) * 100 for i in range(2)]
    a = list(pair_stream(imgs, R2RConfig(seed=3), 4))
    b = list(pair_stream(imgs, R2RConfig(seed=3), 4))
    assert len(a) == 4
    for p, q in zip(a, b):
        np.testing.assert_array_equal(p.y_hat, q.y_hat)
    np.testing.assert_array_equal(a[0].sigma_map, a[2].sigma_map)
    assert not np.array_equal(a[0].y_hat, a[2].y_hat)


def test_pair_stream_needs_images():
    with pytest.raises(ValueError):
        list(pair_stream([], R2RConfig(), 1))


@pytest.mark.parametrize("kwargs", [
    {"alpha": 0.0}, {"background_q": -1}, {"background_q": 101}, {"variance_floor": 0.0},
    {"background_mode": "median"}, {"intensity_scale": 0.0},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        R2RConfig(**kwargs)
