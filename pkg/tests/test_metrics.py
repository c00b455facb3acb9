import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from thzrestore import metrics
from thzrestore.cube_io import SpectralCube
from thzrestore.metrics import PSNR_INF, psnr, rse


def test_psnr_identical_is_sentinel():
    img = np.random.default_rng(0).random((5, 5)) * 255
    assert psnr(img, img) == PSNR_INF


def test_psnr_uniform_difference_one():
    img = np.full((16, 16), 100.0)
    assert abs(psnr(img + 1, img) - 48.13) <= 0.01
    assert psnr(img + 1, img) == pytest.approx(20 * math.log10(255), abs=1e-12)


def test_psnr_checkerboard():
    img = np.full((8, 8), 50.0)
    board = np.where(np.indices((8, 8)).sum(axis=0) % 2, 2.0, -2.0)
    assert psnr(img + board, img) == pytest.approx(10 * math.log10(255 ** 2 / 4), abs=1e-12)
    assert round(psnr(img + board, img), 2) == 42.11


def test_psnr_size_independent():
    assert psnr(np.ones((4, 4)), np.zeros((4, 4))) == psnr(np.ones((64, 32)), np.zeros((64, 32)))


def test_psnr_shape_mismatch():
    with pytest.raises(ValueError):
        psnr(np.zeros((3, 3)), np.zeros((3, 4)))


def test_psnr_monotone_in_noise():
    rng = np.random.default_rng(0)
    ref = rng.random((64, 64)) * 255
    values = [psnr(ref + s * rng.standard_normal(ref.shape), ref) for s in (1.0, 5.0, 20.0)]
    assert values[0] > values[1] > values[2]


def test_rse_identities():
    orig = np.random.default_rng(1).random((4, 5, 6)) + 0.1
    assert rse(orig, orig) == 0.0
    assert rse(np.zeros_like(orig), orig) == 1.0
    assert rse(2 * orig, orig) == 1.0


def test_rse_zero_reference():
    with pytest.raises(ValueError):
        rse(np.ones(4), np.zeros(4))


def test_rse_accepts_cubes():
    a = SpectralCube(np.ones((2, 2, 3)), 0.1)
    b = SpectralCube(np.full((2, 2, 3), 2.0), 0.1)
    assert rse(b, a) == 1.0


# dyadic data and power-of-two k keep every step exact, so equality is bitwise
@given(arrays(np.int64, (3, 4), elements=st.integers(10, 30)),
       arrays(np.int64, (3, 4), elements=st.integers(-8, 8)),
       st.sampled_from([-4.0, -1.0, 0.5, 2.0, 8.0]))
def test_rse_homogeneous(orig, d, k):
    orig = orig.astype(np.float64)
    d = d / 8.0
    assert rse(orig + k * d, orig) == abs(k) * rse(orig + d, orig)


def _cubes():
    rng = np.random.default_rng(3)
    truth = rng.random((8, 8, 4)) + 0.5
    deg = truth + 0.1 * rng.standard_normal(truth.shape)
    res = truth + 0.03 * rng.standard_normal(truth.shape)
    wrap = lambda d: SpectralCube(d, df=0.1, f_start=0.2)  # noqa: E731
    return wrap(res), wrap(deg), wrap(truth)


def test_report_restored_equals_degraded():
    _, deg, _ = _cubes()
    rep = metrics.report(deg, deg)
    assert np.all(rep.psnr_vs_degraded == PSNR_INF)
    assert rep.rse_overall == 0.0
    assert np.all(rep.rse_per_band == 0.0)


def test_report_psnr_symmetric():
    res, deg, _ = _cubes()
    a, b = metrics.report(res, deg), metrics.report(deg, res)
    np.testing.assert_array_equal(a.psnr_vs_degraded, b.psnr_vs_degraded)


def test_report_with_truth():
    res, deg, truth = _cubes()
    rep = metrics.report(res, deg, truth)
    assert rep.mean_psnr_gain > 5
    np.testing.assert_allclose(rep.freqs, [0.2, 0.3, 0.4, 0.5])
    assert metrics.report(res, deg).mean_psnr_gain is None


def test_report_shape_mismatch():
    res, deg, _ = _cubes()
    with pytest.raises(ValueError):
        metrics.report(res, SpectralCube(deg.data[:, :, :3], 0.1))


def test_report_csv_and_plot(tmp_path):
    res, deg, truth = _cubes()
    path = tmp_path / "metrics.csv"
    metrics.write_report_csv(metrics.report(res, deg), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "band,freq_thz,psnr_vs_degraded,psnr_vs_truth,psnr_degraded_vs_truth,rse"
    assert len(lines) == 5
    assert lines[1].split(",")[3:5] == ["", ""]
    metrics.write_report_csv(metrics.report(deg, deg), path)
    assert path.read_text().splitlines()[1].split(",")[2] == "inf"
    png = tmp_path / "metrics.png"
    metrics.plot_report(metrics.report(res, deg, truth), png)
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
