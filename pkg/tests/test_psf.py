import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from thzrestore import psf
from thzrestore.cube_io import SpectralCube
from thzrestore.psf import KernelTooLargeError, OpticsConfig
from thzrestore.spectral import BandSelection

C = 0.299792458
F4_OPTICS = OpticsConfig(focal_length=40.0, aperture=10.0, pixel_pitch=0.5)


def test_waist_and_sigma_ratios_at_f_number_4():
    lam = psf.wavelength(F4_OPTICS, 1.0)
    assert psf.beam_waist(F4_OPTICS, 1.0) / lam == pytest.approx(8 / math.pi, rel=1e-15)
    assert abs(psf.beam_waist(F4_OPTICS, 1.0) / lam - 2.547) <= 0.001
    assert abs(psf.sigma_for(F4_OPTICS, 1.0) / lam - 1.801) <= 0.001


def test_one_terahertz_values():
    assert psf.beam_waist(F4_OPTICS, 1.0) == pytest.approx(0.76346, abs=5e-5)
    assert psf.sigma_for(F4_OPTICS, 1.0) == pytest.approx(0.53984, abs=5e-5)
    k = psf.make_kernel(F4_OPTICS, 1.0)
    assert k.sigma_px == pytest.approx(1.0797, abs=1e-4)
    assert k.size == 9


def test_f_number_8_doubles_sigma():
    slow = OpticsConfig(focal_length=80.0, aperture=10.0)
    assert psf.sigma_for(slow, 1.0) / psf.wavelength(slow, 1.0) == pytest.approx(
        2 * 8 / math.pi / math.sqrt(2))
    assert round(psf.sigma_for(slow, 1.0) / psf.wavelength(slow, 1.0), 1) == 3.6


@given(st.floats(0.01, 10.0))
def test_frequency_scaling_and_ratio(f):
    assert psf.sigma_for(F4_OPTICS, 2 * f) == psf.sigma_for(F4_OPTICS, f) / 2
    assert psf.sigma_for(F4_OPTICS, f) / psf.beam_waist(F4_OPTICS, f) == pytest.approx(1 / math.sqrt(2))


def test_non_positive_frequency_rejected():
    for f in (0.0, -1.0):
        with pytest.raises(ValueError):
            psf.beam_waist(F4_OPTICS, f)


@pytest.mark.parametrize("field", ["focal_length", "aperture", "pixel_pitch"])
def test_optics_validation(field):
    with pytest.raises(ValueError, match=field):
        OpticsConfig(**{field: 0.0})


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.05, 5))
def test_frequency_density_identity(x, y, f):
    sigma = 1.8 * C / f
    a = psf.frequency_psf_density(x, y, f)
    b = psf.gaussian_density(x, y, sigma)
    if b > 1e-300:
        assert a == pytest.approx(b, rel=1e-12)


def test_delta_limit_and_small_kernels():
    assert psf.gaussian_kernel(0.0).values.tolist() == [[1.0]]
    assert psf.gaussian_kernel(0.29).is_delta
    k = psf.gaussian_kernel(1.0)
    assert k.size == 7
    assert k.values[3, 3] == k.values.max()
    assert k.values.sum() == pytest.approx(1.0, abs=1e-12)


def test_kernel_too_large_suggests_pitch():
    with pytest.raises(KernelTooLargeError, match="pixel pitch"):
        psf.gaussian_kernel(10.0)
    with pytest.raises(ValueError):
        psf.gaussian_kernel(1.0, truncation=0.0)


@given(st.floats(0.3, 8.0), st.floats(1.0, 4.0))
def test_kernel_invariants(sigma, trunc):
    k = psf.gaussian_kernel(sigma, trunc, max_size=101)
    v = k.values
    assert k.size % 2 == 1 and k.size == 2 * math.ceil(trunc * sigma) + 1
    assert abs(v.sum() - 1.0) < 1e-9
    assert np.all(v >= 0)
    assert np.array_equal(v, v.T)
    assert np.array_equal(v, v[::-1, ::-1])
    assert np.array_equal(v, np.rot90(v))


def test_bank_modes():
    optics = OpticsConfig(pixel_pitch=1.0)
    cube = SpectralCube(np.zeros((1, 1, 20)), df=0.1, f_start=0.0)
    bank = psf.make_bank(optics, cube)
    assert len(bank) == 20 and bank[0].is_delta
    sizes = [k.size for k in bank[1:]]
    assert all(a >= b for a, b in zip(sizes, sizes[1:]))
    one = psf.make_bank(optics, SpectralCube(np.zeros((1, 1, 1)), df=0.1, f_start=1.0))
    assert len(one) == 1
    sel = BandSelection(0.03, 1.93)
    mean_bank = psf.make_bank(optics, cube, "band-mean", selection=sel)
    assert len(mean_bank) == 20
    assert all(k is mean_bank[0] for k in mean_bank)
    assert mean_bank[0].freq == pytest.approx(0.98)
    with pytest.raises(ValueError):
        psf.make_bank(optics, cube, "nearest")
