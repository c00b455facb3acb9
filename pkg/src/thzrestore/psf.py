"""Diffraction-limited Gaussian-beam point spread functions.

Units: lengths in mm, frequencies in THz, time in ps, so the wavelength is
simply ``C_MM_PER_PS / freq``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

C_MM_PER_PS = 0.299792458
DELTA_SIGMA_PX = 0.3
DEFAULT_MAX_KERNEL = 51


class KernelTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class OpticsConfig:
    focal_length: float = 40.0
    aperture: float = 10.0
    pixel_pitch: float = 0.5
    c: float = C_MM_PER_PS

    def __post_init__(self):
        for name in ("focal_length", "aperture", "pixel_pitch"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"optics.{name} must be > 0, got {value}")

    @property
    def f_number(self):
        return self.focal_length / self.aperture


@dataclass(frozen=True, eq=False)
class PsfKernel:
    values: np.ndarray
    sigma_px: float
    freq: float

    @property
    def size(self):
        return self.values.shape[0]

    @property
    def is_delta(self):
        return self.size == 1


def delta_kernel(freq=0.0):
    return PsfKernel(np.ones((1, 1)), 0.0, freq)


def wavelength(optics, freq):
    if not freq > 0:
        raise ValueError(f"frequency must be > 0 THz, got {freq}")
    return optics.c / freq


def beam_waist(optics, freq):
    """1/e^2 intensity radius at focus, mm."""
    return 2.0 * wavelength(optics, freq) * optics.focal_length / (math.pi * optics.aperture)


def sigma_for(optics, freq):
    """Standard deviation of the Gaussian PSF, mm."""
    return beam_waist(optics, freq) / math.sqrt(2.0)


def gaussian_density(x, y, sigma):
    return np.exp(-(x * x + y * y) / (2.0 * sigma * sigma)) / (2.0 * math.pi * sigma * sigma)


def frequency_psf_density(x, y, freq, c=C_MM_PER_PS):
    """Continuous PSF written directly in frequency, assuming sigma = 1.8 c / f."""
    f2 = freq * freq
    return f2 / (6.48 * math.pi * c * c) * np.exp(-f2 * (x * x + y * y) / (6.48 * c * c))


def gaussian_kernel(sigma_px, truncation=3.0, max_size=DEFAULT_MAX_KERNEL, freq=0.0):
    if not truncation > 0:
        raise ValueError(f"truncation must be > 0, got {truncation}")
    if sigma_px < DELTA_SIGMA_PX:
        return PsfKernel(np.ones((1, 1)), float(sigma_px), freq)
    half = int(math.ceil(truncation * sigma_px))
    size = 2 * half + 1
    if size > max_size:
        raise KernelTooLargeError(
            f"PSF kernel at {freq:g} THz needs {size}x{size} pixels (sigma {sigma_px:.3g} px), "
            f"above the limit of {max_size}; use a coarser pixel pitch"
        )
    offsets = np.arange(-half, half + 1, dtype=np.float64)
    r2 = offsets[:, None] ** 2 + offsets[None, :] ** 2
    values = np.exp(-r2 / (2.0 * sigma_px * sigma_px))
    values /= values.sum()
    return PsfKernel(values, float(sigma_px), freq)


def make_kernel(optics, freq, truncation=3.0, max_size=DEFAULT_MAX_KERNEL):
    sigma_px = sigma_for(optics, freq) / optics.pixel_pitch
    return gaussian_kernel(sigma_px, truncation, max_size, freq=float(freq))


def make_bank(optics, cube, mode="per-band", selection=None, truncation=3.0,
              max_size=DEFAULT_MAX_KERNEL):
    """Kernels for every bin of ``cube``.

    ``per-band`` evaluates each bin at its own centre frequency (DC gets a
    delta).  ``band-mean`` evaluates one kernel at the centre of
    ``selection`` (or of the cube's frequency span) and repeats it.
    """
    freqs = cube.frequencies
    if mode == "per-band":
        return [
            make_kernel(optics, f, truncation, max_size) if f > 0 else delta_kernel(float(f))
            for f in freqs
        ]
    if mode == "band-mean":
        if selection is None:
            center = 0.5 * (freqs[0] + freqs[-1])
        else:
            center = selection.center
        kernel = make_kernel(optics, center, truncation, max_size) if center > 0 else delta_kernel()
        return [kernel] * cube.bands
    raise ValueError(f"unknown PSF bank mode {mode!r}")
