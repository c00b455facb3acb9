"""Synthetic phantoms and the blur-plus-noise observation model."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import filters
from .cube_io import SpectralCube


@dataclass(frozen=True)
class NoiseParams:
    """Frequency-dependent noise: variance sigma0_sq + beta * f**p, plus a
    signal-dependent term poisson_gain * (blurred amplitude)."""

    sigma0_sq: float = 0.0
    beta: float = 0.0
    p: float = 2.0
    poisson_gain: float = 0.0

    def __post_init__(self):
        for name in ("sigma0_sq", "beta", "p", "poisson_gain"):
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"noise.{name} must be >= 0, got {value}")


def variance_at(noise, f):
    if f < 0:
        raise ValueError(f"frequency must be >= 0, got {f}")
    return noise.sigma0_sq + noise.beta * f ** noise.p


def beta_for_sigma_ratio(sigma0_sq, p, f_low, f_high, ratio):
    """beta such that sigma(f_high) = ratio * sigma(f_low)."""
    denom = f_high ** p - ratio * ratio * f_low ** p
    if denom <= 0:
        raise ValueError("ratio not reachable with this exponent")
    return (ratio * ratio - 1.0) * sigma0_sq / denom


@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    radius: float
    amplitude: float
    decay: float = 0.0

    def mask(self, height, width):
        y, x = np.mgrid[0:height, 0:width]
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 <= self.radius ** 2

    def fits(self, height, width):
        return (self.cx - self.radius >= 0 and self.cy - self.radius >= 0
                and self.cx + self.radius <= width - 1 and self.cy + self.radius <= height - 1)


@dataclass(frozen=True)
class Rect:
    """Pixels with x0 <= col < x1 and y0 <= row < y1."""

    x0: int
    y0: int
    x1: int
    y1: int
    amplitude: float
    decay: float = 0.0

    def mask(self, height, width):
        y, x = np.mgrid[0:height, 0:width]
        return (x >= self.x0) & (x < self.x1) & (y >= self.y0) & (y < self.y1)

    def fits(self, height, width):
        return 0 <= self.x0 < self.x1 <= width and 0 <= self.y0 < self.y1 <= height


@dataclass(frozen=True, eq=False)
class Phantom:
    data: np.ndarray
    df: float
    f_start: float
    shapes: tuple = field(default=())

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def bands(self):
        return self.data.shape[2]

    @property
    def frequencies(self):
        return self.f_start + np.arange(self.bands) * self.df

    def as_cube(self):
        return SpectralCube(self.data, self.df, self.f_start)


def make_phantom(height, width, bands, df, f_start, shapes=(), background=0.3,
                 absorption=0.5, texture=0.0, seed=0):
    """Piecewise-constant scene with frequency-dependent amplitudes.

    Background is ``background * exp(-absorption * f)``, optionally
    modulated by a seeded multiplicative texture of relative strength
    ``texture``.  Each shape overrides it with ``amplitude * exp(-decay * f)``.
    """
    freqs = f_start + np.arange(bands) * df
    for shape in shapes:
        if not shape.fits(height, width):
            raise ValueError(f"shape {shape} does not fit in a {height}x{width} image")
    rng = np.random.default_rng(seed)
    spatial = np.ones((height, width))
    if texture > 0:
        spatial = 1.0 + texture * rng.uniform(-1.0, 1.0, size=(height, width))
    data = background * spatial[:, :, None] * np.exp(-absorption * freqs)[None, None, :]
    for shape in shapes:
        m = shape.mask(height, width)
        data[m] = shape.amplitude * np.exp(-shape.decay * freqs)
    if data.min() < 0 or data.max() > 1:
        raise ValueError("phantom amplitudes must lie in [0, 1]; lower amplitudes or texture")
    return Phantom(data, float(df), float(f_start), tuple(shapes))


def band_rng(seed, band):
    return np.random.default_rng([int(seed), int(band)])


def degrade_array(phantom, psf_bank, noise, seed=0):
    """Observation model on the float64 path; returns an (H, W, B) array."""
    if len(psf_bank) != phantom.bands:
        raise ValueError(f"PSF bank has {len(psf_bank)} kernels for {phantom.bands} bands")
    out = np.empty_like(phantom.data)
    for b, f in enumerate(phantom.frequencies):
        kernel = psf_bank[b].values
        blurred = filters.convolve(phantom.data[:, :, b], kernel)
        var = variance_at(noise, max(f, 0.0)) + noise.poisson_gain * np.maximum(blurred, 0.0)
        n = band_rng(seed, b).standard_normal(blurred.shape) * np.sqrt(var)
        out[:, :, b] = np.maximum(blurred + n, 0.0)
    return out


def degrade(phantom, psf_bank, noise, seed=0):
    return SpectralCube(degrade_array(phantom, psf_bank, noise, seed), phantom.df, phantom.f_start)
