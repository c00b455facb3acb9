"""Recorrupted-to-Recorrupted training pairs.

From one noisy image y and a noise draw n ~ N(0, diag(sigma_map**2)) we form
``y_hat = y + alpha * n`` (network input) and ``y_tilde = y - n / alpha``
(target).  The per-pixel variance is the excess of the 5x5 box-smoothed image
over a background level, floored at ``variance_floor``.

That variance model is in intensity units, so training images normalised to
[0, 1] are recorrupted on the 0..``intensity_scale`` scale (see
:func:`make_normalized_pair`).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import box_filter

# Recorruption noise is rounded to this dyadic grid.  For alpha = 1 and any
# image whose pixels lie on the grid (all float32 data in [2**-16, 2**12),
# 8-bit data, ...) y_hat + y_tilde == 2*y holds bit-exactly.
NOISE_QUANTUM = 2.0 ** -40
SMOOTHING_SIZE = 5


@dataclass(frozen=True)
class R2RConfig:
    alpha: float = 1.0
    background_mode: str = "percentile"
    background_q: float = 1.0
    background_value: float = 0.0
    variance_floor: float = 1e-6
    intensity_scale: float = 255.0
    seed: int = 0

    def __post_init__(self):
        if self.alpha == 0:
            raise ValueError("r2r.alpha must be nonzero")
        if self.background_mode not in ("percentile", "fixed"):
            raise ValueError(f"r2r.background_mode must be 'percentile' or 'fixed', got {self.background_mode!r}")
        if not 0 <= self.background_q <= 100:
            raise ValueError(f"r2r.background_q must be in [0, 100], got {self.background_q}")
        if not self.variance_floor > 0:
            raise ValueError(f"r2r.variance_floor must be > 0, got {self.variance_floor}")
        if not self.intensity_scale > 0:
            raise ValueError(f"r2r.intensity_scale must be > 0, got {self.intensity_scale}")


@dataclass(frozen=True, eq=False)
class R2RPair:
    y_hat: np.ndarray
    y_tilde: np.ndarray
    sigma_map: np.ndarray


def background_level(smoothed, cfg):
    if cfg.background_mode == "fixed":
        return cfg.background_value
    return float(np.percentile(smoothed, cfg.background_q))


def estimate_sigma(y, cfg):
    y = np.asarray(y, dtype=np.float64)
    if y.shape[0] < SMOOTHING_SIZE or y.shape[1] < SMOOTHING_SIZE:
        raise ValueError(f"image must be at least {SMOOTHING_SIZE}x{SMOOTHING_SIZE}, got {y.shape}")
    smoothed = box_filter(y, SMOOTHING_SIZE)
    excess = smoothed - background_level(smoothed, cfg)
    return np.sqrt(np.maximum(excess, cfg.variance_floor))


def draw_noise(sigma_map, rng):
    n = rng.standard_normal(sigma_map.shape) * sigma_map
    return np.round(n / NOISE_QUANTUM) * NOISE_QUANTUM


def make_pair(y, cfg, rng=None, noise=None):
    """``noise`` overrides the random draw (used by tests to force n = 0)."""
    y = np.asarray(y, dtype=np.float64)
    sigma_map = estimate_sigma(y, cfg)
    if noise is None:
        if rng is None:
            rng = np.random.default_rng(cfg.seed)
        noise = draw_noise(sigma_map, rng)
    else:
        noise = np.broadcast_to(np.asarray(noise, dtype=np.float64), y.shape)
    return R2RPair(y + cfg.alpha * noise, y - noise / cfg.alpha, sigma_map)


def make_normalized_pair(y, cfg, rng=None):
    """Pair for an image in [0, 1]: drawn on the intensity scale, mapped back."""
    s = cfg.intensity_scale
    pair = make_pair(np.asarray(y, dtype=np.float64) * s, cfg, rng)
    return R2RPair(pair.y_hat / s, pair.y_tilde / s, pair.sigma_map / s)


def pair_stream(images, cfg, count):
    """Deterministic pairs cycling through ``images``; pair k uses seed (cfg.seed, k)."""
    if len(images) == 0:
        raise ValueError("pair_stream needs at least one image")
    for k in range(count):
        rng = np.random.default_rng([int(cfg.seed), k])
        yield make_pair(images[k % len(images)], cfg, rng)
