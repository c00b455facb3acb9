"""Self-supervised denoise + deblur objective and its image-space gradients.

Per sample::

    term1 = mean((denoised - y_tilde)**2)
    term2 = mean((down(restored (*) kernel) - down(y_tilde))**2)
    term3 = hessian_penalty(restored)
    total = term1 + xi * term2 + gamma * term3

A batch loss is the mean of the per-sample totals.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import filters


@dataclass(frozen=True)
class LossConfig:
    xi: float = 1.0
    gamma: float = 0.01
    downsample_factor: int = 1
    detach_deblur_input: bool = False

    def __post_init__(self):
        if not self.xi >= 0 or not self.gamma >= 0:
            raise ValueError(f"loss.xi and loss.gamma must be >= 0, got {self.xi}, {self.gamma}")
        if int(self.downsample_factor) != self.downsample_factor or self.downsample_factor < 1:
            raise ValueError(f"loss.downsample_factor must be an integer >= 1, got {self.downsample_factor}")


def _second_differences(z):
    zxx = z[..., 1:-1, 2:] - 2.0 * z[..., 1:-1, 1:-1] + z[..., 1:-1, :-2]
    zyy = z[..., 2:, 1:-1] - 2.0 * z[..., 1:-1, 1:-1] + z[..., :-2, 1:-1]
    zxy = 0.25 * (z[..., 2:, 2:] - z[..., 2:, :-2] - z[..., :-2, 2:] + z[..., :-2, :-2])
    return zxx, zyy, zxy


def hessian_penalty(z):
    """Mean over interior pixels of |z_xx| + |z_yy| + 2|z_xy|.

    Works on (H, W) or (N, H, W); batched input gives one value per sample.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] < 3 or z.shape[-2] < 3:
        raise ValueError(f"image must be at least 3x3, got {z.shape[-2:]}")
    zxx, zyy, zxy = _second_differences(z)
    return (np.abs(zxx) + np.abs(zyy) + 2.0 * np.abs(zxy)).mean(axis=(-2, -1))


def hessian_penalty_grad(z):
    """Gradient of :func:`hessian_penalty` (per sample), sign(0) = 0."""
    z = np.asarray(z, dtype=np.float64)
    zxx, zyy, zxy = _second_differences(z)
    count = zxx.shape[-2] * zxx.shape[-1]
    sxx = np.sign(zxx) / count
    syy = np.sign(zyy) / count
    sxy = 2.0 * np.sign(zxy) / count * 0.25
    g = np.zeros_like(z)
    g[..., 1:-1, 2:] += sxx
    g[..., 1:-1, 1:-1] -= 2.0 * sxx
    g[..., 1:-1, :-2] += sxx
    g[..., 2:, 1:-1] += syy
    g[..., 1:-1, 1:-1] -= 2.0 * syy
    g[..., :-2, 1:-1] += syy
    g[..., 2:, 2:] += sxy
    g[..., 2:, :-2] -= sxy
    g[..., :-2, 2:] -= sxy
    g[..., :-2, :-2] += sxy
    return g


def _check_kernel(kernel, shape):
    k = kernel.shape[0]
    if k > shape[-2] or k > shape[-1]:
        raise ValueError(f"PSF kernel {k}x{k} larger than patch {shape[-2]}x{shape[-1]}")


def loss_terms(denoised, restored, y_tilde, kernel, cfg):
    """Per-sample (term1, term2, term3) arrays for (N, H, W) inputs."""
    kv = getattr(kernel, "values", kernel)
    _check_kernel(kv, restored.shape)
    s = int(cfg.downsample_factor)
    term1 = ((denoised - y_tilde) ** 2).mean(axis=(-2, -1))
    blurred = filters.convolve(restored, kv)
    resid = filters.average_pool(blurred, s) - filters.average_pool(y_tilde, s)
    term2 = (resid ** 2).mean(axis=(-2, -1))
    term3 = hessian_penalty(restored)
    return term1, term2, term3


def combine(term1, term2, term3, cfg):
    return term1 + cfg.xi * term2 + cfg.gamma * term3


def loss_and_image_grads(denoised, restored, y_tilde, kernel, cfg):
    """Batch-mean loss, per-term means, and d(loss)/d(denoised), d(loss)/d(restored)."""
    kv = getattr(kernel, "values", kernel)
    _check_kernel(kv, restored.shape)
    s = int(cfg.downsample_factor)
    n = denoised.shape[0]
    pix = denoised.shape[-2] * denoised.shape[-1]

    diff1 = denoised - y_tilde
    term1 = (diff1 ** 2).mean(axis=(-2, -1))
    g_den = 2.0 * diff1 / (pix * n)

    blurred = filters.convolve(restored, kv)
    resid = filters.average_pool(blurred, s) - filters.average_pool(y_tilde, s)
    term2 = (resid ** 2).mean(axis=(-2, -1))
    g_resid = 2.0 * resid / (resid.shape[-2] * resid.shape[-1] * n)
    g_res = cfg.xi * filters.convolve_adjoint(filters.average_pool_adjoint(g_resid, s), kv)

    term3 = hessian_penalty(restored)
    if cfg.gamma:
        g_res = g_res + (cfg.gamma / n) * hessian_penalty_grad(restored)

    totals = combine(term1, term2, term3, cfg)
    breakdown = {"term1": float(term1.mean()), "term2": float(term2.mean()),
                 "term3": float(term3.mean())}
    return float(totals.mean()), breakdown, g_den, g_res
