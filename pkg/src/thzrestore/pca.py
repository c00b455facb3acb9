"""Principal-component decomposition of spectral cubes.

The cube is viewed as a B x N matrix (one column per pixel spectrum, N = H*W),
centred per band, and diagonalised through its B x B sample covariance.
Component images are the rows of the projection of the centred data onto the
retained eigenvectors.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .cube_io import SpectralCube
from .eigen import jacobi_eigh

DEFAULT_RETAIN = 5
NEGATIVE_EIGENVALUE_TOL = 1e-10


class DegenerateCubeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PcaModel:
    band_means: np.ndarray  # (B,)
    eigenvalues: np.ndarray  # (B,) nonincreasing
    eigenvectors: np.ndarray  # (B, B), columns
    r: int
    explained: np.ndarray  # cumulative fractions, (B,)
    height: int
    width: int
    df: float
    f_start: float

    @property
    def bands(self):
        return self.band_means.shape[0]

    @property
    def basis(self):
        return self.eigenvectors[:, : self.r]


@dataclass(frozen=True, eq=False)
class ComponentStack:
    images: np.ndarray  # (r, H, W), normalised
    offsets: np.ndarray  # (r,)
    scales: np.ndarray  # (r,)

    @property
    def r(self):
        return self.images.shape[0]

    def denormalized(self):
        return self.offsets[:, None, None] + self.scales[:, None, None] * self.images

    def replace(self, images):
        images = np.asarray(images, dtype=np.float64)
        if images.shape != self.images.shape:
            raise ValueError(f"component images {images.shape} do not match {self.images.shape}")
        return ComponentStack(images, self.offsets, self.scales)

    @classmethod
    def from_raw(cls, raw):
        """Normalise raw component images to [0, 1] per component."""
        raw = np.asarray(raw, dtype=np.float64)
        lo = raw.min(axis=(1, 2))
        hi = raw.max(axis=(1, 2))
        scales = np.where(hi > lo, hi - lo, 1.0)
        images = (raw - lo[:, None, None]) / scales[:, None, None]
        return cls(np.clip(images, 0.0, 1.0), lo, scales)


def _fix_signs(vectors):
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _resolve_retain(retain, cumulative):
    b = cumulative.shape[0]
    if isinstance(retain, float) and retain < 1:
        if not retain > 0:
            raise ValueError(f"variance fraction must be in (0, 1), got {retain}")
        # tolerance guards fractions that are reached exactly up to rounding
        return min(int(np.searchsorted(cumulative, retain - 1e-12)) + 1, b)
    r = int(retain)
    if r != retain or not 1 <= r <= b:
        raise ValueError(f"retained component count must be an integer in 1..{b}, got {retain}")
    return r


def spectra_matrix(cube):
    """B x N matrix, one pixel spectrum per column."""
    return cube.data.reshape(-1, cube.bands).T


DEGENERATE_RTOL = 1e-12  # spread below this fraction of the data scale is round-off


def decompose(cube, retain=DEFAULT_RETAIN):
    """``retain`` is a component count (int) or an explained-variance fraction (float < 1)."""
    b = cube.bands
    n = cube.height * cube.width
    if b < 2 or n < 2:
        raise DegenerateCubeError(f"need at least 2 bands and 2 pixels, got B={b}, N={n}")
    y = spectra_matrix(cube)
    mu = y.mean(axis=1)
    centred = y - mu[:, None]
    scale = max(float(np.abs(y).max()), np.finfo(float).tiny)
    if float(np.abs(centred).max()) <= DEGENERATE_RTOL * scale:
        raise DegenerateCubeError("no spectral variance: every pixel has the same spectrum")
    cov = centred @ centred.T / (n - 1)
    values, vectors = jacobi_eigh(cov)
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = _fix_signs(vectors[:, order])
    if values[-1] < -NEGATIVE_EIGENVALUE_TOL * max(values[0], 1.0):
        raise ArithmeticError(f"covariance has a negative eigenvalue {values[-1]:.3g}")
    values = np.maximum(values, 0.0)
    total = values.sum()
    if total <= 0:
        raise DegenerateCubeError("no spectral variance: every pixel has the same spectrum")
    cumulative = np.cumsum(values) / total
    r = _resolve_retain(retain, cumulative)
    model = PcaModel(mu, values, vectors, r, cumulative, cube.height, cube.width,
                     cube.df, cube.f_start)
    return model, ComponentStack.from_raw(project(model, cube))


def project(model, cube):
    """Raw (unnormalised) component images, shape (r, H, W)."""
    centred = spectra_matrix(cube) - model.band_means[:, None]
    z = model.basis.T @ centred
    return z.reshape(model.r, cube.height, cube.width)


def reconstruct(model, components):
    if components.r != model.r or components.images.shape[1:] != (model.height, model.width):
        raise ValueError(
            f"components {components.images.shape} do not match model "
            f"(r={model.r}, {model.height}x{model.width})"
        )
    z = components.denormalized().reshape(model.r, -1)
    y = model.basis @ z + model.band_means[:, None]
    data = np.maximum(y.T.reshape(model.height, model.width, model.bands), 0.0)
    return SpectralCube(data, model.df, model.f_start)


def explained_variance(model, r):
    if not 1 <= r <= model.bands:
        raise ValueError(f"r must be in 1..{model.bands}, got {r}")
    total = model.eigenvalues.sum()
    if total <= 0:
        raise DegenerateCubeError("total variance is zero")
    return float(model.eigenvalues[:r].sum() / total)


def write_eigen_csv(model, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "eigenvalue", "cumulative_fraction"])
        for i, (lam, cum) in enumerate(zip(model.eigenvalues, model.explained)):
            writer.writerow([i + 1, repr(float(lam)), repr(float(cum))])
