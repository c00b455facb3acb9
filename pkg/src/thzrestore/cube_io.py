"""Cube data model and the THZCUBE1 binary container.

File layout (all little-endian)::

    8s   magic      b"THZCUBE1"
    u32  version    1
    u32  kind       0 = time-domain, 1 = spectral
    u32  height
    u32  width
    u32  depth      samples (time) or bands (spectral)
    f64  axis0      dt in ps (time) or df in THz (spectral)
    f64  axis1      0.0 (time) or f_start in THz (spectral)
    f32[height*width*depth]  payload, (row, col, axis) nesting, row-major

Cubes hold float64 in memory; the payload is float32, so a round trip is
bit-exact for any cube whose values are float32-representable.
"""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

MAGIC = b"THZCUBE1"
VERSION = 1
KIND_TIME = 0
KIND_SPECTRAL = 1

_HEADER = struct.Struct("<8sIIIIIdd")
HEADER_SIZE = _HEADER.size


class CubeError(ValueError):
    """Base class for invalid cube data or files."""


class BadMagicError(CubeError):
    pass


class TruncatedCubeError(CubeError):
    pass


class NonFiniteCubeError(CubeError):
    pass


class CubeHeaderError(CubeError):
    pass


def _as_data(data, name):
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 3:
        raise CubeError(f"{name} data must be 3-D (rows, cols, axis), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteCubeError(f"{name} data contains non-finite values")
    return arr


@dataclass(frozen=True, eq=False)
class TimeDomainCube:
    """One time-domain waveform per pixel; ``dt`` in picoseconds."""

    data: np.ndarray
    dt: float

    def __post_init__(self):
        arr = _as_data(self.data, "TimeDomainCube")
        h, w, t = arr.shape
        if h < 1 or w < 1 or t < 2:
            raise CubeError(f"TimeDomainCube needs height, width >= 1 and samples >= 2, got {arr.shape}")
        if not self.dt > 0:
            raise CubeError(f"dt must be > 0, got {self.dt}")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def samples(self):
        return self.data.shape[2]

    def __eq__(self, other):
        return (
            isinstance(other, TimeDomainCube)
            and self.dt == other.dt
            and self.data.shape == other.data.shape
            and np.array_equal(self.data, other.data)
        )


@dataclass(frozen=True, eq=False)
class SpectralCube:
    """Nonnegative amplitude spectrum per pixel.

    Bin ``b`` is centred at ``f_start + b * df`` (THz).
    """

    data: np.ndarray
    df: float
    f_start: float = 0.0

    def __post_init__(self):
        arr = _as_data(self.data, "SpectralCube")
        if arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
            raise CubeError(f"SpectralCube needs nonempty axes, got {arr.shape}")
        if not self.df > 0:
            raise CubeError(f"df must be > 0, got {self.df}")
        if np.any(arr < 0):
            raise CubeError("SpectralCube amplitudes must be >= 0")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "df", float(self.df))
        object.__setattr__(self, "f_start", float(self.f_start))

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

    def band(self, b):
        return self.data[:, :, b]

    def __eq__(self, other):
        return (
            isinstance(other, SpectralCube)
            and self.df == other.df
            and self.f_start == other.f_start
            and self.data.shape == other.data.shape
            and np.array_equal(self.data, other.data)
        )


@dataclass(frozen=True)
class CubeHeader:
    magic: bytes
    version: int
    kind: int
    dims: tuple
    axis0: float
    axis1: float

    def pack(self):
        return _HEADER.pack(self.magic, self.version, self.kind, *self.dims, self.axis0, self.axis1)

    @classmethod
    def unpack(cls, raw):
        if len(raw) < 8 or raw[:8] != MAGIC:
            raise BadMagicError(f"bad magic {raw[:8]!r}, expected {MAGIC!r}")
        if len(raw) < HEADER_SIZE:
            raise TruncatedCubeError(f"header truncated: {len(raw)} of {HEADER_SIZE} bytes")
        magic, version, kind, h, w, d, a0, a1 = _HEADER.unpack(raw[:HEADER_SIZE])
        return cls(magic, version, kind, (h, w, d), a0, a1)

    @property
    def payload_size(self):
        h, w, d = self.dims
        return h * w * d * 4


def header_for(cube):
    if isinstance(cube, TimeDomainCube):
        return CubeHeader(MAGIC, VERSION, KIND_TIME, cube.data.shape, cube.dt, 0.0)
    if isinstance(cube, SpectralCube):
        return CubeHeader(MAGIC, VERSION, KIND_SPECTRAL, cube.data.shape, cube.df, cube.f_start)
    raise TypeError(f"not a cube: {type(cube).__name__}")


def encode_cube(cube):
    header = header_for(cube)
    payload = cube.data.astype("<f4")
    if not np.all(np.isfinite(payload)):
        raise NonFiniteCubeError("cube values overflow float32")
    return header.pack() + payload.tobytes(order="C")


def decode_cube(raw):
    header = CubeHeader.unpack(raw)
    if header.version != VERSION:
        raise CubeHeaderError(f"unsupported cube version {header.version}")
    body = raw[HEADER_SIZE:]
    if len(body) < header.payload_size:
        raise TruncatedCubeError(
            f"payload truncated: header claims {header.dims} ({header.payload_size} bytes), "
            f"found {len(body)} bytes"
        )
    if len(body) > header.payload_size:
        raise CubeHeaderError(f"{len(body) - header.payload_size} trailing bytes after payload")
    data = np.frombuffer(body, dtype="<f4").reshape(header.dims).astype(np.float64)
    if not np.all(np.isfinite(data)):
        raise NonFiniteCubeError("payload contains non-finite values")
    if header.kind == KIND_TIME:
        return TimeDomainCube(data, header.axis0)
    if header.kind == KIND_SPECTRAL:
        return SpectralCube(data, header.axis0, header.axis1)
    raise CubeHeaderError(f"unknown cube kind {header.kind}")


def write_cube(cube, path):
    raw = encode_cube(cube)
    path = Path(path)
    try:
        path.write_bytes(raw)
    except OSError as exc:
        raise OSError(f"cannot write cube to {path}: {exc}") from exc


def read_cube(path):
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read cube from {path}: {exc}") from exc
    return decode_cube(raw)


def band_to_uint8(values):
    """Min-max normalise to 0..255 with round-half-up; constant input maps to 128."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.full(v.shape, 128, dtype=np.uint8)
    scaled = (v - lo) / (hi - lo) * 255.0
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def export_band_png(cube, band, path):
    if not 0 <= band < cube.bands:
        raise IndexError(f"band {band} out of range for cube with {cube.bands} bands")
    Image.fromarray(band_to_uint8(cube.band(band))).save(Path(path), format="PNG")


def export_band_stats_csv(cube, path):
    freqs = cube.frequencies
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["band", "freq_thz", "min", "max", "mean"])
        for b in range(cube.bands):
            img = cube.band(b)
            writer.writerow([b, repr(float(freqs[b])), repr(float(img.min())),
                             repr(float(img.max())), repr(float(img.mean()))])
