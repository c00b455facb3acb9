"""Time-domain waveforms to amplitude spectra, and frequency band selection."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cube_io import SpectralCube


class BandSelectionError(ValueError):
    pass


def round_half_up(x):
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class BandSelection:
    """Closed frequency interval [f_initial, f_end] in THz."""

    f_initial: float
    f_end: float

    def __post_init__(self):
        if not 0 <= self.f_initial < self.f_end:
            raise BandSelectionError(
                f"need 0 <= f_initial < f_end, got ({self.f_initial}, {self.f_end})"
            )

    @property
    def center(self):
        return band_center(self)

    def indices(self, cube):
        """Bin index range (start, stop) with stop exclusive."""
        lo = round_half_up((self.f_initial - cube.f_start) / cube.df)
        hi = round_half_up((self.f_end - cube.f_start) / cube.df)
        if lo < 0 or hi > cube.bands - 1:
            raise BandSelectionError(
                f"selection [{self.f_initial}, {self.f_end}] THz maps to bins {lo}..{hi}, "
                f"outside 0..{cube.bands - 1}"
            )
        if hi < lo:
            raise BandSelectionError("empty band selection")
        return lo, hi + 1


def band_center(sel):
    return 0.5 * (sel.f_initial + sel.f_end)


def to_spectrum(cube, window=None):
    """Unnormalised DFT magnitudes of bins 0..T//2 for every pixel."""
    waveforms = cube.data
    t = cube.samples
    if window == "hann":
        waveforms = waveforms * np.hanning(t)
    elif window not in (None, "none"):
        raise ValueError(f"unknown window {window!r}")
    amplitude = np.abs(np.fft.rfft(waveforms, axis=2))
    # dt in ps -> 1/ps == THz
    return SpectralCube(amplitude, df=1.0 / (t * cube.dt), f_start=0.0)


def select_bands(cube, sel):
    lo, hi = sel.indices(cube)
    return SpectralCube(cube.data[:, :, lo:hi].copy(), cube.df, cube.f_start + lo * cube.df)
