"""PSNR and relative spectral error."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

PSNR_INF = math.inf


def psnr(test, ref, peak=255.0):
    """10*log10(peak**2 / MSE), MSE averaged over pixels.  Identical images give +inf."""
    test = np.asarray(test, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if test.shape != ref.shape:
        raise ValueError(f"shape mismatch: {test.shape} vs {ref.shape}")
    mse = float(np.mean((test - ref) ** 2))
    if mse == 0.0:
        return PSNR_INF
    return 10.0 * math.log10(peak * peak / mse)


def rse(proc, orig):
    proc = getattr(proc, "data", proc)
    orig = getattr(orig, "data", orig)
    proc = np.asarray(proc, dtype=np.float64)
    orig = np.asarray(orig, dtype=np.float64)
    if proc.shape != orig.shape:
        raise ValueError(f"shape mismatch: {proc.shape} vs {orig.shape}")
    denom = math.sqrt(float(np.sum(orig * orig)))
    if denom == 0.0:
        raise ValueError("RSE undefined: reference is all zero")
    return math.sqrt(float(np.sum((proc - orig) ** 2))) / denom


def to_display_scale(data, ceiling):
    """Map amplitudes onto the 0..255 scale used for PSNR."""
    return np.asarray(data, dtype=np.float64) * (255.0 / ceiling)


@dataclass(frozen=True)
class MetricReport:
    freqs: np.ndarray
    psnr_vs_degraded: np.ndarray
    psnr_vs_truth: np.ndarray | None
    psnr_degraded_vs_truth: np.ndarray | None
    rse_per_band: np.ndarray
    rse_overall: float
    ceiling: float

    @property
    def mean_psnr_gain(self):
        """Band-averaged truth PSNR of restored minus degraded (synthetic mode only)."""
        if self.psnr_vs_truth is None:
            return None
        return float(np.mean(self.psnr_vs_truth - self.psnr_degraded_vs_truth))


def report(restored, degraded, truth=None, ceiling=None):
    """Per-band metrics.  All PSNRs use one amplitude ``ceiling`` mapped to 255;
    by default the largest amplitude among the supplied cubes."""
    cubes = [restored, degraded] + ([truth] if truth is not None else [])
    for c in cubes[1:]:
        if c.data.shape != restored.data.shape:
            raise ValueError(f"shape mismatch: {c.data.shape} vs {restored.data.shape}")
    if ceiling is None:
        ceiling = max(float(c.data.max()) for c in cubes)
        if ceiling <= 0:
            ceiling = 1.0
    bands = restored.bands
    scaled = [to_display_scale(c.data, ceiling) for c in cubes]
    vs_deg = np.array([psnr(scaled[0][:, :, b], scaled[1][:, :, b]) for b in range(bands)])
    vs_truth = deg_vs_truth = None
    if truth is not None:
        vs_truth = np.array([psnr(scaled[0][:, :, b], scaled[2][:, :, b]) for b in range(bands)])
        deg_vs_truth = np.array([psnr(scaled[1][:, :, b], scaled[2][:, :, b]) for b in range(bands)])
    per_band = np.array([
        rse(restored.data[:, :, b], degraded.data[:, :, b]) if np.any(degraded.data[:, :, b])
        else math.nan
        for b in range(bands)
    ])
    return MetricReport(restored.frequencies, vs_deg, vs_truth, deg_vs_truth, per_band,
                        rse(restored, degraded), ceiling)


def _fmt(x):
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return repr(x)


def write_report_csv(rep, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["band", "freq_thz", "psnr_vs_degraded", "psnr_vs_truth",
                         "psnr_degraded_vs_truth", "rse"])
        for b, f in enumerate(rep.freqs):
            writer.writerow([
                b, _fmt(f), _fmt(rep.psnr_vs_degraded[b]),
                _fmt(None if rep.psnr_vs_truth is None else rep.psnr_vs_truth[b]),
                _fmt(None if rep.psnr_degraded_vs_truth is None else rep.psnr_degraded_vs_truth[b]),
                _fmt(rep.rse_per_band[b]),
            ])


def plot_report(rep, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    finite = np.where(np.isfinite(rep.psnr_vs_degraded), rep.psnr_vs_degraded, np.nan)
    ax.plot(rep.freqs, finite, label="restored vs degraded")
    if rep.psnr_vs_truth is not None:
        ax.plot(rep.freqs, rep.psnr_vs_truth, label="restored vs truth")
        ax.plot(rep.freqs, rep.psnr_degraded_vs_truth, label="degraded vs truth")
    ax.set_xlabel("Frequency (THz)")
    ax.set_ylabel("PSNR (dB)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
