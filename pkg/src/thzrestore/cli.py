"""``thzrestore`` command line.

Exit codes: 0 ok, 1 I/O, 2 configuration, 3 degenerate data,
4 checkpoint/architecture mismatch, 5 shape mismatch, 6 training diverged.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from . import config as cfgmod
from . import cube_io, metrics, pca, pipeline, psf, spectral
from .cube_io import CubeError, SpectralCube, TimeDomainCube
from .nnet import checkpoint
from .nnet.train import TrainingDivergedError, write_history_csv

log = logging.getLogger("thzrestore")

EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_CHECKPOINT = 4
EXIT_SHAPE = 5
EXIT_DIVERGED = 6

RSE_FLAG = 0.6


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _outputs(out_dir, *names):
    os.makedirs(out_dir, exist_ok=True)
    return [os.path.join(out_dir, n) for n in names]


def _distinct(inputs, outputs):
    seen = {}
    for p in list(inputs) + list(outputs):
        key = os.path.realpath(p)
        if key in seen:
            raise CliError(EXIT_CONFIG, f"paths must be distinct: {seen[key]} and {p}")
        seen[key] = p


def _read(path):
    try:
        return cube_io.read_cube(path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read cube: {exc}") from exc
    except CubeError as exc:
        raise CliError(EXIT_IO, f"{path}: {exc}") from exc


def cmd_simulate(cfg, args):
    truth_p, deg_p, man_p = _outputs(args.out, "truth.cube", "degraded.cube", "manifest.json")
    truth, degraded, manifest = pipeline.simulate(cfg)
    cube_io.write_cube(truth, truth_p)
    cube_io.write_cube(degraded, deg_p)
    with open(man_p, "w") as fh:
        fh.write(pipeline.manifest_json(manifest))
    print(f"wrote {truth_p}, {deg_p}, {man_p} (seed {cfg.run.seed})")


def cmd_fft(cfg, args):
    (spec_p, stats_p) = _outputs(args.out, "spectrum.cube", "band_stats.csv")
    _distinct([args.cube], [spec_p, stats_p])
    cube = _read(args.cube)
    if not isinstance(cube, TimeDomainCube):
        raise CliError(EXIT_CONFIG, f"{args.cube} is already a spectral cube")
    window = None if cfg.run.window == "none" else cfg.run.window
    spec = spectral.to_spectrum(cube, window)
    cube_io.write_cube(spec, spec_p)
    cube_io.export_band_stats_csv(spec, stats_p)
    print(f"wrote {spec_p}: {spec.bands} bins, df = {spec.df * 1000:.4g} GHz")


def _psf_reference_cube(cfg, args):
    if args.cube:
        return pipeline.prepare(cfg, _read(args.cube))
    ph = cfg.phantom
    return SpectralCube(np.zeros((1, 1, ph.bands)), ph.df, ph.f_start)


def _write_grid(values, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in values:
            writer.writerow([repr(float(v)) for v in row])


def cmd_psf_dump(cfg, args):
    """Per-band widths (psf.csv) plus every kernel as a CSV grid."""
    (csv_p,) = _outputs(args.out, "psf.csv")
    cube = _psf_reference_cube(cfg, args)
    bank = psf.make_bank(cfg.optics, cube, "per-band",
                         truncation=cfg.psf.truncation, max_size=cfg.psf.max_size)
    with open(csv_p, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["band", "freq_thz", "sigma_mm", "sigma_px", "size"])
        for b, (f, k) in enumerate(zip(cube.frequencies, bank)):
            sigma_mm = psf.sigma_for(cfg.optics, f) if f > 0 else 0.0
            writer.writerow([b, repr(float(f)), repr(float(sigma_mm)), repr(k.sigma_px), k.size])
    for b, k in enumerate(bank):
        _write_grid(k.values, os.path.join(args.out, f"kernel_{b:03d}.csv"))
    train_k = pipeline.training_kernel(cfg, cube)
    _write_grid(train_k.values, os.path.join(args.out, "kernel_train.csv"))
    print(f"wrote {csv_p} and {len(bank) + 1} kernel grids; training kernel at "
          f"{train_k.freq:.4g} THz: sigma {train_k.sigma_px:.4g} px, {train_k.size}x{train_k.size}")


def cmd_pca_dump(cfg, args):
    eig_p, = _outputs(args.out, "eigen.csv")
    cube = pipeline.prepare(cfg, _read(args.cube))
    model, comps = pca.decompose(cube, cfg.pca.value())
    pca.write_eigen_csv(model, eig_p)
    for i, img in enumerate(comps.images):
        path = os.path.join(args.out, f"pc_{i + 1:02d}.png")
        cube_io.export_band_png(SpectralCube(img[:, :, None], 1.0), 0, path)
    print(f"wrote {eig_p} and {comps.r} component images; "
          f"r = {model.r} keeps {model.explained[model.r - 1]:.4f} of the variance")


def cmd_train(cfg, args):
    ckpt_p, hist_p = _outputs(args.out, "model.ckpt", "history.csv")
    _distinct([args.cube], [ckpt_p, hist_p])
    cube = _read(args.cube)

    def progress(rec):
        log.info("epoch %d/%d loss %.6g psnr %.2f dB", rec.epoch, cfg.train.epochs, rec.loss, rec.psnr)

    result = pipeline.train_stage(cfg, cube, on_epoch=progress)
    checkpoint.save_checkpoint(result.params, cfg.arch.architecture(), ckpt_p)
    write_history_csv(result.history, hist_p)
    first, last = result.history[0].loss, result.history[-1].loss
    print(f"wrote {ckpt_p}, {hist_p}; loss {first:.6g} -> {last:.6g}")


def cmd_restore(cfg, args):
    (cube_p,) = _outputs(args.out, "restored.cube")
    png_dir = os.path.join(args.out, "png")
    _distinct([args.cube, args.checkpoint], [cube_p])
    cube = _read(args.cube)
    try:
        params, _ = checkpoint.load_checkpoint(args.checkpoint, cfg.arch.architecture())
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read checkpoint: {exc}") from exc
    restored = pipeline.restore_stage(cfg, cube, params)
    cube_io.write_cube(restored, cube_p)
    os.makedirs(png_dir, exist_ok=True)
    for b in range(restored.bands):
        cube_io.export_band_png(restored, b, os.path.join(png_dir, f"band_{b:03d}.png"))
    print(f"wrote {cube_p} and {restored.bands} band images in {png_dir}")


def cmd_metrics(cfg, args):
    csv_p, plot_p = _outputs(args.out, "metrics.csv", "metrics.png")
    inputs = [args.restored, args.degraded] + ([args.truth] if args.truth else [])
    _distinct(inputs, [csv_p, plot_p])
    cubes = [_read(p) for p in inputs]
    for path, cube in zip(inputs, cubes):
        if not isinstance(cube, SpectralCube):
            raise CliError(EXIT_SHAPE, f"{path} is not a spectral cube")
        if cube.data.shape != cubes[0].data.shape:
            raise CliError(EXIT_SHAPE, f"shape mismatch: {inputs[0]} is {cubes[0].data.shape}, "
                                       f"{path} is {cube.data.shape}")
    rep = metrics.report(*cubes[:2], truth=cubes[2] if len(cubes) > 2 else None)
    metrics.write_report_csv(rep, csv_p)
    if args.plot:
        metrics.plot_report(rep, plot_p)
    print(f"wrote {csv_p}; RSE(restored vs degraded) = {rep.rse_overall:.4f}")
    if rep.rse_overall > RSE_FLAG:
        print(f"warning: RSE {rep.rse_overall:.4f} exceeds {RSE_FLAG}", file=sys.stderr)
    if rep.psnr_vs_truth is not None:
        print(f"mean truth PSNR gain over degraded: {rep.mean_psnr_gain:.3f} dB")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI file with [section] key = value")
    common.add_argument("--seed", type=int, help="master seed (overrides run.seed)")
    common.add_argument("--out", metavar="DIR", default=".", help="output directory")
    common.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                        dest="overrides", help="override one config field, e.g. optics.aperture=10")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress")

    parser = argparse.ArgumentParser(prog="thzrestore",
                                     description="Denoise and deblur THz spectral image cubes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="write a phantom and its degraded cube")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fft", parents=[common], help="time-domain cube -> amplitude spectrum cube")
    p.add_argument("cube")
    p.set_defaults(func=cmd_fft)

    p = sub.add_parser("psf", help="PSF utilities")
    psub = p.add_subparsers(dest="action", required=True)
    q = psub.add_parser("dump", parents=[common], help="write per-band PSF widths")
    q.add_argument("--cube", help="take frequencies from this cube instead of the phantom")
    q.set_defaults(func=cmd_psf_dump)

    p = sub.add_parser("pca", help="PCA utilities")
    psub = p.add_subparsers(dest="action", required=True)
    q = psub.add_parser("dump", parents=[common], help="write eigenvalues and component images")
    q.add_argument("cube")
    q.set_defaults(func=cmd_pca_dump)

    p = sub.add_parser("train", parents=[common], help="fit the networks on a cube")
    p.add_argument("cube")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("restore", parents=[common], help="restore a cube with a checkpoint")
    p.add_argument("cube")
    p.add_argument("checkpoint")
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("metrics", parents=[common], help="PSNR / RSE report")
    p.add_argument("restored")
    p.add_argument("degraded")
    p.add_argument("--truth")
    p.add_argument("--plot", action="store_true", help="also write metrics.png")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        try:
            cfg = cfgmod.load_config(args.config, args.overrides, args.seed)
        except ValueError as exc:
            raise CliError(EXIT_CONFIG, f"config error: {exc}") from exc
        try:
            args.func(cfg, args)
        except checkpoint.ArchitectureMismatchError as exc:
            raise CliError(EXIT_CHECKPOINT, str(exc)) from exc
        except checkpoint.CheckpointError as exc:
            raise CliError(EXIT_IO, f"{args.checkpoint}: {exc}") from exc
        except pca.DegenerateCubeError as exc:
            raise CliError(EXIT_DEGENERATE, f"degenerate data: {exc}") from exc
        except TrainingDivergedError as exc:
            raise CliError(EXIT_DIVERGED, str(exc)) from exc
        except OSError as exc:
            raise CliError(EXIT_IO, str(exc)) from exc
        except ValueError as exc:
            raise CliError(EXIT_CONFIG, str(exc)) from exc
    except CliError as exc:
        print(f"thzrestore: error: {exc}", file=sys.stderr)
        return exc.code
    return 0


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
