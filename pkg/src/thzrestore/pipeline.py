"""In-process pipeline stages shared by the CLI and the tests.

Stage boundaries mirror the on-disk artifacts: cubes pass through the
float32 cube encoding, so running the stages here gives the same bytes as
running the CLI subcommands one after another.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import cube_io, forward_model, pca, psf, spectral
from .cube_io import SpectralCube, TimeDomainCube
from .nnet import checkpoint
from .nnet.train import apply as apply_network, train as train_network


def roundtrip(cube):
    """What a later stage sees after the cube has been written and read back."""
    return cube_io.decode_cube(cube_io.encode_cube(cube))


def simulate(cfg):
    """Returns (truth, degraded, manifest) for the configured phantom."""
    ph = cfg.phantom
    phantom = forward_model.make_phantom(
        ph.height, ph.width, ph.bands, ph.df, ph.f_start, ph.parsed_shapes(),
        background=ph.background, absorption=ph.absorption, texture=ph.texture,
        seed=cfg.run.seed,
    )
    bank = psf.make_bank(cfg.optics, phantom.as_cube(), "per-band",
                         truncation=cfg.psf.truncation, max_size=cfg.psf.max_size)
    noise = cfg.noise.params()
    degraded = forward_model.degrade(phantom, bank, noise, seed=cfg.run.seed)
    manifest = {
        "seed": cfg.run.seed,
        "noise_params": {"sigma0_sq": noise.sigma0_sq, "beta": noise.beta, "p": noise.p,
                         "poisson_gain": noise.poisson_gain},
        "psf_sigma_px": [k.sigma_px for k in bank],
        "rng": {
            "phantom_texture": f"default_rng({cfg.run.seed})",
            "band_noise": f"default_rng([{cfg.run.seed}, band])",
        },
        "config": cfg.as_dict(),
    }
    return phantom.as_cube(), degraded, manifest


def manifest_json(manifest):
    return json.dumps(manifest, indent=2, sort_keys=True) + "\n"


def prepare(cfg, cube):
    """Time-domain cubes are transformed; then the configured band range is kept."""
    if isinstance(cube, TimeDomainCube):
        window = None if cfg.run.window == "none" else cfg.run.window
        cube = spectral.to_spectrum(cube, window)
    sel = cfg.bands.selection()
    if sel is not None:
        cube = spectral.select_bands(cube, sel)
    return cube


def training_kernel(cfg, cube):
    """Single kernel at the centre of the processed band range."""
    bank = psf.make_bank(cfg.optics, cube, "band-mean", selection=cfg.bands.selection(),
                         truncation=cfg.psf.truncation, max_size=cfg.psf.max_size)
    return bank[0]


@dataclass
class TrainResult:
    params: dict
    history: list
    model: pca.PcaModel
    components: pca.ComponentStack
    kernel: psf.PsfKernel


def train_stage(cfg, cube, on_epoch=None):
    cube = prepare(cfg, cube)
    model, comps = pca.decompose(cube, cfg.pca.value())
    kernel = training_kernel(cfg, cube)
    params, history = train_network(
        list(comps.images), kernel, cfg.r2r, cfg.loss, cfg.train,
        cfg.arch.architecture(), on_epoch=on_epoch,
    )
    return TrainResult(params, history, model, comps, kernel)


def restore_stage(cfg, cube, params):
    cube = prepare(cfg, cube)
    model, comps = pca.decompose(cube, cfg.pca.value())
    return pca.reconstruct(model, apply_network(params, comps, cfg.arch.architecture()))


def run_all(cfg, on_epoch=None):
    """Single-process simulate -> train -> restore; returns every artifact's bytes."""
    truth, degraded, manifest = simulate(cfg)
    truth_raw = cube_io.encode_cube(truth)
    degraded_raw = cube_io.encode_cube(degraded)
    degraded = cube_io.decode_cube(degraded_raw)
    result = train_stage(cfg, degraded, on_epoch=on_epoch)
    arch = cfg.arch.architecture()
    restored = restore_stage(cfg, degraded, result.params)
    return {
        "truth": truth_raw,
        "degraded": degraded_raw,
        "manifest": manifest_json(manifest).encode(),
        "checkpoint": checkpoint.encode_checkpoint(result.params, arch),
        "restored": cube_io.encode_cube(restored),
        "history": result.history,
        "result": result,
    }


def cube_like(data, cube):
    return SpectralCube(np.asarray(data, dtype=np.float64), cube.df, cube.f_start)
