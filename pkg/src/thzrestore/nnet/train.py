"""Adam training on R2R pairs drawn from random patches, and inference."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np

from .. import metrics, r2r
from . import unet
from .loss import LossConfig
from .model import loss_and_grads

log = logging.getLogger(__name__)


class TrainingDivergedError(ArithmeticError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 16
    epochs: int = 100
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    patch_size: int = 64
    steps_per_epoch: int = 8
    seed: int = 0

    def __post_init__(self):
        for name in ("batch_size", "epochs", "steps_per_epoch"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"train.{name} must be >= 1, got {getattr(self, name)}")
        if self.learning_rate < 0:
            raise ValueError(f"train.learning_rate must be >= 0, got {self.learning_rate}")
        if self.patch_size < 16 or self.patch_size % 4:
            raise ValueError(f"train.patch_size must be >= 16 and divisible by 4, got {self.patch_size}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.eps > 0):
            raise ValueError("invalid Adam hyperparameters")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    term1: float
    term2: float
    term3: float
    psnr: float


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for k in sorted(params):
            g = grads[k]
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            if self.lr:
                params[k] -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


def _patch_size(cfg, images):
    h = min(img.shape[0] for img in images)
    w = min(img.shape[1] for img in images)
    size = min(cfg.patch_size, h - h % 4, w - w % 4)
    if size < 16:
        raise ValueError(f"training images too small ({h}x{w}); need at least 16x16")
    return size


def _random_patch(image, size, rng):
    h, w = image.shape
    i = int(rng.integers(0, h - size + 1))
    j = int(rng.integers(0, w - size + 1))
    patch = image[i:i + size, j:j + size]
    if rng.random() < 0.5:
        patch = patch[:, ::-1]
    if rng.random() < 0.5:
        patch = patch[::-1, :]
    return np.ascontiguousarray(patch)


def denoise_psnr(params, images, arch=unet.DEFAULT_ARCH):
    """Mean PSNR (0..255 scale) of the denoiser output against its input."""
    values = []
    for img in images:
        den, _ = forward_padded(params, img, arch)
        values.append(metrics.psnr(den * 255.0, img * 255.0))
    return float(np.mean(values))


@np.errstate(over="ignore", invalid="ignore")  # divergence is detected and reported below
def train(images, kernel, r2r_cfg, loss_cfg=LossConfig(), train_cfg=TrainConfig(),
          arch=unet.DEFAULT_ARCH, params=None, on_epoch=None):
    """Returns (params, history).  ``images`` are normalised (H, W) arrays."""
    images = [np.asarray(img, dtype=np.float64) for img in images]
    if not images:
        raise ValueError("train needs at least one image")
    size = _patch_size(train_cfg, images)
    rng = np.random.default_rng([int(train_cfg.seed), 1])
    if params is None:
        params = unet.init_params(arch, train_cfg.seed)
    else:
        params = {k: v.copy() for k, v in params.items()}
    opt = Adam(params, train_cfg.learning_rate, train_cfg.beta1, train_cfg.beta2, train_cfg.eps)
    history = []
    pair_index = 0
    order = []
    for epoch in range(train_cfg.epochs):
        totals = []
        terms = []
        for _ in range(train_cfg.steps_per_epoch):
            y_hat, y_tilde = [], []
            for _ in range(train_cfg.batch_size):
                if not order:
                    order = list(rng.permutation(len(images)))
                patch = _random_patch(images[order.pop()], size, rng)
                pair = r2r.make_normalized_pair(patch, r2r_cfg,
                                     np.random.default_rng([int(r2r_cfg.seed), pair_index]))
                pair_index += 1
                y_hat.append(pair.y_hat)
                y_tilde.append(pair.y_tilde)
            batch = r2r.R2RPair(np.stack(y_hat), np.stack(y_tilde), None)
            total, breakdown, grads = loss_and_grads(params, batch, kernel, loss_cfg, arch)
            if not math.isfinite(total):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch + 1}; lower train.learning_rate "
                    f"(currently {train_cfg.learning_rate:g})"
                )
            opt.step(params, grads)
            for k, v in params.items():
                if not np.all(np.isfinite(v)):
                    raise TrainingDivergedError(
                        f"parameter {k} became non-finite at epoch {epoch + 1}; "
                        f"lower train.learning_rate (currently {train_cfg.learning_rate:g})"
                    )
            totals.append(total)
            terms.append((breakdown["term1"], breakdown["term2"], breakdown["term3"]))
        t1, t2, t3 = np.mean(terms, axis=0)
        record = EpochRecord(epoch + 1, float(np.mean(totals)), float(t1), float(t2), float(t3),
                             denoise_psnr(params, images, arch))
        history.append(record)
        log.debug("epoch %d loss %.6g psnr %.3f", record.epoch, record.loss, record.psnr)
        if on_epoch is not None:
            on_epoch(record)
    return params, history


def forward_padded(params, image, arch=unet.DEFAULT_ARCH):
    """Forward an arbitrary-size image: reflect-pad to a multiple of 4, crop back."""
    h, w = image.shape
    ph = (-h) % 4
    pw = (-w) % 4
    padded = np.pad(image, ((0, ph), (0, pw)), mode="reflect") if ph or pw else image
    den, deb = unet.forward(params, padded, arch)
    return den[:h, :w], deb[:h, :w]


def apply(params, components, arch=unet.DEFAULT_ARCH):
    """Replace every normalised component image by the chain's restored output."""
    restored = np.stack([forward_padded(params, img, arch)[1] for img in components.images])
    return components.replace(restored)


def write_history_csv(history, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "loss", "term1", "term2", "term3", "psnr"])
        for rec in history:
            writer.writerow([rec.epoch, repr(rec.loss), repr(rec.term1), repr(rec.term2),
                             repr(rec.term3), repr(rec.psnr)])
