"""Denoiser and deblurrer networks, their loss, gradients and training.

The ``loss`` and ``train`` submodules keep their names; their entry points are
``model.loss`` and ``train.train``.
"""
from .checkpoint import load_checkpoint, save_checkpoint
from .loss import LossConfig, hessian_penalty
from .model import backward, loss_and_grads
from .train import Adam, TrainConfig, apply
from .unet import DEFAULT_ARCH, Architecture, forward, init_params, zero_params

__all__ = [
    "Adam", "Architecture", "DEFAULT_ARCH", "LossConfig", "TrainConfig", "apply", "backward",
    "forward", "hessian_penalty", "init_params", "load_checkpoint", "loss_and_grads",
    "save_checkpoint", "zero_params",
]
