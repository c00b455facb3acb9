"""Loss and parameter gradients of the denoiser -> deblurrer chain on R2R pairs."""
import numpy as np

from . import unet
from .loss import loss_and_image_grads


def _stack(a):
    a = np.asarray(a, dtype=np.float64)
    return a[None] if a.ndim == 2 else a


def loss(params, pair, kernel, cfg, arch=unet.DEFAULT_ARCH):
    """(total, {"term1", "term2", "term3"}) averaged over the pair batch."""
    total, breakdown = _evaluate(params, pair, kernel, cfg, arch)[:2]
    return total, breakdown


def backward(params, pair, kernel, cfg, arch=unet.DEFAULT_ARCH):
    """Gradient of the total loss with respect to every parameter tensor."""
    return loss_and_grads(params, pair, kernel, cfg, arch)[2]


def loss_and_grads(params, pair, kernel, cfg, arch=unet.DEFAULT_ARCH):
    total, breakdown, g_den, g_res, env = _evaluate(params, pair, kernel, cfg, arch)
    seeds = {"den.out": g_den[..., None], "deb.out": g_res[..., None]}
    stop = "den.out" if cfg.detach_deblur_input else None
    grads = unet.backward(params, env, seeds, arch, stop_at=stop)
    return total, breakdown, grads


def _evaluate(params, pair, kernel, cfg, arch):
    y_hat = _stack(pair.y_hat)
    y_tilde = _stack(pair.y_tilde)
    env = unet.run(params, y_hat, arch)
    denoised = env["den.out"][..., 0]
    restored = env["deb.out"][..., 0]
    total, breakdown, g_den, g_res = loss_and_image_grads(denoised, restored, y_tilde, kernel, cfg)
    return total, breakdown, g_den, g_res, env
