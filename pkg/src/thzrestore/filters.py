"""2-D filtering with mirror ("reflect") boundary handling.

Reflect padding follows numpy's ``mode="reflect"`` (edge sample not repeated:
``c b | a b c d | c b``).  Every routine accepts a trailing stack of images
with the spatial axes first two of the last three, or a plain 2-D image; the
batched forms operate on ``(..., H, W)``.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _check_fits(shape, kh, kw):
    h, w = shape[-2], shape[-1]
    if kh > h or kw > w:
        raise ValueError(f"kernel {kh}x{kw} larger than image {h}x{w}")


def reflect_pad(images, ph, pw):
    pad = [(0, 0)] * (images.ndim - 2) + [(ph, ph), (pw, pw)]
    return np.pad(images, pad, mode="reflect")


def reflect_pad_adjoint(padded, ph, pw):
    """Transpose of :func:`reflect_pad`: fold padded-border gradients back in."""
    h = padded.shape[-2] - 2 * ph
    w = padded.shape[-1] - 2 * pw
    out = padded.copy()
    # columns first (operates on every row, including padded rows)
    if pw:
        core = out[..., pw:pw + w]
        left = out[..., :pw]
        right = out[..., pw + w:]
        # left pad column j (0..pw-1) mirrors core column pw - j
        core[..., 1:pw + 1] += left[..., ::-1]
        core[..., w - pw - 1:w - 1] += right[..., ::-1]
        out = core
    if ph:
        core = out[..., ph:ph + h, :]
        top = out[..., :ph, :]
        bottom = out[..., ph + h:, :]
        core[..., 1:ph + 1, :] += top[..., ::-1, :]
        core[..., h - ph - 1:h - 1, :] += bottom[..., ::-1, :]
        out = core
    return np.ascontiguousarray(out)


def convolve(images, kernel):
    """True 2-D convolution of ``(..., H, W)`` images with an odd-sized kernel."""
    images = np.asarray(images, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    kh, kw = kernel.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise ValueError(f"kernel must have odd side lengths, got {kernel.shape}")
    _check_fits(images.shape, kh, kw)
    if kh == 1 and kw == 1:
        return images * kernel[0, 0]
    padded = reflect_pad(images, kh // 2, kw // 2)
    windows = sliding_window_view(padded, (kh, kw), axis=(-2, -1))
    return np.tensordot(windows, kernel[::-1, ::-1], axes=([-2, -1], [0, 1]))


def convolve_adjoint(grad, kernel):
    """Transpose of :func:`convolve` with respect to its image argument."""
    grad = np.asarray(grad, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    kh, kw = kernel.shape
    if kh == 1 and kw == 1:
        return grad * kernel[0, 0]
    ph, pw = kh // 2, kw // 2
    # correlation-transpose: zero-pad, correlate with the unflipped kernel
    zp = np.pad(grad, [(0, 0)] * (grad.ndim - 2) + [(kh - 1, kh - 1), (kw - 1, kw - 1)])
    windows = sliding_window_view(zp, (kh, kw), axis=(-2, -1))
    padded_grad = np.tensordot(windows, kernel, axes=([-2, -1], [0, 1]))
    return reflect_pad_adjoint(padded_grad, ph, pw)


def box_filter(image, size=5):
    """Mean over a ``size`` x ``size`` neighbourhood, reflect padding."""
    image = np.asarray(image, dtype=np.float64)
    _check_fits(image.shape, size, size)
    padded = reflect_pad(image, size // 2, size // 2)
    return sliding_window_view(padded, (size, size), axis=(-2, -1)).mean(axis=(-2, -1))


def average_pool(images, s):
    """Non-overlapping ``s`` x ``s`` mean pooling of ``(..., H, W)``; s=1 is identity."""
    if s == 1:
        return images
    h, w = images.shape[-2], images.shape[-1]
    if h % s or w % s:
        raise ValueError(f"image {h}x{w} not divisible by downsample factor {s}")
    shaped = images.reshape(images.shape[:-2] + (h // s, s, w // s, s))
    return shaped.mean(axis=(-3, -1))


def average_pool_adjoint(grad, s):
    if s == 1:
        return grad
    return np.repeat(np.repeat(grad, s, axis=-2), s, axis=-1) / (s * s)
