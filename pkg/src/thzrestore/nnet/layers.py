"""Forward and backward kernels for NHWC float64 tensors."""
import numpy as np


THIN_INPUT = 4


def _padded_flat(x):
    """Zero-pad spatially by 1 and flatten to rows of channels.

    A trailing all-zero image guards the shifted reads of the last image.
    Output pixel (i, j) of the padded grid reads input row
    ``k + a * (W + 2) + b`` for kernel tap (a, b), so every tap is one
    contiguous slice.
    """
    n, h, w, c = x.shape
    xp = np.zeros((n + 1, h + 2, w + 2, c))
    xp[:n, 1:h + 1, 1:w + 1] = x
    return xp.reshape(-1, c)


def _taps(h, w):
    return [(a, b, a * (w + 2) + b) for a in range(3) for b in range(3)]


def conv3_forward(x, weight, bias):
    """3x3 cross-correlation, zero padding 1.  weight is (3, 3, Cin, Cout)."""
    n, h, w, _ = x.shape
    cout = weight.shape[3]
    cin = weight.shape[2]
    flat = _padded_flat(x)
    m = n * (h + 2) * (w + 2)
    if cin <= THIN_INPUT:
        # gather the taps into columns: one wide product beats nine skinny ones
        cols = np.empty((m, 9 * cin))
        for t, (_, _, off) in enumerate(_taps(h, w)):
            cols[:, t * cin:(t + 1) * cin] = flat[off:off + m]
        out = cols @ weight.reshape(9 * cin, cout)
    else:
        out = np.zeros((m, cout))
        for a, b, off in _taps(h, w):
            out += flat[off:off + m] @ weight[a, b]
    out = out.reshape(n, h + 2, w + 2, cout)[:, :h, :w]
    return out + bias


def conv3_backward(x, weight, dout, need_dx=True):
    n, h, w, cin = x.shape
    cout = weight.shape[3]
    m = n * (h + 2) * (w + 2)
    g = np.zeros((n, h + 2, w + 2, cout))
    g[:, :h, :w] = dout
    g = g.reshape(m, cout)
    flat = _padded_flat(x)
    dw = np.empty_like(weight)
    for a, b, off in _taps(h, w):
        dw[a, b] = flat[off:off + m].T @ g
    db = dout.reshape(-1, cout).sum(axis=0)
    if not need_dx:
        return None, dw, db
    dflat = np.zeros(((n + 1) * (h + 2) * (w + 2), cin))
    for a, b, off in _taps(h, w):
        dflat[off:off + m] += g @ weight[a, b].T
    dx = dflat.reshape(n + 1, h + 2, w + 2, cin)[:n, 1:h + 1, 1:w + 1]
    return np.ascontiguousarray(dx), dw, db


def conv1_forward(x, weight, bias):
    """1x1 convolution, weight (Cin, Cout)."""
    return x @ weight + bias


def conv1_backward(x, weight, dout):
    cin, cout = weight.shape
    dflat = dout.reshape(-1, cout)
    dw = x.reshape(-1, cin).T @ dflat
    return dout @ weight.T, dw, dflat.sum(axis=0)


def relu_forward(x):
    return np.maximum(x, 0.0)


def relu_backward(x, dout):
    return dout * (x > 0)


def pool_forward(x):
    n, h, w, c = x.shape
    return x.reshape(n, h // 2, 2, w // 2, 2, c).mean(axis=(2, 4))


def pool_backward(dout):
    return np.repeat(np.repeat(dout, 2, axis=1), 2, axis=2) * 0.25


def up_forward(x):
    return np.repeat(np.repeat(x, 2, axis=1), 2, axis=2)


def up_backward(dout):
    n, h, w, c = dout.shape
    return dout.reshape(n, h // 2, 2, w // 2, 2, c).sum(axis=(2, 4))


def concat_forward(a, b):
    n = max(a.shape[0], b.shape[0])
    if a.shape[0] != n:
        a = np.broadcast_to(a, (n,) + a.shape[1:])
    if b.shape[0] != n:
        b = np.broadcast_to(b, (n,) + b.shape[1:])
    return np.concatenate([a, b], axis=3)


def concat_backward(dout, ca):
    return dout[..., :ca], dout[..., ca:]
