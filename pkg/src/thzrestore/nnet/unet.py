"""Two-level encoder-decoder networks and the denoiser -> deblurrer chain.

Each network maps one channel to one channel::

    enc1  = relu(conv3(x))                        16 ch, full res
    enc2  = relu(conv3(pool(enc1)))               32 ch, 1/2
    bott  = relu(conv3(pool(enc2)))               64 ch, 1/4
    dec2  = relu(conv3(concat(up(bott), enc2)))   32 ch, 1/2
    dec1  = relu(conv3(concat(up(dec2), enc1)))   16 ch, full res
    out   = conv1(concat(dec1, x))                 1 ch

``pool`` is 2x2 averaging and ``up`` nearest-neighbour repetition.  The raw
input is concatenated in front of the final 1x1 layer (passthrough) unless the
architecture disables it.

The graph is a flat list of steps evaluated in order over a dict of named
tensors, which lets :func:`resume` re-run everything downstream of a single
step with a replaced (and possibly batched) output.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import layers

NETWORKS = ("den", "deb")


@dataclass(frozen=True)
class Architecture:
    widths: tuple = (16, 32, 64)
    passthrough: bool = True

    def __post_init__(self):
        if len(self.widths) != 3 or any(int(w) < 1 for w in self.widths):
            raise ValueError(f"widths must be three positive ints, got {self.widths}")

    def descriptor(self):
        return {"widths": list(self.widths), "passthrough": self.passthrough}

    @classmethod
    def from_descriptor(cls, d):
        return cls(tuple(int(w) for w in d["widths"]), bool(d["passthrough"]))

    def layer_shapes(self):
        """Ordered (name, shape) of one network's parameters."""
        c1, c2, c3 = self.widths
        cfin = c1 + (1 if self.passthrough else 0)
        shapes = []
        for name, cin, cout in (("enc1", 1, c1), ("enc2", c1, c2), ("bott", c2, c3),
                                ("dec2", c3 + c2, c2), ("dec1", c2 + c1, c1)):
            shapes.append((f"{name}.w", (3, 3, cin, cout)))
            shapes.append((f"{name}.b", (cout,)))
        shapes.append(("out.w", (cfin, 1)))
        shapes.append(("out.b", (1,)))
        return shapes

    def param_names(self):
        """Checkpoint order: every denoiser tensor, then every deblurrer tensor."""
        return [f"{net}.{name}" for net in NETWORKS for name, _ in self.layer_shapes()]

    def param_shapes(self):
        return {f"{net}.{name}": shape for net in NETWORKS for name, shape in self.layer_shapes()}

    def param_count(self):
        return int(sum(np.prod(s) for s in self.param_shapes().values()))


DEFAULT_ARCH = Architecture()


def init_params(arch=DEFAULT_ARCH, seed=0):
    """Kaiming-normal weights (variance 2 / fan_in), zero biases."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in arch.param_shapes().items():
        if name.endswith(".b"):
            params[name] = np.zeros(shape)
        else:
            fan_in = int(np.prod(shape[:-1]))
            params[name] = rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)
    return params


def zero_params(arch=DEFAULT_ARCH):
    return {name: np.zeros(shape) for name, shape in arch.param_shapes().items()}


# step = (kind, output, inputs, param prefix or None)
def _network_steps(net, src, arch):
    p = f"{net}."
    steps = [
        ("conv3", p + "enc1.z", (src,), p + "enc1"),
        ("relu", p + "enc1", (p + "enc1.z",), None),
        ("pool", p + "pool1", (p + "enc1",), None),
        ("conv3", p + "enc2.z", (p + "pool1",), p + "enc2"),
        ("relu", p + "enc2", (p + "enc2.z",), None),
        ("pool", p + "pool2", (p + "enc2",), None),
        ("conv3", p + "bott.z", (p + "pool2",), p + "bott"),
        ("relu", p + "bott", (p + "bott.z",), None),
        ("up", p + "up2", (p + "bott",), None),
        ("concat", p + "cat2", (p + "up2", p + "enc2"), None),
        ("conv3", p + "dec2.z", (p + "cat2",), p + "dec2"),
        ("relu", p + "dec2", (p + "dec2.z",), None),
        ("up", p + "up1", (p + "dec2",), None),
        ("concat", p + "cat1", (p + "up1", p + "enc1"), None),
        ("conv3", p + "dec1.z", (p + "cat1",), p + "dec1"),
        ("relu", p + "dec1", (p + "dec1.z",), None),
    ]
    if arch.passthrough:
        steps.append(("concat", p + "catx", (p + "dec1", src), None))
        steps.append(("conv1", p + "out", (p + "catx",), p + "out"))
    else:
        steps.append(("conv1", p + "out", (p + "dec1",), p + "out"))
    return steps


def graph(arch=DEFAULT_ARCH):
    """Steps of the full chain: input ``x`` -> ``den.out`` -> ``deb.out``."""
    return _network_steps("den", "x", arch) + _network_steps("deb", "den.out", arch)


def _apply(step, env, params):
    kind, _, inputs, prefix = step
    if kind == "conv3":
        return layers.conv3_forward(env[inputs[0]], params[prefix + ".w"], params[prefix + ".b"])
    if kind == "conv1":
        return layers.conv1_forward(env[inputs[0]], params[prefix + ".w"], params[prefix + ".b"])
    if kind == "relu":
        return layers.relu_forward(env[inputs[0]])
    if kind == "pool":
        return layers.pool_forward(env[inputs[0]])
    if kind == "up":
        return layers.up_forward(env[inputs[0]])
    if kind == "concat":
        return layers.concat_forward(env[inputs[0]], env[inputs[1]])
    raise ValueError(kind)


def check_shape(h, w):
    if h % 4 or w % 4:
        raise ValueError(f"image size {h}x{w} must be divisible by 4")


def run(params, x, arch=DEFAULT_ARCH):
    """Evaluate the chain on an (N, H, W) batch; returns the activation dict."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        x = x[None]
    check_shape(x.shape[1], x.shape[2])
    env = {"x": x[..., None]}
    for step in graph(arch):
        env[step[1]] = _apply(step, env, params)
    return env


def forward(params, image, arch=DEFAULT_ARCH):
    """(denoised, restored) for an (H, W) image or (N, H, W) batch."""
    env = run(params, image, arch)
    den = env["den.out"][..., 0]
    deb = env["deb.out"][..., 0]
    if np.ndim(image) == 2:
        return den[0], deb[0]
    return den, deb


def resume(params, env, after, replacement, arch=DEFAULT_ARCH):
    """Re-run every step downstream of output ``after`` with that tensor
    replaced by ``replacement`` (batch may differ; cached tensors broadcast).
    Returns the new activation dict (only recomputed entries are fresh)."""
    steps = graph(arch)
    names = [s[1] for s in steps]
    start = names.index(after) + 1
    fresh = dict(env)
    fresh[after] = replacement
    for step in steps[start:]:
        fresh[step[1]] = _apply(step, fresh, params)
    return fresh


def backward(params, env, grads_out, arch=DEFAULT_ARCH, stop_at=None):
    """Reverse pass.  ``grads_out`` maps tensor names (e.g. ``den.out``,
    ``deb.out``) to upstream gradients.  Returns parameter gradients.

    ``stop_at`` names a tensor whose gradient is not propagated further
    upstream (used to detach the deblurrer's input from the denoiser)."""
    grads = {name: np.zeros_like(v) for name, v in params.items()}
    adj = {k: np.array(v, dtype=np.float64) for k, v in grads_out.items()}

    def acc(name, g):
        if name == stop_at or name == "x":
            return
        if name in adj:
            adj[name] = adj[name] + g
        else:
            adj[name] = g

    for kind, out, inputs, prefix in reversed(graph(arch)):
        if out not in adj:
            continue
        g = adj.pop(out)
        if kind == "conv3":
            need_dx = inputs[0] not in ("x", stop_at)
            dx, dw, db = layers.conv3_backward(env[inputs[0]], params[prefix + ".w"], g, need_dx)
            grads[prefix + ".w"] += dw
            grads[prefix + ".b"] += db
            acc(inputs[0], dx)
        elif kind == "conv1":
            dx, dw, db = layers.conv1_backward(env[inputs[0]], params[prefix + ".w"], g)
            grads[prefix + ".w"] += dw
            grads[prefix + ".b"] += db
            acc(inputs[0], dx)
        elif kind == "relu":
            acc(inputs[0], layers.relu_backward(env[inputs[0]], g))
        elif kind == "pool":
            acc(inputs[0], layers.pool_backward(g))
        elif kind == "up":
            acc(inputs[0], layers.up_backward(g))
        elif kind == "concat":
            ca = env[inputs[0]].shape[3]
            ga, gb = layers.concat_backward(g, ca)
            acc(inputs[0], ga)
            acc(inputs[1], gb)
    return grads
