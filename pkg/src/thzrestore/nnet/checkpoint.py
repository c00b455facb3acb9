"""THZNET01 parameter checkpoints.

Layout (little-endian)::

    8s   magic        b"THZNET01"
    u32  version      1
    u32  desc_len
    desc_len bytes    UTF-8 JSON architecture descriptor (sorted keys)
    u64  count        total number of parameters
    f64[count]        parameters, tensors in Architecture.param_names() order,
                      each flattened C-order (conv weights are kh, kw, cin, cout)
"""
import json
import struct

import numpy as np

from .unet import Architecture

MAGIC = b"THZNET01"
VERSION = 1


class CheckpointError(ValueError):
    pass


class ArchitectureMismatchError(CheckpointError):
    pass


def encode_checkpoint(params, arch):
    desc = json.dumps(arch.descriptor(), sort_keys=True).encode()
    flat = [np.asarray(params[name], dtype="<f8").ravel() for name in arch.param_names()]
    payload = np.concatenate(flat)
    head = MAGIC + struct.pack("<II", VERSION, len(desc)) + desc + struct.pack("<Q", payload.size)
    return head + payload.tobytes()


def decode_checkpoint(raw, expected_arch=None):
    if raw[:8] != MAGIC:
        raise CheckpointError(f"bad checkpoint magic {raw[:8]!r}")
    version, dlen = struct.unpack_from("<II", raw, 8)
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    off = 16
    arch = Architecture.from_descriptor(json.loads(raw[off:off + dlen].decode()))
    off += dlen
    (count,) = struct.unpack_from("<Q", raw, off)
    off += 8
    if expected_arch is not None and arch != expected_arch:
        raise ArchitectureMismatchError(
            f"checkpoint architecture {arch.descriptor()} != configured {expected_arch.descriptor()}"
        )
    if count != arch.param_count():
        raise CheckpointError(f"checkpoint holds {count} parameters, architecture needs {arch.param_count()}")
    if len(raw) - off != 8 * count:
        raise CheckpointError(f"checkpoint payload is {len(raw) - off} bytes, expected {8 * count}")
    flat = np.frombuffer(raw, dtype="<f8", count=count, offset=off).astype(np.float64)
    params = {}
    pos = 0
    shapes = arch.param_shapes()
    for name in arch.param_names():
        size = int(np.prod(shapes[name]))
        params[name] = flat[pos:pos + size].reshape(shapes[name]).copy()
        pos += size
    return params, arch


def save_checkpoint(params, arch, path):
    with open(path, "wb") as fh:
        fh.write(encode_checkpoint(params, arch))


def load_checkpoint(path, expected_arch=None):
    with open(path, "rb") as fh:
        return decode_checkpoint(fh.read(), expected_arch)
