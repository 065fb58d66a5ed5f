"""Checkpoint container: named parameter tensors + the config that shaped them.

Binary layout (little-endian):
    magic b"LDCK" | u16 version | u32 header_len | header JSON (utf-8)
    then per tensor (in the order listed in the header): raw array bytes.
The header records the model config, its hash, free-form metadata and, per
tensor, name/dtype/shape, so a file is self-describing and loading verifies
the stored config hash against the reconstructed config.
"""

import json
import struct

import numpy as np

from ..diffcore import Tensor
from .config import ModelConfig, config_from_dict

MAGIC = b"LDCK"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, params, cfg: ModelConfig, metadata=None):
    names = sorted(params)
    header = {
        "config": cfg.to_dict(),
        "config_hash": cfg.hash(),
        "metadata": dict(metadata or {}),
        "tensors": [
            {
                "name": n,
                "dtype": params[n].data.dtype.name,
                "shape": list(params[n].shape),
            }
            for n in names
        ],
    }
    blob = json.dumps(header, sort_keys=True, default=list).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<HI", VERSION, len(blob)))
        f.write(blob)
        for n in names:
            f.write(np.ascontiguousarray(params[n].data).tobytes())


def load_checkpoint(path):
    """Returns (params, config, metadata)."""
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != MAGIC:
        raise CheckpointError("bad magic, not a checkpoint file")
    version, hlen = struct.unpack_from("<HI", raw, 4)
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    off = 10
    try:
        header = json.loads(raw[off : off + hlen])
    except ValueError as e:
        raise CheckpointError(f"corrupt header: {e}") from None
    off += hlen
    cfg = config_from_dict(header["config"])
    if cfg.hash() != header["config_hash"]:
        raise CheckpointError("config hash mismatch")
    params = {}
    for spec in header["tensors"]:
        dt = np.dtype(spec["dtype"])
        count = int(np.prod(spec["shape"], dtype=np.int64)) if spec["shape"] else 1
        nbytes = count * dt.itemsize
        if off + nbytes > len(raw):
            raise CheckpointError(f"truncated tensor payload for {spec['name']!r}")
        arr = np.frombuffer(raw[off : off + nbytes], dtype=dt).reshape(spec["shape"]).copy()
        params[spec["name"]] = Tensor(arr, requires_grad=True)
        off += nbytes
    if off != len(raw):
        raise CheckpointError(f"{len(raw) - off} trailing bytes after tensor payload")
    return params, cfg, header["metadata"]
