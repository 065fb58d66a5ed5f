"""LDID v1 binary dataset format.

Layout (little-endian, row-major):

    magic  4s   b"LDID"
    u32    version (1)
    u32    R  (trajectory count)
    u16    C, H, W
    u8     dtype code (0 = float32 frames)
    u32    meta_len, then meta_len bytes of JSON (meta dict + split id lists)
    per trajectory:
        u32 id, u32 T
        T   * f64 timestamps
        T*C*H*W * f32 frames
        u32 CRC32 of the two payload blocks above

Read/write round-trips bit-exactly.
"""

import json
import struct
import zlib

import numpy as np

from .trajectory import Dataset, Trajectory

MAGIC = b"LDID"
VERSION = 1


class FormatError(ValueError):
    """Raised with a byte offset when a file fails validation."""


def _frame_dims(ds):
    if ds.trajectories:
        t, c, h, w = ds.trajectories[0].frames.shape
        return c, h, w
    return 0, 0, 0


def write_dataset(ds: Dataset, path):
    c, h, w = _frame_dims(ds)
    meta_blob = json.dumps(
        {"meta": ds.meta, "split": {k: sorted(v) for k, v in ds.split.items()}},
        sort_keys=True,
    ).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIHHHB", VERSION, len(ds.trajectories), c, h, w, 0))
        fh.write(struct.pack("<I", len(meta_blob)))
        fh.write(meta_blob)
        for traj in ds.trajectories:
            if traj.frames.shape[1:] != (c, h, w):
                raise ValueError("all trajectories must share frame dimensions")
            times = np.ascontiguousarray(traj.times, dtype="<f8").tobytes()
            frames = np.ascontiguousarray(traj.frames, dtype="<f4").tobytes()
            fh.write(struct.pack("<II", traj.id, len(traj)))
            fh.write(times)
            fh.write(frames)
            fh.write(struct.pack("<I", zlib.crc32(times + frames)))


def _read_exact(fh, n, what):
    buf = fh.read(n)
    if len(buf) != n:
        raise FormatError(f"truncated file: expected {n} bytes for {what} at offset {fh.tell() - len(buf)}")
    return buf


def read_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        if _read_exact(fh, 4, "magic") != MAGIC:
            raise FormatError("bad magic at offset 0")
        version, r, c, h, w, dtype_code = struct.unpack("<IIHHHB", _read_exact(fh, 15, "header"))
        if version != VERSION:
            raise FormatError(f"unsupported version {version} at offset 4")
        if dtype_code != 0:
            raise FormatError(f"unknown dtype code {dtype_code} at offset 18")
        (meta_len,) = struct.unpack("<I", _read_exact(fh, 4, "meta length"))
        header = json.loads(_read_exact(fh, meta_len, "meta blob"))
        trajectories = []
        for _ in range(r):
            tid, t = struct.unpack("<II", _read_exact(fh, 8, "trajectory header"))
            times = _read_exact(fh, 8 * t, "timestamps")
            frames = _read_exact(fh, 4 * t * c * h * w, "frames")
            (crc,) = struct.unpack("<I", _read_exact(fh, 4, "checksum"))
            if crc != zlib.crc32(times + frames):
                raise FormatError(f"checksum mismatch for trajectory {tid} at offset {fh.tell() - 4}")
            trajectories.append(
                Trajectory(
                    tid,
                    np.frombuffer(times, dtype="<f8"),
                    np.frombuffer(frames, dtype="<f4").reshape(t, c, h, w),
                )
            )
        if fh.read(1):
            raise FormatError(f"trailing bytes at offset {fh.tell() - 1}")
    split = {k: set(v) for k, v in header["split"].items()}
    return Dataset(trajectories, split=split, meta=header["meta"])
