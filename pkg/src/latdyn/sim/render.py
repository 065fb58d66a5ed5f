"""Render state trajectories to image frames in [0, 1]."""

import warnings

import numpy as np

from .config import SimConfig, StateTrajectory


def disk(h, w, cx, cy, radius, subsamples=4):
    """Anti-aliased disk via subpixel coverage sampling; returns (H,W) in [0,1]."""
    offs = (np.arange(subsamples) + 0.5) / subsamples - 0.5
    ys = np.arange(h)[:, None, None, None] + offs[None, None, :, None]
    xs = np.arange(w)[None, :, None, None] + offs[None, None, None, :]
    inside = (xs - cx) ** 2 + (ys - cy) ** 2 < radius * radius
    return inside.mean(axis=(2, 3))


def _bob_xy(cx, cy, length, angle):
    # angle 0 hangs straight down; image y grows downward
    return cx + length * np.sin(angle), cy + length * np.cos(angle)


def _check_in_range(x, y, w, h):
    if not (0 <= x < w and 0 <= y < h):
        warnings.warn(f"bob position ({x:.1f}, {y:.1f}) outside {w}x{h} frame; clipped")


def render_frames(traj: StateTrajectory, cfg: SimConfig, bounds=None):
    """Render to a (T, C, H, W) float32 tensor with values in [0, 1].

    ``bounds`` gives dataset-level per-channel max magnitudes for field
    systems so that rendering is consistent across trajectories.
    """
    h, w = cfg.grid
    cx, cy = (w - 1) / 2, (h - 1) / 2
    radius = h / 16
    if traj.system == "pendulum":
        length = h / 2 - radius - 2
        frames = np.empty((len(traj.times), 1, h, w), dtype=np.float32)
        for i, (z, _) in enumerate(traj.states):
            bx, by = _bob_xy(cx, cy, length, z)
            _check_in_range(bx, by, w, h)
            frames[i, 0] = disk(h, w, bx, by, radius)
        return frames
    if traj.system == "double_pendulum":
        arm = (h / 2 - radius - 2) / 2
        frames = np.zeros((len(traj.times), 3, h, w), dtype=np.float32)
        for i, (z1, z2, _, _) in enumerate(traj.states):
            b1x, b1y = _bob_xy(cx, cy, arm, z1)
            b2x, b2y = _bob_xy(b1x, b1y, arm, z2)
            _check_in_range(b2x, b2y, w, h)
            frames[i, 0] = disk(h, w, b1x, b1y, radius)
            frames[i, 1] = disk(h, w, b2x, b2y, radius)
        return frames
    # field systems: states (T, C, H, W), symmetric min-max to [0, 1]
    fields = traj.states
    if fields.ndim != 4:
        raise ValueError(f"no render rule for system {traj.system!r} with shape {fields.shape}")
    if bounds is None:
        bounds = np.abs(fields).max(axis=(0, 2, 3))
    bounds = np.maximum(np.asarray(bounds, dtype=np.float64), 1e-12)
    frames = 0.5 + 0.5 * fields / bounds[None, :, None, None]
    return np.clip(frames, 0.0, 1.0).astype(np.float32)


def field_bounds(trajs):
    """Dataset-level per-channel max magnitude across trajectories."""
    return np.max([np.abs(t.states).max(axis=(0, 2, 3)) for t in trajs], axis=0)
