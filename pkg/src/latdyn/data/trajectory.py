"""Trajectory and dataset containers, splits and irregular-grid thinning."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Trajectory:
    """One realization: strictly increasing timestamps and frames in [0, 1]."""

    id: int
    times: np.ndarray  # (T,) float64
    frames: np.ndarray  # (T, C, H, W) float32

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.frames = np.asarray(self.frames, dtype=np.float32)
        if self.times.ndim != 1 or self.frames.ndim != 4:
            raise ValueError("times must be (T,), frames (T,C,H,W)")
        if len(self.times) != len(self.frames):
            raise ValueError("times and frames must have equal length")
        if len(self.times) > 1 and not (np.diff(self.times) > 0).all():
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def __eq__(self, other):
        return (
            isinstance(other, Trajectory)
            and self.id == other.id
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.frames, other.frames)
        )


@dataclass
class Dataset:
    trajectories: list
    split: dict = field(default_factory=dict)  # {"train"|"val"|"test": set of ids}
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = {t.id for t in self.trajectories}
        assigned = [i for s in self.split.values() for i in s]
        if len(assigned) != len(set(assigned)):
            raise ValueError("splits must be disjoint")
        if self.split and set(assigned) != ids:
            raise ValueError("splits must cover all trajectory ids")

    def __eq__(self, other):
        return (
            isinstance(other, Dataset)
            and self.trajectories == other.trajectories
            and {k: set(v) for k, v in self.split.items()}
            == {k: set(v) for k, v in other.split.items()}
            and self.meta == other.meta
        )

    def subset(self, name):
        """Trajectories belonging to one split, in id order."""
        ids = self.split.get(name, set())
        return sorted((t for t in self.trajectories if t.id in ids), key=lambda t: t.id)


def split_dataset(n, ratios, seed):
    """Deterministic shuffled split of ``n`` ids into train/val/test id sets."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must sum to 1")
    if n < 3:
        raise ValueError("need at least 3 trajectories to split")
    order = np.random.default_rng(seed).permutation(n)
    n_train = round(n * ratios[0])
    n_val = round(n * ratios[1])
    return {
        "train": set(order[:n_train].tolist()),
        "val": set(order[n_train : n_train + n_val].tolist()),
        "test": set(order[n_train + n_val :].tolist()),
    }


def make_irregular(traj, keep_prob, seed, min_frames=12):
    """Bernoulli thinning of a trajectory's time grid; frame 0 is always kept.

    Original timestamps are preserved (not re-indexed). ``min_frames`` guards
    against trajectories too short to supply context plus prediction targets.
    """
    if not 0 < keep_prob <= 1:
        raise ValueError("keep_prob must be in (0, 1]")
    rng = np.random.default_rng(seed)
    keep = rng.random(len(traj)) < keep_prob
    keep[0] = True
    if keep.sum() < min_frames:
        raise ValueError(
            f"thinning left {int(keep.sum())} frames, fewer than the required {min_frames}"
        )
    return Trajectory(traj.id, traj.times[keep], traj.frames[keep])
