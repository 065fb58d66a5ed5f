"""Multiple-shooting decomposition into overlapping subtrajectories."""

from dataclasses import dataclass

import numpy as np


@dataclass
class Patch:
    indices: np.ndarray  # frame indices into the parent trajectory
    times: np.ndarray  # re-based, times[0] == 0


@dataclass
class PatchSet:
    patches: list
    overlap: int
    coverage: float  # covered frames / total frames (last partial patch dropped)

    def __len__(self):
        return len(self.patches)


def decompose_patches(traj, patch_len, overlap=1):
    """Split a trajectory into overlapping patches of ``patch_len`` frames.

    Consecutive patches share exactly ``overlap`` frames; a trailing partial
    patch is dropped and the coverage fraction recorded so the training loss
    can be rescaled.
    """
    if patch_len < 2:
        raise ValueError("patch_len must be >= 2")
    if not 1 <= overlap < patch_len:
        raise ValueError("overlap must satisfy 1 <= overlap < patch_len")
    total = len(traj)
    if total < patch_len:
        raise ValueError(f"trajectory has {total} frames, shorter than patch_len {patch_len}")
    stride = patch_len - overlap
    patches = []
    start = 0
    while start + patch_len <= total:
        idx = np.arange(start, start + patch_len)
        times = traj.times[idx] - traj.times[start]
        patches.append(Patch(idx, times))
        start += stride
    covered = int(patches[-1].indices[-1]) + 1
    return PatchSet(patches, overlap, coverage=covered / total)


def stitch_indices(patch_set):
    """Re-concatenate patch indices, dropping repeated overlap frames."""
    out = list(patch_set.patches[0].indices)
    for patch in patch_set.patches[1:]:
        out.extend(patch.indices[patch_set.overlap :])
    return np.array(out)
