"""Multiple-shooting evidence bound: reconstruction + two KL penalties.

A trajectory window is cut into overlapping patches. Each patch gets its own
initial latent posterior and its own sample of the trajectory code psi; the
smoothness penalty ties the initial posterior of patch n to where the rollout
of patch n-1 ended, so the pieces stitch into one continuous path.
"""

from dataclasses import dataclass

import numpy as np

from ..diffcore import Tensor
from ..model import (
    Gaussian,
    compute_representation,
    decode_latent,
    encode_frames,
    initial_latent,
    rollout_latent_batch,
)

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class LossBreakdown:
    nll: float
    kl_repr: float
    kl_smooth: float
    total: float
    loss_scale: float


def kl_normal_std(mu, sigma):
    """KL( N(mu, diag sigma^2) || N(0, I) ), summed over dimensions."""
    if not isinstance(mu, Tensor):
        mu = Tensor(np.asarray(mu, dtype=np.float64))
    if not isinstance(sigma, Tensor):
        sigma = Tensor(np.asarray(sigma, dtype=np.float64))
    if (sigma.data <= 0).any():
        raise ValueError("sigma must be positive")
    return (-sigma.log() + (sigma * sigma + mu * mu) * 0.5).sum() - 0.5 * mu.data.size


def smoothness_kl(q: Gaussian, rollout_end_mu, sigma_s):
    """KL( q || N(rollout_end_mu, sigma_s^2 I) ), summed over dimensions."""
    if sigma_s <= 0:
        raise ValueError("sigma_s must be positive")
    diff = q.mu - rollout_end_mu
    var_ratio = (q.sigma * q.sigma + diff * diff) / (2.0 * sigma_s**2)
    log_term = float(np.log(sigma_s)) - q.sigma.log()
    return (log_term + var_ratio).sum() - 0.5 * q.mu.data.size


def _patch_starts(n_frames, length, overlap, rng=None, max_patches=None):
    """Start indices of the fixed-length patches; optionally a random
    contiguous chunk of at most max_patches (adjacency kept for stitching).

    With an rng the whole grid is shifted by a random offset so that patch
    anchors cover every frame position over training; prediction anchors at
    the end of the context window would otherwise be out of distribution.
    """
    stride = length - overlap
    if stride < 1:
        raise ValueError("overlap must be smaller than patch length")
    if n_frames < length:
        raise ValueError("trajectory shorter than one patch")
    offset = 0
    if rng is not None:
        offset = int(rng.integers(0, min(stride, n_frames - length + 1)))
    starts = list(range(offset, n_frames - length + 1, stride))
    n_covered = starts[-1] + length - offset
    coverage = n_covered / n_frames
    if max_patches is not None and len(starts) > max_patches:
        lo = int(rng.integers(0, len(starts) - max_patches + 1)) if rng is not None else 0
        starts = starts[lo : lo + max_patches]
    return starts, coverage


def elbo_loss(params, model_cfg, batch, patch_frames, train_cfg, rng=None, sample=True):
    """Negative ELBO over a batch of trajectory windows.

    batch: list of (frames (T,C,H,W), times (T,)) pairs; patch_frames: frames
    per patch (prediction steps + 1). Returns (total Tensor, LossBreakdown).
    Expectations use one Monte-Carlo sample when ``sample`` (training); with
    sample=False posterior means are used throughout (validation).
    """
    dt = np.float32 if model_cfg.dtype == "float32" else np.float64
    sigma_obs = model_cfg.obs_noise
    b_size = len(batch)

    # time-shift augmentation: a random suffix of each trajectory is treated
    # as its own realization (time-invariant dynamics), densifying the set of
    # representation codes seen by the dynamics network
    max_off = getattr(train_cfg, "max_window_offset", 0)
    if rng is not None and max_off > 0:
        shifted = []
        for frames, times in batch:
            hi = min(max_off, len(frames) - model_cfg.context - 1)
            off = int(rng.integers(0, hi + 1)) if hi > 0 else 0
            shifted.append((frames[off:], np.asarray(times)[off:]))
        batch = shifted

    # one encoder call over every frame in the batch
    all_frames = np.concatenate([np.asarray(f, dtype=dt) for f, _ in batch])
    tokens_all = encode_frames(params, model_cfg, all_frames)
    offsets = np.cumsum([0] + [len(f) for f, _ in batch])

    # shared sizes: trajectories in one batch may have different frame counts
    # (irregular grids); patches and context sets are sized by the shortest
    min_t = min(len(f) for f, _ in batch)
    k = min(model_cfg.context, min_t)

    # per-trajectory representation posterior from the first k context frames
    ctx_tok, ctx_times = [], []
    for i, (_, times) in enumerate(batch):
        mask = np.arange(k) + offsets[i]
        ctx_tok.append(mask.tolist())
        ctx_times.append(np.asarray(times)[:k])
    rep_tokens = tokens_all[[j for m in ctx_tok for j in m]].reshape(b_size, k, -1)
    rep = compute_representation(params, model_cfg, rep_tokens, np.stack(ctx_times))

    # patch bookkeeping across the whole batch
    first_idx, traj_of_patch, rel_times, targets, chain_prev = [], [], [], [], []
    coverages = []
    length = min(patch_frames, min_t)
    for i, (frames, times) in enumerate(batch):
        t_arr = np.asarray(times, dtype=np.float64)
        starts, cov = _patch_starts(
            len(frames), length, train_cfg.overlap, rng, train_cfg.max_patches
        )
        coverages.append(cov)
        for j, s in enumerate(starts):
            first_idx.append(offsets[i] + s)
            traj_of_patch.append(i)
            rel_times.append(t_arr[s : s + length] - t_arr[s])
            targets.append(np.asarray(frames[s : s + length], dtype=dt))
            chain_prev.append(len(first_idx) - 2 if j > 0 else -1)
    n_patches = len(first_idx)

    def draw(g):
        return g.sample(rng) if sample and rng is not None else g.mu

    # psi sampled independently per patch from the trajectory posterior
    psi_mu = rep.mu[traj_of_patch]
    psi_sigma = rep.sigma[traj_of_patch]
    floor = getattr(train_cfg, "repr_sigma_floor", 0.0)
    if floor > 0:
        from ..model.layers import clamp

        psi_sigma = clamp(psi_sigma, floor, model_cfg.sigma_max)
    psi = draw(Gaussian(psi_mu, psi_sigma))

    init = initial_latent(params, model_cfg, tokens_all[first_idx], psi)
    z0 = draw(init)
    states = rollout_latent_batch(params, model_cfg, z0, psi, np.stack(rel_times))
    z = draw(states)
    decoded = decode_latent(params, model_cfg, z.reshape(n_patches * length, -1))

    target = Tensor(np.concatenate(targets))
    resid = decoded - target
    n_pix = target.data.size
    nll = (resid * resid).sum() / (2.0 * sigma_obs**2) + 0.5 * n_pix * (
        LOG_2PI + 2.0 * np.log(sigma_obs)
    )

    kl_repr = kl_normal_std(psi_mu, psi_sigma)

    kl_smooth = Tensor(np.zeros((), dtype=np.float64))
    links = [p for p in range(n_patches) if chain_prev[p] >= 0]
    if links:
        q_link = Gaussian(init.mu[links], init.sigma[links])
        prev_end = states.mu[[chain_prev[p] for p in links], length - 1]
        kl_smooth = kl_smooth + smoothness_kl(q_link, prev_end, train_cfg.sigma_s)

    loss_scale = 1.0 / float(np.mean(coverages))
    kl_w = getattr(train_cfg, "kl_weight", 1.0)
    total = (nll + (kl_repr + kl_smooth) * kl_w) * (loss_scale / b_size)

    parts = {
        "nll": float(nll.data),
        "kl_repr": float(kl_repr.data),
        "kl_smooth": float(kl_smooth.data),
    }
    for name, val in parts.items():
        if not np.isfinite(val):
            raise FloatingPointError(f"non-finite loss component {name!r}: {val}")
    return total, LossBreakdown(
        nll=parts["nll"] / b_size,
        kl_repr=parts["kl_repr"] / b_size,
        kl_smooth=parts["kl_smooth"] / b_size,
        total=float(total.data),
        loss_scale=loss_scale,
    )
