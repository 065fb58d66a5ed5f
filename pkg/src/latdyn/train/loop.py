"""Optimizer loop: curriculum over patch length, validation checkpointing,
append-only CSV metrics log."""

import csv
from dataclasses import dataclass, field

import numpy as np

from ..diffcore import Tensor
from ..model import init_params, load_checkpoint, predict, save_checkpoint
from .losses import elbo_loss
from .optimizer import AdamW, exponential_decay_rate

LOG_COLUMNS = ("epoch", "lr", "nll", "kl_repr", "kl_smooth", "total", "patch_len", "val_mse")


@dataclass
class TrainConfig:
    lr0: float = 3e-4
    weight_decay: float = 0.01
    batch: int = 16
    epochs: int = 3000
    curriculum_period: int = 300  # epochs between patch-length doublings
    sigma_s: float = 0.1
    seed: int = 0
    steps_per_epoch: int = 1
    max_patches: int = 8  # contiguous patch chunk sampled per trajectory
    overlap: int = 1
    val_every: int = 50
    val_trajectories: int = 4
    lr_final_factor: float = 0.01
    sample_val_psi: bool = False
    kl_weight: float = 1.0  # 0 gives the reconstruction-only ablation
    # time-shift augmentation: each trajectory window may start up to this
    # many frames in (dynamics are time-invariant, so every suffix is a valid
    # realization with its own representation code)
    max_window_offset: int = 0
    # training-time floor on the representation posterior sigma; caps how
    # precisely a trajectory can be keyed by its code, forcing the dynamics
    # to interpolate between realizations instead of memorizing them
    repr_sigma_floor: float = 0.0

    def __post_init__(self):
        for name in ("lr0", "weight_decay", "batch", "epochs", "sigma_s", "steps_per_epoch"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.kl_weight < 0:
            raise ValueError("kl_weight must be >= 0")
        if self.curriculum_period < 1:
            raise ValueError("curriculum_period must be >= 1")
        if self.max_window_offset < 0:
            raise ValueError("max_window_offset must be >= 0")
        if self.repr_sigma_floor < 0:
            raise ValueError("repr_sigma_floor must be >= 0")


def curriculum_patch_len(epoch, period, t_full):
    """Prediction steps per patch: doubles every ``period`` epochs from 1,
    capped at the full trajectory."""
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    doublings = epoch // period
    if doublings >= np.log2(max(t_full, 1)) + 1:
        return t_full
    return min(2**doublings, t_full)


def validation_mse(params, model_cfg, trajectories, limit, rng=None):
    """Mean per-pixel MSE of rollouts from the first k context frames."""
    errs = []
    for traj in trajectories[:limit]:
        k = min(model_cfg.context, len(traj) - 1)
        pred = predict(
            params, model_cfg, traj.frames[:k], traj.times[:k], traj.times[k:], rng=rng
        )
        errs.append(float(np.mean((pred - traj.frames[k:]) ** 2)))
    return float(np.mean(errs)) if errs else float("nan")


@dataclass
class TrainResult:
    params: dict
    log: list = field(default_factory=list)
    best_val: float = float("inf")
    best_epoch: int = -1
    diverged: bool = False
    opt: object = None
    last_epoch: int = -1


def _append_log(path, rows, write_header):
    if path is None:
        return
    with open(path, "a", newline="") as f:
        w = csv.writer(f)
        if write_header:
            w.writerow(LOG_COLUMNS)
        for r in rows:
            w.writerow([r[c] for c in LOG_COLUMNS])


def train_loop(dataset, model_cfg, train_cfg, log_path=None, checkpoint_path=None,
               initial=None, provenance="scratch", start_epoch=0, opt_state=None,
               stop_epoch=None):
    """Minimize the negative ELBO over the train split.

    Patch length follows the curriculum; the best-validation parameters are
    checkpointed (metadata records provenance and epoch). On divergence the
    loop aborts and returns the last finite-loss parameters.

    Epoch randomness is derived from (seed, epoch), so resuming at
    ``start_epoch`` with the saved optimizer state replays the exact run.
    """
    train = dataset.subset("train") if dataset.split else list(dataset.trajectories)
    val = dataset.subset("val")
    if not train:
        raise ValueError("dataset has no train split")
    t_min = min(len(t) for t in train)
    params = initial if initial is not None else init_params(model_cfg, seed=train_cfg.seed)
    opt = AdamW(params, lr=train_cfg.lr0, weight_decay=train_cfg.weight_decay)
    if opt_state is not None:
        opt.m, opt.v, opt.t = opt_state
    gamma = exponential_decay_rate(train_cfg.epochs, train_cfg.lr_final_factor)

    result = TrainResult(params=params)
    backup = {k: v.data.copy() for k, v in params.items()}
    header_needed = log_path is not None and start_epoch == 0
    pending = []

    end_epoch = train_cfg.epochs if stop_epoch is None else min(stop_epoch, train_cfg.epochs)
    for epoch in range(start_epoch, end_epoch):
        rng = np.random.default_rng([train_cfg.seed, epoch])
        opt.lr = train_cfg.lr0 * gamma**epoch
        steps = curriculum_patch_len(epoch, train_cfg.curriculum_period, t_min - 1)
        patch_frames = steps + 1
        row = None
        try:
            for _ in range(train_cfg.steps_per_epoch):
                idx = rng.integers(0, len(train), size=min(train_cfg.batch, len(train)))
                batch = [(train[i].frames, train[i].times) for i in idx]
                opt.zero_grad()
                total, parts = elbo_loss(
                    params, model_cfg, batch, patch_frames, train_cfg, rng=rng
                )
                total.backward()
                opt.step()
        except FloatingPointError:
            for k, v in params.items():
                v.data = backup[k].copy()
            result.diverged = True
            break
        backup = {k: v.data.copy() for k, v in params.items()}

        val_mse = ""
        if val and (epoch % train_cfg.val_every == 0 or epoch == train_cfg.epochs - 1):
            val_rng = np.random.default_rng(0) if train_cfg.sample_val_psi else None
            val_mse = validation_mse(
                params, model_cfg, val, train_cfg.val_trajectories, rng=val_rng
            )
            if val_mse < result.best_val:
                result.best_val = val_mse
                result.best_epoch = epoch
                if checkpoint_path is not None:
                    save_checkpoint(
                        checkpoint_path, params, model_cfg,
                        metadata={"provenance": provenance, "epoch": epoch,
                                  "val_mse": val_mse, "seed": train_cfg.seed},
                    )
        row = {
            "epoch": epoch, "lr": opt.lr, "nll": parts.nll, "kl_repr": parts.kl_repr,
            "kl_smooth": parts.kl_smooth, "total": parts.total, "patch_len": steps,
            "val_mse": val_mse,
        }
        result.log.append(row)
        pending.append(row)
        if len(pending) >= 200 or epoch == train_cfg.epochs - 1:
            _append_log(log_path, pending, header_needed)
            header_needed = False
            pending = []

    if pending:
        _append_log(log_path, pending, header_needed)
    result.opt = opt
    if result.log:
        result.last_epoch = result.log[-1]["epoch"]
    if checkpoint_path is not None and result.best_epoch < 0:
        save_checkpoint(checkpoint_path, params, model_cfg,
                        metadata={"provenance": provenance, "epoch": len(result.log) - 1,
                                  "val_mse": None, "seed": train_cfg.seed})
    return result


def save_resume_state(path, result, model_cfg, train_seed):
    """Persist params + optimizer moments so training can continue exactly."""
    tensors = dict(result.params)
    for name, arr in result.opt.m.items():
        tensors[f"__opt_m.{name}"] = Tensor(arr)
    for name, arr in result.opt.v.items():
        tensors[f"__opt_v.{name}"] = Tensor(arr)
    save_checkpoint(path, tensors, model_cfg, metadata={
        "resume": True, "next_epoch": result.last_epoch + 1,
        "opt_t": result.opt.t, "seed": train_seed,
    })


def load_resume_state(path):
    """Returns (params, model_cfg, start_epoch, opt_state) for train_loop."""
    tensors, cfg, meta = load_checkpoint(path)
    if not meta.get("resume"):
        raise ValueError("not a resume-state checkpoint")
    params, m, v = {}, {}, {}
    for name, t in tensors.items():
        if name.startswith("__opt_m."):
            m[name[len("__opt_m."):]] = t.data
        elif name.startswith("__opt_v."):
            v[name[len("__opt_v."):]] = t.data
        else:
            t.requires_grad = True
            params[name] = t
    return params, cfg, meta["next_epoch"], (m, v, meta["opt_t"])
