"""Few-shot transfer: adapt a trained model to an intervened system using a
small fraction of the new data, against a scratch-trained budget-matched
baseline."""

import numpy as np

from ..data import Dataset
from ..model import init_params, load_checkpoint
from .loop import train_loop


def select_fraction(dataset, fraction, seed):
    """Keep a seeded fraction of the train split (at least one trajectory);
    val/test splits are kept whole."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    train_ids = sorted(dataset.split["train"])
    n_keep = max(1, round(fraction * len(train_ids)))
    rng = np.random.default_rng(seed)
    keep = set(rng.permutation(train_ids)[:n_keep].tolist())
    dropped = set(train_ids) - keep
    split = {k: set(v) for k, v in dataset.split.items()}
    split["train"] = keep
    trajectories = [t for t in dataset.trajectories if t.id not in dropped]
    return Dataset(trajectories, split=split, meta=dict(dataset.meta))


def fine_tune(checkpoint_path, dataset, fraction, model_cfg, train_cfg,
              out_checkpoint=None, log_path=None):
    """Continue training from a checkpoint on a fraction of the new data."""
    params, ckpt_cfg, _ = load_checkpoint(checkpoint_path)
    if ckpt_cfg.hash() != model_cfg.hash():
        raise ValueError(
            f"checkpoint config hash {ckpt_cfg.hash()} does not match {model_cfg.hash()}"
        )
    subset = select_fraction(dataset, fraction, train_cfg.seed)
    return train_loop(subset, model_cfg, train_cfg, log_path=log_path,
                      checkpoint_path=out_checkpoint, initial=params, provenance="prior")


def scratch_train(dataset, fraction, model_cfg, train_cfg,
                  out_checkpoint=None, log_path=None):
    """Budget-matched baseline: same fraction and epochs, random init."""
    subset = select_fraction(dataset, fraction, train_cfg.seed)
    initial = init_params(model_cfg, seed=train_cfg.seed)
    return train_loop(subset, model_cfg, train_cfg, log_path=log_path,
                      checkpoint_path=out_checkpoint, initial=initial, provenance="scratch")


__all__ = ["select_fraction", "fine_tune", "scratch_train"]
