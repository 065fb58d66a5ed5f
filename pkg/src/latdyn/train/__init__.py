from .loop import (
    LOG_COLUMNS,
    TrainConfig,
    TrainResult,
    curriculum_patch_len,
    load_resume_state,
    save_resume_state,
    train_loop,
    validation_mse,
)
from .losses import LossBreakdown, elbo_loss, kl_normal_std, smoothness_kl
from .optimizer import AdamW, exponential_decay_rate
from .transfer import fine_tune, scratch_train, select_fraction

__all__ = [
    "TrainConfig",
    "TrainResult",
    "LossBreakdown",
    "LOG_COLUMNS",
    "kl_normal_std",
    "smoothness_kl",
    "elbo_loss",
    "curriculum_patch_len",
    "train_loop",
    "validation_mse",
    "AdamW",
    "exponential_decay_rate",
    "fine_tune",
    "scratch_train",
    "select_fraction",
    "save_resume_state",
    "load_resume_state",
]
