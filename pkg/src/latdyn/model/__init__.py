from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import ATTENTION_MODES, ModelConfig, config_from_dict
from .network import (
    Gaussian,
    compute_representation,
    decode_latent,
    encode_frames,
    init_params,
    initial_latent,
    predict,
    representation_set_mask,
    rollout_latent,
    rollout_latent_batch,
)

__all__ = [
    "ModelConfig",
    "ATTENTION_MODES",
    "config_from_dict",
    "Gaussian",
    "init_params",
    "encode_frames",
    "compute_representation",
    "initial_latent",
    "rollout_latent",
    "rollout_latent_batch",
    "decode_latent",
    "representation_set_mask",
    "predict",
    "save_checkpoint",
    "load_checkpoint",
    "CheckpointError",
]
