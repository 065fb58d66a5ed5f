import hashlib
import json
from dataclasses import asdict, dataclass, field

ATTENTION_MODES = ("none", "spatial", "temporal", "spatio_temporal")


@dataclass
class ModelConfig:
    """Network hyperparameters.

    Defaults follow the full-scale training recipe; the desk profile in
    ``latdyn.runconfig`` shrinks the encoder and attention stack.
    """

    latent_dim: int = 32
    context: int = 10  # frames used to infer the trajectory representation
    n_attention_blocks: int = 8
    n_heads: int = 4
    attention_mode: str = "spatio_temporal"
    use_representation: bool = True
    tau: float = 0.5  # time threshold picking the representation set on irregular grids
    time_embed_dim: int = 16
    obs_noise: float = 0.1
    enc_channels: tuple = (32, 64, 128, 128)
    token_dim: int = 128
    repr_dim: int = 16
    init_hidden: int = 128
    dyn_hidden: tuple = (256, 256, 256, 256)
    image_shape: tuple = (1, 32, 32)  # (C, H, W)
    sigma_min: float = 1e-5
    sigma_max: float = 10.0
    dtype: str = "float32"

    def __post_init__(self):
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be >= 1")
        if self.context < 2:
            raise ValueError("context must be >= 2")
        if self.attention_mode not in ATTENTION_MODES:
            raise ValueError(f"attention_mode must be one of {ATTENTION_MODES}")
        if self.token_dim % self.n_heads:
            raise ValueError("n_heads must divide token_dim")
        if self.time_embed_dim % 2:
            raise ValueError("time_embed_dim must be even")
        c, h, w = self.image_shape
        n_stages = len(self.enc_channels)
        if h % (2**n_stages) or w % (2**n_stages):
            raise ValueError("image sides must be divisible by 2**len(enc_channels)")
        self.enc_channels = tuple(self.enc_channels)
        self.dyn_hidden = tuple(self.dyn_hidden)
        self.image_shape = tuple(self.image_shape)

    @property
    def feature_map(self):
        """(channels, side_h, side_w) of the last encoder stage."""
        c, h, w = self.image_shape
        f = 2 ** len(self.enc_channels)
        return self.enc_channels[-1], h // f, w // f

    def to_dict(self):
        return asdict(self)

    def hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def config_from_dict(d):
    d = dict(d)
    for key in ("enc_channels", "dyn_hidden", "image_shape"):
        if key in d:
            d[key] = tuple(d[key])
    return ModelConfig(**d)
