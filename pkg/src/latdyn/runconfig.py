"""INI run configuration: sections {sim, data, model, train, eval}.

Two built-in profiles set the defaults: ``desk`` (32x32 frames, 30-frame
trajectories, 3k epochs) for quick local runs, and ``paper_scale`` (128x128,
60 frames, 30k epochs) matching the full-scale training recipe. A config
file overrides individual keys; unknown sections or keys are rejected.
The committed schema lives in docs/config_schema.md.
"""

import configparser
from dataclasses import dataclass, field

from .model import ModelConfig
from .sim import SimConfig
from .train import TrainConfig

CHANNELS = {
    "pendulum": 1,
    "double_pendulum": 3,
    "reaction_diffusion": 2,
    "wave2d": 2,
    "lbm_cylinder": 2,
}


@dataclass
class DataConfig:
    trajectories: int = 500
    ratios: tuple = (0.8, 0.1, 0.1)
    irregular_keep: float = None  # frame keep probability; None = regular grid

    def __post_init__(self):
        if self.trajectories < 1:
            raise ValueError("trajectories must be >= 1")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError("split ratios must sum to 1")


@dataclass
class EvalConfig:
    runs: int = 5
    horizon: int = None  # prediction window T; None = half the trajectory
    sample_psi: bool = True
    iqr_mode: str = "central75"

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.iqr_mode not in ("central75", "classic"):
            raise ValueError("iqr_mode must be central75 or classic")


@dataclass
class RunConfig:
    sim: SimConfig
    data: DataConfig
    model: ModelConfig
    train: TrainConfig
    eval: EvalConfig


PROFILES = {
    "desk": {
        "sim": dict(grid=(32, 32), n_frames=30, duration=3.0),
        "data": dict(trajectories=60),
        "model": dict(
            context=5, n_attention_blocks=2, enc_channels=(16, 32, 64, 64),
            token_dim=64, dyn_hidden=(128, 128), image_shape=(1, 32, 32),
        ),
        "train": dict(epochs=3000, curriculum_period=300, val_every=100),
        "eval": dict(),
    },
    "paper_scale": {
        "sim": dict(grid=(128, 128), n_frames=60, duration=3.0),
        "data": dict(trajectories=500),
        "model": dict(image_shape=(1, 128, 128)),
        "train": dict(epochs=30000, curriculum_period=3000, steps_per_epoch=25),
        "eval": dict(),
    },
}

_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _parse_bool(s):
    try:
        return _BOOL[s.strip().lower()]
    except KeyError:
        raise ValueError(f"not a boolean: {s!r}") from None


def _parse_tuple(conv):
    def parse(s):
        return tuple(conv(x) for x in s.replace("x", ",").split(",") if x.strip())

    return parse


def _parse_optional_float(s):
    s = s.strip()
    return None if s.lower() in ("", "none") else float(s)


def _parse_optional_int(s):
    s = s.strip()
    return None if s.lower() in ("", "none") else int(s)


# section -> key -> parser
SCHEMA = {
    "sim": {
        "system": str,
        "grid": _parse_tuple(int),
        "duration": float,
        "n_frames": int,
        "dt_internal": float,
        "seed": int,
        "intervention": None,  # prefix keys: intervention.<name> = float
    },
    "data": {
        "trajectories": int,
        "ratios": _parse_tuple(float),
        "irregular_keep": _parse_optional_float,
    },
    "model": {
        "latent_dim": int,
        "context": int,
        "n_attention_blocks": int,
        "n_heads": int,
        "attention_mode": str,
        "use_representation": _parse_bool,
        "tau": float,
        "time_embed_dim": int,
        "obs_noise": float,
        "enc_channels": _parse_tuple(int),
        "token_dim": int,
        "repr_dim": int,
        "init_hidden": int,
        "dyn_hidden": _parse_tuple(int),
        "sigma_min": float,
        "sigma_max": float,
        "dtype": str,
    },
    "train": {
        "lr0": float,
        "weight_decay": float,
        "batch": int,
        "epochs": int,
        "curriculum_period": int,
        "sigma_s": float,
        "seed": int,
        "steps_per_epoch": int,
        "max_patches": int,
        "overlap": int,
        "val_every": int,
        "val_trajectories": int,
        "lr_final_factor": float,
        "sample_val_psi": _parse_bool,
        "kl_weight": float,
    },
    "eval": {
        "runs": int,
        "horizon": _parse_optional_int,
        "sample_psi": _parse_bool,
        "iqr_mode": str,
    },
}


def _read_ini(path):
    parser = configparser.ConfigParser()
    with open(path) as f:
        parser.read_file(f)
    out = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ValueError(
                f"unknown config section [{section}]; valid: {', '.join(SCHEMA)}"
            )
        out[section] = {}
        for key, raw in parser[section].items():
            if section == "sim" and key.startswith("intervention."):
                out[section].setdefault("intervention", {})[
                    key[len("intervention."):]
                ] = float(raw)
                continue
            conv = SCHEMA[section].get(key)
            if conv is None:
                raise ValueError(f"unknown key {key!r} in section [{section}]")
            out[section][key] = conv(raw)
    return out


def load_runconfig(path=None, profile="desk", overrides=None):
    """Build a RunConfig from profile defaults, an optional INI file, and an
    optional {section: {key: value}} override dict (applied last)."""
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; valid: {', '.join(PROFILES)}")
    merged = {s: dict(PROFILES[profile].get(s, {})) for s in SCHEMA}
    if path is not None:
        for section, kv in _read_ini(path).items():
            merged[section].update(kv)
    for section, kv in (overrides or {}).items():
        if section not in SCHEMA:
            raise ValueError(f"unknown config section {section!r}")
        merged[section].update(kv)

    sim = SimConfig(**merged["sim"])
    data = DataConfig(**merged["data"])
    model_kw = dict(merged["model"])
    # frame shape always follows the simulated system and grid
    model_kw["image_shape"] = (CHANNELS[sim.system],) + tuple(sim.grid)
    model = ModelConfig(**model_kw)
    train = TrainConfig(**merged["train"])
    ev = EvalConfig(**merged["eval"])
    return RunConfig(sim=sim, data=data, model=model, train=train, eval=ev)
