"""The latent-dynamics network.

Five parts share one flat parameter dict: a convolutional frame encoder, an
attention-based representation head producing the per-trajectory code psi,
an initial-state head, a continuous-time dynamics map and a transposed-conv
decoder. The dynamics part is a direct map (t, z0, psi) -> N(mu_t, sigma_t),
so any query time is answered independently without sequential integration.
"""

from dataclasses import dataclass

import numpy as np

from ..diffcore import Tensor
from .config import ModelConfig
from .layers import (
    attention_block,
    clamp,
    conv,
    conv_transposed,
    init_attention_block,
    init_conv,
    init_linear,
    linear,
    mlp,
    tile_rows,
    time_features,
)


@dataclass
class Gaussian:
    """Diagonal Gaussian with reparameterized sampling."""

    mu: Tensor
    sigma: Tensor

    def sample(self, rng):
        eps = rng.standard_normal(self.mu.shape).astype(self.mu.dtype)
        return self.mu + self.sigma * Tensor(eps)


def _np_dtype(cfg):
    return np.float32 if cfg.dtype == "float32" else np.float64


def _n_blocks(cfg, kind):
    mode = cfg.attention_mode
    if mode == "none":
        return 0
    if mode == "spatio_temporal":
        return max(1, cfg.n_attention_blocks // 2)
    return cfg.n_attention_blocks if mode == kind else 0


def init_params(cfg: ModelConfig, seed=0):
    rng = np.random.default_rng(seed)
    dtype = _np_dtype(cfg)
    p = {}
    c_img = cfg.image_shape[0]
    chans = (c_img,) + cfg.enc_channels
    for i in range(len(cfg.enc_channels)):
        init_conv(p, f"enc{i}", chans[i], chans[i + 1], 3, rng, dtype)
    fc, fh, fw = cfg.feature_map
    if _n_blocks(cfg, "spatial"):
        p["spat.pos"] = Tensor(
            (0.02 * rng.standard_normal((fh * fw, fc))).astype(dtype), requires_grad=True
        )
        for i in range(_n_blocks(cfg, "spatial")):
            init_attention_block(p, f"spat{i}", fc, 2, rng, dtype)
    init_linear(p, "enc_head", fc * fh * fw, cfg.token_dim, rng, dtype)
    init_linear(p, "time_proj", cfg.time_embed_dim, cfg.token_dim, rng, dtype)
    for i in range(_n_blocks(cfg, "temporal")):
        init_attention_block(p, f"temp{i}", cfg.token_dim, 2, rng, dtype)
    init_linear(p, "repr_head", cfg.token_dim, 2 * cfg.repr_dim, rng, dtype)
    q = cfg.latent_dim
    init_linear(p, "init.l0", cfg.token_dim + cfg.repr_dim, cfg.init_hidden, rng, dtype)
    init_linear(p, "init.l1", cfg.init_hidden, 2 * q, rng, dtype)
    dyn_in = cfg.time_embed_dim + q + cfg.repr_dim
    widths = (dyn_in,) + cfg.dyn_hidden + (2 * q,)
    for i in range(len(widths) - 1):
        init_linear(p, f"dyn.l{i}", widths[i], widths[i + 1], rng, dtype)
    # log-sigma heads start near sigma ~ 0.08 rather than 1: unit-variance
    # posterior noise at init drowns the reconstruction signal and locks the
    # decoder into a blurred solution long before the sigmas are learned down
    p["repr_head.b"].data[cfg.repr_dim :] = -2.5
    p["init.l1.b"].data[q:] = -2.5
    p[f"dyn.l{len(cfg.dyn_hidden)}.b"].data[q:] = -2.5
    init_linear(p, "dec_head", q, fc * fh * fw, rng, dtype)
    dec_chans = tuple(reversed(cfg.enc_channels)) + (c_img,)
    for i in range(len(dec_chans) - 1):
        init_conv(p, f"dec{i}", dec_chans[i], dec_chans[i + 1], 4, rng, dtype, transposed=True)
    return p


def _split_gaussian(cfg, out, dim):
    mu = out[..., :dim]
    log_sigma = out[..., dim:]
    sigma = clamp(log_sigma.exp(), cfg.sigma_min, cfg.sigma_max)
    return Gaussian(mu, sigma)


def encode_frames(params, cfg: ModelConfig, frames):
    """frames: Tensor (N, C, H, W) in [0,1] -> per-frame tokens (N, token_dim)."""
    if not isinstance(frames, Tensor):
        frames = Tensor(np.asarray(frames, dtype=_np_dtype(cfg)))
    x = frames
    for i in range(len(cfg.enc_channels)):
        x = conv(params, f"enc{i}", x, stride=2, pad=1).relu()
    n = x.shape[0]
    fc, fh, fw = cfg.feature_map
    n_spat = _n_blocks(cfg, "spatial")
    if n_spat:
        x = x.reshape(n, fc, fh * fw).transpose(0, 2, 1) + params["spat.pos"]
        for i in range(n_spat):
            x = attention_block(params, f"spat{i}", x, cfg.n_heads)
        x = x.transpose(0, 2, 1)
    tokens = linear(params, "enc_head", x.reshape(n, fc * fh * fw))
    if not np.all(np.isfinite(tokens.data)):
        raise FloatingPointError("non-finite encoder output")
    return tokens


def compute_representation(params, cfg: ModelConfig, tokens, times):
    """Summarize a representation set of tokens into the Gaussian over psi.

    tokens: (M, token_dim) or batched (B, M, token_dim); times aligned.
    Attention weights depend on time distances only (via the sin/cos time
    embedding), so jointly permuting (token, timestamp) pairs leaves the
    result unchanged.
    """
    times = np.asarray(times, dtype=np.float64)
    if tokens.shape[-2] == 0:
        raise ValueError("representation set is empty")
    tf = time_features(times, cfg.time_embed_dim, _np_dtype(cfg))
    x = tokens + linear(params, "time_proj", Tensor(tf))
    for i in range(_n_blocks(cfg, "temporal")):
        x = attention_block(params, f"temp{i}", x, cfg.n_heads)
    pooled = x.mean(axis=-2)
    return _split_gaussian(cfg, linear(params, "repr_head", pooled), cfg.repr_dim)


def initial_latent(params, cfg: ModelConfig, token, psi):
    """Posterior over z at a patch's first frame. token: (..., d), psi: (..., r)."""
    if not cfg.use_representation:
        psi = Tensor(np.zeros(psi.shape, dtype=psi.data.dtype))
    h = Tensor.concat([token, psi], axis=-1)
    h = linear(params, "init.l0", h).relu()
    return _split_gaussian(cfg, linear(params, "init.l1", h), cfg.latent_dim)


def rollout_latent(params, cfg: ModelConfig, z0, psi, query_times):
    """Latent state distributions at arbitrary query times (relative to z0).

    z0: (q,), psi: (r,), query_times: (Nq,) -> Gaussian with (Nq, q) moments.
    """
    if not cfg.use_representation:
        psi = Tensor(np.zeros(psi.shape, dtype=psi.data.dtype))
    qt = np.asarray(query_times, dtype=np.float64)
    tf = Tensor(time_features(qt, cfg.time_embed_dim, _np_dtype(cfg)))
    n = len(qt)
    inp = Tensor.concat([tf, tile_rows(z0, n), tile_rows(psi, n)], axis=1)
    out = mlp(params, "dyn", inp, len(cfg.dyn_hidden) + 1)
    return _split_gaussian(cfg, out, cfg.latent_dim)


def rollout_latent_batch(params, cfg: ModelConfig, z0, psi, query_times):
    """Batched rollout. z0: (P, q), psi: (P, r), query_times: (P, L) array."""
    if not cfg.use_representation:
        psi = Tensor(np.zeros(psi.shape, dtype=psi.data.dtype))
    qt = np.asarray(query_times, dtype=np.float64)
    p_count, length = qt.shape
    tf = time_features(qt.reshape(-1), cfg.time_embed_dim, _np_dtype(cfg))
    tf = Tensor(tf.reshape(p_count, length, cfg.time_embed_dim))
    pad = Tensor(np.zeros((p_count, length, 1), dtype=_np_dtype(cfg)))
    z0b = z0.reshape(p_count, 1, z0.shape[-1]) + pad
    psib = psi.reshape(p_count, 1, psi.shape[-1]) + pad
    inp = Tensor.concat([tf, z0b, psib], axis=-1)
    out = mlp(params, "dyn", inp, len(cfg.dyn_hidden) + 1)
    return _split_gaussian(cfg, out, cfg.latent_dim)


def decode_latent(params, cfg: ModelConfig, z):
    """z: (N, q) -> frame means (N, C, H, W).

    The output stage is linear: a squashing nonlinearity here traps the
    optimizer in a saturated all-background solution on sparse frames
    (near-zero targets drive the logits into the flat region and gradients
    die). Intensities are clipped to [0, 1] only at prediction time.
    """
    fc, fh, fw = cfg.feature_map
    n = z.shape[0]
    x = linear(params, "dec_head", z).relu().reshape(n, fc, fh, fw)
    n_stages = len(cfg.enc_channels)
    for i in range(n_stages):
        x = conv_transposed(params, f"dec{i}", x, stride=2, pad=1)
        if i < n_stages - 1:
            x = x.relu()
    return x


def representation_set_mask(cfg: ModelConfig, times, irregular=False):
    """Indices of the context frames that define the representation set."""
    times = np.asarray(times)
    if len(times) == 0:
        raise ValueError("no context frames")
    if irregular:
        mask = np.nonzero(times < times[0] + cfg.tau)[0]
        if len(mask) == 0:
            raise ValueError("no context frames fall below the time threshold")
        return mask
    return np.arange(min(cfg.context, len(times)))


def predict(params, cfg: ModelConfig, context_frames, context_times, query_times,
            rng=None, irregular=False):
    """Roll out predicted frames given only the first k context frames.

    Eval mode: posterior means are used unless ``rng`` is given, in which
    case psi is sampled (the latent path still uses means).
    """
    context_times = np.asarray(context_times, dtype=np.float64)
    tokens = encode_frames(params, cfg, context_frames)
    mask = representation_set_mask(cfg, context_times, irregular)
    rep = compute_representation(params, cfg, tokens[mask.tolist()], context_times[mask])
    psi = rep.sample(rng) if rng is not None else rep.mu
    init = initial_latent(params, cfg, tokens[[-1]], psi.reshape(1, -1))
    z0 = init.mu.reshape(-1)
    rel_times = np.asarray(query_times, dtype=np.float64) - context_times[-1]
    states = rollout_latent(params, cfg, z0, psi, rel_times)
    # frame intensities are physically bounded; clip only the emitted frames
    return np.clip(decode_latent(params, cfg, states.mu).data, 0.0, 1.0)
