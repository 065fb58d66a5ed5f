"""Functional network layers over the autodiff Tensor, with init helpers.

Parameters live in a flat dict name -> Tensor; layers are pure functions of
(params, inputs) so the same weights serve training and evaluation.
"""

import numpy as np

from ..diffcore import Tensor


def _t(params, name):
    try:
        return params[name]
    except KeyError:
        raise KeyError(f"missing parameter {name!r}") from None


# -- initializers -----------------------------------------------------------


def init_linear(params, name, d_in, d_out, rng, dtype):
    scale = np.sqrt(2.0 / (d_in + d_out))
    params[f"{name}.w"] = Tensor(
        (rng.standard_normal((d_in, d_out)) * scale).astype(dtype), requires_grad=True
    )
    params[f"{name}.b"] = Tensor(np.zeros(d_out, dtype=dtype), requires_grad=True)


def init_conv(params, name, c_in, c_out, k, rng, dtype, transposed=False):
    fan_in = c_in * k * k
    scale = np.sqrt(2.0 / fan_in)
    shape = (c_in, c_out, k, k) if transposed else (c_out, c_in, k, k)
    params[f"{name}.w"] = Tensor(
        (rng.standard_normal(shape) * scale).astype(dtype), requires_grad=True
    )
    params[f"{name}.b"] = Tensor(np.zeros((c_out, 1, 1), dtype=dtype), requires_grad=True)


def init_attention_block(params, name, d, mlp_ratio, rng, dtype):
    for proj in ("q", "k", "v", "o"):
        init_linear(params, f"{name}.{proj}", d, d, rng, dtype)
    init_linear(params, f"{name}.m1", d, d * mlp_ratio, rng, dtype)
    init_linear(params, f"{name}.m2", d * mlp_ratio, d, rng, dtype)


# -- layers -----------------------------------------------------------------


def linear(params, name, x):
    return x @ _t(params, f"{name}.w") + _t(params, f"{name}.b")


def conv(params, name, x, stride=1, pad=1):
    return x.conv2d(_t(params, f"{name}.w"), stride=stride, pad=pad) + _t(params, f"{name}.b")


def conv_transposed(params, name, x, stride=2, pad=1):
    return x.transposed_conv2d(_t(params, f"{name}.w"), stride=stride, pad=pad) + _t(
        params, f"{name}.b"
    )


def mlp(params, name, x, n_layers):
    for i in range(n_layers):
        x = linear(params, f"{name}.l{i}", x)
        if i < n_layers - 1:
            x = x.relu()
    return x


def _split_heads(x, n_heads):
    """(..., T, d) -> (..., h, T, d/h)"""
    *lead, t, d = x.shape
    x = x.reshape(*lead, t, n_heads, d // n_heads)
    axes = tuple(range(len(lead))) + (len(lead) + 1, len(lead), len(lead) + 2)
    return x.transpose(*axes)


def _merge_heads(x):
    """(..., h, T, d/h) -> (..., T, d)"""
    *lead, h, t, dh = x.shape
    axes = tuple(range(len(lead))) + (len(lead) + 1, len(lead), len(lead) + 2)
    return x.transpose(*axes).reshape(*lead, t, h * dh)


def attention_block(params, name, x, n_heads):
    """Pre-norm multi-head self-attention block. x: (..., T, d)."""
    y = x.layer_norm()
    q = _split_heads(linear(params, f"{name}.q", y), n_heads)
    k = _split_heads(linear(params, f"{name}.k", y), n_heads)
    v = _split_heads(linear(params, f"{name}.v", y), n_heads)
    o = _merge_heads(q.attention(k, v))
    x = x + linear(params, f"{name}.o", o)
    z = x.layer_norm()
    z = linear(params, f"{name}.m2", linear(params, f"{name}.m1", z).relu())
    return x + z


def clamp(x, lo, hi):
    """Hard clamp built from relu; gradient is zero outside [lo, hi]."""
    x = x - (x - Tensor(np.asarray(hi, dtype=x.dtype))).relu()
    return x + (Tensor(np.asarray(lo, dtype=x.dtype)) - x).relu()


def time_features(times, dim, dtype=np.float64):
    """Sin/cos features of (relative) times. times: (T,) -> (T, dim) array."""
    n_freq = dim // 2
    # geometric frequency ladder covering sub-second to tens-of-seconds periods
    freqs = 2 * np.pi * 0.05 * (100.0 ** (np.arange(n_freq) / max(n_freq - 1, 1)))
    arg = np.asarray(times)[..., None] * freqs
    return np.concatenate([np.sin(arg), np.cos(arg)], axis=-1).astype(dtype)


def tile_rows(row, n):
    """Differentiably repeat a (d,) tensor into (n, d)."""
    ones = Tensor(np.ones((n, 1), dtype=row.dtype))
    return ones @ row.reshape(1, row.shape[-1])
