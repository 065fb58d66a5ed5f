"""Rollout metrics: windowed normalized MSE and the RMSE-vs-time curve.

Both metrics look only at the second half of a 2T-step rollout, i.e. the
long-horizon window [T, 2T); the first half is the short-horizon region the
context frames came from.
"""

import numpy as np


def _window(pred, gt, horizon):
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {gt.shape}")
    if len(gt) < 2 * horizon:
        raise ValueError(f"need at least {2 * horizon} steps, got {len(gt)}")
    return pred[horizon : 2 * horizon], gt[horizon : 2 * horizon]


def normalized_mse(pred, gt, horizon):
    """MSE over steps [T, 2T), divided by the mean ground-truth intensity
    over the same window."""
    p, g = _window(pred, gt, horizon)
    intensity = float(np.mean(g))
    if intensity == 0.0:
        raise ValueError("zero mean ground-truth intensity")
    return float(np.mean((p - g) ** 2)) / intensity


def rmse_over_time(pred, gt, horizon):
    """Per-step pixel RMSE over the window, indexed by normalized time
    (i - T)/T in [0, 1). Returns an array of length T."""
    p, g = _window(pred, gt, horizon)
    return np.sqrt(((p - g) ** 2).reshape(horizon, -1).mean(axis=1))


def iqr75(values):
    """Central 75% spread: 87.5th minus 12.5th percentile, linear
    interpolation between order statistics."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return float("nan")
    q_hi, q_lo = np.percentile(values, [87.5, 12.5], method="linear")
    return float(q_hi - q_lo)


def classic_iqr(values):
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return float("nan")
    q_hi, q_lo = np.percentile(values, [75.0, 25.0], method="linear")
    return float(q_hi - q_lo)
