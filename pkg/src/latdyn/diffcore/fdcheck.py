"""Graph evaluation helpers and the finite-difference gradient oracle.

A "graph" here is any Python callable mapping a dict of named Tensors to an
output Tensor; the dynamic tape in ``tensor.py`` records the actual nodes.
"""

import numpy as np

from .tensor import Tensor


def evaluate(fn, inputs):
    """Run ``fn`` on named numpy inputs; pure, returns numpy output."""
    tensors = {name: Tensor(np.asarray(arr)) for name, arr in inputs.items()}
    return fn(tensors).data


def gradient(fn, inputs, wrt=None):
    """Analytic gradients of the scalar ``fn`` output for each name in ``wrt``."""
    wrt = set(inputs) if wrt is None else set(wrt)
    tensors = {
        name: Tensor(np.asarray(arr, dtype=np.float64), requires_grad=name in wrt)
        for name, arr in inputs.items()
    }
    out = fn(tensors)
    if out.data.size != 1:
        raise ValueError(f"gradient requires a scalar-output graph, got shape {out.shape}")
    out.backward()
    grads = {}
    for name in wrt:
        g = tensors[name].grad
        grads[name] = np.zeros_like(tensors[name].data) if g is None else g
    return grads


def finite_difference_check(fn, inputs, eps=1e-5, wrt=None):
    """Max relative error between analytic and central-difference gradients."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    wrt = set(inputs) if wrt is None else set(wrt)
    inputs = {k: np.asarray(v, dtype=np.float64) for k, v in inputs.items()}
    analytic = gradient(fn, inputs, wrt)

    def scalar(vals):
        out = evaluate(fn, vals)
        return float(np.asarray(out).reshape(()))

    worst = 0.0
    for name in sorted(wrt):
        base = inputs[name]
        flat = base.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            hi = scalar(inputs)
            flat[i] = orig - eps
            lo = scalar(inputs)
            flat[i] = orig
            cd = (hi - lo) / (2.0 * eps)
            err = abs(analytic[name].reshape(-1)[i] - cd) / (abs(cd) + 1e-8)
            worst = max(worst, err)
    return worst
