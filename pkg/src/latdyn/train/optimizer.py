"""AdamW with decoupled weight decay and an exponential learning-rate ladder."""

import numpy as np


class AdamW:
    def __init__(self, params, lr=3e-4, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.01):
        if lr <= 0:
            raise ValueError("lr must be positive")
        self.params = params
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self.m = {k: np.zeros_like(v.data) for k, v in params.items() if v.requires_grad}
        self.v = {k: np.zeros_like(v.data) for k, v in params.items() if v.requires_grad}

    def zero_grad(self):
        for p in self.params.values():
            p.grad = None

    def step(self):
        self.t += 1
        bc1 = 1.0 - self.b1**self.t
        bc2 = 1.0 - self.b2**self.t
        for name, p in self.params.items():
            if not p.requires_grad or p.grad is None:
                continue
            g = p.grad
            m = self.m[name]
            v = self.v[name]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            # decay is decoupled: applied directly to weights, not to the gradient
            p.data -= (self.lr * (update + self.weight_decay * p.data)).astype(p.data.dtype)


def exponential_decay_rate(epochs, final_factor=0.01):
    """Per-epoch factor gamma with gamma**epochs == final_factor."""
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    return float(final_factor) ** (1.0 / epochs)
