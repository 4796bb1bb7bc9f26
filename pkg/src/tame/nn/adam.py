"""Adam with bias correction, applied in place to named parameter arrays."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError, UsageError


class AdamState:
    """Per-array first/second moment accumulators and a shared step counter.

    Update rule (epsilon outside the square root):
        theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
    """

    def __init__(self, lr: float = 0.001, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        if set(grads) - set(params):
            raise ShapeError(f"gradients for unknown parameters: {sorted(set(grads) - set(params))}")
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for name, g in grads.items():
            p = params[name]
            if g.shape != p.shape:
                raise ShapeError(f"gradient shape {g.shape} does not match parameter '{name}' {p.shape}")
            if not p.flags.writeable:
                raise UsageError(f"parameter '{name}' is frozen and cannot be updated")
            if name not in self.m:
                self.m[name] = np.zeros_like(p)
                self.v[name] = np.zeros_like(p)
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
