"""Binary cross entropy on probabilities, with the clamp used everywhere
before taking logs."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError

PROB_CLAMP = 1e-7


def bce_loss(probabilities: np.ndarray, labels: np.ndarray) -> float:
    """Mean binary cross entropy; probabilities are clamped to
    [PROB_CLAMP, 1 - PROB_CLAMP] before the logarithms."""
    p = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if p.shape != y.shape:
        raise ShapeError(f"bce_loss shapes differ: probabilities {p.shape} vs labels {y.shape}")
    pc = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    return float(-np.mean(y * np.log(pc) + (1.0 - y) * np.log1p(-pc)))


def bce_grad(probabilities: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """d(bce_loss)/d(probabilities); zero where the clamp is active."""
    p = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if p.shape != y.shape:
        raise ShapeError(f"bce_grad shapes differ: probabilities {p.shape} vs labels {y.shape}")
    pc = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    grad = -(y / pc - (1.0 - y) / (1.0 - pc)) / p.size
    inside = (p > PROB_CLAMP) & (p < 1.0 - PROB_CLAMP)
    return np.where(inside, grad, 0.0)
