"""Shared-bottom comparison model: one trainable conv trunk shared by all
tasks plus one tiny binary head per task. The trunk reuses the expert
network layout with widths solved so that its size matches the full
multi-expert system (n experts + shared dense layer) it is compared against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError, ShapeError
from . import ops
from .adam import AdamState
from .cnn import ConvNetConfig, ConvNetParams, cnn_backward, cnn_forward, cnn_forward_trace
from .losses import bce_grad, bce_loss
from .params import arrays_of, he_uniform
from .sdl import SdlConfig


def matched_trunk_config(
    expert_cfg: ConvNetConfig,
    sdl_cfg: SdlConfig,
    n_experts: int,
    *,
    channel_scale: int = 3,
    tolerance: float = 0.10,
) -> ConvNetConfig:
    """Solve the trunk's dense width so its parameter total matches
    n_experts expert networks plus the shared dense layer."""
    target = n_experts * expert_cfg.param_total() + sdl_cfg.param_total()
    channels = tuple(c * channel_scale for c in expert_cfg.channels)
    c1, c2, c3 = channels
    cin = expert_cfg.in_channels
    conv_total = c1 * cin * 9 + c1 + c2 * c1 * 9 + c2 + c3 * c2 * 9 + c3
    side = expert_cfg.image_size // 8
    flat = c3 * side * side
    fdim = expert_cfg.feature_dim
    # target = conv_total + (flat+1)*h + (h*fdim + fdim) + (fdim + 1)
    hidden = int(round((target - conv_total - 2 * fdim - 1) / (flat + 1 + fdim)))
    if hidden < 1:
        raise InputError(
            f"cannot parameter-match a shared trunk: target {target} is below the conv stack size {conv_total}"
        )
    cfg = ConvNetConfig(
        image_size=expert_cfg.image_size,
        in_channels=cin,
        channels=channels,
        hidden=hidden,
        feature_dim=fdim,
    )
    rel = abs(cfg.param_total() - target) / target
    if rel > tolerance:
        raise InputError(
            f"matched trunk misses the parameter target by {rel:.1%} ({cfg.param_total()} vs {target})"
        )
    return cfg


@dataclass
class SharedBottomParams:
    trunk: ConvNetParams
    head_w: list[np.ndarray] = field(default_factory=list)
    head_b: list[np.ndarray] = field(default_factory=list)

    @property
    def n_heads(self) -> int:
        return len(self.head_w)


def add_head(sb: SharedBottomParams, rng: np.random.Generator) -> int:
    """Append a fresh binary head; returns its index."""
    fdim = sb.trunk.feature_dim
    sb.head_w.append(he_uniform(rng, (fdim,), fan_in=fdim))
    sb.head_b.append(np.zeros(1))
    return sb.n_heads - 1


def head_probs(sb: SharedBottomParams, head: int, images: np.ndarray) -> np.ndarray:
    if not 0 <= head < sb.n_heads:
        raise ShapeError(f"head index {head} out of range (have {sb.n_heads})")
    features = cnn_forward(sb.trunk, images)[0]
    return ops.sigmoid(features @ sb.head_w[head] + sb.head_b[head][0])


def train_task_head(
    sb: SharedBottomParams,
    head: int,
    images: np.ndarray,
    labels: np.ndarray,
    *,
    epochs: int,
    batch_size: int,
    learning_rate: float,
    rng: np.random.Generator,
) -> list[float]:
    """Train the trunk plus one head with BCE; earlier heads stay untouched.
    The trunk's own pretraining head receives no gradient here."""
    adam = AdamState(lr=learning_rate)
    arrays = {k: v for k, v in arrays_of(sb.trunk).items() if k not in ("head_w", "head_b")}
    arrays["task_head_w"] = sb.head_w[head]
    arrays["task_head_b"] = sb.head_b[head]
    y = np.asarray(labels, dtype=np.float64)
    n = y.shape[0]
    epoch_losses: list[float] = []
    for _ in range(epochs):
        order = rng.permutation(n)
        batch_losses: list[float] = []
        for start in range(0, n, batch_size):
            sel = order[start : start + batch_size]
            trace = cnn_forward_trace(sb.trunk, images[sel])
            z = trace.features @ sb.head_w[head] + sb.head_b[head][0]
            probs = ops.sigmoid(z)
            batch_losses.append(bce_loss(probs, y[sel]))
            dz = ops.sigmoid_backward(probs, bce_grad(probs, y[sel]))
            dfeatures = dz[:, None] * sb.head_w[head][None, :]
            grads = cnn_backward(params=sb.trunk, trace=trace, dlogits=np.zeros_like(z), dfeatures=dfeatures)
            grads.pop("head_w")
            grads.pop("head_b")
            grads["task_head_w"] = trace.features.T @ dz
            grads["task_head_b"] = np.array([dz.sum()])
            adam.step(arrays, grads)
        epoch_losses.append(float(np.mean(batch_losses)))
    return epoch_losses
