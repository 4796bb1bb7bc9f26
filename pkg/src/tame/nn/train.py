"""Minibatch BCE training loops for the expert network and the shared dense
layer. One fresh Adam state per call; batches are reshuffled every epoch
from the caller's RNG stream."""

from __future__ import annotations

import numpy as np

from . import ops
from .adam import AdamState
from .cnn import ConvNetParams, cnn_backward, cnn_forward, cnn_forward_trace
from .losses import bce_grad, bce_loss
from .params import arrays_of
from .sdl import SdlParams, sdl_backward, sdl_forward_trace


def train_cnn(
    params: ConvNetParams,
    images: np.ndarray,
    labels: np.ndarray,
    *,
    epochs: int,
    batch_size: int,
    learning_rate: float,
    rng: np.random.Generator,
) -> list[float]:
    """Train all network parameters against the head's sigmoid output.
    Returns the mean batch loss of each epoch."""
    adam = AdamState(lr=learning_rate)
    arrays = arrays_of(params)
    y = np.asarray(labels, dtype=np.float64)
    n = y.shape[0]
    epoch_losses: list[float] = []
    for _ in range(epochs):
        order = rng.permutation(n)
        batch_losses: list[float] = []
        for start in range(0, n, batch_size):
            sel = order[start : start + batch_size]
            trace = cnn_forward_trace(params, images[sel])
            probs = ops.sigmoid(trace.logits)
            batch_losses.append(bce_loss(probs, y[sel]))
            dlogits = ops.sigmoid_backward(probs, bce_grad(probs, y[sel]))
            adam.step(arrays, cnn_backward(params, trace, dlogits))
        epoch_losses.append(float(np.mean(batch_losses)))
    return epoch_losses


def train_sdl(
    params: SdlParams,
    rows: np.ndarray,
    labels: np.ndarray,
    *,
    epochs: int,
    batch_size: int,
    learning_rate: float,
    rng: np.random.Generator,
) -> list[float]:
    """Train the shared dense layer on assembled rows; mean loss per epoch."""
    adam = AdamState(lr=learning_rate)
    arrays = params.arrays()
    y = np.asarray(labels, dtype=np.float64)
    n = y.shape[0]
    epoch_losses: list[float] = []
    for _ in range(epochs):
        order = rng.permutation(n)
        batch_losses: list[float] = []
        for start in range(0, n, batch_size):
            sel = order[start : start + batch_size]
            trace = sdl_forward_trace(params, rows[sel])
            batch_losses.append(bce_loss(trace.probs, y[sel]))
            adam.step(arrays, sdl_backward(params, trace, bce_grad(trace.probs, y[sel])))
        epoch_losses.append(float(np.mean(batch_losses)))
    return epoch_losses


def cnn_head_probs(params: ConvNetParams, images: np.ndarray) -> np.ndarray:
    """Sigmoid of the pretraining head's logits."""
    return ops.sigmoid(cnn_forward(params, images)[1])
