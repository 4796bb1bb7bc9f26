"""Finite-difference gradient checking harness shared by the unit tests and
the acceptance suite."""

from __future__ import annotations

import numpy as np

from tame.nn import (
    ConvNetConfig,
    SdlConfig,
    SharedBottomParams,
    add_head,
    arrays_of,
    bce_grad,
    bce_loss,
    cnn_backward,
    cnn_forward_trace,
    init_convnet,
    init_sdl,
    sdl_backward,
    sdl_forward_trace,
)
from tame.nn import ops as nn_ops
from tame.rng import rng_stream

from oracles import central_difference

FD_STEP = 1e-5
REL_TOL = 1e-4

MINI_CNN = ConvNetConfig(image_size=8, channels=(2, 3, 4), hidden=6, feature_dim=5)
MINI_SDL = SdlConfig(input_dim=12, hidden=(7, 6, 5, 4))


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(1e-8, abs(a) + abs(b))


def max_rel_err(analytic: dict[str, np.ndarray], numeric: dict[str, np.ndarray]) -> float:
    worst = 0.0
    for name in numeric:
        ga = analytic[name].ravel()
        gn = numeric[name].ravel()
        for x, y in zip(ga, gn):
            worst = max(worst, rel_err(x, y))
    return worst


def _kink_distance(trace) -> float:
    """Distance of the nearest pre-activation to a ReLU kink, and the
    smallest top-2 gap inside any pooling window."""
    dist = min(np.abs(trace.z1).min(), np.abs(trace.z2).min(), np.abs(trace.z3).min())
    dist = min(dist, np.abs(trace.h1z).min(), np.abs(trace.h2z).min())
    for z in (trace.z1, trace.z2, trace.z3):
        a = np.maximum(z, 0.0)
        b, c, h, w = a.shape
        win = a.reshape(b, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(-1, 4)
        top2 = np.sort(win, axis=1)[:, -2:]
        # competing positives can swap the argmax under perturbation;
        # ReLU-clamped zeros cannot (their pre-activations are checked above)
        contested = top2[:, 0] > 0.0
        if contested.any():
            dist = min(dist, float((top2[contested, 1] - top2[contested, 0]).min()))
    return float(dist)


def draw_cnn_case(seed: int, batch: int = 3):
    """Random params/inputs at the mini configuration, resampled until all
    pre-activations sit safely away from ReLU/pool kinks."""
    rng = rng_stream(seed, "gradcheck-cnn")
    for _ in range(60):
        params = init_convnet(MINI_CNN, rng)
        for name, a in arrays_of(params).items():
            if name.endswith("_b"):
                a += rng.normal(0.0, 0.3, size=a.shape)
        x = rng.uniform(0.0, 1.0, size=(batch, 3, 8, 8))
        y = rng.integers(0, 2, size=batch).astype(np.float64)
        trace = cnn_forward_trace(params, x)
        if _kink_distance(trace) > 5e-4:
            return params, x, y
    raise RuntimeError("could not draw a kink-safe case")


def check_cnn_gradients(seed: int) -> float:
    params, x, y = draw_cnn_case(seed)
    arrays = arrays_of(params)

    def loss() -> float:
        trace = cnn_forward_trace(params, x)
        return bce_loss(nn_ops.sigmoid(trace.logits), y)

    trace = cnn_forward_trace(params, x)
    probs = nn_ops.sigmoid(trace.logits)
    dlogits = nn_ops.sigmoid_backward(probs, bce_grad(probs, y))
    analytic = cnn_backward(params, trace, dlogits)
    numeric = central_difference(loss, arrays, h=FD_STEP)
    return max_rel_err(analytic, numeric)


def draw_sdl_case(seed: int, batch: int = 4):
    rng = rng_stream(seed, "gradcheck-sdl")
    for _ in range(60):
        params = init_sdl(MINI_SDL, rng)
        for b in params.biases:
            b += rng.normal(0.0, 0.3, size=b.shape)
        x = rng.normal(0.0, 1.0, size=(batch, MINI_SDL.input_dim))
        y = rng.integers(0, 2, size=batch).astype(np.float64)
        trace = sdl_forward_trace(params, x)
        if min(np.abs(z).min() for z in trace.pre[:4]) > 5e-4:
            return params, x, y
    raise RuntimeError("could not draw a kink-safe case")


def check_sdl_gradients(seed: int) -> float:
    params, x, y = draw_sdl_case(seed)
    arrays = params.arrays()

    def loss() -> float:
        return bce_loss(sdl_forward_trace(params, x).probs, y)

    trace = sdl_forward_trace(params, x)
    analytic = sdl_backward(params, trace, bce_grad(trace.probs, y))
    numeric = central_difference(loss, arrays, h=FD_STEP)
    return max_rel_err(analytic, numeric)


def draw_shared_bottom_case(seed: int, batch: int = 3):
    rng = rng_stream(seed, "gradcheck-sb")
    for _ in range(60):
        sb = SharedBottomParams(trunk=init_convnet(MINI_CNN, rng))
        for name, a in arrays_of(sb.trunk).items():
            if name.endswith("_b"):
                a += rng.normal(0.0, 0.3, size=a.shape)
        add_head(sb, rng)
        x = rng.uniform(0.0, 1.0, size=(batch, 3, 8, 8))
        y = rng.integers(0, 2, size=batch).astype(np.float64)
        trace = cnn_forward_trace(sb.trunk, x)
        if _kink_distance(trace) > 5e-4:
            return sb, x, y
    raise RuntimeError("could not draw a kink-safe case")


def check_shared_bottom_gradients(seed: int) -> float:
    """Trunk + task-head gradients through the feature path. The trunk's own
    pretraining head takes no part in the loss, so its gradient must be
    exactly zero."""
    sb, x, y = draw_shared_bottom_case(seed)
    arrays = {k: v for k, v in arrays_of(sb.trunk).items() if k not in ("head_w", "head_b")}
    arrays["task_head_w"] = sb.head_w[0]
    arrays["task_head_b"] = sb.head_b[0]

    def loss() -> float:
        trace = cnn_forward_trace(sb.trunk, x)
        z = trace.features @ sb.head_w[0] + sb.head_b[0][0]
        return bce_loss(nn_ops.sigmoid(z), y)

    trace = cnn_forward_trace(sb.trunk, x)
    z = trace.features @ sb.head_w[0] + sb.head_b[0][0]
    probs = nn_ops.sigmoid(z)
    dz = nn_ops.sigmoid_backward(probs, bce_grad(probs, y))
    analytic = cnn_backward(sb.trunk, trace, np.zeros_like(z), dfeatures=dz[:, None] * sb.head_w[0][None, :])
    assert np.all(analytic["head_w"] == 0.0) and np.all(analytic["head_b"] == 0.0)
    analytic.pop("head_w")
    analytic.pop("head_b")
    analytic["task_head_w"] = trace.features.T @ dz
    analytic["task_head_b"] = np.array([dz.sum()])
    numeric = central_difference(loss, arrays, h=FD_STEP)
    return max_rel_err(analytic, numeric)
