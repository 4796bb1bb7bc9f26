"""Shared dense layer: five fully connected layers, ReLU on the four hidden
ones, sigmoid on the single output unit."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError, UsageError
from . import ops
from .params import he_uniform


@dataclass
class SdlConfig:
    input_dim: int
    hidden: tuple[int, int, int, int] = (200, 192, 128, 64)

    def __post_init__(self) -> None:
        self.hidden = tuple(self.hidden)
        if self.input_dim <= 0:
            raise ShapeError(f"input_dim must be positive, got {self.input_dim}")

    def param_total(self) -> int:
        dims = (self.input_dim, *self.hidden, 1)
        return sum(dims[i] * dims[i + 1] + dims[i + 1] for i in range(5))


@dataclass
class SdlParams:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    frozen: bool = False

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    def arrays(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"w{i}"] = w
            out[f"b{i}"] = b
        return out


def init_sdl(cfg: SdlConfig, rng: np.random.Generator) -> SdlParams:
    dims = (cfg.input_dim, *cfg.hidden, 1)
    weights = [he_uniform(rng, (dims[i], dims[i + 1]), fan_in=dims[i]) for i in range(5)]
    biases = [np.zeros(dims[i + 1]) for i in range(5)]
    return SdlParams(weights=weights, biases=biases)


@dataclass
class SdlTrace:
    x: np.ndarray
    pre: list[np.ndarray]
    act: list[np.ndarray]
    probs: np.ndarray
    spent: bool = field(default=False)


def _forward(params: SdlParams, rows: np.ndarray) -> SdlTrace:
    x = np.asarray(rows, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"expected rows [batch, input_dim], got shape {x.shape}")
    if x.shape[1] != params.input_dim:
        raise ShapeError(f"rows are {x.shape[1]} wide, network expects {params.input_dim}")
    pre: list[np.ndarray] = []
    act: list[np.ndarray] = [x]
    h = x
    for i in range(4):
        z = ops.dense_forward(h, params.weights[i], params.biases[i])
        h = ops.relu(z)
        pre.append(z)
        act.append(h)
    z_out = ops.dense_forward(h, params.weights[4], params.biases[4])
    pre.append(z_out)
    probs = ops.sigmoid(z_out)[:, 0]
    return SdlTrace(x=x, pre=pre, act=act, probs=probs)


def sdl_forward(params: SdlParams, rows: np.ndarray) -> np.ndarray:
    """Class-1 probabilities in (0, 1), one per input row."""
    return _forward(params, rows).probs


def sdl_forward_trace(params: SdlParams, rows: np.ndarray) -> SdlTrace:
    return _forward(params, rows)


def sdl_backward(params: SdlParams, trace: SdlTrace, dprobs: np.ndarray) -> dict[str, np.ndarray]:
    """Exact gradients of all ten parameter arrays given dLoss/dProbs."""
    if trace.spent:
        raise UsageError("backward was already called on this forward trace")
    trace.spent = True
    grads: dict[str, np.ndarray] = {}
    p = trace.probs[:, None]
    dz = ops.sigmoid_backward(p, np.asarray(dprobs, dtype=np.float64)[:, None])
    dh, dw, db = ops.dense_backward(trace.act[4], params.weights[4], dz)
    grads["w4"], grads["b4"] = dw, db
    for i in range(3, -1, -1):
        dzi = ops.relu_backward(trace.pre[i], dh)
        dh, dw, db = ops.dense_backward(trace.act[i], params.weights[i], dzi)
        grads[f"w{i}"], grads[f"b{i}"] = dw, db
    return grads
