"""Expert convolutional network: three conv/ReLU/max-pool blocks feeding two
ReLU dense layers (the second produces the feature embedding) plus a
single-logit head used only while the network is being trained on its own
task.

The same container and forward/backward code also serve as the trunk of the
shared-bottom comparison model; only the layer widths differ.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError, UsageError
from . import ops
from .params import arrays_of, he_uniform


@dataclass
class ConvNetConfig:
    image_size: int = 32
    in_channels: int = 3
    channels: tuple[int, int, int] = (16, 32, 64)
    hidden: int = 136
    feature_dim: int = 128

    def __post_init__(self) -> None:
        if self.image_size % 8:
            raise ShapeError(f"image_size must be divisible by 8 (three 2x2 pools), got {self.image_size}")
        self.channels = tuple(self.channels)

    @property
    def flat_dim(self) -> int:
        side = self.image_size // 8
        return self.channels[2] * side * side

    def param_total(self) -> int:
        c1, c2, c3 = self.channels
        n = c1 * self.in_channels * 9 + c1
        n += c2 * c1 * 9 + c2
        n += c3 * c2 * 9 + c3
        n += self.flat_dim * self.hidden + self.hidden
        n += self.hidden * self.feature_dim + self.feature_dim
        n += self.feature_dim + 1
        return n


@dataclass
class ConvNetParams:
    conv1_w: np.ndarray
    conv1_b: np.ndarray
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    conv3_w: np.ndarray
    conv3_b: np.ndarray
    fc1_w: np.ndarray
    fc1_b: np.ndarray
    fc2_w: np.ndarray
    fc2_b: np.ndarray
    head_w: np.ndarray
    head_b: np.ndarray
    frozen: bool = False

    @property
    def feature_dim(self) -> int:
        return self.fc2_w.shape[1]

    @property
    def image_size(self) -> int:
        # fc1 rows = c3 * (s/8)^2 with c3 the last conv width
        side = int(round(np.sqrt(self.fc1_w.shape[0] / self.conv3_w.shape[0])))
        return side * 8


def init_convnet(cfg: ConvNetConfig, rng: np.random.Generator) -> ConvNetParams:
    c1, c2, c3 = cfg.channels
    cin = cfg.in_channels
    return ConvNetParams(
        conv1_w=he_uniform(rng, (c1, cin, 3, 3), fan_in=cin * 9),
        conv1_b=np.zeros(c1),
        conv2_w=he_uniform(rng, (c2, c1, 3, 3), fan_in=c1 * 9),
        conv2_b=np.zeros(c2),
        conv3_w=he_uniform(rng, (c3, c2, 3, 3), fan_in=c2 * 9),
        conv3_b=np.zeros(c3),
        fc1_w=he_uniform(rng, (cfg.flat_dim, cfg.hidden), fan_in=cfg.flat_dim),
        fc1_b=np.zeros(cfg.hidden),
        fc2_w=he_uniform(rng, (cfg.hidden, cfg.feature_dim), fan_in=cfg.hidden),
        fc2_b=np.zeros(cfg.feature_dim),
        head_w=he_uniform(rng, (cfg.feature_dim, 1), fan_in=cfg.feature_dim),
        head_b=np.zeros(1),
    )


@dataclass
class CnnTrace:
    """Activations recorded by a traced forward pass; single use."""

    x: np.ndarray
    z1: np.ndarray
    i1: np.ndarray
    p1: np.ndarray
    z2: np.ndarray
    i2: np.ndarray
    p2: np.ndarray
    z3: np.ndarray
    i3: np.ndarray
    flat: np.ndarray
    h1z: np.ndarray
    h1: np.ndarray
    h2z: np.ndarray
    features: np.ndarray
    logits: np.ndarray
    spent: bool = field(default=False)


def _check_input(params: ConvNetParams, images: np.ndarray) -> None:
    if images.ndim != 4:
        raise ShapeError(f"expected images [batch, channels, H, W], got shape {images.shape}")
    if images.shape[1] != params.conv1_w.shape[1]:
        raise ShapeError(
            f"images have {images.shape[1]} channels, network expects {params.conv1_w.shape[1]}"
        )
    h, w = images.shape[2], images.shape[3]
    if h % 8 or w % 8:
        raise ShapeError(f"image sides must be divisible by 8, got {h}x{w}")
    flat = params.conv3_w.shape[0] * (h // 8) * (w // 8)
    if flat != params.fc1_w.shape[0]:
        raise ShapeError(
            f"{h}x{w} images flatten to {flat} units but the dense stack expects {params.fc1_w.shape[0]}"
        )


def _forward(params: ConvNetParams, images: np.ndarray) -> CnnTrace:
    _check_input(params, images)
    x = np.asarray(images, dtype=np.float64)
    z1 = ops.conv2d_forward(x, params.conv1_w, params.conv1_b)
    p1, i1 = ops.maxpool2_forward(ops.relu(z1))
    z2 = ops.conv2d_forward(p1, params.conv2_w, params.conv2_b)
    p2, i2 = ops.maxpool2_forward(ops.relu(z2))
    z3 = ops.conv2d_forward(p2, params.conv3_w, params.conv3_b)
    p3, i3 = ops.maxpool2_forward(ops.relu(z3))
    flat = p3.reshape(x.shape[0], -1)
    h1z = ops.dense_forward(flat, params.fc1_w, params.fc1_b)
    h1 = ops.relu(h1z)
    h2z = ops.dense_forward(h1, params.fc2_w, params.fc2_b)
    features = ops.relu(h2z)
    logits = ops.dense_forward(features, params.head_w, params.head_b)[:, 0]
    return CnnTrace(x, z1, i1, p1, z2, i2, p2, z3, i3, flat, h1z, h1, h2z, features, logits)


def cnn_forward(params: ConvNetParams, images: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Run the network; returns (features [B, feature_dim], head logits [B])."""
    t = _forward(params, images)
    return t.features, t.logits


def cnn_forward_trace(params: ConvNetParams, images: np.ndarray) -> CnnTrace:
    return _forward(params, images)


def cnn_backward(
    params: ConvNetParams,
    trace: CnnTrace,
    dlogits: np.ndarray,
    dfeatures: np.ndarray | None = None,
) -> dict[str, np.ndarray]:
    """Exact gradients of every parameter given upstream gradients on the
    head logits (and optionally directly on the features)."""
    if trace.spent:
        raise UsageError("backward was already called on this forward trace")
    trace.spent = True
    dlog = np.asarray(dlogits, dtype=np.float64)[:, None]
    dfeats, dhead_w, dhead_b = ops.dense_backward(trace.features, params.head_w, dlog)
    if dfeatures is not None:
        dfeats = dfeats + dfeatures
    dh2z = ops.relu_backward(trace.h2z, dfeats)
    dh1, dfc2_w, dfc2_b = ops.dense_backward(trace.h1, params.fc2_w, dh2z)
    dh1z = ops.relu_backward(trace.h1z, dh1)
    dflat, dfc1_w, dfc1_b = ops.dense_backward(trace.flat, params.fc1_w, dh1z)
    b = trace.x.shape[0]
    c3 = params.conv3_w.shape[0]
    side3 = trace.z3.shape[2] // 2
    dp3 = dflat.reshape(b, c3, side3, side3)
    dz3 = ops.relu_backward(trace.z3, ops.maxpool2_backward(trace.i3, dp3))
    dp2, dconv3_w, dconv3_b = ops.conv2d_backward(trace.p2, params.conv3_w, dz3)
    dz2 = ops.relu_backward(trace.z2, ops.maxpool2_backward(trace.i2, dp2))
    dp1, dconv2_w, dconv2_b = ops.conv2d_backward(trace.p1, params.conv2_w, dz2)
    dz1 = ops.relu_backward(trace.z1, ops.maxpool2_backward(trace.i1, dp1))
    _, dconv1_w, dconv1_b = ops.conv2d_backward(trace.x, params.conv1_w, dz1)
    return {
        "conv1_w": dconv1_w,
        "conv1_b": dconv1_b,
        "conv2_w": dconv2_w,
        "conv2_b": dconv2_b,
        "conv3_w": dconv3_w,
        "conv3_b": dconv3_b,
        "fc1_w": dfc1_w,
        "fc1_b": dfc1_b,
        "fc2_w": dfc2_w,
        "fc2_b": dfc2_b,
        "head_w": dhead_w,
        "head_b": dhead_b,
    }


FEATURE_CHUNK = 256


def cnn_features(params: ConvNetParams, images: np.ndarray, chunk: int = FEATURE_CHUNK) -> np.ndarray:
    """Feature embeddings only, always computed in fixed-size chunks.

    Chunk boundaries depend only on the number of images, so repeated calls
    on the same data are bitwise identical (BLAS contraction order varies
    with batch shape, so a variable chunking would not be)."""
    n = images.shape[0]
    parts = [cnn_forward(params, images[i : i + chunk])[0] for i in range(0, n, chunk)]
    return parts[0] if len(parts) == 1 else np.concatenate(parts, axis=0)


def convnet_like(params: ConvNetParams) -> dict[str, np.ndarray]:
    return arrays_of(params)
