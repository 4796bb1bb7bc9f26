"""Dense-array layer primitives: direct convolution, 2x2 max-pool, affine,
ReLU and sigmoid, each with an exact reverse-mode backward."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeError


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, padding: int = 1) -> np.ndarray:
    """Stride-1 2-D cross-correlation. x: [B,C,H,W], w: [O,C,k,k], b: [O]."""
    if x.ndim != 4 or w.ndim != 4:
        raise ShapeError(f"conv2d expects 4-d input and kernel, got {x.shape} and {w.shape}")
    if x.shape[1] != w.shape[1]:
        raise ShapeError(f"conv2d channel mismatch: input has {x.shape[1]}, kernel expects {w.shape[1]}")
    if b.shape != (w.shape[0],):
        raise ShapeError(f"conv2d bias shape {b.shape} does not match {w.shape[0]} output channels")
    kh, kw = w.shape[2], w.shape[3]
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    if xp.shape[2] < kh or xp.shape[3] < kw:
        raise ShapeError(f"conv2d input {x.shape} too small for {kh}x{kw} kernel with padding {padding}")
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))
    out = np.einsum("bchwij,ocij->bohw", windows, w, optimize=True)
    out += b[None, :, None, None]
    return out


def conv2d_backward(
    x: np.ndarray, w: np.ndarray, dout: np.ndarray, padding: int = 1
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients (dx, dw, db) of conv2d_forward for stride 1."""
    kh, kw = w.shape[2], w.shape[3]
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))
    dw = np.einsum("bchwij,bohw->ocij", windows, dout, optimize=True)
    db = dout.sum(axis=(0, 2, 3))
    # Full correlation of the upstream gradient with 180-degree rotated kernels.
    gp = np.pad(dout, ((0, 0), (0, 0), (kh - 1 - padding,) * 2, (kw - 1 - padding,) * 2))
    gwin = sliding_window_view(gp, (kh, kw), axis=(2, 3))
    wrot = w[:, :, ::-1, ::-1]
    dx = np.einsum("bohwij,ocij->bchw", gwin, wrot, optimize=True)
    return dx, dw, db


def maxpool2_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """2x2 stride-2 max pool. Returns (pooled, argmax indices for backward)."""
    b, c, h, w = x.shape
    if h % 2 or w % 2:
        raise ShapeError(f"maxpool2 needs even spatial dims, got {h}x{w}")
    xr = x.reshape(b, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(b, c, h // 2, w // 2, 4)
    idx = xr.argmax(axis=-1)
    out = np.take_along_axis(xr, idx[..., None], axis=-1)[..., 0]
    return out, idx


def maxpool2_backward(idx: np.ndarray, dout: np.ndarray) -> np.ndarray:
    """Route pooled gradients back to the argmax cell of each 2x2 window."""
    b, c, h2, w2 = dout.shape
    g = np.zeros((b, c, h2, w2, 4), dtype=dout.dtype)
    np.put_along_axis(g, idx[..., None], dout[..., None], axis=-1)
    return g.reshape(b, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(b, c, h2 * 2, w2 * 2)


def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Affine map of row vectors: x [B,I] @ w [I,O] + b [O]."""
    if x.ndim != 2:
        raise ShapeError(f"dense expects a 2-d batch of rows, got shape {x.shape}")
    if x.shape[1] != w.shape[0]:
        raise ShapeError(f"dense input width {x.shape[1]} does not match weight rows {w.shape[0]}")
    if b.shape != (w.shape[1],):
        raise ShapeError(f"dense bias shape {b.shape} does not match {w.shape[1]} outputs")
    return x @ w + b


def dense_backward(x: np.ndarray, w: np.ndarray, dout: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    dw = x.T @ dout
    db = dout.sum(axis=0)
    dx = dout @ w.T
    return dx, dw, db


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def relu_backward(z: np.ndarray, dout: np.ndarray) -> np.ndarray:
    return np.where(z > 0.0, dout, 0.0)


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.result_type(z.dtype, np.float64))
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sigmoid_backward(p: np.ndarray, dout: np.ndarray) -> np.ndarray:
    return dout * p * (1.0 - p)
