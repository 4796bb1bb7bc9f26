"""Independent reference implementations used as test oracles.

Everything here is deliberately naive (explicit loops, textbook formulas,
scipy where it provides an unrelated algorithm) so it shares no code path
with the engine it checks.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg


def conv2d_loops(x, w, b, padding=1):
    """Direct convolution with explicit Python loops."""
    bs, cin, h, wd = x.shape
    cout, _, kh, kw = w.shape
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    hout = h + 2 * padding - kh + 1
    wout = wd + 2 * padding - kw + 1
    out = np.zeros((bs, cout, hout, wout))
    for n in range(bs):
        for o in range(cout):
            for i in range(hout):
                for j in range(wout):
                    patch = xp[n, :, i : i + kh, j : j + kw]
                    out[n, o, i, j] = np.sum(patch * w[o]) + b[o]
    return out


def maxpool2_loops(x):
    bs, c, h, w = x.shape
    out = np.zeros((bs, c, h // 2, w // 2))
    for n in range(bs):
        for k in range(c):
            for i in range(h // 2):
                for j in range(w // 2):
                    out[n, k, i, j] = x[n, k, 2 * i : 2 * i + 2, 2 * j : 2 * j + 2].max()
    return out


def dense_loops(x, w, b):
    bs, din = x.shape
    dout = w.shape[1]
    out = np.zeros((bs, dout))
    for n in range(bs):
        for o in range(dout):
            acc = 0.0
            for i in range(din):
                acc += x[n, i] * w[i, o]
            out[n, o] = acc + b[o]
    return out


def cnn_reference_forward(params, images):
    """Loop-based re-implementation of the expert network forward pass."""

    def relu(z):
        return np.maximum(z, 0.0)

    a = relu(conv2d_loops(images, params.conv1_w, params.conv1_b))
    a = maxpool2_loops(a)
    a = relu(conv2d_loops(a, params.conv2_w, params.conv2_b))
    a = maxpool2_loops(a)
    a = relu(conv2d_loops(a, params.conv3_w, params.conv3_b))
    a = maxpool2_loops(a)
    flat = a.reshape(images.shape[0], -1)
    h1 = relu(dense_loops(flat, params.fc1_w, params.fc1_b))
    feats = relu(dense_loops(h1, params.fc2_w, params.fc2_b))
    logits = dense_loops(feats, params.head_w, params.head_b)[:, 0]
    return feats, logits


def sdl_reference_forward(params, rows):
    def relu(z):
        return np.maximum(z, 0.0)

    h = rows
    for i in range(4):
        h = relu(dense_loops(h, params.weights[i], params.biases[i]))
    z = dense_loops(h, params.weights[4], params.biases[4])[:, 0]
    return 1.0 / (1.0 + np.exp(-z))


def central_difference(fn, arrays: dict[str, np.ndarray], h: float = 1e-5) -> dict[str, np.ndarray]:
    """Finite-difference gradient of scalar fn() w.r.t. every array entry."""
    grads = {}
    for name, a in arrays.items():
        g = np.zeros_like(a)
        flat = a.ravel()
        gflat = g.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = fn()
            flat[i] = orig - h
            down = fn()
            flat[i] = orig
            gflat[i] = (up - down) / (2.0 * h)
        grads[name] = g
    return grads


def two_pass_covariance(features):
    """Textbook two-pass mean/covariance with the N-1 denominator."""
    n, d = features.shape
    mean = np.zeros(d)
    for row in features:
        mean += row
    mean /= n
    cov = np.zeros((d, d))
    for row in features:
        diff = row - mean
        cov += np.outer(diff, diff)
    cov /= n - 1
    return mean, cov


def fid_eig_oracle(mu1, cov1, mu2, cov2):
    """Frechet distance via eigendecomposition of the (non-symmetrized)
    covariance product; independent of the engine's symmetric route."""
    diff = float(np.sum((np.asarray(mu1) - np.asarray(mu2)) ** 2))
    prod = np.asarray(cov1) @ np.asarray(cov2)
    eigvals = scipy.linalg.eigvals(prod)
    roots = np.sqrt(np.clip(eigvals.real, 0.0, None))
    trace_term = float(np.trace(cov1) + np.trace(cov2) - 2.0 * roots.sum())
    return max(diff + trace_term, 0.0)


def auroc_pairwise(scores, labels):
    """O(n^2) all-pairs AUROC with half credit for ties."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def attention_context_loops(alpha, values):
    out = np.zeros_like(values[0])
    for a, v in zip(alpha, values):
        for i in range(len(v)):
            out[i] += a * v[i]
    return out
