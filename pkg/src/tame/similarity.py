"""Task similarity: per-task feature statistics, Frechet distance between
feature distributions, cosine similarity of mean feature vectors, and
similarity-driven expert selection.

Every expert measures the incoming task in its own feature space: candidate
i extracts features with its own network and compares them against the
statistics it cached on its initialization task. Feature spaces of
different experts are never mixed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InputError, ShapeError
from .nn import ConvNetParams, cnn_features

log = logging.getLogger(__name__)

EIGENVALUE_CLAMP = 1e-10
SHRINKAGE = 1e-6


class Metric(str, Enum):
    """Similarity measure driving expert selection."""

    FID = "fid"
    COSINE = "cosine"


@dataclass
class FeatureStats:
    """Mean vector and covariance matrix of one task's feature embeddings."""

    mean: np.ndarray
    cov: np.ndarray
    n_samples: int

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])


def feature_stats(features: np.ndarray) -> FeatureStats:
    """Column mean and N-1 covariance, symmetrized by construction."""
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2:
        raise ShapeError(f"features must be [N, dim], got {f.shape}")
    n = f.shape[0]
    if n < 2:
        raise InputError(f"need at least 2 samples for covariance, got {n}")
    if not np.all(np.isfinite(f)):
        raise InputError("features contain non-finite values")
    mean = f.mean(axis=0)
    centered = f - mean
    cov = centered.T @ centered / (n - 1)
    cov = 0.5 * (cov + cov.T)
    return FeatureStats(mean=mean, cov=cov, n_samples=n)


def psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Square root of a symmetric PSD matrix via eigendecomposition,
    clamping eigenvalues below EIGENVALUE_CLAMP to zero."""
    vals, vecs = np.linalg.eigh(matrix)
    vals = np.where(vals < EIGENVALUE_CLAMP, 0.0, vals)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(a: FeatureStats, b: FeatureStats) -> float:
    """||mean_a - mean_b||^2 + Tr(cov_a + cov_b - 2 (cov_a cov_b)^{1/2}),
    clamped to be non-negative.

    The cross term uses the symmetric route sqrt(S_a) cov_b sqrt(S_a);
    undersampled covariances (n_samples <= dim) get SHRINKAGE * I added to
    both sides before the root.
    """
    if a.dim != b.dim:
        raise ShapeError(f"feature dims differ: {a.dim} vs {b.dim}")
    for name, s in (("a", a), ("b", b)):
        if not (np.all(np.isfinite(s.mean)) and np.all(np.isfinite(s.cov))):
            raise InputError(f"non-finite statistics for operand {name}")
    cov_a, cov_b = a.cov, b.cov
    if min(a.n_samples, b.n_samples) <= a.dim:
        eye = SHRINKAGE * np.eye(a.dim)
        cov_a = cov_a + eye
        cov_b = cov_b + eye
    diff = a.mean - b.mean
    root_a = psd_sqrt(cov_a)
    cross = psd_sqrt(root_a @ cov_b @ root_a)
    value = float(diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(cross))
    return max(value, 0.0)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors; rejects zero-norm input."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"vector lengths differ: {a.shape[0]} vs {b.shape[0]}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise InputError("cosine similarity is undefined for zero-norm vectors")
    return float(np.dot(a, b) / (na * nb))


def select_expert(
    task_train_images: np.ndarray,
    experts: list[ConvNetParams],
    init_stats: list[FeatureStats],
    metric: Metric,
) -> tuple[int, list[float]]:
    """Score the incoming task against every expert's cached initialization
    statistics and pick the most similar one.

    Frechet distance selects the argmin, cosine similarity the argmax; ties
    break toward the lowest index. Returns (chosen index, all scores).
    Pure function of its inputs; repeated calls agree exactly.
    """
    if not experts:
        raise InputError("expert pool is empty")
    if len(experts) != len(init_stats):
        raise InputError(f"{len(experts)} experts but {len(init_stats)} cached statistics")
    scores: list[float] = []
    for i, (params, stats) in enumerate(zip(experts, init_stats)):
        feats = cnn_features(params, task_train_images)
        if metric is Metric.FID:
            scores.append(frechet_distance(feature_stats(feats), stats))
        else:
            query = feats.mean(axis=0)
            if np.linalg.norm(query) == 0.0 or np.linalg.norm(stats.mean) == 0.0:
                # a dead feature map cannot be compared; it is never selected
                log.warning("expert %d produced a zero-norm mean feature vector", i)
                scores.append(float("-inf"))
            else:
                scores.append(cosine_similarity(query, stats.mean))
    best = 0
    for i in range(1, len(scores)):
        if metric is Metric.FID:
            if scores[i] < scores[best]:
                best = i
        elif scores[i] > scores[best]:
            best = i
    return best, scores
