"""Helpers shared by all parameter containers: named-array access,
counting, content hashing and freezing."""

from __future__ import annotations

import dataclasses
import hashlib

import numpy as np


def arrays_of(params) -> dict[str, np.ndarray]:
    """Ordered mapping of every ndarray field of a params dataclass."""
    out: dict[str, np.ndarray] = {}
    for f in dataclasses.fields(params):
        v = getattr(params, f.name)
        if isinstance(v, np.ndarray):
            out[f.name] = v
    return out


def param_count(params) -> int:
    return sum(a.size for a in arrays_of(params).values())


def content_hash(params) -> str:
    """sha256 over names, dtypes, shapes and raw little-endian bytes."""
    h = hashlib.sha256()
    for name, a in arrays_of(params).items():
        h.update(name.encode("utf-8"))
        h.update(str(a.dtype).encode("utf-8"))
        h.update(np.asarray(a.shape, dtype="<u4").tobytes())
        h.update(np.ascontiguousarray(a).astype(a.dtype.newbyteorder("<"), copy=False).tobytes())
    return h.hexdigest()


def freeze(params) -> None:
    """Mark the container frozen and make its arrays read-only."""
    for a in arrays_of(params).values():
        a.flags.writeable = False
    if hasattr(params, "frozen"):
        params.frozen = True


def he_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    """Uniform fan-in scaled initialization for ReLU stacks."""
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(np.float64)
