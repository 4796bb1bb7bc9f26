"""CIFAR-100 binary format: one record per image, 1 coarse label byte +
1 fine label byte + 3072 pixel bytes (channel-major 32x32 RGB)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import IngestionError, InputError
from ..rng import rng_stream
from .task import ROLE_LIFELONG, Task

RECORD_BYTES = 3074
TRAIN_RECORDS = 50_000
TRAIN_FILE = "train.bin"


@dataclass
class CifarData:
    """Decoded records; pixels stay uint8 until task construction scales
    them to [0, 1] (a float copy of the full training set would be ~1 GB)."""

    images: np.ndarray  # uint8 [N, 3, 32, 32]
    fine_labels: np.ndarray
    coarse_labels: np.ndarray

    @property
    def n(self) -> int:
        return int(self.images.shape[0])


def resolve_train_file(path: Path | str) -> Path:
    p = Path(path)
    if p.is_dir():
        p = p / TRAIN_FILE
    return p


def load_cifar100(path: Path | str, expected_records: int | None = TRAIN_RECORDS) -> CifarData:
    """Decode the training file; refuses partial or padded files."""
    p = resolve_train_file(path)
    if not p.exists():
        raise IngestionError(f"CIFAR-100 file not found: {p}")
    raw = p.read_bytes()
    if expected_records is not None and len(raw) != expected_records * RECORD_BYTES:
        raise IngestionError(
            f"{p} holds {len(raw)} bytes; expected {expected_records * RECORD_BYTES} "
            f"({expected_records} records of {RECORD_BYTES} bytes)"
        )
    if len(raw) == 0 or len(raw) % RECORD_BYTES:
        raise IngestionError(
            f"{p} holds {len(raw)} bytes, not a whole number of {RECORD_BYTES}-byte records"
        )
    records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, RECORD_BYTES)
    return CifarData(
        images=records[:, 2:].reshape(-1, 3, 32, 32),
        fine_labels=records[:, 1].astype(np.int64),
        coarse_labels=records[:, 0].astype(np.int64),
    )


def encode_records(data: CifarData) -> bytes:
    """Inverse of load_cifar100 (used by the round-trip checks)."""
    n = data.n
    rec = np.empty((n, RECORD_BYTES), dtype=np.uint8)
    rec[:, 0] = data.coarse_labels
    rec[:, 1] = data.fine_labels
    rec[:, 2:] = data.images.reshape(n, -1)
    return rec.tobytes()


def make_task(
    dataset: CifarData,
    class_a: int,
    class_b: int,
    n_per_class: int,
    seed: int,
    *,
    role: str = ROLE_LIFELONG,
    task_id: str | None = None,
) -> Task:
    """Balanced binary task: label 0 for class_a, 1 for class_b."""
    if class_a == class_b:
        raise InputError(f"a binary task needs two distinct classes, got {class_a} twice")
    rng = rng_stream(seed, "cifar-task", class_a, class_b, n_per_class)
    picks = []
    for cls in (class_a, class_b):
        pool = np.flatnonzero(dataset.fine_labels == cls)
        if len(pool) < n_per_class:
            raise InputError(
                f"class {cls} has only {len(pool)} images, need {n_per_class}"
            )
        picks.append(rng.choice(pool, size=n_per_class, replace=False))
    idx = np.concatenate(picks)
    labels = np.concatenate(
        [np.zeros(n_per_class, dtype=np.uint8), np.ones(n_per_class, dtype=np.uint8)]
    )
    order = rng.permutation(len(idx))
    return Task(
        task_id=task_id or f"cifar-{class_a}-{class_b}-s{seed}",
        role=role,
        images=dataset.images[idx[order]].astype(np.float64) / 255.0,
        labels=labels[order],
        class_pair=(str(class_a), str(class_b)),
    )
