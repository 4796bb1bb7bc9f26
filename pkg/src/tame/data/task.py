"""Binary classification tasks and task sequences.

A task owns its images (channel-major, pixel values in [0, 1]) and carries a
deterministic 75/25 stratified train/eval split: within each class, the last
quarter of that class's storage positions is held out for evaluation.
Storage order is already seeded-shuffled by the task builders, so the
held-out quarter is random but frozen with the task.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError

ROLE_INIT = "initialization"
ROLE_LIFELONG = "lifelong"


def split_indices(labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-class positional split: last quarter of each class evaluates."""
    train_parts: list[np.ndarray] = []
    eval_parts: list[np.ndarray] = []
    for value in (0, 1):
        pos = np.flatnonzero(labels == value)
        n_eval = len(pos) // 4
        if n_eval:
            train_parts.append(pos[:-n_eval])
            eval_parts.append(pos[-n_eval:])
        else:
            train_parts.append(pos)
    train = np.sort(np.concatenate(train_parts))
    evals = np.sort(np.concatenate(eval_parts)) if eval_parts else np.array([], dtype=np.int64)
    return train, evals


@dataclass
class Task:
    task_id: str
    role: str
    images: np.ndarray
    labels: np.ndarray
    class_pair: tuple[str, str]
    train_idx: np.ndarray = field(init=False, repr=False)
    eval_idx: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.role not in (ROLE_INIT, ROLE_LIFELONG):
            raise InputError(f"unknown task role {self.role!r}")
        if self.images.ndim != 4 or self.images.shape[1] != 3:
            raise InputError(f"task images must be [N, 3, H, W], got {self.images.shape}")
        if self.images.shape[0] != self.labels.shape[0]:
            raise InputError(
                f"{self.images.shape[0]} images but {self.labels.shape[0]} labels in task {self.task_id}"
            )
        if self.images.shape[0] == 0:
            raise InputError(f"task {self.task_id} is empty")
        unique = set(np.unique(self.labels).tolist())
        if not unique <= {0, 1}:
            raise InputError(f"task labels must be 0/1, got {sorted(unique)}")
        if unique != {0, 1}:
            raise InputError(f"task {self.task_id} must contain both labels")
        lo, hi = float(self.images.min()), float(self.images.max())
        if lo < 0.0 or hi > 1.0:
            raise InputError(f"pixel values outside [0, 1] in task {self.task_id}: [{lo}, {hi}]")
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        self.images.flags.writeable = False
        self.labels.flags.writeable = False
        self.train_idx, self.eval_idx = split_indices(self.labels)

    @property
    def n(self) -> int:
        return int(self.images.shape[0])

    @property
    def image_size(self) -> int:
        return int(self.images.shape[2])

    def train_images(self) -> np.ndarray:
        return self.images[self.train_idx]

    def train_labels(self) -> np.ndarray:
        return self.labels[self.train_idx]

    def eval_images(self) -> np.ndarray:
        return self.images[self.eval_idx]

    def eval_labels(self) -> np.ndarray:
        return self.labels[self.eval_idx]


@dataclass
class Sequence:
    sequence_id: str
    tasks: list[Task]

    def __post_init__(self) -> None:
        if not self.tasks:
            raise InputError(f"sequence {self.sequence_id} has no tasks")
        for t in self.tasks:
            if t.role != ROLE_LIFELONG:
                raise InputError(f"sequence {self.sequence_id} contains non-lifelong task {t.task_id}")

    def __len__(self) -> int:
        return len(self.tasks)
