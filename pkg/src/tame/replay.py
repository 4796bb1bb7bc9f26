"""Fixed-capacity replay buffer keyed by expert index, and the scaled
dot-product attention used to weight stored task features.

Capacity counts stored images across all experts. Whole entries are evicted
oldest-first (by global insertion step) once the total exceeds capacity;
per-sample eviction would break the image/label/feature alignment inside an
entry. Stored features are never recomputed: the experts that produced them
are frozen.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field

import numpy as np

from .data.container import parse_task, task_bytes
from .data.task import Task
from .errors import InputError, ShapeError

log = logging.getLogger(__name__)


@dataclass
class ReplayEntry:
    task_id: str
    images: np.ndarray  # [N, 3, H, W]
    labels: np.ndarray  # [N]
    features: np.ndarray  # [N, feature_dim]
    insertion_step: int = -1

    def __post_init__(self) -> None:
        n = self.images.shape[0]
        if self.labels.shape[0] != n or self.features.shape[0] != n:
            raise ShapeError(
                f"entry {self.task_id}: {n} images, {self.labels.shape[0]} labels, "
                f"{self.features.shape[0]} feature rows"
            )

    @property
    def n(self) -> int:
        return int(self.images.shape[0])

    def mean_features(self) -> np.ndarray:
        return self.features.mean(axis=0)


class ReplayBuffer:
    """Expert-indexed FIFO store with a global image-count capacity.
    Capacity 0 disables storage entirely (the no-replay ablation)."""

    def __init__(self, capacity: int = 1000):
        if capacity < 0:
            raise InputError(f"capacity must be >= 0, got {capacity}")
        self.capacity = capacity
        self.store: dict[int, list[ReplayEntry]] = {}
        self._clock = 0

    def total_images(self) -> int:
        return sum(e.n for entries in self.store.values() for e in entries)

    def store_entry(self, expert_index: int, entry: ReplayEntry) -> ReplayEntry | None:
        """Append under expert_index, then evict whole oldest entries
        (globally) until the capacity holds. An entry larger than the whole
        buffer is truncated to its newest `capacity` samples. Returns the
        entry object actually stored (None when storage is disabled)."""
        if self.capacity == 0:
            log.debug("replay disabled (capacity 0); dropping entry %s", entry.task_id)
            return None
        if entry.n > self.capacity:
            log.warning(
                "entry %s has %d samples, over buffer capacity %d; keeping the newest %d",
                entry.task_id,
                entry.n,
                self.capacity,
                self.capacity,
            )
            entry = ReplayEntry(
                task_id=entry.task_id,
                images=entry.images[-self.capacity :],
                labels=entry.labels[-self.capacity :],
                features=entry.features[-self.capacity :],
            )
        entry.insertion_step = self._clock
        self._clock += 1
        self.store.setdefault(expert_index, []).append(entry)
        while self.total_images() > self.capacity:
            oldest_key = min(self.store, key=lambda k: self.store[k][0].insertion_step)
            evicted = self.store[oldest_key].pop(0)
            if not self.store[oldest_key]:
                del self.store[oldest_key]
            log.debug("evicted entry %s (%d images)", evicted.task_id, evicted.n)
        return entry

    def retrieve(self, expert_index: int) -> list[ReplayEntry]:
        """All entries stored under an expert, oldest first."""
        return list(self.store.get(expert_index, ()))


def attention_weights(query: np.ndarray, keys: list[np.ndarray], d_k: int) -> np.ndarray:
    """Softmax over query-key dot products scaled by sqrt(d_k), computed
    with max-logit subtraction."""
    if len(keys) == 0:
        raise InputError("attention needs at least one key")
    if d_k <= 0:
        raise InputError(f"d_k must be positive, got {d_k}")
    q = np.asarray(query, dtype=np.float64).ravel()
    logits = np.array([float(q @ np.asarray(k, dtype=np.float64).ravel()) for k in keys])
    logits /= np.sqrt(float(d_k))
    logits -= logits.max()
    weights = np.exp(logits)
    return weights / weights.sum()


def attention_context(alpha: np.ndarray, values: list[np.ndarray]) -> np.ndarray:
    """Weighted sum of per-task value vectors."""
    if len(alpha) != len(values):
        raise ShapeError(f"{len(alpha)} weights for {len(values)} values")
    out = np.zeros_like(np.asarray(values[0], dtype=np.float64))
    for a, v in zip(alpha, values):
        out += float(a) * np.asarray(v, dtype=np.float64)
    return out


# Buffer serialization: each entry is a TAMETASK block followed by a
# features block (feature_dim as u32, then float32 rows), framed with the
# entry's identity so a buffer can be checkpointed and restored.

_BUF_MAGIC = b"TAMEBUFR"
_BUF_HEADER = struct.Struct("<8sIQI")  # magic, version, clock, n_entries
_ENTRY_HEADER = struct.Struct("<IQH")  # expert_index, insertion_step, task_id bytes


def buffer_bytes(buffer: ReplayBuffer) -> bytes:
    chunks = [_BUF_HEADER.pack(_BUF_MAGIC, 1, buffer._clock, sum(len(v) for v in buffer.store.values()))]
    chunks.append(struct.pack("<I", buffer.capacity))
    for expert_index in sorted(buffer.store):
        for e in buffer.store[expert_index]:
            task = Task(
                task_id=e.task_id,
                role="lifelong",
                images=e.images,
                labels=e.labels,
                class_pair=("?", "?"),
            )
            block = task_bytes(task)
            feats = e.features.astype("<f4").tobytes()
            tid = e.task_id.encode("utf-8")
            chunks.append(_ENTRY_HEADER.pack(expert_index, e.insertion_step, len(tid)))
            chunks.append(tid)
            chunks.append(struct.pack("<QI", len(block), e.features.shape[1]))
            chunks.append(block)
            chunks.append(feats)
    return b"".join(chunks)


def buffer_from_bytes(data: bytes) -> ReplayBuffer:
    magic, version, clock, n_entries = _BUF_HEADER.unpack_from(data)
    if magic != _BUF_MAGIC:
        raise InputError(f"bad magic {magic!r}; expected {_BUF_MAGIC!r}")
    if version != 1:
        raise InputError(f"unsupported buffer version {version}")
    off = _BUF_HEADER.size
    (capacity,) = struct.unpack_from("<I", data, off)
    off += 4
    buf = ReplayBuffer(capacity)
    buf._clock = clock
    for _ in range(n_entries):
        expert_index, step, tid_len = _ENTRY_HEADER.unpack_from(data, off)
        off += _ENTRY_HEADER.size
        task_id = data[off : off + tid_len].decode("utf-8")
        off += tid_len
        block_len, feature_dim = struct.unpack_from("<QI", data, off)
        off += 12
        task = parse_task(data[off : off + block_len], task_id=task_id)
        off += block_len
        n = task.images.shape[0]
        feats = np.frombuffer(data, dtype="<f4", count=n * feature_dim, offset=off)
        off += n * feature_dim * 4
        entry = ReplayEntry(
            task_id=task_id,
            images=task.images,
            labels=task.labels,
            features=feats.reshape(n, feature_dim).astype(np.float64),
            insertion_step=step,
        )
        buf.store.setdefault(expert_index, []).append(entry)
    for entries in buf.store.values():
        entries.sort(key=lambda e: e.insertion_step)
    return buf
