"""TAMETASK container: little-endian header (magic, version, N, H, W),
N label bytes, then N*3*H*W uint8 pixel bytes."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import IngestionError
from ..io_utils import atomic_write_bytes
from .task import ROLE_LIFELONG, Task

MAGIC = b"TAMETASK"
VERSION = 1
_HEADER = struct.Struct("<8sIIII")


def task_bytes(task: Task) -> bytes:
    n, _, h, w = task.images.shape
    pixels = np.round(task.images * 255.0).astype(np.uint8)
    return b"".join(
        (
            _HEADER.pack(MAGIC, VERSION, n, h, w),
            task.labels.astype(np.uint8).tobytes(),
            pixels.tobytes(),
        )
    )


def write_task(task: Task, path: Path | str) -> None:
    atomic_write_bytes(path, task_bytes(task))


def parse_task(
    data: bytes,
    *,
    task_id: str,
    role: str = ROLE_LIFELONG,
    class_pair: tuple[str, str] = ("?", "?"),
) -> Task:
    """Decode container bytes; identity fields come from the caller (they
    live in the run manifest, not the container)."""
    if len(data) < _HEADER.size:
        raise IngestionError(f"container truncated at byte {len(data)}: header needs {_HEADER.size} bytes")
    magic, version, n, h, w = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise IngestionError(f"bad magic {magic!r}; expected {MAGIC!r}")
    if version != VERSION:
        raise IngestionError(f"unsupported container version {version}")
    expected = _HEADER.size + n + n * 3 * h * w
    if len(data) != expected:
        raise IngestionError(
            f"container truncated at byte {len(data)}: expected {expected} bytes for N={n}, {h}x{w}"
        )
    labels = np.frombuffer(data, dtype=np.uint8, count=n, offset=_HEADER.size).copy()
    pixels = np.frombuffer(data, dtype=np.uint8, count=n * 3 * h * w, offset=_HEADER.size + n)
    images = pixels.reshape(n, 3, h, w).astype(np.float64) / 255.0
    return Task(task_id=task_id, role=role, images=images, labels=labels, class_pair=class_pair)


def read_task(
    path: Path | str,
    *,
    task_id: str | None = None,
    role: str = ROLE_LIFELONG,
    class_pair: tuple[str, str] = ("?", "?"),
) -> Task:
    p = Path(path)
    if not p.exists():
        raise IngestionError(f"task container not found: {p}")
    return parse_task(p.read_bytes(), task_id=task_id or p.stem, role=role, class_pair=class_pair)
