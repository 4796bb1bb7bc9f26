"""Procedural task generators.

Five archetypes with deliberately different color palettes and spatial
statistics, so that tasks from one archetype are close in feature space and
far from the others. Within an archetype there are two label groups of two
sub-variants each; a task instance pairs one sub-variant from each group.
Tasks of the same archetype therefore pose different (but never
label-conflicting) problems, which is what gives replay something to
protect, while the archetype-level statistics that drive routing stay put.

Pixels are quantized to the uint8 grid before a task is built, so container
round-trips are exact.
"""

from __future__ import annotations

import numpy as np

from ..errors import InputError
from ..rng import rng_stream
from .task import ROLE_LIFELONG, Task

ARCHETYPE_NAMES = ("blobs", "stripes", "checker", "rings", "gradient")

# per archetype: variants 0-1 form the label-0 group, 2-3 the label-1 group
VARIANT_NAMES = (
    ("b1", "b2", "b4", "b5"),
    ("h4", "h6", "v4", "v6"),
    ("c5", "c7", "c2", "c3"),
    ("disk", "square", "ring", "frame"),
    ("lr", "tb", "rl", "bt"),
)

_NOISE = 0.04


def _grid(size: int) -> tuple[np.ndarray, np.ndarray]:
    yy, xx = np.mgrid[0:size, 0:size]
    return yy.astype(np.float64), xx.astype(np.float64)


def _blobs(rng: np.random.Generator, n: int, s: int, variant: int) -> np.ndarray:
    count = (1, 2, 5, 6)[variant]
    yy, xx = _grid(s)
    out = np.empty((n, 3, s, s))
    for i in range(n):
        img = np.empty((3, s, s))
        img[0], img[1], img[2] = 0.08, 0.08, 0.32
        for _ in range(count):
            cy, cx = rng.uniform(0.2 * s, 0.8 * s, size=2)
            sig = rng.uniform(s / 11.0, s / 7.0)
            bump = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * sig * sig))
            img[0] += 0.85 * bump
            img[1] += 0.70 * bump
            img[2] += 0.10 * bump
        out[i] = img
    return out


def _stripes(rng: np.random.Generator, n: int, s: int, variant: int) -> np.ndarray:
    axis_is_y, period = ((True, 4.0), (True, 6.0), (False, 4.0), (False, 6.0))[variant]
    yy, xx = _grid(s)
    out = np.empty((n, 3, s, s))
    for i in range(n):
        p = period + rng.uniform(-0.4, 0.4)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        coord = yy if axis_is_y else xx
        wave = 0.5 + 0.5 * np.sin(2.0 * np.pi * coord / p + phase)
        out[i, 0] = 0.25 + 0.70 * wave
        out[i, 1] = 0.05 + 0.45 * wave
        out[i, 2] = 0.05 + 0.10 * wave
    return out


def _checker(rng: np.random.Generator, n: int, s: int, variant: int) -> np.ndarray:
    cell = (5, 7, 2, 3)[variant]
    yy, xx = _grid(s)
    out = np.empty((n, 3, s, s))
    for i in range(n):
        oy, ox = rng.integers(0, cell, size=2)
        mask = (((yy + oy) // cell + (xx + ox) // cell) % 2).astype(np.float64)
        out[i, 0] = 0.15 + 0.65 * mask
        out[i, 1] = 0.80 - 0.65 * mask
        out[i, 2] = 0.15 + 0.65 * mask
    return out


def _rings(rng: np.random.Generator, n: int, s: int, variant: int) -> np.ndarray:
    yy, xx = _grid(s)
    out = np.empty((n, 3, s, s))
    for i in range(n):
        cy, cx = rng.uniform(0.42 * s, 0.58 * s, size=2)
        outer = rng.uniform(0.28 * s, 0.38 * s)
        if variant == 0:  # filled disk
            r = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
            shape = (r <= outer).astype(np.float64)
        elif variant == 1:  # filled square
            shape = (np.maximum(np.abs(yy - cy), np.abs(xx - cx)) <= 0.85 * outer).astype(np.float64)
        elif variant == 2:  # annulus
            r = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
            shape = ((r <= outer) & (r >= 0.55 * outer)).astype(np.float64)
        else:  # square frame
            d = np.maximum(np.abs(yy - cy), np.abs(xx - cx))
            shape = ((d <= 0.85 * outer) & (d >= 0.5 * outer)).astype(np.float64)
        val = 0.10 + 0.80 * shape
        out[i, 0] = val
        out[i, 1] = val
        out[i, 2] = val
    return out


def _gradient(rng: np.random.Generator, n: int, s: int, variant: int) -> np.ndarray:
    yy, xx = _grid(s)
    out = np.empty((n, 3, s, s))
    for i in range(n):
        ramp = (xx if variant in (0, 2) else yy) / (s - 1)
        if variant >= 2:
            ramp = 1.0 - ramp
        ramp = ramp * rng.uniform(0.85, 1.0) + rng.uniform(0.0, 0.05)
        out[i, 0] = 0.20 + 0.75 * ramp
        out[i, 1] = 0.15 + 0.55 * ramp
        out[i, 2] = 0.35 + 0.60 * ramp
    return out


_GENERATORS = (_blobs, _stripes, _checker, _rings, _gradient)


def make_synthetic_task(
    archetype_id: int,
    n_per_class: int,
    seed: int,
    image_size: int = 16,
    *,
    role: str = ROLE_LIFELONG,
    task_id: str | None = None,
    variant_pair: tuple[int, int] | None = None,
) -> Task:
    """Build one balanced task from a procedural archetype.

    variant_pair picks (label-0 variant in 0..1, label-1 variant in 2..3);
    by default it is sampled from the task seed.
    """
    if not 0 <= archetype_id < len(_GENERATORS):
        raise InputError(f"unknown archetype {archetype_id}; have 0..{len(_GENERATORS) - 1}")
    if n_per_class < 1:
        raise InputError("n_per_class must be at least 1")
    name = ARCHETYPE_NAMES[archetype_id]
    rng = rng_stream(seed, "synthetic", archetype_id, image_size, n_per_class)
    if variant_pair is None:
        variant_pair = (int(rng.integers(0, 2)), int(2 + rng.integers(0, 2)))
    va, vb = variant_pair
    if va not in (0, 1) or vb not in (2, 3):
        raise InputError(f"variant_pair must pair one of (0, 1) with one of (2, 3), got {variant_pair}")
    gen = _GENERATORS[archetype_id]
    imgs = np.concatenate([gen(rng, n_per_class, image_size, va), gen(rng, n_per_class, image_size, vb)])
    labels = np.concatenate([np.zeros(n_per_class, dtype=np.uint8), np.ones(n_per_class, dtype=np.uint8)])
    imgs += rng.uniform(-_NOISE, _NOISE, size=imgs.shape)
    u8 = np.round(np.clip(imgs, 0.0, 1.0) * 255.0).astype(np.uint8)
    order = rng.permutation(len(labels))
    names = VARIANT_NAMES[archetype_id]
    return Task(
        task_id=task_id or f"syn{archetype_id}-s{seed}",
        role=role,
        images=u8[order].astype(np.float64) / 255.0,
        labels=labels[order],
        class_pair=(f"{name}/{names[va]}", f"{name}/{names[vb]}"),
    )


def archetype_of(task: Task) -> int:
    """Recover the generating archetype from a synthetic task's class pair."""
    name = task.class_pair[0].split("/", 1)[0]
    try:
        return ARCHETYPE_NAMES.index(name)
    except ValueError:
        raise InputError(f"task {task.task_id} is not a synthetic archetype task") from None
