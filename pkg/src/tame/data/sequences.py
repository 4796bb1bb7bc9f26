"""Initialization tasks plus lifelong sequences, from CIFAR-100 or from the
procedural archetypes.

CIFAR class pairs are sampled without replacement; the classes used by the
initialization tasks never appear in any lifelong task. Synthetic lifelong
tasks intentionally reuse the initialization archetypes (expert routing is
only meaningful if incoming tasks resemble some initialization task) but are
fresh instances drawn with disjoint seeds.
"""

from __future__ import annotations

import numpy as np

from ..errors import InputError
from ..rng import rng_stream
from .cifar import CifarData, make_task
from .synthetic import ARCHETYPE_NAMES, make_synthetic_task
from .task import ROLE_INIT, Sequence, Task


def _derive_seed(master_seed: int, *tags) -> int:
    return int(rng_stream(master_seed, *tags).integers(0, 2**31 - 1))


def build_synthetic_sequences(
    n_sequences: int,
    seed: int,
    *,
    n_experts: int = 5,
    tasks_per_sequence: int = 10,
    init_per_class: int = 200,
    task_per_class: int = 100,
    image_size: int = 16,
) -> tuple[list[Task], list[Sequence]]:
    if n_experts > len(ARCHETYPE_NAMES):
        raise InputError(f"only {len(ARCHETYPE_NAMES)} archetypes available, asked for {n_experts} experts")
    if n_sequences < 0 or tasks_per_sequence < 1:
        raise InputError("n_sequences must be >= 0 and tasks_per_sequence >= 1")
    init_tasks = [
        make_synthetic_task(
            i,
            init_per_class,
            _derive_seed(seed, "init-task", i),
            image_size,
            role=ROLE_INIT,
            task_id=f"init-{ARCHETYPE_NAMES[i]}",
        )
        for i in range(n_experts)
    ]
    sequences = []
    for q in range(n_sequences):
        pick = rng_stream(seed, "sequence-archetypes", q)
        tasks = []
        for t in range(tasks_per_sequence):
            arch = int(pick.integers(0, n_experts))
            tseed = _derive_seed(seed, "lifelong-task", q, t)
            tasks.append(
                make_synthetic_task(
                    arch,
                    task_per_class,
                    tseed,
                    image_size,
                    task_id=f"seq{q + 1}-t{t + 1}-{ARCHETYPE_NAMES[arch]}",
                )
            )
        sequences.append(Sequence(sequence_id=f"seq{q + 1}", tasks=tasks))
    return init_tasks, sequences


def build_cifar_sequences(
    dataset: CifarData,
    n_sequences: int,
    seed: int,
    *,
    n_experts: int = 5,
    tasks_per_sequence: int = 10,
    init_per_class: int = 200,
    task_per_class: int = 100,
    n_classes: int = 100,
) -> tuple[list[Task], list[Sequence]]:
    if n_sequences < 0 or tasks_per_sequence < 1:
        raise InputError("n_sequences must be >= 0 and tasks_per_sequence >= 1")
    needed = 2 * n_experts + 2 * tasks_per_sequence
    if needed > n_classes:
        raise InputError(
            f"{n_experts} init pairs plus {tasks_per_sequence} lifelong pairs need {needed} classes, "
            f"dataset has {n_classes}"
        )
    rng = rng_stream(seed, "cifar-pairs")
    init_classes = rng.choice(n_classes, size=2 * n_experts, replace=False)
    remaining = np.setdiff1d(np.arange(n_classes), init_classes)
    init_tasks = []
    for i in range(n_experts):
        a, b = int(init_classes[2 * i]), int(init_classes[2 * i + 1])
        init_tasks.append(
            make_task(
                dataset,
                a,
                b,
                init_per_class,
                _derive_seed(seed, "init-task", i),
                role=ROLE_INIT,
                task_id=f"init-{a}-{b}",
            )
        )
    sequences = []
    for q in range(n_sequences):
        cls = rng_stream(seed, "sequence-classes", q).choice(
            remaining, size=2 * tasks_per_sequence, replace=False
        )
        tasks = []
        for t in range(tasks_per_sequence):
            a, b = int(cls[2 * t]), int(cls[2 * t + 1])
            tasks.append(
                make_task(
                    dataset,
                    a,
                    b,
                    task_per_class,
                    _derive_seed(seed, "lifelong-task", q, t),
                    task_id=f"seq{q + 1}-t{t + 1}-{a}-{b}",
                )
            )
        sequences.append(Sequence(sequence_id=f"seq{q + 1}", tasks=tasks))
    return init_tasks, sequences
