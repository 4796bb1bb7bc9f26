from .cifar import CifarData, encode_records, load_cifar100, make_task
from .container import parse_task, read_task, task_bytes, write_task
from .sequences import build_cifar_sequences, build_synthetic_sequences
from .synthetic import ARCHETYPE_NAMES, archetype_of, make_synthetic_task
from .task import ROLE_INIT, ROLE_LIFELONG, Sequence, Task, split_indices

__all__ = [
    "CifarData",
    "encode_records",
    "load_cifar100",
    "make_task",
    "parse_task",
    "read_task",
    "task_bytes",
    "write_task",
    "build_cifar_sequences",
    "build_synthetic_sequences",
    "ARCHETYPE_NAMES",
    "archetype_of",
    "make_synthetic_task",
    "ROLE_INIT",
    "ROLE_LIFELONG",
    "Sequence",
    "Task",
    "split_indices",
]
