"""Deterministic, named RNG streams derived from one master seed.

Every random choice in the engine pulls from a stream addressed by a
structural path such as ``("pretrain", expert_index)`` or
``("step-shuffle", sequence_id, step, epoch)``.  Streams never encode the
run mode, so algorithm variants that perform the same structural work
consume identical randomness; mode-specific randomness (random expert
assignment in the baseline modes) lives in its own dedicated stream.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _tag_word(tag: object) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag) & 0xFFFFFFFF
    digest = hashlib.sha256(repr(tag).encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


def rng_stream(master_seed: int, *tags: object) -> np.random.Generator:
    """Return a PCG64 generator for the stream named by ``tags``.

    The same (master_seed, tags) pair always yields the same generator
    state, independent of call order anywhere else in the program.
    """
    key = tuple(_tag_word(t) for t in tags)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(master_seed), spawn_key=key))
