"""Deterministic seed derivation for fanning experiments out of one master seed."""

from __future__ import annotations

import zlib

import numpy as np


def derive_seed(master: int, *tags: int | str) -> int:
    """Derive a child seed from a master seed and a stable tag path.

    The same (master, tags) always yields the same child; distinct tag paths
    give statistically independent streams.
    """
    keys = [int(master) & 0xFFFFFFFF]
    for tag in tags:
        if isinstance(tag, (int, np.integer)):
            keys.append(int(tag) & 0xFFFFFFFF)
        else:
            keys.append(zlib.crc32(str(tag).encode("utf-8")))
    return int(np.random.SeedSequence(keys).generate_state(1, dtype=np.uint64)[0])
