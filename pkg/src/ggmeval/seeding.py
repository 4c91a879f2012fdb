"""Seed derivation.

Every random stage draws from ``numpy.random.default_rng(derive_seed(master,
stage, index))`` where the derived seed is the first 8 bytes (little endian)
of ``blake2b(f"{master}/{stage}/{index}")``. Re-running one stage or one graph
therefore reproduces it without replaying anything upstream.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master: int, stage: str, index: int = 0) -> int:
    digest = hashlib.blake2b(f"{int(master)}/{stage}/{int(index)}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
