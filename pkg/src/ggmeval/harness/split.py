from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..exceptions import SplitError


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.64
    val_frac: float = 0.16
    test_frac: float = 0.20
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        fr = (self.train_frac, self.val_frac, self.test_frac)
        if min(fr) <= 0 or abs(sum(fr) - 1.0) > 1e-9:
            raise ValueError("split fractions must be positive and sum to 1")


def _group_sizes(n: int, spec: SplitSpec) -> tuple[int, int, int]:
    # every part gets at least one graph; train takes the remainder
    n_test = max(1, round(n * spec.test_frac))
    n_val = max(1, round(n * spec.val_frac))
    return n - n_val - n_test, n_val, n_test


def split_indices(labels: Sequence, spec: SplitSpec = SplitSpec()) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Shuffle each class with the split seed and cut it into train/val/test.

    Classes are processed in sorted order so the result only depends on the
    labels and the seed.
    """
    labels = list(labels)
    rng = np.random.default_rng(spec.seed)
    groups = {}
    if spec.stratified:
        for c in sorted(set(labels), key=str):
            groups[c] = [i for i, y in enumerate(labels) if y == c]
    else:
        groups[None] = list(range(len(labels)))
    parts = ([], [], [])
    for c, idx in groups.items():
        if len(idx) < 3:
            name = "dataset" if c is None else f"class {c!r}"
            raise SplitError(f"{name} has {len(idx)} graph(s); a split needs at least 3")
        order = np.asarray(idx)[rng.permutation(len(idx))]
        n_train, n_val, _ = _group_sizes(len(idx), spec)
        parts[0].extend(order[:n_train].tolist())
        parts[1].extend(order[n_train:n_train + n_val].tolist())
        parts[2].extend(order[n_train + n_val:].tolist())
    return tuple(np.array(sorted(p), dtype=np.int64) for p in parts)
