"""Anchor-based nearest-neighbour classification with a per-class k."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def dynamic_k(count: int) -> int:
    """``max(1, round(sqrt(count)))`` capped at ``count``; ``round`` is half-to-even."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return min(count, max(1, round(math.sqrt(count))))


@dataclass
class AnchorIndex:
    embeddings: np.ndarray
    labels: list
    classes: list

    def __post_init__(self):
        self.embeddings = np.asarray(self.embeddings, dtype=np.float64)
        if self.embeddings.ndim != 2 or self.embeddings.shape[0] != len(self.labels):
            raise ValueError("need one label per anchor embedding")
        missing = [c for c in self.classes if c not in set(self.labels)]
        if missing:
            raise ValueError(f"classes without anchors: {missing}")
        unknown = set(self.labels) - set(self.classes)
        if unknown:
            raise ValueError(f"anchor labels not in class list: {sorted(map(str, unknown))}")
        labels = np.asarray(self.labels, dtype=object)
        self._rows = {c: self.embeddings[labels == c] for c in self.classes}

    @classmethod
    def build(cls, embeddings, labels, classes: Sequence | None = None) -> "AnchorIndex":
        labels = list(labels)
        classes = list(classes) if classes is not None else sorted(set(labels), key=str)
        return cls(np.asarray(embeddings, dtype=np.float64), labels, classes)

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    def counts(self) -> dict:
        return {c: len(self._rows[c]) for c in self.classes}

    def scores(self, h: np.ndarray) -> dict:
        """Per class: (mean of its k nearest anchor distances, nearest distance)."""
        h = np.asarray(h, dtype=np.float64)
        if h.shape != (self.dim,):
            raise ValueError(f"embedding has shape {h.shape}, index dimension is {self.dim}")
        out = {}
        for c in self.classes:
            d = np.sort(np.linalg.norm(self._rows[c] - h, axis=1))
            k = dynamic_k(len(d))
            out[c] = (float(d[:k].mean()), float(d[0]))
        return out


def classify(h, idx: AnchorIndex):
    """Class with the lowest mean distance to its ``dynamic_k`` nearest anchors.

    Ties go to the smaller nearest-anchor distance, then to class order.
    """
    scores = idx.scores(h)
    best = min(range(len(idx.classes)), key=lambda i: (*scores[idx.classes[i]], i))
    return idx.classes[best], {c: s[0] for c, s in scores.items()}


def classify_many(H, idx: AnchorIndex) -> list:
    return [classify(h, idx)[0] for h in np.asarray(H, dtype=np.float64)]


@dataclass
class ConfusionMatrix:
    classes: list
    percent: np.ndarray  # rows: true class, columns: predicted class
    counts: np.ndarray

    def row(self, cls) -> dict:
        i = self.classes.index(cls)
        return dict(zip(self.classes, self.percent[i].tolist()))

    def diagonal(self) -> dict:
        return {c: float(self.percent[i, i]) for i, c in enumerate(self.classes)}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["true"] + [str(c) for c in self.classes])
            for c, row in zip(self.classes, self.percent):
                w.writerow([str(c)] + [format(float(x), ".17g") for x in row])


def confusion_matrix(pred: Sequence, truth: Sequence, classes: Sequence) -> ConfusionMatrix:
    """Row-normalised percentages; a class absent from ``truth`` gets a zero row."""
    if len(pred) != len(truth):
        raise ValueError("pred and truth differ in length")
    classes = list(classes)
    pos = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for p, t in zip(pred, truth):
        if p not in pos or t not in pos:
            raise ValueError(f"unknown label {p if p not in pos else t!r}")
        counts[pos[t], pos[p]] += 1
    totals = counts.sum(axis=1, keepdims=True)
    percent = np.divide(100.0 * counts, totals, out=np.zeros(counts.shape), where=totals > 0)
    return ConfusionMatrix(classes, percent, counts)
