from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import local_clustering
from ..graph import Graph


@dataclass(frozen=True)
class Histogram:
    """Normalised histogram; ``mass`` is all zeros for an empty sample."""

    bins: np.ndarray
    mass: np.ndarray
    kind: str

    @property
    def bin_width(self) -> float:
        return float(self.bins[1] - self.bins[0])

    def same_bins(self, other: "Histogram") -> bool:
        return self.bins.shape == other.bins.shape and np.array_equal(self.bins, other.bins)


def _normalise(counts: np.ndarray) -> np.ndarray:
    total = counts.sum()
    return counts / total if total > 0 else counts.astype(np.float64)


def degree_histogram(g: Graph, max_bin: int) -> Histogram:
    """Degree distribution on integer bins ``0..max_bin``; larger degrees land in the last bin."""
    if max_bin < 1:
        raise ValueError("max_bin must be >= 1")
    counts = np.bincount(np.minimum(g.degrees, max_bin), minlength=max_bin + 1).astype(np.float64)
    return Histogram(np.arange(max_bin + 2, dtype=np.float64), _normalise(counts), "degree")


def clustering_histogram(g: Graph, bins: int = 100) -> Histogram:
    if bins < 1:
        raise ValueError("bins must be >= 1")
    counts, edges = np.histogram(local_clustering(g), bins=bins, range=(0.0, 1.0))
    return Histogram(edges, _normalise(counts.astype(np.float64)), "clustering")
