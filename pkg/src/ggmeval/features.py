"""Per-node topological input features for the graph embedder.

Columns are, in order: degree, neighbourhood chi-square, local clustering
coefficient, k-core number.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_graphs
from .graph import Graph

COLUMNS = ("degree", "chi2", "clustering", "kcore")
SCALINGS = ("raw", "log1p", "log1p_standardized")
_LOG_COLUMNS = [0, 1, 3]


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    scaling: str = "raw"

    @property
    def n(self) -> int:
        return self.values.shape[0]


def k_core_numbers(g: Graph) -> np.ndarray:
    """Core number of every node (Batagelj-Zaversnik bucket peeling, O(m))."""
    n = g.n
    deg = g.degrees.astype(np.int64).tolist()
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    indptr, indices = g.indptr.tolist(), g.indices.tolist()
    max_deg = max(deg)
    bin_start = [0] * (max_deg + 2)
    for d in deg:
        bin_start[d + 1] += 1
    for d in range(1, max_deg + 2):
        bin_start[d] += bin_start[d - 1]
    pos = [0] * n
    vert = [0] * n
    fill = bin_start[:]
    for v in range(n):
        pos[v] = fill[deg[v]]
        vert[pos[v]] = v
        fill[deg[v]] += 1
    for i in range(n):
        v = vert[i]
        for u in indices[indptr[v]:indptr[v + 1]]:
            du = deg[u]
            if du > deg[v]:
                # move u to the front of its bin, then shrink the bin
                pu, pw = pos[u], bin_start[du]
                w = vert[pw]
                if u != w:
                    vert[pu], vert[pw] = w, u
                    pos[u], pos[w] = pw, pu
                bin_start[du] += 1
                deg[u] = du - 1
    return np.asarray(deg, dtype=np.int64)


def triangle_counts(g: Graph) -> np.ndarray:
    A = g.adjacency()
    return np.asarray(((A @ A).multiply(A)).sum(axis=1)).ravel().astype(np.int64) // 2


def local_clustering(g: Graph) -> np.ndarray:
    deg = g.degrees.astype(np.float64)
    tri = triangle_counts(g).astype(np.float64)
    out = np.zeros(g.n)
    ok = deg >= 2
    out[ok] = 2.0 * tri[ok] / (deg[ok] * (deg[ok] - 1.0))
    return out


def chi_square_neighborhood(g: Graph) -> np.ndarray:
    """Spread of neighbour degrees around their own mean.

    ``sum_{u in N(v)} (deg(u) - kbar)^2 / kbar`` with ``kbar`` the mean
    neighbour degree of ``v``; isolated nodes get 0. Evaluated in integer
    arithmetic as ``(d * S2 - S1^2) / S1`` so regular graphs give exact zeros.
    """
    deg = g.degrees.astype(np.int64)
    A = g.adjacency()
    s1 = A @ deg
    s2 = A @ (deg * deg)
    out = np.zeros(g.n)
    ok = deg > 0
    out[ok] = (deg[ok] * s2[ok] - s1[ok] * s1[ok]) / s1[ok]
    return out


def node_features(g: Graph, scaling: str = "log1p_standardized") -> FeatureMatrix:
    """Stack the four feature columns.

    ``log1p`` maps degree, chi-square and k-core through ``ln(1 + x)``;
    ``log1p_standardized`` additionally z-scores every column within the graph
    (a constant column becomes zeros).
    """
    if scaling not in SCALINGS:
        raise ValueError(f"scaling must be one of {SCALINGS}")
    X = np.column_stack([
        g.degrees.astype(np.float64),
        chi_square_neighborhood(g),
        local_clustering(g),
        k_core_numbers(g).astype(np.float64),
    ]) if g.n else np.zeros((0, 4))
    if scaling != "raw":
        X[:, _LOG_COLUMNS] = np.log1p(X[:, _LOG_COLUMNS])
    if scaling == "log1p_standardized" and g.n:
        X = _zscore(X)
    return FeatureMatrix(X, scaling)


def _zscore(X: np.ndarray) -> np.ndarray:
    # exactly rounded sums keep the result independent of row order
    n = X.shape[0]
    mean = np.array([math.fsum(col) / n for col in X.T])
    std = np.sqrt([math.fsum((col - mu) ** 2) / n for col, mu in zip(X.T, mean)])
    out = np.zeros_like(X)
    ok = std > 1e-12 * np.maximum(1.0, np.abs(mean))
    out[:, ok] = (X[:, ok] - mean[ok]) / std[ok]
    return out


def write_feature_csv(fm: FeatureMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "degree", "chi2", "clustering", "kcore"])
        for i, row in enumerate(fm.values):
            w.writerow([i] + [format(float(x), ".17g") for x in row])


class NodeFeatureTransformer(TransformerMixin, BaseEstimator):
    """Map graphs to per-node feature matrices.

    With ``scaling="log1p_global"`` the log-transformed columns are z-scored
    with means and deviations pooled over every node of the graphs seen in
    ``fit``; the other modes are stateless and call :func:`node_features`.
    """

    def __init__(self, scaling="log1p_standardized"):
        self.scaling = scaling

    def fit(self, X, y=None):
        graphs = check_graphs(X)
        if self.scaling == "log1p_global":
            stacked = np.vstack([node_features(g, "log1p").values for g in graphs if g.n])
            self.mean_ = stacked.mean(axis=0)
            self.scale_ = stacked.std(axis=0)
            self.scale_[self.scale_ < 1e-12] = 1.0
        elif self.scaling not in SCALINGS:
            raise ValueError(f"scaling must be one of {SCALINGS + ('log1p_global',)}")
        self.n_features_out_ = len(COLUMNS)
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        graphs = check_graphs(X)
        if self.scaling == "log1p_global":
            return [(node_features(g, "log1p").values - self.mean_) / self.scale_ for g in graphs]
        return [node_features(g, self.scaling).values for g in graphs]

    def get_feature_names_out(self, input_features=None):
        return np.asarray(COLUMNS, dtype=object)
