"""Neighbourhood subgraph pairwise distance features.

For each node ``u`` and radius ``r`` the ball of radius ``r`` around ``u`` is
given a 64-bit label by rooted colour refinement: nodes start coloured by
(distance to root, degree in the full graph), then ``r + 2`` rounds replace
each colour by a hash of itself and the multiset of neighbour colours inside
the ball. Every node pair at distance ``d <= d_max`` (including ``d = 0``)
contributes one count to the feature ``(r, d, {label(u), label(v)})``.

Multisets are hashed as wrapping sums of mixed values, so labels are exactly
invariant under relabelling of the graph.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csgraph

from ..graph import Graph

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)
_CHUNK_CELLS = 4_000_000


def _splitmix(x: np.ndarray) -> np.ndarray:
    z = np.atleast_1d(np.asarray(x, dtype=np.uint64)) + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _combine(*parts) -> np.ndarray:
    h = _splitmix(np.uint64(len(parts)))
    for p in parts:
        h = _splitmix(h ^ _splitmix(np.asarray(p, dtype=np.uint64)))
    return h


def all_pairs_hops(g: Graph) -> np.ndarray:
    """Hop distances as int64, with -1 for unreachable pairs."""
    dist = csgraph.shortest_path(g.adjacency(), method="D", unweighted=True)
    out = np.full(dist.shape, -1, dtype=np.int64)
    finite = np.isfinite(dist)
    out[finite] = dist[finite].astype(np.int64)
    return out


def rooted_ball_labels(g: Graph, hops: np.ndarray, r: int) -> np.ndarray:
    n = g.n
    deg = g.degrees
    ea, eb = g.edges[:, 0], g.edges[:, 1]
    labels = np.empty(n, dtype=np.uint64)
    step = max(1, _CHUNK_CELLS // max(n, g.m, 1))
    for lo in range(0, n, step):
        roots = np.arange(lo, min(n, lo + step))
        h = hops[roots]
        within = (h >= 0) & (h <= r)
        root_i, node_v = np.nonzero(within)
        size = len(root_i)
        pos = np.full(within.shape, -1, dtype=np.int64)
        pos[root_i, node_v] = np.arange(size)

        both = within[:, ea] & within[:, eb]
        rr, ee = np.nonzero(both)
        pa, pb = pos[rr, ea[ee]], pos[rr, eb[ee]]
        src = np.concatenate([pa, pb])
        dst = np.concatenate([pb, pa])
        order = np.argsort(dst, kind="stable")
        src, dst = src[order], dst[order]
        counts = np.bincount(dst, minlength=size)
        starts = np.cumsum(counts) - counts
        has = counts > 0

        color = _combine(h[root_i, node_v], deg[node_v])
        for _ in range(r + 2):
            agg = np.zeros(size, dtype=np.uint64)
            if len(src):
                agg[has] = np.add.reduceat(_splitmix(color[src]), starts[has])
            color = _combine(color, agg)

        root_starts = np.searchsorted(root_i, np.arange(len(roots)))
        ball = np.add.reduceat(_splitmix(color), root_starts)
        root_color = color[pos[np.arange(len(roots)), roots]]
        labels[roots] = _combine(np.full(len(roots), r), root_color, ball)
    return labels


def nspdk_features(g: Graph, r_max: int = 2, d_max: int = 3) -> dict[int, int]:
    """Sparse feature counts keyed by 64-bit hashes."""
    if r_max < 0 or d_max < 0:
        raise ValueError("r_max and d_max must be >= 0")
    if g.n == 0:
        return {}
    hops = all_pairs_hops(g)
    close = (hops >= 0) & (hops <= d_max)
    iu, ju = np.nonzero(np.triu(close))
    dd = hops[iu, ju]
    keys = []
    for r in range(r_max + 1):
        lab = rooted_ball_labels(g, hops, r)
        a, b = lab[iu], lab[ju]
        keys.append(_combine(np.full(len(iu), r), dd, np.minimum(a, b), np.maximum(a, b)))
    uniq, counts = np.unique(np.concatenate(keys), return_counts=True)
    return {int(k): int(c) for k, c in zip(uniq.tolist(), counts.tolist())}
