"""Per-node graphlet orbit counts.

Orbits 0-14 follow the usual numbering for graphlets on up to four nodes:

==  ===========================  ==  ===========================
0   edge endpoint                 8   4-cycle
1   end of a 3-path               9   paw, pendant node
2   centre of a 3-path            10  paw, degree-2 triangle node
3   triangle                      11  paw, degree-3 node
4   end of a 4-path               12  diamond, degree-2 node
5   middle of a 4-path            13  diamond, degree-3 node
6   3-star leaf                   14  4-clique
7   3-star centre
==  ===========================  ==  ===========================

Four-node orbits are obtained without enumerating subgraphs: a handful of
non-induced counts (built from degrees, common-neighbour counts ``A @ A`` and
4-cliques) are unmixed by inclusion-exclusion. Five-node orbits (15-72) come
from explicit enumeration of connected 5-node sets and are only offered for
graphs up to ``FIVE_NODE_LIMIT`` nodes. Their numbering is this module's own:
graphlets sorted by edge count then canonical adjacency code, orbits within a
graphlet by first appearance in canonical node order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from ..exceptions import CapabilityError
from ..graph import Graph

FIVE_NODE_LIMIT = 600
N_ORBITS = {4: 15, 5: 73}


@dataclass(frozen=True)
class OrbitDescriptor:
    per_node: np.ndarray

    @property
    def graph_vector(self) -> np.ndarray:
        if self.per_node.shape[0] == 0:
            return np.zeros(self.per_node.shape[1])
        return self.per_node.mean(axis=0)


def _row_sums(M) -> np.ndarray:
    return np.asarray(M.sum(axis=1)).ravel()


def _clique4_per_node(g: Graph) -> np.ndarray:
    A = g.adjacency().tocsr()
    out = np.zeros(g.n, dtype=np.int64)
    for x in range(g.n):
        nb = g.neighbors(x)
        if len(nb) < 3:
            continue
        S = A[nb][:, nb]
        out[x] = int((S @ S).multiply(S).sum()) // 6
    return out


def orbit_counts_4(g: Graph) -> np.ndarray:
    n = g.n
    if g.m == 0:
        # scipy fancy indexing with empty index arrays does not return a dense row
        return np.zeros((n, 15), dtype=np.int64)
    A = g.adjacency().astype(np.int64).tocsr()
    C = (A @ A).tocsr()
    d = g.degrees.astype(np.int64)
    src = np.repeat(np.arange(n), d)
    dst = g.indices
    cxa = np.asarray(C[src, dst]).ravel().astype(np.int64)

    def per_node(values):
        return np.bincount(src, weights=values, minlength=n).round().astype(np.int64)

    t = per_node(cxa) // 2
    out_a = d[dst] - 1 - cxa

    # sum over w != x of C(C[x,w], 2), then drop w == x and w in N(x)
    Cc = C.tocoo()
    pair_terms = Cc.data * (Cc.data - 1) // 2
    q3_all = np.bincount(Cc.row, weights=pair_terms, minlength=n).round().astype(np.int64)
    q3 = q3_all - d * (d - 1) // 2 - per_node(cxa * (cxa - 1) // 2)

    walk_terms = Cc.data * (d[Cc.col] - Cc.data)
    p_all = np.bincount(Cc.row, weights=walk_terms, minlength=n).round().astype(np.int64)
    p3 = p_all - per_node(cxa * (d[dst] - cxa))

    M = sp.csr_array((cxa - 1, dst, g.indptr), shape=(n, n))
    dsum = ((A @ M).multiply(A)).sum(axis=1)
    D = np.asarray(dsum).ravel().astype(np.int64) // 2

    k4 = _clique4_per_node(g)
    tri_nb = per_node(t[dst])

    o = np.zeros((n, 15), dtype=np.int64)
    o[:, 0] = d
    o[:, 1] = per_node(d[dst] - 1) - 2 * t
    o[:, 2] = d * (d - 1) // 2 - t
    o[:, 3] = t
    o[:, 14] = k4
    o[:, 13] = per_node(cxa * (cxa - 1) // 2) - 3 * k4
    o[:, 12] = D - 3 * k4
    o[:, 11] = t * (d - 2) - 2 * o[:, 13] - 3 * k4
    o[:, 7] = d * (d - 1) * (d - 2) // 6 - o[:, 11] - o[:, 13] - k4
    o[:, 9] = tri_nb - 2 * t - 2 * D + 3 * k4
    o[:, 6] = per_node(out_a * (out_a - 1) // 2) - o[:, 9]
    o[:, 4] = p3 - 2 * o[:, 9]
    o[:, 8] = q3 - o[:, 12]
    o[:, 10] = per_node(out_a * cxa) - 2 * o[:, 12]
    o[:, 5] = (d - 1) * per_node(out_a) - o[:, 10] - 2 * o[:, 8] - 2 * o[:, 12]
    return o


# -- five-node enumeration ----------------------------------------------------

_PAIRS5 = list(itertools.combinations(range(5), 2))


def _code(adj_pairs, perm):
    code = 0
    for bit, (i, j) in enumerate(_PAIRS5):
        a, b = perm[i], perm[j]
        if (min(a, b), max(a, b)) in adj_pairs:
            code |= 1 << bit
    return code


def _connected(mask: int) -> bool:
    adj = {i: set() for i in range(5)}
    for bit, (i, j) in enumerate(_PAIRS5):
        if mask >> bit & 1:
            adj[i].add(j)
            adj[j].add(i)
    seen, stack = {0}, [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == 5


@lru_cache(maxsize=1)
def _five_node_table() -> dict[int, tuple[int, ...]]:
    """Map each connected labelled 5-node adjacency code to per-position orbit ids."""
    perms = list(itertools.permutations(range(5)))
    canon_of, orbits_of = {}, {}
    for mask in range(1 << 10):
        if not _connected(mask):
            continue
        pairs = {p for bit, p in enumerate(_PAIRS5) if mask >> bit & 1}
        # relabelling node i -> perm[i]; canonical form is the minimum code
        codes = [_code({(min(perm[i], perm[j]), max(perm[i], perm[j])) for i, j in pairs}, range(5))
                 for perm in perms]
        canon = min(codes)
        canon_of[mask] = (canon, [p for p, c in zip(perms, codes) if c == canon])

    order = sorted({c for c, _ in canon_of.values()}, key=lambda c: (bin(c).count("1"), c))
    orbit_ids: dict[int, list[int]] = {}
    next_id = 15
    for c in order:
        # positions of the canonical graph grouped by its automorphisms
        pairs = {p for bit, p in enumerate(_PAIRS5) if c >> bit & 1}
        autos = [perm for perm in perms
                 if _code({(min(perm[i], perm[j]), max(perm[i], perm[j])) for i, j in pairs}, range(5)) == c]
        ids = [-1] * 5
        for pos in range(5):
            if ids[pos] < 0:
                for perm in autos:
                    ids[perm[pos]] = next_id
                next_id += 1
        orbit_ids[c] = ids
    assert next_id == 73
    table = {}
    for mask, (canon, perms_to_canon) in canon_of.items():
        perm = perms_to_canon[0]
        table[mask] = tuple(orbit_ids[canon][perm[i]] for i in range(5))
    return table


def _enumerate_connected_5(g: Graph):
    """Yield every connected 5-node subset once (ESU enumeration)."""
    nbrs = [set(g.neighbors(v).tolist()) for v in range(g.n)]

    def extend(sub, sub_nb, ext, v):
        if len(sub) == 5:
            yield sub
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            new = {u for u in nbrs[w] if u > v and u not in sub and u not in sub_nb}
            yield from extend(sub + (w,), sub_nb | nbrs[w], ext + sorted(new), v)

    for v in range(g.n):
        yield from extend((v,), nbrs[v] | {v}, sorted(u for u in nbrs[v] if u > v), v)


def _orbit_counts_5(g: Graph) -> np.ndarray:
    table = _five_node_table()
    out = np.zeros((g.n, 58), dtype=np.int64)
    nbrs = [set(g.neighbors(v).tolist()) for v in range(g.n)]
    for sub in _enumerate_connected_5(g):
        mask = 0
        for bit, (i, j) in enumerate(_PAIRS5):
            if sub[j] in nbrs[sub[i]]:
                mask |= 1 << bit
        for pos, orbit in enumerate(table[mask]):
            out[sub[pos], orbit - 15] += 1
    return out


def orbit_counts(g: Graph, max_size: int = 4) -> OrbitDescriptor:
    if max_size not in (4, 5):
        raise ValueError("max_size must be 4 or 5")
    four = orbit_counts_4(g)
    if max_size == 4:
        return OrbitDescriptor(four)
    if g.n > FIVE_NODE_LIMIT:
        raise CapabilityError(
            f"5-node orbits are enumerated and limited to {FIVE_NODE_LIMIT} nodes (graph has {g.n}); "
            "use max_size=4")
    return OrbitDescriptor(np.hstack([four, _orbit_counts_5(g)]))
