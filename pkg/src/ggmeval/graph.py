"""Simple undirected graphs on dense integer ids, edge-list I/O and traversals.

A :class:`Graph` is immutable once built. Edges are stored canonically as an
``(m, 2)`` integer array of pairs ``u < v`` in lexicographic order, and the
adjacency is kept in CSR form (``indptr``/``indices``) with each neighbour
list sorted ascending.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .exceptions import FormatError

EXACT_DISTANCE_LIMIT = 5000
_BFS_CHUNK = 256


class Graph:
    __slots__ = ("n", "edges", "indptr", "indices", "_adj")

    def __init__(self, n: int, edges: np.ndarray):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.n = int(n)
        self.edges = edges
        edges.setflags(write=False)
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        order = np.lexsort((dst, src))
        self.indices = dst[order]
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=self.indptr[1:])
        self.indices.setflags(write=False)
        self.indptr.setflags(write=False)
        self._adj = None

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edge_set(self) -> set:
        return {(int(u), int(v)) for u, v in self.edges}

    def adjacency(self) -> sp.csr_array:
        """Symmetric 0/1 adjacency matrix (cached)."""
        if self._adj is None:
            data = np.ones(len(self.indices), dtype=np.int64)
            self._adj = sp.csr_array((data, self.indices, self.indptr), shape=(self.n, self.n))
        return self._adj

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def _canonical_edges(pairs: np.ndarray) -> np.ndarray:
    if len(pairs) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    keep = lo != hi
    canon = np.stack([lo[keep], hi[keep]], axis=1)
    if len(canon) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    return np.unique(canon, axis=0)


def from_edge_list(pairs: Iterable[Sequence[int]], n_hint: int | None = None) -> Graph:
    """Build a canonical graph from node-id pairs.

    Self-loops are dropped and duplicate (or reversed) pairs merged. The node
    count is ``max id + 1``, or ``n_hint`` when that is larger.
    """
    arr = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs)
    if arr.size == 0:
        arr = np.zeros((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FormatError("edge list must be a sequence of (u, v) pairs")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.mod(arr, 1) == 0):
            raise FormatError("node ids must be integers")
    arr = arr.astype(np.int64)
    if len(arr) and arr.min() < 0:
        raise FormatError(f"negative node id {int(arr.min())}")
    n = int(arr.max()) + 1 if len(arr) else 0
    if n_hint is not None:
        if n_hint < n:
            raise ValueError(f"n_hint={n_hint} is smaller than max node id + 1 = {n}")
        n = int(n_hint)
    return Graph(n, _canonical_edges(arr))


def empty_graph(n: int) -> Graph:
    return Graph(n, np.zeros((0, 2), dtype=np.int64))


def permute(g: Graph, perm: Sequence[int]) -> Graph:
    """Relabel node ``v`` as ``perm[v]``."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(g.n)):
        raise ValueError("perm must be a permutation of range(n)")
    return from_edge_list(perm[g.edges], n_hint=g.n)


def disjoint_union(*graphs: Graph) -> Graph:
    parts, offset = [], 0
    for g in graphs:
        parts.append(g.edges + offset)
        offset += g.n
    edges = np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
    return from_edge_list(edges, n_hint=offset)


def induced_subgraph(g: Graph, nodes: Sequence[int]) -> Graph:
    """Subgraph on ``nodes`` relabelled to ``0..len(nodes)-1`` in the given order."""
    nodes = np.asarray(nodes, dtype=np.int64)
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[nodes] = np.arange(len(nodes))
    e = pos[g.edges]
    e = e[(e[:, 0] >= 0) & (e[:, 1] >= 0)]
    return from_edge_list(e, n_hint=len(nodes))


# -- edge-list text format -------------------------------------------------

def parse_edge_list(lines: Iterable[str], source: str = "<text>") -> tuple[Graph, list[str] | None]:
    """Parse ``u v`` lines; ``#``/``%`` comments and blank lines are skipped.

    Integer ids are used as given. If any id is not an integer, all labels are
    relabelled densely in first-appearance order and the label list is
    returned alongside the graph (otherwise ``None``). A ``# nodes: N``
    comment, as written by :func:`write_edge_list`, sets the node count.
    """
    rows: list[tuple[str, str]] = []
    n_hint = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line[0] in "#%":
            body = line[1:].strip()
            if body.startswith("nodes:"):
                try:
                    n_hint = int(body.split(":", 1)[1])
                except ValueError:
                    raise FormatError(f"{source}:{lineno}: bad node-count header")
            continue
        parts = line.split()
        if len(parts) < 2:
            raise FormatError(f"{source}:{lineno}: expected 'u v', got {line!r}")
        rows.append((parts[0], parts[1]))

    try:
        ids = [(int(a), int(b)) for a, b in rows]
    except ValueError:
        ids = None
    if ids is not None:
        for lineno, (a, b) in enumerate(ids, start=1):
            if a < 0 or b < 0:
                raise FormatError(f"{source}: negative node id in pair {lineno}")
        if n_hint is not None and ids:
            n_hint = max(n_hint, max(max(p) for p in ids) + 1)
        return from_edge_list(ids, n_hint=n_hint), None

    labels: dict[str, int] = {}
    pairs = []
    for a, b in rows:
        pairs.append((labels.setdefault(a, len(labels)), labels.setdefault(b, len(labels))))
    return from_edge_list(pairs, n_hint=len(labels)), list(labels)


def read_edge_list(path: str | os.PathLike) -> Graph:
    with open(path, encoding="utf-8") as fh:
        g, _ = parse_edge_list(fh, source=str(path))
    return g


def write_edge_list(g: Graph, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nodes: {g.n}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


# -- traversals -------------------------------------------------------------

@dataclass(frozen=True)
class ComponentPartition:
    labels: np.ndarray
    sizes: np.ndarray

    @property
    def count(self) -> int:
        return len(self.sizes)


def connected_components(g: Graph) -> ComponentPartition:
    """Component labels (largest component gets label 0) and sizes, descending."""
    if g.n == 0:
        return ComponentPartition(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
    _, raw = csgraph.connected_components(g.adjacency(), directed=False)
    sizes = np.bincount(raw)
    # stable order: by size descending, then by smallest member
    first = np.full(len(sizes), g.n, dtype=np.int64)
    np.minimum.at(first, raw, np.arange(g.n))
    order = np.lexsort((first, -sizes))
    relabel = np.empty_like(order)
    relabel[order] = np.arange(len(order))
    return ComponentPartition(relabel[raw].astype(np.int64), sizes[order].astype(np.int64))


def largest_component_nodes(g: Graph) -> np.ndarray:
    part = connected_components(g)
    return np.flatnonzero(part.labels == 0)


def bfs_eccentricity_sample(g: Graph, sources: Sequence[int], restrict_to_lcc: bool = True) -> tuple[int, float]:
    """Longest and mean shortest-path distance from ``sources``.

    Pairs are (source, target) with target reachable and distinct from the
    source; with ``restrict_to_lcc`` targets are limited to the largest
    component. When ``sources`` covers the whole component the result is the
    exact diameter and average path length.
    """
    sources = np.asarray(sources, dtype=np.int64)
    if len(sources) == 0:
        raise ValueError("sources must be non-empty")
    if sources.min() < 0 or sources.max() >= g.n:
        raise ValueError("source node outside graph")
    targets = None
    if restrict_to_lcc:
        lcc = largest_component_nodes(g)
        mask = np.zeros(g.n, dtype=bool)
        mask[lcc] = True
        if not mask[sources].all():
            raise ValueError("source node outside the largest connected component")
        targets = mask

    longest, total, count = 0, 0.0, 0
    adj = g.adjacency()
    for start in range(0, len(sources), _BFS_CHUNK):
        chunk = sources[start:start + _BFS_CHUNK]
        dist = csgraph.shortest_path(adj, method="D", unweighted=True, indices=chunk)
        if targets is not None:
            dist = dist[:, targets]
        finite = dist[np.isfinite(dist) & (dist > 0)]
        if finite.size:
            longest = max(longest, int(finite.max()))
            total += float(finite.sum())
            count += finite.size
    return longest, (total / count if count else 0.0)


def distance_sources(g: Graph, rng: np.random.Generator | None = None) -> np.ndarray:
    """Nodes of the largest component to BFS from: all of them up to
    ``EXACT_DISTANCE_LIMIT``, else a sample of ``max(100, ceil(sqrt(|LCC|)))``."""
    lcc = largest_component_nodes(g)
    if len(lcc) <= EXACT_DISTANCE_LIMIT:
        return lcc
    rng = rng if rng is not None else np.random.default_rng(0)
    k = max(100, math.ceil(math.sqrt(len(lcc))))
    return np.sort(rng.choice(lcc, size=k, replace=False))
