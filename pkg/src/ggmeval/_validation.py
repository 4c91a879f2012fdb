"""Input coercion shared by the estimator-style entry points."""

from __future__ import annotations

import numpy as np

from .graph import Graph, from_edge_list


def as_graph(obj) -> Graph:
    """Coerce a :class:`Graph`, a networkx-like graph or an edge array."""
    if isinstance(obj, Graph):
        return obj
    if hasattr(obj, "nodes") and hasattr(obj, "edges") and hasattr(obj, "number_of_nodes"):
        if getattr(obj, "is_directed", lambda: False)():
            raise ValueError("directed graphs are not supported")
        index = {v: i for i, v in enumerate(obj.nodes())}
        pairs = [(index[u], index[v]) for u, v in obj.edges()]
        return from_edge_list(pairs, n_hint=len(index))
    arr = np.asarray(obj)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return from_edge_list(arr)
    raise TypeError(f"cannot interpret {type(obj).__name__} as a graph")


def check_graphs(X) -> list[Graph]:
    if isinstance(X, Graph):
        raise TypeError("expected a sequence of graphs, got a single Graph")
    graphs = [as_graph(x) for x in X]
    if not graphs:
        raise ValueError("expected at least one graph")
    return graphs


def check_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != n:
        raise ValueError(f"expected {n} labels, got shape {y.shape}")
    return y
