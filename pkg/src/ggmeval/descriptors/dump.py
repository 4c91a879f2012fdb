"""JSON-lines dumps of per-graph descriptors."""

from __future__ import annotations

import json
from typing import Sequence

from ..graph import Graph
from .histograms import clustering_histogram, degree_histogram
from .nspdk import nspdk_features
from .orbits import orbit_counts
from .spectral import spectral_descriptor

KINDS = ("degree", "clustering", "orbits", "spectral", "nspdk")


def descriptor_payload(g: Graph, kind: str, *, max_degree: int | None = None, bins: int | None = None,
                       orbit_max_size: int = 4, r_max: int = 2, d_max: int = 3) -> dict:
    if kind == "degree":
        h = degree_histogram(g, max_degree if max_degree is not None else max(1, int(g.degrees.max(initial=0))))
    elif kind == "clustering":
        h = clustering_histogram(g, bins or 100)
    elif kind == "spectral":
        h = spectral_descriptor(g, bins or 200)
    elif kind == "orbits":
        d = orbit_counts(g, orbit_max_size)
        return {"per_node": d.per_node.tolist(), "graph_vector": d.graph_vector.tolist()}
    elif kind == "nspdk":
        # JSON keys must be strings; hashes are unsigned 64-bit integers
        return {str(k): v for k, v in sorted(nspdk_features(g, r_max, d_max).items())}
    else:
        raise ValueError(f"descriptor kind must be one of {KINDS}")
    return {"bins": h.bins.tolist(), "mass": h.mass.tolist()}


def write_descriptor_dump(path, graphs: Sequence[Graph], labels: Sequence[str], paths: Sequence[str],
                          kinds: Sequence[str] = KINDS, **options) -> None:
    """One JSON object per (graph, kind): ``{class, path, kind, payload}``."""
    with open(path, "w", encoding="utf-8") as fh:
        for g, label, p in zip(graphs, labels, paths):
            for kind in kinds:
                record = {"class": label, "path": p, "kind": kind,
                          "payload": descriptor_payload(g, kind, **options)}
                fh.write(json.dumps(record) + "\n")
