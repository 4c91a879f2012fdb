"""Per-graph topological summaries and ensemble-level comparison tables."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from .features import k_core_numbers, local_clustering, triangle_counts
from .graph import Graph, bfs_eccentricity_sample, connected_components, distance_sources

PROPERTIES = ("assortativity", "density", "avg_clustering", "transitivity", "diameter", "apl",
              "n_components", "lcc_size", "slcc_size", "max_kcore")


@dataclass(frozen=True)
class TopoSummary:
    """``assortativity`` is None when every edge endpoint has the same degree."""

    assortativity: float | None
    density: float
    avg_clustering: float
    transitivity: float
    diameter: int
    apl: float
    n_components: int
    lcc_size: int
    slcc_size: int
    max_kcore: int

    def as_dict(self) -> dict:
        return asdict(self)


def degree_assortativity(g: Graph) -> float | None:
    if g.m == 0:
        return None
    deg = g.degrees.astype(np.float64)
    # both orientations of every edge
    x = np.concatenate([deg[g.edges[:, 0]], deg[g.edges[:, 1]]])
    y = np.concatenate([deg[g.edges[:, 1]], deg[g.edges[:, 0]]])
    xc = x - x.mean()
    var = float(xc @ xc)
    if var <= 0.0:
        return None
    return float(np.clip((xc @ (y - y.mean())) / var, -1.0, 1.0))


def topo_summary(g: Graph, rng: np.random.Generator | None = None) -> TopoSummary:
    """Diameter and average path length are measured on the largest component."""
    if g.n < 1:
        raise ValueError("graph must have at least one node")
    n = g.n
    deg = g.degrees
    tri = triangle_counts(g)
    triples = float((deg * (deg - 1) // 2).sum())
    part = connected_components(g)
    sources = distance_sources(g, rng)
    diameter, apl = bfs_eccentricity_sample(g, sources) if len(sources) > 1 else (0, 0.0)
    return TopoSummary(
        assortativity=degree_assortativity(g),
        density=2.0 * g.m / (n * (n - 1)) if n > 1 else 0.0,
        avg_clustering=float(local_clustering(g).mean()),
        transitivity=float(tri.sum()) / triples if triples else 0.0,
        diameter=int(diameter),
        apl=float(apl),
        n_components=part.count,
        lcc_size=int(part.sizes[0]),
        slcc_size=int(part.sizes[1]) if part.count > 1 else 0,
        max_kcore=int(k_core_numbers(g).max()),
    )


# -- ensemble comparison ------------------------------------------------------------

@dataclass(frozen=True)
class PropertyStats:
    mean: float
    median: float
    iqr: float
    count: int
    excluded: int


def _stats(values: Sequence[float | None]) -> PropertyStats:
    kept = np.array([v for v in values if v is not None], dtype=np.float64)
    excluded = len(values) - len(kept)
    if len(kept) == 0:
        return PropertyStats(math.nan, math.nan, math.nan, 0, excluded)
    q1, med, q3 = np.percentile(kept, [25, 50, 75])
    return PropertyStats(math.fsum(kept) / len(kept), float(med), float(q3 - q1), len(kept), excluded)


@dataclass(frozen=True)
class PropertyComparison:
    prop: str
    ref: PropertyStats
    gen: PropertyStats
    gap: float
    gap_over_iqr: float


@dataclass
class EnsembleComparison:
    rows: list  # PropertyComparison per property
    ref_values: list  # TopoSummary per graph
    gen_values: list
    label: str = ""

    def by_property(self) -> dict:
        return {r.prop: r for r in self.rows}

    def write_summary_csv(self, path, append: bool = False) -> None:
        header = ["class", "property", "ref_mean", "ref_median", "ref_iqr", "ref_excluded",
                  "gen_mean", "gen_median", "gen_iqr", "gen_excluded", "gap", "gap_over_iqr"]
        with open(path, "a" if append else "w", newline="") as fh:
            w = csv.writer(fh)
            if not append:
                w.writerow(header)
            for r in self.rows:
                w.writerow([self.label, r.prop, _fmt(r.ref.mean), _fmt(r.ref.median), _fmt(r.ref.iqr),
                            r.ref.excluded, _fmt(r.gen.mean), _fmt(r.gen.median), _fmt(r.gen.iqr),
                            r.gen.excluded, _fmt(r.gap), _fmt(r.gap_over_iqr)])

    def write_long_csv(self, path, append: bool = False) -> None:
        """One row per (ensemble, graph, property); undefined values are left empty."""
        with open(path, "a" if append else "w", newline="") as fh:
            w = csv.writer(fh)
            if not append:
                w.writerow(["class", "property", "ensemble", "graph_index", "value"])
            for ensemble, values in (("ref", self.ref_values), ("gen", self.gen_values)):
                for i, s in enumerate(values):
                    for prop in PROPERTIES:
                        v = getattr(s, prop)
                        w.writerow([self.label, prop, ensemble, i, "" if v is None else _fmt(v)])


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _gap_ratio(gap: float, iqr: float) -> float:
    # IQR of the reference ensemble is the yardstick; a zero spread makes any gap infinite
    if math.isnan(gap) or math.isnan(iqr):
        return math.nan
    if iqr > 0:
        return gap / iqr
    return 0.0 if gap == 0 else math.inf


def compare_summaries(ref: Sequence[TopoSummary], gen: Sequence[TopoSummary], label: str = "") -> EnsembleComparison:
    if not ref or not gen:
        raise ValueError("both ensembles must be non-empty")
    rows = []
    for f in fields(TopoSummary):
        rs = _stats([getattr(s, f.name) for s in ref])
        gs = _stats([getattr(s, f.name) for s in gen])
        gap = abs(rs.mean - gs.mean)
        rows.append(PropertyComparison(f.name, rs, gs, gap, _gap_ratio(gap, rs.iqr)))
    return EnsembleComparison(rows, list(ref), list(gen), label)


def compare_ensembles(ref: Sequence[Graph], gen: Sequence[Graph], label: str = "",
                      seed: int = 0) -> EnsembleComparison:
    """Mean, median and IQR of every property for both ensembles, plus the mean gap.

    ``gap_over_iqr`` divides the gap by the reference IQR. Undefined
    assortativity values are excluded and counted.
    """
    rng = np.random.default_rng(seed)
    return compare_summaries([topo_summary(g, rng) for g in ref], [topo_summary(g, rng) for g in gen], label)
