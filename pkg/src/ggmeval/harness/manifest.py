"""Manifest CSV files listing edge-list graphs with their class labels."""

from __future__ import annotations

import csv
import os
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ..exceptions import FormatError
from ..graph import Graph, read_edge_list


@dataclass(frozen=True)
class ManifestRecord:
    path: str
    cls: str
    meta: str = ""


@dataclass
class Manifest:
    records: list
    base_dir: Path = field(default_factory=Path.cwd)

    @property
    def labels(self) -> list[str]:
        return [r.cls for r in self.records]

    def resolve(self, record: ManifestRecord) -> Path:
        p = Path(record.path)
        return p if p.is_absolute() else self.base_dir / p


def read_manifest(path) -> Manifest:
    """Parse a ``path,class[,meta]`` CSV; relative paths are taken from the manifest's folder."""
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"manifest {path} does not exist")
    records, seen = [], set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["path", "class"] or len(header) > 3 \
                or (len(header) == 3 and header[2].strip() != "meta"):
            raise FormatError(f"{path}: header must be 'path,class' or 'path,class,meta'")
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2 or len(row) > len(header):
                raise FormatError(f"{path}: row {row_no} has {len(row)} fields")
            gpath, cls = row[0].strip(), row[1].strip()
            if not gpath or not cls:
                raise FormatError(f"{path}: row {row_no} has an empty path or class")
            if gpath in seen:
                raise FormatError(f"{path}: row {row_no} repeats path {gpath}")
            seen.add(gpath)
            records.append(ManifestRecord(gpath, cls, row[2].strip() if len(row) > 2 else ""))
    return Manifest(records, path.parent)


def write_manifest(records: Sequence[ManifestRecord], path) -> None:
    with_meta = any(r.meta for r in records)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "class", "meta"] if with_meta else ["path", "class"])
        for r in records:
            w.writerow([r.path, r.cls, r.meta] if with_meta else [r.path, r.cls])


@dataclass
class Corpus:
    manifest: Manifest
    graphs: list
    labels: list

    def stats(self) -> dict:
        return corpus_stats(self.graphs, self.labels)


def load_manifest(path) -> Corpus:
    manifest = read_manifest(path)
    graphs = []
    for row_no, record in enumerate(manifest.records, start=2):
        file = manifest.resolve(record)
        if not file.is_file():
            raise FormatError(f"{path}: row {row_no}: graph file {record.path} not found")
        try:
            graphs.append(read_edge_list(file))
        except FormatError as exc:
            raise FormatError(f"{path}: row {row_no}: {exc}") from exc
    return Corpus(manifest, graphs, manifest.labels)


def corpus_stats(graphs: Sequence[Graph], labels: Sequence[str]) -> dict:
    """Per class: graph count and min/max of node and edge counts."""
    by_class = defaultdict(list)
    for g, y in zip(graphs, labels):
        by_class[y].append(g)
    out = {}
    for cls in sorted(by_class):
        ns = [g.n for g in by_class[cls]]
        ms = [g.m for g in by_class[cls]]
        out[cls] = {"count": len(ns), "nodes_min": min(ns), "nodes_max": max(ns),
                    "edges_min": min(ms), "edges_max": max(ms)}
    return out


def write_stats_csv(stats: dict, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["class", "count", "nodes_min", "nodes_max", "edges_min", "edges_max"])
        for cls, s in stats.items():
            w.writerow([cls, s["count"], s["nodes_min"], s["nodes_max"], s["edges_min"], s["edges_max"]])


def relative_to(path: Path, base: Path) -> str:
    return os.path.relpath(path, base)
