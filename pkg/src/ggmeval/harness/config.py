"""Flat ``key = value`` experiment configuration.

One setting per line, ``#`` starts a comment, no nesting. Dotted names are
plain keys. Subjects (ensembles compared against a reference class) are
declared with ``subjects = a, b`` and described by ``subject.<name>.<field>``
keys; see :data:`SUBJECT_FIELDS`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from ..exceptions import FormatError
from ..generators import CORPUS_CLASSES


def _list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, default)
KEYS = {
    "seed": (int, 0),
    "out": (str, "run"),
    "threads": (int, 1),
    "corpus.manifest": (str, ""),
    "corpus.classes": (_list, CORPUS_CLASSES),
    "corpus.per_class": (int, 100),
    "corpus.nodes": (int, 300),
    "split.train": (float, 0.64),
    "split.val": (float, 0.16),
    "split.test": (float, 0.20),
    "split.stratified": (_bool, True),
    "features.scaling": (str, "log1p_standardized"),
    "model.hidden": (int, 8),
    "model.heads": (int, 4),
    "model.layers": (int, 3),
    "model.fc_hidden": (int, 8),
    "model.pooling": (str, "mean"),
    "train.lr": (float, 0.003),
    "train.weight_decay": (float, 5e-3),
    "train.margin": (float, 1.0),
    "train.max_epochs": (int, 200),
    "train.patience": (int, 20),
    "train.min_delta": (float, 1e-4),
    "train.triplets_per_epoch": (int, 200),
    "train.batch_size": (int, 25),
    "train.val_triplets": (int, 200),
    "mmd.sigma": (float, 1.0),
    "mmd.clustering_bins": (int, 100),
    "mmd.spectral_bins": (int, 200),
    "mmd.orbit_max_size": (int, 4),
    "mmd.nspdk_r": (int, 2),
    "mmd.nspdk_d": (int, 3),
    "mmd.metrics": (_list, ("degree", "clustering", "orbits", "spectral", "nspdk")),
    "subjects": (_list, ()),
}

# kind = rewire: fresh graphs of ``class`` and degree-preserving rewires of them
# kind = manifest: graphs listed in ``manifest`` against the test split of ``class``
SUBJECT_FIELDS = {
    "kind": (str, "rewire"),
    "class": (str, "nPSO"),
    "count": (int, 30),
    "swaps_per_edge": (float, 10.0),
    "manifest": (str, ""),
}


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        if key in self.values:
            return self.values[key]
        if key in KEYS:
            return KEYS[key][1]
        name, _, fld = key.partition(".")[2].partition(".")
        if key.startswith("subject.") and fld in SUBJECT_FIELDS:
            return SUBJECT_FIELDS[fld][1]
        raise KeyError(key)

    def set(self, key: str, raw) -> None:
        self.values[key] = _parse_value(key, raw) if isinstance(raw, str) else raw

    def subject(self, name: str) -> dict:
        return {f: self[f"subject.{name}.{f}"] for f in SUBJECT_FIELDS}

    def resolved(self) -> dict:
        """Every known key with its effective value, subjects included."""
        out = {k: self[k] for k in KEYS}
        for name in self["subjects"]:
            for f in SUBJECT_FIELDS:
                out[f"subject.{name}.{f}"] = self[f"subject.{name}.{f}"]
        return out

    def to_text(self) -> str:
        lines = []
        for k, v in sorted(self.resolved().items()):
            if isinstance(v, tuple):
                v = ", ".join(v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


def _parse_value(key: str, raw: str):
    if key in KEYS:
        parser = KEYS[key][0]
    elif key.startswith("subject."):
        parts = key.split(".")
        if len(parts) != 3 or parts[2] not in SUBJECT_FIELDS:
            raise FormatError(f"unknown subject key {key!r}")
        parser = SUBJECT_FIELDS[parts[2]][0]
    else:
        raise FormatError(f"unknown config key {key!r}")
    try:
        return parser(raw.strip())
    except ValueError as exc:
        raise FormatError(f"bad value for {key}: {exc}") from exc


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    cfg = ExperimentConfig()
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{source}:{line_no}: expected 'key = value'")
        key, raw = (x.strip() for x in line.split("=", 1))
        try:
            cfg.set(key, raw)
        except FormatError as exc:
            raise FormatError(f"{source}:{line_no}: {exc}") from exc
    for name in cfg["subjects"]:
        if cfg[f"subject.{name}.kind"] not in ("rewire", "manifest"):
            raise FormatError(f"{source}: subject {name!r} has unknown kind")
    return cfg


def read_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"config file {path} does not exist")
    return parse_config(path.read_text(encoding="utf-8"), str(path))
