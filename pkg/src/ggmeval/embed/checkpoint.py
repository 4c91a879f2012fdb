"""JSON checkpoints holding dims, float64 weights, training config and seed.

Weights are stored as hex floats so a save/load round trip is bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import FormatError
from .model import EmbedderConfig, Params, check_params

FORMAT = "ggmeval-embedder"
VERSION = 1


@dataclass
class Checkpoint:
    config: EmbedderConfig
    params: Params
    train_config: dict = field(default_factory=dict)
    seed: int = 0
    classes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)


def _encode(a: np.ndarray) -> dict:
    return {"shape": list(a.shape), "hex": [float(x).hex() for x in a.ravel()]}


def _decode(d: dict) -> np.ndarray:
    return np.array([float.fromhex(x) for x in d["hex"]], dtype=np.float64).reshape(d["shape"])


def dumps(ck: Checkpoint) -> str:
    check_params(ck.params, ck.config)
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "config": ck.config.to_dict(),
        "train_config": ck.train_config,
        "seed": ck.seed,
        "classes": ck.classes,
        "extra": ck.extra,
        "params": {k: _encode(v) for k, v in sorted(ck.params.items())},
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def loads(text: str) -> Checkpoint:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"checkpoint is not valid JSON: {exc}") from exc
    if doc.get("format") != FORMAT:
        raise FormatError("not an embedder checkpoint")
    if doc.get("version") != VERSION:
        raise FormatError(f"unsupported checkpoint version {doc.get('version')}")
    cfg = EmbedderConfig(**doc["config"])
    params = {k: _decode(v) for k, v in doc["params"].items()}
    check_params(params, cfg)
    return Checkpoint(cfg, params, doc.get("train_config", {}), int(doc.get("seed", 0)),
                      list(doc.get("classes", [])), doc.get("extra", {}))


def save(ck: Checkpoint, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(ck))


def load(path) -> Checkpoint:
    with open(path) as fh:
        return loads(fh.read())
