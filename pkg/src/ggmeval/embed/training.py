"""Triplet margin loss, AdamW and the early-stopping training loop."""

from __future__ import annotations

import copy
import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..exceptions import SamplingError, TrainingError
from ..graph import Graph
from .model import EmbedderConfig, GraphBatch, Params, backward, forward, init_params, make_batch

log = logging.getLogger(__name__)


def triplet_margin_loss(h_a, h_p, h_n, margin: float = 1.0) -> float:
    if margin < 0:
        raise ValueError("margin must be >= 0")
    d_ap = float(np.linalg.norm(np.asarray(h_a) - np.asarray(h_p)))
    d_an = float(np.linalg.norm(np.asarray(h_a) - np.asarray(h_n)))
    return max(0.0, d_ap - d_an + margin)


@dataclass(frozen=True)
class Triplet:
    anchor: int
    positive: int
    negative: int
    anchor_class: object
    negative_class: object


def sample_triplets(labels: Sequence, count: int, rng: np.random.Generator,
                    classes: Sequence | None = None) -> list[Triplet]:
    """Class-balanced triplets over indices into ``labels``.

    The anchor class is uniform over classes whatever their sizes; anchor and
    positive are two distinct members of it; the negative class is uniform
    over the remaining classes.
    """
    labels = list(labels)
    classes = list(classes) if classes is not None else sorted(set(labels), key=str)
    members = {c: [i for i, y in enumerate(labels) if y == c] for c in classes}
    for c in classes:
        if len(members[c]) < 2:
            raise SamplingError(f"class {c!r} has {len(members[c])} graph(s); triplets need at least 2")
    if len(classes) < 2:
        raise SamplingError("triplets need at least 2 classes")
    out = []
    K = len(classes)
    for _ in range(count):
        ci = int(rng.integers(K))
        pool = members[classes[ci]]
        a, p = rng.choice(len(pool), size=2, replace=False)
        cj = int(rng.integers(K - 1))
        cj += cj >= ci
        neg_pool = members[classes[cj]]
        n = int(rng.integers(len(neg_pool)))
        out.append(Triplet(pool[a], pool[p], neg_pool[n], classes[ci], classes[cj]))
    return out


def _safe_distance(diff: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row norms and their gradient wrt ``diff``; the gradient is 0 where the norm is 0."""
    d = np.sqrt((diff ** 2).sum(axis=1))
    unit = np.zeros_like(diff)
    nz = d > 0
    unit[nz] = diff[nz] / d[nz, None]
    return d, unit


def _batch_for(triplets: Sequence[Triplet], graphs, features, cfg) -> tuple[GraphBatch, np.ndarray]:
    used = sorted({i for t in triplets for i in (t.anchor, t.positive, t.negative)})
    where = {g: k for k, g in enumerate(used)}
    idx = np.array([[where[t.anchor], where[t.positive], where[t.negative]] for t in triplets])
    batch = make_batch([graphs[i] for i in used], [features[i] for i in used], cfg.in_features)
    return batch, idx


def _loss_terms(emb: np.ndarray, idx: np.ndarray, margin: float):
    ea, ep, en = emb[idx[:, 0]], emb[idx[:, 1]], emb[idx[:, 2]]
    d_ap, u_ap = _safe_distance(ea - ep)
    d_an, u_an = _safe_distance(ea - en)
    hinge = d_ap - d_an + margin
    return np.maximum(hinge, 0.0), hinge > 0, u_ap, u_an


def batch_loss(params: Params, triplets, graphs, features, cfg: EmbedderConfig, margin: float = 1.0) -> float:
    batch, idx = _batch_for(triplets, graphs, features, cfg)
    losses, *_ = _loss_terms(forward(params, batch, cfg), idx, margin)
    return float(losses.mean())


def loss_and_grad(params: Params, triplets, graphs, features, cfg: EmbedderConfig,
                  margin: float = 1.0) -> tuple[float, Params]:
    """Mean triplet loss over the batch and its exact gradient.

    Hinge terms sitting exactly on the kink count as inactive.
    """
    if not triplets:
        raise ValueError("empty triplet batch")
    batch, idx = _batch_for(triplets, graphs, features, cfg)
    emb, cache = forward(params, batch, cfg, keep_cache=True)
    losses, active, u_ap, u_an = _loss_terms(emb, idx, margin)
    w = active[:, None] / len(triplets)
    d_emb = np.zeros_like(emb)
    np.add.at(d_emb, idx[:, 0], w * (u_ap - u_an))
    np.add.at(d_emb, idx[:, 1], -w * u_ap)
    np.add.at(d_emb, idx[:, 2], w * u_an)
    return float(losses.mean()), backward(params, batch, cfg, cache, d_emb)


# -- optimiser ----------------------------------------------------------------------

@dataclass
class TrainState:
    params: Params
    m: Params
    v: Params
    step: int = 0
    best_val: float = float("inf")
    since_improvement: int = 0
    seed: int = 0

    @classmethod
    def fresh(cls, params: Params, seed: int = 0) -> "TrainState":
        zeros = {k: np.zeros_like(p) for k, p in params.items()}
        return cls(params, zeros, {k: z.copy() for k, z in zeros.items()}, seed=seed)


def adamw_step(state: TrainState, grads: Params, lr: float = 0.003, wd: float = 5e-3,
               beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> TrainState:
    """One AdamW update in place; weight decay scales the weights directly."""
    state.step += 1
    c1 = 1.0 - beta1 ** state.step
    c2 = 1.0 - beta2 ** state.step
    for k, p in state.params.items():
        g = grads[k]
        if g.shape != p.shape:
            raise ValueError(f"gradient for {k} has shape {g.shape}, expected {p.shape}")
        p *= 1.0 - lr * wd
        state.m[k] = beta1 * state.m[k] + (1.0 - beta1) * g
        state.v[k] = beta2 * state.v[k] + (1.0 - beta2) * g * g
        p -= lr * (state.m[k] / c1) / (np.sqrt(state.v[k] / c2) + eps)
    return state


# -- training loop ------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.003
    weight_decay: float = 5e-3
    margin: float = 1.0
    max_epochs: int = 200
    patience: int = 20
    min_delta: float = 1e-4
    triplets_per_epoch: int = 200
    batch_size: int = 25
    val_triplets: int = 200
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainResult:
    params: Params
    history: list = field(default_factory=list)
    best_epoch: int = -1
    initial_val_loss: float = float("nan")


def train(graphs: Sequence[Graph], features: Sequence[np.ndarray], labels: Sequence,
          val_graphs: Sequence[Graph], val_features: Sequence[np.ndarray], val_labels: Sequence,
          embed_cfg: EmbedderConfig, cfg: TrainConfig = TrainConfig()) -> TrainResult:
    """Fit embedder weights with early stopping on a fixed set of validation triplets.

    Returns the parameters from the epoch with the lowest validation loss.
    """
    if not len(graphs) or not len(val_graphs):
        raise ValueError("train and validation parts must be non-empty")
    rng = np.random.default_rng(cfg.seed)
    params = init_params(embed_cfg, int(rng.integers(2**63)))
    val_rng = np.random.default_rng(int(rng.integers(2**63)))
    result = TrainResult(copy.deepcopy(params))
    if cfg.max_epochs <= 0:
        return result
    val_trip = sample_triplets(val_labels, cfg.val_triplets, val_rng)

    state = TrainState.fresh(params, cfg.seed)
    state.best_val = batch_loss(params, val_trip, val_graphs, val_features, embed_cfg, cfg.margin)
    result.initial_val_loss = state.best_val
    for epoch in range(cfg.max_epochs):
        trips = sample_triplets(labels, cfg.triplets_per_epoch, rng)
        losses = []
        for lo in range(0, len(trips), cfg.batch_size):
            loss, grads = loss_and_grad(state.params, trips[lo:lo + cfg.batch_size], graphs, features,
                                        embed_cfg, cfg.margin)
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
                raise TrainingError(f"training diverged at epoch {epoch}", epoch=epoch)
            adamw_step(state, grads, cfg.lr, cfg.weight_decay)
            losses.append(loss)
        val = batch_loss(state.params, val_trip, val_graphs, val_features, embed_cfg, cfg.margin)
        if not np.isfinite(val):
            raise TrainingError(f"validation loss is not finite at epoch {epoch}", epoch=epoch)
        result.history.append({"epoch": epoch, "train_loss": float(np.mean(losses)), "val_loss": val})
        log.debug("epoch %d train %.4f val %.4f", epoch, np.mean(losses), val)
        if val < state.best_val - cfg.min_delta:
            state.best_val = val
            state.since_improvement = 0
            result.params = copy.deepcopy(state.params)
            result.best_epoch = epoch
        else:
            state.since_improvement += 1
            if state.since_improvement >= cfg.patience:
                break
    return result
