"""Graph-attention embedder with a hand-written backward pass.

Everything is float64 numpy. Several graphs are evaluated together as one
block-diagonal union; attention never crosses graphs and pooling is per
graph, so this is exactly equivalent to one pass per graph.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..graph import Graph

POOLINGS = ("mean", "sum", "max")


@dataclass(frozen=True)
class EmbedderConfig:
    in_features: int = 4
    hidden: int = 8
    heads: int = 4
    layers: int = 3
    fc_hidden: int = 8
    out_dim: int = 5
    negative_slope: float = 0.2
    pooling: str = "mean"

    def __post_init__(self):
        if self.out_dim < 2:
            raise ValueError("embedding dimension must be >= 2")
        if self.layers < 1 or self.heads < 1 or self.hidden < 1:
            raise ValueError("layers, heads and hidden must be >= 1")
        if self.pooling not in POOLINGS:
            raise ValueError(f"pooling must be one of {POOLINGS}")

    def to_dict(self) -> dict:
        return asdict(self)

    def layer_dims(self) -> list[tuple[int, bool]]:
        """(input width, concat heads) per attention layer; the last layer averages heads."""
        dims = []
        width = self.in_features
        for layer in range(self.layers):
            concat = layer < self.layers - 1
            dims.append((width, concat))
            width = self.hidden * self.heads if concat else self.hidden
        return dims


Params = dict  # name -> float64 ndarray


def param_shapes(cfg: EmbedderConfig) -> dict[str, tuple[int, ...]]:
    shapes = {}
    H, F = cfg.heads, cfg.hidden
    for i, (width, concat) in enumerate(cfg.layer_dims()):
        shapes[f"gat{i}.W"] = (H, width, F)
        shapes[f"gat{i}.a_self"] = (H, F)
        shapes[f"gat{i}.a_nbr"] = (H, F)
        shapes[f"gat{i}.bias"] = (H * F if concat else F,)
    shapes["fc1.W"] = (F, cfg.fc_hidden)
    shapes["fc1.b"] = (cfg.fc_hidden,)
    shapes["fc2.W"] = (cfg.fc_hidden, cfg.out_dim)
    shapes["fc2.b"] = (cfg.out_dim,)
    return shapes


def init_params(cfg: EmbedderConfig, seed: int) -> Params:
    """Glorot-uniform weights and attention vectors, zero biases."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in param_shapes(cfg).items():
        if name.endswith(("bias", ".b")):
            params[name] = np.zeros(shape)
            continue
        if name.endswith(".W") and len(shape) == 3:
            fan_in, fan_out = shape[1], shape[2]
        elif name.endswith(".W"):
            fan_in, fan_out = shape
        else:
            fan_in, fan_out = shape[1], 1
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        params[name] = rng.uniform(-limit, limit, size=shape)
    return params


def check_params(params: Params, cfg: EmbedderConfig) -> None:
    for name, shape in param_shapes(cfg).items():
        if name not in params:
            raise ValueError(f"missing parameter {name}")
        if params[name].shape != shape:
            raise ValueError(f"parameter {name} has shape {params[name].shape}, expected {shape}")
        if not np.all(np.isfinite(params[name])):
            raise ValueError(f"parameter {name} has non-finite entries")


# -- batched graph structure --------------------------------------------------------

@dataclass
class GraphBatch:
    """Disjoint union of graphs with self loops, edges sorted by destination."""

    X: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    starts: np.ndarray  # first edge of each destination segment
    indptr: np.ndarray  # starts plus the total edge count
    scatter_src: sp.csr_array  # (N, E) incidence used to sum edge values onto sources
    node_ptr: np.ndarray  # graph g owns nodes node_ptr[g]:node_ptr[g+1]

    @property
    def n_graphs(self) -> int:
        return len(self.node_ptr) - 1


def make_batch(graphs: Sequence[Graph], features: Sequence[np.ndarray], in_features: int | None = None) -> GraphBatch:
    if len(graphs) != len(features):
        raise ValueError("one feature matrix per graph is required")
    if not graphs:
        raise ValueError("empty batch")
    srcs, dsts, xs = [], [], []
    offset = 0
    ptr = [0]
    for g, f in zip(graphs, features):
        f = np.asarray(f, dtype=np.float64)
        if g.n < 1:
            raise ValueError("graphs must have at least one node")
        if f.ndim != 2 or f.shape[0] != g.n:
            raise ValueError(f"feature matrix has shape {f.shape}, expected ({g.n}, k)")
        if in_features is not None and f.shape[1] != in_features:
            raise ValueError(f"feature matrix has {f.shape[1]} columns, expected {in_features}")
        loops = np.arange(g.n)
        srcs.append(np.concatenate([g.indices, loops]) + offset)
        dsts.append(np.concatenate([np.repeat(np.arange(g.n), g.degrees), loops]) + offset)
        xs.append(f)
        offset += g.n
        ptr.append(offset)
    src = np.concatenate(srcs)
    dst = np.concatenate(dsts)
    order = np.lexsort((src, dst))
    src, dst = src[order], dst[order]
    N, E = offset, len(src)
    counts = np.bincount(dst, minlength=N)
    starts = np.cumsum(counts) - counts
    scatter = sp.csr_array((np.ones(E), (src, np.arange(E))), shape=(N, E))
    indptr = np.append(starts, E)
    return GraphBatch(np.vstack(xs), src, dst, starts, indptr, scatter, np.asarray(ptr))


# -- forward / backward -------------------------------------------------------------

def _attention_matrix(alpha_h: np.ndarray, b: GraphBatch) -> sp.csr_array:
    # edges are sorted by (dst, src), which is exactly CSR order with rows = dst
    N = len(b.starts)
    return sp.csr_array((alpha_h, b.src, b.indptr), shape=(N, N))


def _gat_forward(X, W, a_s, a_n, bias, b: GraphBatch, concat: bool, slope: float):
    H, F_in, F = W.shape
    N = X.shape[0]
    Z = (X @ W.transpose(1, 0, 2).reshape(F_in, H * F)).reshape(N, H, F)
    s = (Z * a_s).sum(axis=2)
    t = (Z * a_n).sum(axis=2)
    u = s[b.dst] + t[b.src]  # (E, H)
    logit = np.where(u > 0, u, slope * u)
    # segment max is detached: it cancels in the softmax
    mx = np.maximum.reduceat(logit, b.starts, axis=0)
    w = np.exp(logit - mx[b.dst])
    alpha = w / np.add.reduceat(w, b.starts, axis=0)[b.dst]
    agg = np.empty((N, H, F))
    for h in range(H):
        agg[:, h, :] = _attention_matrix(alpha[:, h], b) @ np.ascontiguousarray(Z[:, h, :])
    merged = agg.reshape(N, H * F) if concat else agg.mean(axis=1)
    pre = merged + bias
    out = np.where(pre > 0, pre, np.expm1(np.minimum(pre, 0.0)))
    cache = (X, Z, u, alpha, pre)
    return out, cache


def _gat_backward(dout, cache, W, a_s, a_n, b: GraphBatch, concat: bool, slope: float):
    X, Z, u, alpha, pre = cache
    N, H, F = Z.shape
    F_in = W.shape[1]
    dpre = dout * np.where(pre > 0, 1.0, np.exp(np.minimum(pre, 0.0)))
    dbias = dpre.sum(axis=0)
    if concat:
        dagg = dpre.reshape(N, H, F)
    else:
        dagg = np.broadcast_to(dpre[:, None, :] / H, (N, H, F))
    dZ = np.empty_like(Z)
    dalpha = np.empty_like(alpha)
    for h in range(H):
        Dh = np.ascontiguousarray(dagg[:, h, :])
        Zh = np.ascontiguousarray(Z[:, h, :])
        dZ[:, h, :] = _attention_matrix(alpha[:, h], b).T @ Dh
        dalpha[:, h] = np.einsum("ef,ef->e", Dh[b.dst], Zh[b.src])
    seg = np.add.reduceat(alpha * dalpha, b.starts, axis=0)
    dlogit = alpha * (dalpha - seg[b.dst])
    du = dlogit * np.where(u > 0, 1.0, slope)
    ds = np.add.reduceat(du, b.starts, axis=0)  # (N, H)
    dt = b.scatter_src @ du
    dZ += ds[:, :, None] * a_s + dt[:, :, None] * a_n
    da_s = (ds[:, :, None] * Z).sum(axis=0)
    da_n = (dt[:, :, None] * Z).sum(axis=0)
    dZf = dZ.reshape(N, H * F)
    dW = (X.T @ dZf).reshape(F_in, H, F).transpose(1, 0, 2)
    dX = dZf @ W.transpose(1, 0, 2).reshape(F_in, H * F).T
    return dX, dW, da_s, da_n, dbias


def _pool(Y: np.ndarray, b: GraphBatch, mode: str):
    sizes = np.diff(b.node_ptr)
    lo = b.node_ptr[:-1]
    if mode == "max":
        return np.maximum.reduceat(Y, lo, axis=0), sizes
    pooled = np.add.reduceat(Y, lo, axis=0)
    if mode == "mean":
        pooled = pooled / sizes[:, None]
    return pooled, sizes


def _unpool(dP: np.ndarray, Y: np.ndarray, pooled: np.ndarray, b: GraphBatch, mode: str) -> np.ndarray:
    sizes = np.diff(b.node_ptr)
    owner = np.repeat(np.arange(b.n_graphs), sizes)
    if mode == "sum":
        return dP[owner]
    if mode == "mean":
        return (dP / sizes[:, None])[owner]
    # max: gradient goes to the first node attaining the maximum
    hit = Y == pooled[owner]
    idx = np.arange(Y.shape[0])[:, None]
    first = np.where(hit, idx, Y.shape[0])
    winner = np.minimum.reduceat(first, b.node_ptr[:-1], axis=0)
    dY = np.zeros_like(Y)
    cols = np.broadcast_to(np.arange(Y.shape[1]), winner.shape)
    dY[winner, cols] = dP
    return dY


def forward(params: Params, batch: GraphBatch, cfg: EmbedderConfig, keep_cache: bool = False):
    """Embeddings ``(n_graphs, out_dim)``; with ``keep_cache`` also the tape for ``backward``."""
    h = batch.X
    tape = []
    for i, (_, concat) in enumerate(cfg.layer_dims()):
        h, cache = _gat_forward(h, params[f"gat{i}.W"], params[f"gat{i}.a_self"], params[f"gat{i}.a_nbr"],
                                params[f"gat{i}.bias"], batch, concat, cfg.negative_slope)
        tape.append(cache)
    pooled, _ = _pool(h, batch, cfg.pooling)
    z1 = pooled @ params["fc1.W"] + params["fc1.b"]
    r1 = np.maximum(z1, 0.0)
    emb = r1 @ params["fc2.W"] + params["fc2.b"]
    if not keep_cache:
        return emb
    return emb, (tape, h, pooled, z1, r1)


def backward(params: Params, batch: GraphBatch, cfg: EmbedderConfig, cache, d_emb: np.ndarray) -> Params:
    """Parameter gradients given the upstream gradient of the embeddings."""
    tape, h_last, pooled, z1, r1 = cache
    grads = {}
    grads["fc2.W"] = r1.T @ d_emb
    grads["fc2.b"] = d_emb.sum(axis=0)
    dz1 = (d_emb @ params["fc2.W"].T) * (z1 > 0)
    grads["fc1.W"] = pooled.T @ dz1
    grads["fc1.b"] = dz1.sum(axis=0)
    dpooled = dz1 @ params["fc1.W"].T
    dh = _unpool(dpooled, h_last, pooled, batch, cfg.pooling)
    for i in reversed(range(cfg.layers)):
        concat = cfg.layer_dims()[i][1]
        dh, dW, da_s, da_n, dbias = _gat_backward(
            dh, tape[i], params[f"gat{i}.W"], params[f"gat{i}.a_self"], params[f"gat{i}.a_nbr"],
            batch, concat, cfg.negative_slope)
        grads[f"gat{i}.W"] = dW
        grads[f"gat{i}.a_self"] = da_s
        grads[f"gat{i}.a_nbr"] = da_n
        grads[f"gat{i}.bias"] = dbias
    return grads


def embed(g: Graph, features: np.ndarray, params: Params, cfg: EmbedderConfig) -> np.ndarray:
    check_params(params, cfg)
    return forward(params, make_batch([g], [features], cfg.in_features), cfg)[0]


def embed_many(graphs: Sequence[Graph], features: Sequence[np.ndarray], params: Params, cfg: EmbedderConfig,
               chunk: int = 64) -> np.ndarray:
    check_params(params, cfg)
    out = [forward(params, make_batch(graphs[i:i + chunk], features[i:i + chunk], cfg.in_features), cfg)
           for i in range(0, len(graphs), chunk)]
    return np.vstack(out) if out else np.zeros((0, cfg.out_dim))
