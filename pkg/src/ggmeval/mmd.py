"""Kernels, the biased squared-MMD estimator and the five-descriptor suite."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from joblib import Parallel, delayed

from .descriptors import (
    Histogram,
    OrbitDescriptor,
    clustering_histogram,
    degree_histogram,
    nspdk_features,
    orbit_counts,
    spectral_descriptor,
)
from .exceptions import CapabilityError
from .graph import Graph

KERNELS = ("gaussian_tv", "gaussian_emd", "gaussian_rbf", "nspdk_dot")
METRICS = ("degree", "clustering", "orbits", "spectral", "nspdk")
NEGATIVE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "gaussian_tv"
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValueError(f"kernel kind must be one of {KERNELS}")
        if self.kind != "nspdk_dot" and not self.sigma > 0:
            raise ValueError("sigma must be positive")


def _orbit_vector(d) -> np.ndarray:
    v = d.graph_vector if isinstance(d, OrbitDescriptor) else np.asarray(d, dtype=np.float64)
    return v / (1.0 + np.linalg.norm(v))


def _hist_stack(descs: Sequence[Histogram]) -> tuple[np.ndarray, float]:
    first = descs[0]
    for h in descs[1:]:
        if not first.same_bins(h):
            raise ValueError("histograms must share bin edges")
    return np.vstack([h.mass for h in descs]), first.bin_width


def gram_matrix(A: Sequence, B: Sequence, spec: KernelSpec) -> np.ndarray:
    """Kernel values ``k(A[i], B[j])``."""
    if spec.kind in ("gaussian_tv", "gaussian_emd"):
        ma, width = _hist_stack(list(A) + list(B))
        mb = ma[len(A):]
        ma = ma[:len(A)]
        diff = ma[:, None, :] - mb[None, :, :]
        if spec.kind == "gaussian_tv":
            dist = 0.5 * np.abs(diff).sum(axis=-1)
        else:
            dist = np.abs(np.cumsum(diff, axis=-1)).sum(axis=-1) * width
        return np.exp(-dist ** 2 / (2.0 * spec.sigma ** 2))
    if spec.kind == "gaussian_rbf":
        va = np.vstack([_orbit_vector(a) for a in A])
        vb = np.vstack([_orbit_vector(b) for b in B])
        sq = ((va[:, None, :] - vb[None, :, :]) ** 2).sum(axis=-1)
        return np.exp(-sq / (2.0 * spec.sigma ** 2))
    return _cosine_gram(A, B)


def _count_matrix(maps: Sequence[dict], index: dict) -> sp.csr_array:
    rows, cols, vals = [], [], []
    for i, fm in enumerate(maps):
        for key, cnt in fm.items():
            rows.append(i)
            cols.append(index[key])
            vals.append(cnt)
    return sp.csr_array((np.asarray(vals, dtype=np.int64), (rows, cols)), shape=(len(maps), len(index)))


def _cosine_gram(A: Sequence[dict], B: Sequence[dict]) -> np.ndarray:
    index: dict = {}
    for fm in list(A) + list(B):
        for key in fm:
            index.setdefault(key, len(index))
    XA, XB = _count_matrix(A, index), _count_matrix(B, index)
    dots = (XA @ XB.T).toarray().astype(np.float64)
    na = np.sqrt(np.asarray(XA.multiply(XA).sum(axis=1), dtype=np.float64)).ravel()
    nb = np.sqrt(np.asarray(XB.multiply(XB).sum(axis=1), dtype=np.float64)).ravel()
    denom = na[:, None] * nb[None, :]
    out = np.zeros_like(dots)
    ok = denom > 0
    out[ok] = dots[ok] / denom[ok]
    return out


def kernel_eval(a, b, spec: KernelSpec) -> float:
    return float(gram_matrix([a], [b], spec)[0, 0])


def mmd_from_gram(K: np.ndarray, n: int) -> float:
    """Biased squared MMD from the joint Gram matrix of ``X + Y`` (``X`` first, ``n`` items)."""
    m = K.shape[0] - n
    if n < 1 or m < 1:
        raise ValueError("both samples must be non-empty")
    sxx = math.fsum(K[:n, :n].ravel()) / (n * n)
    syy = math.fsum(K[n:, n:].ravel()) / (m * m)
    sxy = math.fsum(K[:n, n:].ravel()) / (n * m)
    value = sxx + syy - 2.0 * sxy
    if -NEGATIVE_TOLERANCE <= value < 0.0:
        return 0.0
    return value


def mmd_squared(X: Sequence, Y: Sequence, spec: KernelSpec) -> float:
    """Biased estimate: mean k(x, x') + mean k(y, y') - 2 mean k(x, y), diagonals included."""
    if len(X) == 0 or len(Y) == 0:
        raise ValueError("both samples must be non-empty")
    Z = list(X) + list(Y)
    return mmd_from_gram(gram_matrix(Z, Z, spec), len(X))


# -- five-metric suite --------------------------------------------------------------

@dataclass(frozen=True)
class MmdConfig:
    degree_kernel: KernelSpec = KernelSpec("gaussian_tv", 1.0)
    clustering_kernel: KernelSpec = KernelSpec("gaussian_tv", 1.0)
    orbit_kernel: KernelSpec = KernelSpec("gaussian_rbf", 1.0)
    spectral_kernel: KernelSpec = KernelSpec("gaussian_tv", 1.0)
    clustering_bins: int = 100
    spectral_bins: int = 200
    orbit_max_size: int = 4
    nspdk_r_max: int = 2
    nspdk_d_max: int = 3
    metrics: tuple = METRICS


@dataclass
class MmdReport:
    values: dict
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"values": self.values, "metadata": self.metadata}, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MmdReport":
        data = json.loads(text)
        return cls(data["values"], data.get("metadata", {}))


def _descriptor(metric: str, g: Graph, cfg: MmdConfig, max_degree: int):
    if metric == "degree":
        return degree_histogram(g, max_degree)
    if metric == "clustering":
        return clustering_histogram(g, cfg.clustering_bins)
    if metric == "orbits":
        return orbit_counts(g, cfg.orbit_max_size)
    if metric == "spectral":
        return spectral_descriptor(g, cfg.spectral_bins)
    return nspdk_features(g, cfg.nspdk_r_max, cfg.nspdk_d_max)


def _kernel_for(metric: str, cfg: MmdConfig) -> KernelSpec:
    return {
        "degree": cfg.degree_kernel,
        "clustering": cfg.clustering_kernel,
        "orbits": cfg.orbit_kernel,
        "spectral": cfg.spectral_kernel,
        "nspdk": KernelSpec("nspdk_dot"),
    }[metric]


def mmd_suite(ref: Sequence[Graph], gen: Sequence[Graph], config: MmdConfig | None = None,
              n_jobs: int = 1) -> MmdReport:
    """Squared MMD between two ensembles for each descriptor.

    Degree histograms of both ensembles share bins ``0..max degree`` over
    both. Descriptor failures re-raise naming the metric.
    """
    cfg = config or MmdConfig()
    ref, gen = list(ref), list(gen)
    if not ref or not gen:
        raise ValueError("both ensembles must be non-empty")
    graphs = ref + gen
    max_degree = max(1, max(int(g.degrees.max(initial=0)) for g in graphs))
    values = {}
    for metric in cfg.metrics:
        try:
            descs = Parallel(n_jobs=n_jobs)(delayed(_descriptor)(metric, g, cfg, max_degree) for g in graphs) \
                if n_jobs != 1 else [_descriptor(metric, g, cfg, max_degree) for g in graphs]
        except CapabilityError as exc:
            raise CapabilityError(f"{metric}: {exc}") from exc
        K = gram_matrix(descs, descs, _kernel_for(metric, cfg))
        values[metric] = mmd_from_gram(K, len(ref))
    meta = {
        "n_ref": len(ref),
        "n_gen": len(gen),
        "degree_max_bin": max_degree,
        "config": _config_dict(cfg),
    }
    return MmdReport(values, meta)


def _config_dict(cfg: MmdConfig) -> dict:
    d = asdict(cfg)
    d["metrics"] = list(cfg.metrics)
    return d
