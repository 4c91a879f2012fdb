"""Seeded synthetic graph generators and perturbation pseudo-generators.

All generators are pure functions of their parameters and ``seed`` (an int or
a ``numpy.random.Generator``): the same inputs give the same edge list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .exceptions import GenerationError
from .graph import Graph, from_edge_list
from .seeding import as_rng

FAMILIES = ("ER", "BA", "SBM", "LFR", "NPSO", "REWIRE", "ER_MATCH")
CORPUS_CLASSES = ("BA", "ER", "LFR", "nPSO", "SBM")


def _pairs_upper(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def gen_er(n: int, p: float, seed=None) -> Graph:
    """G(n, p): one Bernoulli(p) draw per pair, pairs in row-major ``u < v`` order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    rng = as_rng(seed)
    u, v = _pairs_upper(n)
    keep = rng.random(len(u)) < p
    return Graph(n, np.stack([u[keep], v[keep]], axis=1))


def gen_ba(n: int, m: int, seed=None) -> Graph:
    """Preferential attachment grown from an ``m``-node path.

    Node ``t`` (for ``t = m .. n-1``) links to ``m`` distinct earlier nodes,
    drawn without replacement with probability proportional to degree.
    The result has ``(m - 1) + m * (n - m)`` edges.
    """
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    rng = as_rng(seed)
    deg = np.zeros(n, dtype=np.float64)
    edges = [(i, i + 1) for i in range(m - 1)]
    deg[: m] = 2.0
    if m >= 1:
        deg[0] = deg[m - 1] = 1.0 if m > 1 else 0.0
    for t in range(m, n):
        w = deg[:t]
        total = w.sum()
        p = w / total if total > 0 else np.full(t, 1.0 / t)
        targets = rng.choice(t, size=m, replace=False, p=p)
        for s in targets:
            edges.append((int(s), t))
        deg[targets] += 1.0
        deg[t] = m
    return from_edge_list(edges, n_hint=n)


def gen_sbm(block_sizes, P, seed=None) -> Graph:
    """Stochastic block model; nodes are numbered block by block."""
    sizes = np.asarray(block_sizes, dtype=np.int64)
    P = np.asarray(P, dtype=np.float64)
    k = len(sizes)
    if P.shape != (k, k):
        raise ValueError(f"P must be {k}x{k}")
    if not np.array_equal(P, P.T):
        raise ValueError("P must be symmetric")
    if P.min() < 0 or P.max() > 1:
        raise ValueError("P entries must lie in [0, 1]")
    if sizes.min(initial=1) < 0:
        raise ValueError("block sizes must be non-negative")
    n = int(sizes.sum())
    rng = as_rng(seed)
    block = np.repeat(np.arange(k), sizes)
    u, v = _pairs_upper(n)
    keep = rng.random(len(u)) < P[block[u], block[v]]
    return Graph(n, np.stack([u[keep], v[keep]], axis=1))


def sbm_blocks(block_sizes) -> np.ndarray:
    sizes = np.asarray(block_sizes, dtype=np.int64)
    return np.repeat(np.arange(len(sizes)), sizes)


# -- LFR ----------------------------------------------------------------------

def _powerlaw_mean(a: float, b: float, tau: float) -> float:
    """Mean of the density proportional to x**-tau on [a, b]."""
    if abs(tau - 1.0) < 1e-12:
        return (b - a) / math.log(b / a)
    if abs(tau - 2.0) < 1e-12:
        return math.log(b / a) / (1.0 / a - 1.0 / b)
    num = (b ** (2 - tau) - a ** (2 - tau)) / (2 - tau)
    den = (b ** (1 - tau) - a ** (1 - tau)) / (1 - tau)
    return num / den


def _powerlaw_sample(rng, a: float, b: float, tau: float, size) -> np.ndarray:
    u = rng.random(size)
    if abs(tau - 1.0) < 1e-12:
        return a * (b / a) ** u
    lo, hi = a ** (1 - tau), b ** (1 - tau)
    return (lo + u * (hi - lo)) ** (1.0 / (1 - tau))


class _Retry(Exception):
    pass


def _match(stubs: np.ndarray, rng, edges: set, comm: np.ndarray | None, tries: int = 50) -> tuple[list, int]:
    """Pair up stubs into simple edges, repairing bad pairs by edge swaps.

    With ``comm`` given, pairs must join different communities. Pairs that
    cannot be repaired are dropped; the number dropped is returned.
    """
    def ok(a, b):
        if a == b:
            return False
        if comm is not None and comm[a] == comm[b]:
            return False
        return (min(a, b), max(a, b)) not in edges

    stubs = stubs.copy()
    rng.shuffle(stubs)
    good, bad = [], []
    for a, b in stubs.reshape(-1, 2).tolist():
        if ok(a, b):
            edges.add((min(a, b), max(a, b)))
            good.append((a, b))
        else:
            bad.append((a, b))
    dropped = 0
    for a, b in bad:
        fixed = False
        for _ in range(tries):
            if not good:
                break
            j = int(rng.integers(len(good)))
            x, y = good[j]
            if rng.random() < 0.5:
                x, y = y, x
            if not (ok(a, x) and ok(b, y)) or {a, x} == {b, y}:
                continue
            edges.discard((min(x, y), max(x, y)))
            edges.add((min(a, x), max(a, x)))
            edges.add((min(b, y), max(b, y)))
            good[j] = (a, x)
            good.append((b, y))
            fixed = True
            break
        if not fixed:
            dropped += 1
    return good, dropped


def gen_lfr(n: int, tau1: float, tau2: float, mu: float, avg_deg: float, max_deg: int,
            min_comm: int, max_comm: int, seed=None, *, return_communities: bool = False,
            max_retries: int = 20):
    """LFR-style benchmark via stub matching.

    Degrees follow a power law with exponent ``tau1`` truncated at ``max_deg``
    whose lower cut-off is tuned so the mean is ``avg_deg``; community sizes
    follow a power law with exponent ``tau2`` on ``[min_comm, max_comm]``.
    Each node gets ``ceil((1 - mu) * k)`` internal stubs, the rest external.
    """
    if tau1 <= 1 or tau2 <= 1:
        raise ValueError("tau1 and tau2 must exceed 1")
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu={mu} outside [0, 1]")
    if not (1 <= avg_deg <= max_deg < n):
        raise ValueError("need 1 <= avg_deg <= max_deg < n")
    if not (1 <= min_comm <= max_comm <= n):
        raise ValueError("need 1 <= min_comm <= max_comm <= n")
    if math.ceil((1 - mu) * max_deg) > max_comm - 1 and mu < 1:
        raise GenerationError(
            f"internal degree up to {math.ceil((1 - mu) * max_deg)} cannot fit in communities "
            f"of at most {max_comm} nodes; raise max_comm or mu, or lower max_deg")
    if _powerlaw_mean(1.0, max_deg, tau1) > avg_deg + 1e-9:
        raise GenerationError(
            f"avg_deg={avg_deg} is below the smallest mean reachable with tau1={tau1}, max_deg={max_deg}")
    rng = as_rng(seed)
    if max_deg == avg_deg:
        kmin = float(max_deg)
    else:
        kmin = brentq(lambda a: _powerlaw_mean(a, max_deg, tau1) - avg_deg, 1.0, float(max_deg) - 1e-9,
                      xtol=1e-12)
    last = None
    for _ in range(max_retries):
        try:
            g, comm = _lfr_once(rng, n, tau1, tau2, mu, kmin, max_deg, min_comm, max_comm)
        except _Retry as exc:
            last = exc
            continue
        return (g, comm) if return_communities else g
    raise GenerationError(f"LFR constraints unsatisfied after {max_retries} attempts: {last}")


def _lfr_once(rng, n, tau1, tau2, mu, kmin, max_deg, min_comm, max_comm):
    deg = np.clip(np.rint(_powerlaw_sample(rng, kmin, max_deg, tau1, n)), 1, max_deg).astype(np.int64)

    sizes = []
    while sum(sizes) < n:
        sizes.append(int(np.clip(np.rint(_powerlaw_sample(rng, min_comm, max_comm, tau2, 1)[0]),
                                 min_comm, max_comm)))
    overflow = sum(sizes) - n
    if overflow:
        sizes[-1] -= overflow
        if sizes[-1] < min_comm:
            raise _Retry("community sizes do not tile n")
    sizes = np.asarray(sizes)

    k_in = np.ceil((1.0 - mu) * deg - 1e-9).astype(np.int64)
    comm = np.full(n, -1, dtype=np.int64)
    free = sizes.copy()
    for v in np.argsort(-k_in, kind="stable"):
        fits = np.flatnonzero((free > 0) & (sizes > k_in[v]))
        if len(fits) == 0:
            raise _Retry(f"no community can host node with internal degree {k_in[v]}")
        c = fits[rng.integers(len(fits))]
        comm[v] = c
        free[c] -= 1
    k_out = deg - k_in

    edges: set = set()
    for c in range(len(sizes)):
        members = np.flatnonzero(comm == c)
        kc = k_in[members]
        if kc.sum() % 2:
            pick = members[rng.choice(np.flatnonzero(kc > 0))]
            k_in[pick] -= 1
            # with mu = 0 there must be no external stubs, so the odd one is dropped
            if mu > 0:
                k_out[pick] += 1
        _match(np.repeat(members, k_in[members]), rng, edges, None)
    ext = np.repeat(np.arange(n), k_out)
    if len(ext) % 2:
        ext = np.delete(ext, rng.integers(len(ext)))
    if len(sizes) > 1:
        _match(ext, rng, edges, comm)
    g = from_edge_list(sorted(edges), n_hint=n)
    return g, comm


# -- nPSO ---------------------------------------------------------------------

def _hyperbolic_distance(r1, t1, r2, t2):
    dtheta = np.pi - np.abs(np.pi - np.abs(t1 - t2))
    x = np.cosh(r1 - r2) + 2.0 * np.sin(dtheta / 2.0) ** 2 * np.sinh(r1) * np.sinh(r2)
    return np.arccosh(np.maximum(x, 1.0))


def gen_npso(n: int, m: int, gamma: float, T: float, C: int, kappa: float, seed=None,
             *, return_coordinates: bool = False):
    """Non-uniform popularity-similarity growth on the hyperbolic disk.

    Angles come from a ``C``-component Gaussian mixture (equal weights, means
    ``2*pi*c/C``, standard deviation ``kappa`` radians). Node ``i`` arrives at
    time ``t = i + 1`` with radius ``2 ln t``; earlier nodes fade to
    ``beta * r_s + (1 - beta) * r_t`` with ``beta = 1 / (gamma - 1)``. The first
    ``m`` nodes form a clique. Later nodes link to their ``m`` hyperbolically
    closest predecessors when ``T == 0``; otherwise each predecessor is linked
    with probability ``1 / (1 + exp((d - R_t) / (2T)))``, ``R_t`` solved so the
    expected number of links is ``m``.
    """
    if not 1 <= m < n:
        raise ValueError(f"need n > m >= 1, got m={m}, n={n}")
    if gamma <= 2:
        raise ValueError("gamma must exceed 2")
    if T < 0:
        raise ValueError("T must be non-negative")
    if C < 1:
        raise ValueError("C must be >= 1")
    if C > n:
        raise ValueError(f"C={C} exceeds n={n}")
    rng = as_rng(seed)
    beta = 1.0 / (gamma - 1.0)
    component = rng.integers(C, size=n)
    theta = np.mod(2.0 * np.pi * component / C + kappa * rng.standard_normal(n), 2.0 * np.pi)
    birth = 2.0 * np.log(np.arange(1, n + 1, dtype=np.float64))

    edges = [(a, b) for a in range(m) for b in range(a + 1, m)]
    for i in range(m, n):
        r_t = birth[i]
        r_old = beta * birth[:i] + (1.0 - beta) * r_t
        d = _hyperbolic_distance(r_t, theta[i], r_old, theta[:i])
        if i <= m:
            chosen = np.arange(i)
        elif T == 0:
            chosen = np.argsort(d, kind="stable")[:m]
        else:
            scale = 2.0 * T

            def excess(R):
                return expit((R - d) / scale).sum() - m

            lo, hi = d.min() - 60 * scale, d.max() + 60 * scale
            R = brentq(excess, lo, hi, xtol=1e-12)
            chosen = np.flatnonzero(rng.random(i) < expit((R - d) / scale))
        edges.extend((int(s), i) for s in chosen)
    g = from_edge_list(edges, n_hint=n)
    if return_coordinates:
        r_final = beta * birth + (1.0 - beta) * birth[-1]
        return g, r_final, theta, component
    return g


# -- pseudo-generators ----------------------------------------------------------

def rewire_preserving_degree(g: Graph, swaps_per_edge: float, seed=None) -> Graph:
    """Double-edge-swap randomisation keeping every node degree.

    Performs ``ceil(swaps_per_edge * m)`` successful swaps (attempts are capped
    at 100 per requested swap). A swap replaces ``(a, b), (c, d)`` with
    ``(a, d), (c, b)``; proposals creating loops or duplicate edges are rejected.
    """
    if swaps_per_edge < 0:
        raise ValueError("swaps_per_edge must be >= 0")
    target = math.ceil(swaps_per_edge * g.m)
    if target == 0 or g.m < 2:
        return Graph(g.n, g.edges.copy())
    rng = as_rng(seed)
    edges = g.edges.tolist()
    present = {(a, b) for a, b in edges}
    m = len(edges)
    done, attempts, max_attempts = 0, 0, 100 * target
    while done < target and attempts < max_attempts:
        block = min(4096, max_attempts - attempts)
        ii = rng.integers(m, size=block)
        jj = rng.integers(m, size=block)
        flip = rng.random(block) < 0.5
        for i, j, f in zip(ii.tolist(), jj.tolist(), flip.tolist()):
            attempts += 1
            if i == j:
                continue
            a, b = edges[i]
            c, d = edges[j]
            if f:
                c, d = d, c
            if a == d or c == b:
                continue
            e1 = (a, d) if a < d else (d, a)
            e2 = (c, b) if c < b else (b, c)
            if e1 in present or e2 in present:
                continue
            present.discard((a, b) if a < b else (b, a))
            present.discard((c, d) if c < d else (d, c))
            present.add(e1)
            present.add(e2)
            edges[i] = list(e1)
            edges[j] = list(e2)
            done += 1
            if done >= target:
                break
    return from_edge_list(edges, n_hint=g.n)


def gen_er_matched(g: Graph, seed=None) -> Graph:
    """ER graph with the same node count and expected edge count as ``g``."""
    p = 0.0 if g.n < 2 else 2.0 * g.m / (g.n * (g.n - 1))
    return gen_er(g.n, p, seed)


# -- specs and corpus parameters ----------------------------------------------------

@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")


def generate(spec: GeneratorSpec, source: Graph | None = None) -> Graph:
    p = spec.params
    if spec.family == "ER":
        return gen_er(p["n"], p["p"], spec.seed)
    if spec.family == "BA":
        return gen_ba(p["n"], p["m"], spec.seed)
    if spec.family == "SBM":
        return gen_sbm(p["block_sizes"], p["P"], spec.seed)
    if spec.family == "LFR":
        return gen_lfr(p["n"], p["tau1"], p["tau2"], p["mu"], p["avg_deg"], p["max_deg"],
                       p["min_comm"], p["max_comm"], spec.seed)
    if spec.family == "NPSO":
        return gen_npso(p["n"], p["m"], p["gamma"], p["T"], p["C"], p["kappa"], spec.seed)
    if source is None:
        raise ValueError(f"{spec.family} needs a source graph")
    if spec.family == "REWIRE":
        return rewire_preserving_degree(source, p.get("swaps_per_edge", 10.0), spec.seed)
    return gen_er_matched(source, spec.seed)


def corpus_spec(cls: str, n: int, seed: int) -> GeneratorSpec:
    """Draw generator parameters for one corpus graph of class ``cls``.

    Ranges keep each class's mean degree inside the band its edge counts imply
    at n = 1000 (ER 16-20, BA 2m with m in 10..16, LFR 12-37, nPSO 2m with m in
    14..17, SBM 28-35), so the corpus can be built at any ``n``.
    """
    rng = np.random.default_rng(seed)
    sub = int(rng.integers(2**63))
    if cls == "ER":
        k = rng.uniform(16.0, 20.0)
        return GeneratorSpec("ER", {"n": n, "p": min(1.0, k / (n - 1))}, sub)
    if cls == "BA":
        m = int(rng.integers(10, 17))
        return GeneratorSpec("BA", {"n": n, "m": min(m, n - 1)}, sub)
    if cls == "LFR":
        avg = float(rng.uniform(12.0, 37.0))
        max_deg = int(min(n - 1, max(avg + 1, 2.5 * avg)))
        max_comm = min(n, 100)
        mu = float(rng.uniform(0.1, 0.4))
        max_deg = min(max_deg, int((max_comm - 1) / (1 - mu)))
        return GeneratorSpec("LFR", {
            "n": n, "tau1": float(rng.uniform(2.0, 3.0)), "tau2": float(rng.uniform(1.1, 2.0)),
            "mu": mu, "avg_deg": avg, "max_deg": max_deg,
            "min_comm": min(20, n), "max_comm": max_comm}, sub)
    if cls == "nPSO":
        return GeneratorSpec("NPSO", {
            "n": n, "m": min(int(rng.integers(14, 18)), n - 1), "gamma": float(rng.uniform(2.5, 3.0)),
            "T": float(rng.uniform(0.1, 0.5)), "C": int(rng.integers(3, 9)),
            "kappa": float(rng.uniform(0.1, 0.3))}, sub)
    if cls == "SBM":
        k = int(rng.integers(2, 6))
        weights = rng.dirichlet(np.full(k, 4.0))
        sizes = np.maximum(np.floor(weights * n).astype(int), 1)
        sizes[np.argmax(sizes)] += n - sizes.sum()
        target = rng.uniform(28.0, 35.0)
        ratio = rng.uniform(5.0, 20.0)
        frac = sizes / n
        p_out = target / float(np.sum(frac * (ratio * (sizes - 1) + (n - sizes))))
        p_in = min(1.0, ratio * p_out)
        P = np.full((k, k), p_out)
        np.fill_diagonal(P, p_in)
        return GeneratorSpec("SBM", {"block_sizes": sizes.tolist(), "P": P.tolist()}, sub)
    raise ValueError(f"unknown corpus class {cls!r}; expected one of {CORPUS_CLASSES}")
