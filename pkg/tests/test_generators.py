import math

import numpy as np
import pytest

from ggmeval.exceptions import GenerationError
from ggmeval.features import local_clustering
from ggmeval.generators import (
    CORPUS_CLASSES,
    FAMILIES,
    GeneratorSpec,
    corpus_spec,
    gen_ba,
    gen_er,
    gen_er_matched,
    gen_lfr,
    gen_npso,
    gen_sbm,
    generate,
    rewire_preserving_degree,
    sbm_blocks,
)
from ggmeval.graph import connected_components, write_edge_list


def modularity(g, communities) -> float:
    """Newman modularity of a node partition, straight from the definition."""
    m = g.m
    if m == 0:
        return 0.0
    deg = g.degrees
    inside = sum(communities[u] == communities[v] for u, v in g.edges)
    labels = np.unique(communities)
    deg_sums = np.array([deg[communities == c].sum() for c in labels], dtype=float)
    return inside / m - float((deg_sums ** 2).sum()) / (2 * m) ** 2


# -- ER -----------------------------------------------------------------------------

def test_er_extremes():
    assert gen_er(4, 1.0, 3).m == 6
    assert gen_er(1000, 0.0, 3).m == 0


def test_er_rejects_bad_probability():
    with pytest.raises(ValueError):
        gen_er(10, 1.5, 0)


def test_er_table_range():
    inside = [8000 <= gen_er(1000, 0.018, s).m <= 10000 for s in range(40)]
    assert np.mean(inside) >= 0.95


def test_er_mean_edges_within_four_sigma():
    n, p, seeds = 200, 0.05, 200
    pairs = n * (n - 1) // 2
    counts = np.array([gen_er(n, p, s).m for s in range(seeds)])
    sigma_of_mean = math.sqrt(pairs * p * (1 - p) / seeds)
    assert abs(counts.mean() - pairs * p) < 4 * sigma_of_mean


# -- BA -----------------------------------------------------------------------------

def test_ba_tree():
    g = gen_ba(5, 1, 0)
    assert g.m == 4 and connected_components(g).count == 1


@pytest.mark.parametrize("n,m", [(2, 1), (10, 3), (50, 7), (1000, 10), (31, 30)])
def test_ba_edge_formula(n, m):
    for s in range(3):
        assert gen_ba(n, m, s).m == (m - 1) + m * (n - m)


def test_ba_rejects_m_not_below_n():
    with pytest.raises(ValueError):
        gen_ba(5, 5, 0)


def test_ba_hubs_emerge():
    hubs = []
    for s in range(100):
        g = gen_ba(1000, 10, s)
        hubs.append(g.degrees.max() > 5 * g.degrees.mean())
    assert np.mean(hubs) >= 0.9


# -- SBM ----------------------------------------------------------------------------

def test_sbm_two_triangles():
    g = gen_sbm([3, 3], [[1, 0], [0, 1]], 0)
    assert g.edge_set() == {(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)}


def test_sbm_rejects_asymmetric():
    with pytest.raises(ValueError):
        gen_sbm([2, 2], [[0.1, 0.2], [0.3, 0.1]], 0)


def test_sbm_uniform_matches_er_mean_degree():
    q = 0.01
    g = gen_sbm([500, 500], [[q, q], [q, q]], 4)
    # mean degree = 2m/n with m ~ Binomial(n(n-1)/2, q)
    pairs = 1000 * 999 / 2
    sigma = 2 * math.sqrt(pairs * q * (1 - q)) / 1000
    assert abs(g.degrees.mean() - 999 * q) < 4 * sigma


def test_sbm_block_density():
    sizes = [250] * 4
    P = np.full((4, 4), 0.005)
    np.fill_diagonal(P, 0.1)
    blocks = sbm_blocks(sizes)
    for s in range(20):
        g = gen_sbm(sizes, P, s)
        same = blocks[g.edges[:, 0]] == blocks[g.edges[:, 1]]
        for b in range(4):
            inside = np.sum(same & (blocks[g.edges[:, 0]] == b))
            assert inside / (250 * 249 / 2) == pytest.approx(0.1, rel=0.2)


# -- LFR ----------------------------------------------------------------------------

LFR_ARGS = dict(n=1000, tau1=2.5, tau2=1.5, avg_deg=15, max_deg=50, min_comm=20, max_comm=100)


def test_lfr_table_edge_range():
    for s in range(5):
        assert 6190 <= gen_lfr(mu=0.2, seed=s, **LFR_ARGS).m <= 18596


def test_lfr_mu_zero_is_modular():
    g, comm = gen_lfr(mu=0.0, seed=1, return_communities=True, **LFR_ARGS)
    assert all(comm[u] == comm[v] for u, v in g.edges)
    assert modularity(g, comm) > 0.5


def test_lfr_mu_one_has_low_modularity():
    # no internal edges leaves Q = -sum_c (degree share of c)^2, which is small
    # only when there are many communities, hence max_comm = 50 here
    args = dict(LFR_ARGS, max_comm=50)
    qs = []
    for s in range(10):
        g, comm = gen_lfr(mu=1.0, seed=s, return_communities=True, **args)
        assert not any(comm[u] == comm[v] for u, v in g.edges)
        shares = np.bincount(comm, weights=g.degrees) / (2 * g.m)
        q = modularity(g, comm)
        assert q == pytest.approx(-(shares ** 2).sum(), abs=1e-12)
        qs.append(q)
    assert abs(np.mean(qs)) < 0.05


@pytest.mark.parametrize("mu", [0.1, 0.3, 0.5])
def test_lfr_realized_mixing(mu):
    fractions = []
    for s in range(5):
        g, comm = gen_lfr(mu=mu, seed=s, return_communities=True, **LFR_ARGS)
        internal = np.zeros(g.n)
        same = comm[g.edges[:, 0]] == comm[g.edges[:, 1]]
        np.add.at(internal, g.edges[same, 0], 1)
        np.add.at(internal, g.edges[same, 1], 1)
        fractions.append(np.mean(internal / np.maximum(g.degrees, 1)))
    assert abs(np.mean(fractions) - (1 - mu)) <= 0.1


def test_lfr_infeasible_raises_with_diagnostic():
    with pytest.raises(GenerationError, match="communit"):
        gen_lfr(n=30, tau1=2.5, tau2=1.5, mu=0.1, avg_deg=20, max_deg=25, min_comm=5, max_comm=6, seed=0)


# -- nPSO ---------------------------------------------------------------------------

def test_npso_table_edge_range():
    # m = 16 links per node lands in the corpus range (see notes on m = 8)
    for s in range(3):
        assert 14026 <= gen_npso(1000, 16, 2.5, 0.1, 8, 0.15, s).m <= 17462


@pytest.mark.parametrize("n,m", [(10, 1), (60, 3), (200, 8)])
def test_npso_zero_temperature_edge_count(n, m):
    g = gen_npso(n, m, 2.5, 0.0, 1, 0.3, 5)
    assert g.m == m * (n - m) + m * (m - 1) // 2


def test_npso_clustering_beats_matched_er():
    for s in range(10):
        g = gen_npso(1000, 8, 2.5, 0.1, 8, 0.15, s)
        er = gen_er_matched(g, s)
        assert er.m == pytest.approx(g.m, rel=0.05)
        assert local_clustering(g).mean() >= 3 * local_clustering(er).mean()


def test_npso_rejects_more_communities_than_nodes():
    with pytest.raises(ValueError):
        gen_npso(10, 2, 2.5, 0.1, 11, 0.1, 0)


# -- rewiring -----------------------------------------------------------------------

def test_rewire_zero_swaps_is_identity():
    g = gen_er(50, 0.2, 1)
    assert rewire_preserving_degree(g, 0, 3) == g


def test_rewire_preserves_degrees():
    for s in range(10):
        g = gen_ba(200, 3, s)
        r = rewire_preserving_degree(g, 2.0, s)
        assert np.array_equal(r.degrees, g.degrees)
        assert r != g


def test_rewire_destroys_npso_clustering():
    dropped = []
    for s in range(20):
        g = gen_npso(300, 8, 2.5, 0.1, 4, 0.15, s)
        r = rewire_preserving_degree(g, 10, s)
        assert np.array_equal(np.bincount(r.degrees), np.bincount(g.degrees))
        dropped.append(local_clustering(r).mean() < 0.5 * local_clustering(g).mean())
    assert np.mean(dropped) >= 0.9


# -- specs and determinism ----------------------------------------------------------

SPECS = [
    GeneratorSpec("ER", {"n": 60, "p": 0.1}, 9),
    GeneratorSpec("BA", {"n": 60, "m": 3}, 9),
    GeneratorSpec("SBM", {"block_sizes": [30, 30], "P": [[0.3, 0.02], [0.02, 0.3]]}, 9),
    GeneratorSpec("LFR", {"n": 200, "tau1": 2.5, "tau2": 1.5, "mu": 0.2, "avg_deg": 10, "max_deg": 30,
                          "min_comm": 20, "max_comm": 50}, 9),
    GeneratorSpec("NPSO", {"n": 100, "m": 4, "gamma": 2.5, "T": 0.2, "C": 3, "kappa": 0.2}, 9),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family)
def test_same_spec_same_bytes(spec, tmp_path):
    a, b = generate(spec), generate(spec)
    write_edge_list(a, tmp_path / "a")
    write_edge_list(b, tmp_path / "b")
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
    assert np.all(a.edges[:, 0] < a.edges[:, 1])


def test_perturbation_specs_need_a_source():
    base = gen_er(40, 0.2, 0)
    r = generate(GeneratorSpec("REWIRE", {"swaps_per_edge": 1.0}, 2), base)
    assert np.array_equal(r.degrees, base.degrees)
    e = generate(GeneratorSpec("ER_MATCH", {}, 2), base)
    assert e.n == base.n
    with pytest.raises(ValueError):
        generate(GeneratorSpec("REWIRE", {"swaps_per_edge": 1.0}, 2))


def test_unknown_family_rejected():
    assert "GPA" not in FAMILIES
    with pytest.raises(ValueError):
        GeneratorSpec("GPA", {}, 0)


@pytest.mark.parametrize("cls", CORPUS_CLASSES)
def test_corpus_presets_are_seeded(cls):
    a = generate(corpus_spec(cls, 200, 17))
    b = generate(corpus_spec(cls, 200, 17))
    assert a == b and a.n == 200
