import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ggmeval.descriptors import Histogram, degree_histogram
from ggmeval.exceptions import CapabilityError
from ggmeval.generators import gen_ba, gen_er
from ggmeval.graph import empty_graph
from ggmeval.mmd import KernelSpec, MmdConfig, MmdReport, gram_matrix, kernel_eval, mmd_squared, mmd_suite


def hist(mass, lo=0.0, hi=None):
    mass = np.asarray(mass, dtype=np.float64)
    hi = len(mass) if hi is None else hi
    return Histogram(np.linspace(lo, hi, len(mass) + 1), mass, "test")


def random_hists(rng, count, bins=8):
    out = []
    for _ in range(count):
        m = rng.random(bins)
        out.append(hist(m / m.sum()))
    return out


def naive_kernel(a, b, spec):
    if spec.kind == "gaussian_tv":
        d = 0.5 * sum(abs(x - y) for x, y in zip(a.mass, b.mass))
    elif spec.kind == "gaussian_emd":
        c, d = 0.0, 0.0
        for x, y in zip(a.mass, b.mass):
            c += x - y
            d += abs(c)
        d *= a.bin_width
    else:
        raise AssertionError(spec.kind)
    return math.exp(-d * d / (2 * spec.sigma ** 2))


def naive_mmd(X, Y, spec):
    k = lambda p, q: naive_kernel(p, q, spec)  # noqa: E731
    n, m = len(X), len(Y)
    return (sum(k(a, b) for a in X for b in X) / n ** 2 + sum(k(a, b) for a in Y for b in Y) / m ** 2
            - 2 * sum(k(a, b) for a in X for b in Y) / (n * m))


# -- kernels ---------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["gaussian_tv", "gaussian_emd"])
def test_self_kernel_is_one(kind):
    h = hist([0.2, 0.3, 0.5])
    assert kernel_eval(h, h, KernelSpec(kind, 0.7)) == 1.0


def test_tv_kernel_example():
    assert kernel_eval(hist([1, 0]), hist([0, 1]), KernelSpec("gaussian_tv", 1.0)) == pytest.approx(
        math.exp(-0.5), abs=1e-15)


def test_emd_kernel_uses_bin_width():
    # moving all mass across two bins of width 0.5 costs 1.0
    a, b = hist([1, 0, 0], 0, 1.5), hist([0, 0, 1], 0, 1.5)
    assert kernel_eval(a, b, KernelSpec("gaussian_emd", 1.0)) == pytest.approx(math.exp(-0.5))


def test_nspdk_kernel():
    spec = KernelSpec("nspdk_dot")
    assert kernel_eval({1: 3, 2: 4}, {1: 3, 2: 4}, spec) == pytest.approx(1.0, abs=1e-15)
    assert kernel_eval({1: 3}, {2: 4}, spec) == 0.0
    assert kernel_eval({1: 1, 2: 1}, {1: 1}, spec) == pytest.approx(1 / math.sqrt(2))
    assert kernel_eval({}, {1: 1}, spec) == 0.0


def test_orbit_rbf_kernel():
    a, b = np.array([3.0, 4.0]), np.zeros(2)
    # a / (1 + |a|) = (0.5, 0.667), distance^2 = 25/36
    assert kernel_eval(a, b, KernelSpec("gaussian_rbf", 1.0)) == pytest.approx(math.exp(-25 / 72))


def test_mismatched_bins_rejected():
    with pytest.raises(ValueError, match="bin"):
        kernel_eval(hist([1, 0]), hist([1, 0, 0]), KernelSpec())


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("gaussian_tv", 0.0)
    with pytest.raises(ValueError):
        KernelSpec("cosine")
    KernelSpec("nspdk_dot", 0.0)


# -- estimator -------------------------------------------------------------------

def test_two_versus_one_example():
    h1, h2 = hist([1, 0]), hist([0, 1])
    value = mmd_squared([h1, h1], [h2], KernelSpec("gaussian_tv", 1.0))
    assert value == pytest.approx(2 - 2 * math.exp(-0.5), abs=1e-12)


def test_empty_sample_rejected():
    with pytest.raises(ValueError):
        mmd_squared([], [hist([1])], KernelSpec())


@pytest.mark.parametrize("kind", ["gaussian_tv", "gaussian_emd"])
def test_matches_naive_triple_sum(kind):
    rng = np.random.default_rng(0)
    spec = KernelSpec(kind, 0.3)
    for _ in range(20):
        X = random_hists(rng, int(rng.integers(1, 6)))
        Y = random_hists(rng, int(rng.integers(1, 6)))
        assert mmd_squared(X, Y, spec) == pytest.approx(naive_mmd(X, Y, spec), abs=1e-13)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8), m=st.integers(1, 8),
       kind=st.sampled_from(["gaussian_tv", "gaussian_emd"]), sigma=st.floats(0.05, 5.0))
def test_identity_symmetry_and_sign(seed, n, m, kind, sigma):
    rng = np.random.default_rng(seed)
    spec = KernelSpec(kind, sigma)
    X, Y = random_hists(rng, n), random_hists(rng, m)
    assert abs(mmd_squared(X, X, spec)) <= 1e-12
    xy = mmd_squared(X, Y, spec)
    assert xy == mmd_squared(Y, X, spec)
    assert xy >= 0.0
    perm = rng.permutation(n)
    assert mmd_squared([X[i] for i in perm], Y, spec) == pytest.approx(xy, abs=1e-15)


def test_adding_members_of_x_moves_y_towards_x():
    hs = [hist(np.eye(3)[i]) for i in range(3)]
    spec = KernelSpec("gaussian_tv", 1.0)
    values = [mmd_squared(hs, hs[:k], spec) for k in (1, 2, 3)]
    assert values[0] >= values[1] >= values[2] == 0.0


def test_gram_matrix_symmetric():
    rng = np.random.default_rng(4)
    X = random_hists(rng, 6)
    K = gram_matrix(X, X, KernelSpec("gaussian_emd", 0.5))
    np.testing.assert_array_equal(K, K.T)
    np.testing.assert_array_equal(np.diag(K), 1.0)


# -- suite -----------------------------------------------------------------------

FAST = MmdConfig(nspdk_r_max=1, nspdk_d_max=2)


def test_suite_identical_ensembles_is_zero():
    graphs = [gen_er(60, 0.1, s) for s in range(5)]
    report = mmd_suite(graphs, graphs, FAST)
    assert set(report.values) == {"degree", "clustering", "orbits", "spectral", "nspdk"}
    assert all(abs(v) <= 1e-12 for v in report.values.values())
    assert report.metadata["n_ref"] == 5


@pytest.mark.slow
def test_suite_same_family_scores_lower():
    ref = [gen_er(300, 0.02, s) for s in range(20)]
    same = [gen_er(300, 0.02, 100 + s) for s in range(20)]
    other = [gen_ba(300, 3, 200 + s) for s in range(20)]
    cfg = MmdConfig()
    a, b = mmd_suite(ref, same, cfg), mmd_suite(ref, other, cfg)
    for metric in cfg.metrics:
        assert a.values[metric] < b.values[metric], metric


def test_suite_shares_degree_bins():
    ref = [gen_er(30, 0.1, 0)]
    gen = [gen_ba(30, 5, 1)]
    report = mmd_suite(ref, gen, FAST)
    top = max(int(g.degrees.max()) for g in ref + gen)
    assert report.metadata["degree_max_bin"] == top
    h = degree_histogram(ref[0], top)
    assert len(h.mass) == top + 1


def test_suite_capability_error_names_metric():
    cfg = MmdConfig(orbit_max_size=5, metrics=("orbits",))
    with pytest.raises(CapabilityError, match="orbits"):
        mmd_suite([empty_graph(700)], [empty_graph(700)], cfg)


def test_suite_parallel_matches_serial():
    graphs = [gen_er(40, 0.15, s) for s in range(6)]
    serial = mmd_suite(graphs[:3], graphs[3:], FAST)
    par = mmd_suite(graphs[:3], graphs[3:], FAST, n_jobs=2)
    assert serial.values == par.values


def test_report_json_round_trip():
    graphs = [gen_er(30, 0.2, s) for s in range(4)]
    report = mmd_suite(graphs[:2], graphs[2:], FAST)
    back = MmdReport.from_json(report.to_json())
    assert back.values == report.values
    assert json.loads(report.to_json())["metadata"]["config"]["nspdk_r_max"] == 1
