"""One test per acceptance criterion, each printing a PASS/FAIL line.

Criteria 1 and 3 share a single full pipeline run (5 classes x 100 graphs of
300 nodes plus a rewired nPSO subject), which takes roughly a quarter of an
hour on one core.
"""

import filecmp
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, complete_graph, cycle_graph, path_graph, star_graph
from ggmeval.cli import main
from ggmeval.descriptors import Histogram, normalized_laplacian_spectrum, orbit_counts
from ggmeval.embed.model import EmbedderConfig, init_params
from ggmeval.embed.training import Triplet
from ggmeval.features import k_core_numbers, local_clustering
from ggmeval.generators import gen_ba, gen_er, gen_lfr, rewire_preserving_degree
from ggmeval.harness import SplitSpec, parse_config, run_experiment, split_indices
from ggmeval.knn import confusion_matrix, dynamic_k
from ggmeval.mmd import KernelSpec, mmd_squared
from ggmeval.report import topo_summary
from oracles import brute_orbits_4, fd_relative_errors


def verdict(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


DESK_RUN = """
seed = 2024
corpus.classes = BA, ER, LFR, nPSO, SBM
corpus.per_class = 100
corpus.nodes = 300
subjects = rewire_nPSO
subject.rewire_nPSO.kind = rewire
subject.rewire_nPSO.class = nPSO
subject.rewire_nPSO.count = 30
subject.rewire_nPSO.swaps_per_edge = 10
"""


@pytest.fixture(scope="module")
def desk_run(tmp_path_factory):
    t0 = time.perf_counter()
    result = run_experiment(parse_config(DESK_RUN), tmp_path_factory.mktemp("desk_run"))
    return result, time.perf_counter() - t0


def _stage_seconds(result, prefixes):
    return sum(s["seconds"] for s in result.log["stages"] if s["stage"].startswith(prefixes))


def test_criterion_1_synthetic_classes(desk_run):
    result, seconds = desk_run
    diag = result.confusion["test"].diagonal()
    core = seconds - _stage_seconds(result, ("subject", "classify_subjects", "mmd", "report"))
    ok = all(v >= 90.0 for v in diag.values()) and core < 30 * 60
    verdict(1, ok, "diagonal " + ", ".join(f"{c}={v:.1f}" for c, v in diag.items()) + f"; {core / 60:.1f} min")


def test_criterion_2_mmd_estimator():
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    worst_self, symmetric = 0.0, True
    for _ in range(100):
        bins = int(rng.integers(2, 20))
        sets = []
        for _ in range(2):
            m = rng.random((int(rng.integers(1, 10)), bins))
            sets.append([Histogram(np.arange(bins + 1.0), row / row.sum(), "t") for row in m])
        spec = KernelSpec(str(rng.choice(["gaussian_tv", "gaussian_emd"])), float(rng.uniform(0.1, 3)))
        worst_self = max(worst_self, abs(mmd_squared(sets[0], sets[0], spec)))
        symmetric &= mmd_squared(sets[0], sets[1], spec) == mmd_squared(sets[1], sets[0], spec)
    h1 = Histogram(np.arange(3.0), np.array([1.0, 0.0]), "t")
    h2 = Histogram(np.arange(3.0), np.array([0.0, 1.0]), "t")
    example = mmd_squared([h1, h1], [h2], KernelSpec("gaussian_tv", 1.0))
    err = abs(example - (2 - 2 * math.exp(-0.5)))
    seconds = time.perf_counter() - t0
    verdict(2, worst_self <= 1e-12 and symmetric and err <= 1e-12,
            f"max |MMD(X,X)| = {worst_self:.1e}, symmetric = {symmetric}, 2-vs-1 error = {err:.1e}, {seconds:.1f} s")


def test_criterion_3_mmd_blind_spot(desk_run):
    result, _ = desk_run
    mmd = result.mmd["rewire_nPSO"].values
    row = result.confusion["rewire_nPSO"]
    as_npso = row["percent"][row["classes"].index("nPSO")]
    seconds = _stage_seconds(result, ("subject", "classify_subjects", "mmd", "report"))
    ok = mmd["degree"] < 1e-3 and mmd["clustering"] >= 10 * mmd["degree"] and as_npso < 50.0 and seconds < 600
    verdict(3, ok, f"degree MMD = {mmd['degree']:.2e}, clustering MMD = {mmd['clustering']:.3f}, "
                   f"rewires classified nPSO = {as_npso:.1f}%, {seconds:.0f} s")


def test_criterion_4_orbit_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    graphs = [gen_er(15, 0.3, int(rng.integers(2**31))) for _ in range(50)]
    graphs += [path_graph(k) for k in range(2, 7)] + [cycle_graph(k) for k in range(3, 8)]
    graphs += [complete_graph(k) for k in range(2, 7)] + [star_graph(k) for k in range(1, 6)]
    mismatches = sum(not np.array_equal(orbit_counts(g).per_node, brute_orbits_4(g)) for g in graphs)
    seconds = time.perf_counter() - t0
    verdict(4, mismatches == 0 and seconds < 60, f"{len(graphs)} graphs, {mismatches} mismatches, {seconds:.1f} s")


def test_criterion_5_gradient_check():
    cfg = EmbedderConfig(out_dim=3)
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        graphs = [gen_er(int(rng.integers(2, 7)), float(rng.uniform(0.3, 0.9)), int(rng.integers(2**31)))
                  for _ in range(4)]
        features = [rng.normal(size=(g.n, 4)) for g in graphs]
        params = init_params(cfg, seed)
        params["fc2.W"] *= 3.0
        triplets = [Triplet(*rng.choice(4, 3, replace=False).tolist(), "a", "b") for _ in range(4)]
        worst = max(worst, max(fd_relative_errors(params, triplets, graphs, features, cfg).values()))
    verdict(5, worst < 1e-4, f"worst relative error {worst:.2e} over 20 batches")


def test_criterion_6_spectral_closed_forms():
    worst = 0.0
    for n in range(3, 21):
        k = normalized_laplacian_spectrum(complete_graph(n))
        worst = max(worst, np.max(np.abs(k - np.array([0.0] + [n / (n - 1)] * (n - 1)))))
        c = normalized_laplacian_spectrum(cycle_graph(n))
        expected = np.sort([1 - math.cos(2 * math.pi * j / n) for j in range(n)])
        worst = max(worst, np.max(np.abs(c - expected)))
    verdict(6, worst <= 1e-9, f"max deviation {worst:.1e}")


def test_criterion_7_classic_values():
    checks = {
        "star assortativity": topo_summary(star_graph(5)).assortativity == pytest.approx(-1.0, abs=1e-12),
        "K4 transitivity": topo_summary(complete_graph(4)).transitivity == 1.0,
        "K4 k-core": int(k_core_numbers(complete_graph(4)).max()) == 3,
        "triangle clustering": bool(np.all(local_clustering(complete_graph(3)) == 1.0)),
        "dynamic_k(100)": dynamic_k(100) == 10,
    }
    labels = [c for c in range(10) for _ in range(300)]
    parts = split_indices(labels, SplitSpec(seed=7))
    y = np.asarray(labels)
    checks["split 192/48/60"] = all([int((y[p] == c).sum()) for p in parts] == [192, 48, 60] for c in range(10))
    rng = np.random.default_rng(0)
    truth, pred = rng.integers(0, 5, 997).tolist(), rng.integers(0, 5, 997).tolist()
    cm = confusion_matrix(pred, truth, list(range(5)))
    checks["confusion rows"] = bool(np.all(np.abs(cm.percent.sum(axis=1) - 100) <= 0.1))
    failed = [k for k, v in checks.items() if not v]
    verdict(7, not failed, "all exact" if not failed else f"failed: {failed}")


def test_criterion_8_determinism(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("\n".join([
        "seed = 11", "corpus.classes = ER, BA, nPSO", "corpus.per_class = 12", "corpus.nodes = 60",
        "train.max_epochs = 3", "train.triplets_per_epoch = 25", "train.val_triplets = 25",
        "subjects = rw", "subject.rw.class = nPSO", "subject.rw.count = 4", "subject.rw.swaps_per_edge = 5",
    ]) + "\n")
    for name in ("a", "b"):
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
    files = ["predictions_test.csv", "predictions_rw.csv", "confusion_test.csv", "mmd_rw.json", "mmd.csv",
             "report_summary.csv", "report_long.csv"]
    _, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", files, shallow=False)
    verdict(8, not mismatch and not errors, f"{len(files)} files compared, differing: {mismatch + errors}")


def test_criterion_9_generator_statistics():
    n, p, seeds = 200, 0.05, 200
    pairs = n * (n - 1) // 2
    counts = np.array([gen_er(n, p, s).m for s in range(seeds)])
    z = abs(counts.mean() - pairs * p) / math.sqrt(pairs * p * (1 - p) / seeds)
    ba_ok = all(gen_ba(n_, m_, s).m == (m_ - 1) + m_ * (n_ - m_) for n_, m_ in ((300, 3), (1000, 10)) for s in range(5))
    mix_err = 0.0
    for mu in (0.1, 0.3, 0.5):
        fractions = []
        for s in range(10):
            g, comm = gen_lfr(1000, 2.5, 1.5, mu, 15, 50, 20, 100, s, return_communities=True)
            external = comm[g.edges[:, 0]] != comm[g.edges[:, 1]]
            ext_deg = np.zeros(g.n)
            np.add.at(ext_deg, g.edges[external, 0], 1)
            np.add.at(ext_deg, g.edges[external, 1], 1)
            fractions.append(np.mean(ext_deg / np.maximum(g.degrees, 1)))
        mix_err = max(mix_err, abs(np.mean(fractions) - mu))
    rewire_ok = True
    for s in range(10):
        g = gen_ba(300, 4, s)
        rewire_ok &= np.array_equal(np.sort(rewire_preserving_degree(g, 10, s).degrees), np.sort(g.degrees))
    ok = z < 4 and ba_ok and mix_err <= 0.05 and rewire_ok
    verdict(9, ok, f"ER z = {z:.2f}, BA exact = {ba_ok}, LFR mixing error = {mix_err:.3f}, rewire = {rewire_ok}")
