"""End-to-end experiment: corpus, split, training, classification, MMD, topology report."""

from __future__ import annotations

import contextlib
import csv
import hashlib
import json
import logging
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy
import sklearn
from threadpoolctl import threadpool_limits

from .. import __version__
from ..embed import checkpoint
from ..estimator import GraphEmbeddingClassifier
from ..exceptions import StageError
from ..generators import GeneratorSpec, corpus_spec, generate, rewire_preserving_degree
from ..graph import write_edge_list
from ..knn import classify, confusion_matrix
from ..mmd import KernelSpec, MmdConfig, mmd_suite
from ..report import compare_ensembles
from ..seeding import derive_seed
from .config import ExperimentConfig
from .manifest import ManifestRecord, corpus_stats, load_manifest, write_manifest, write_stats_csv
from .split import SplitSpec, split_indices

log = logging.getLogger(__name__)

MMD_COLUMNS = {"degree": "Degree", "clustering": "Clustering", "orbits": "Orbits",
               "spectral": "Spectral", "nspdk": "NSPDK"}


def fmt(x) -> str:
    return format(float(x), ".17g")


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunResult:
    out_dir: Path
    log: dict
    classifier: GraphEmbeddingClassifier | None = None
    confusion: dict = field(default_factory=dict)  # "test" and subject name -> ConfusionMatrix
    mmd: dict = field(default_factory=dict)  # subject name -> MmdReport
    reports: dict = field(default_factory=dict)  # subject name -> EnsembleComparison


class _RunLog:
    def __init__(self, out_dir: Path, cfg: ExperimentConfig):
        self.out_dir = out_dir
        self.data = {
            "status": "running",
            "config": {k: list(v) if isinstance(v, tuple) else v for k, v in cfg.resolved().items()},
            "config_hash": cfg.hash(),
            "versions": {"ggmeval": __version__, "python": platform.python_version(), "numpy": np.__version__,
                         "scipy": scipy.__version__, "scikit-learn": sklearn.__version__},
            "seeds": {},
            "stages": [],
            "outputs": {},
        }

    def seed(self, key: str, value: int) -> int:
        self.data["seeds"][key] = value
        return value

    @contextlib.contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        log.info("stage %s", name)
        try:
            yield
        except Exception as exc:
            self.data["stages"].append({"stage": name, "status": "failed", "seconds": time.perf_counter() - t0})
            self.fail(name, exc)
            raise StageError(name, exc) from exc
        self.data["stages"].append({"stage": name, "status": "ok", "seconds": time.perf_counter() - t0})

    def fail(self, name: str, exc: Exception) -> None:
        self.data["status"] = "failed"
        self.data["failed_stage"] = name
        self.data["error"] = f"{type(exc).__name__}: {exc}"
        (self.out_dir / "FAILED").write_text(f"stage {name}: {type(exc).__name__}: {exc}\n")
        self.write()

    def write(self) -> None:
        outputs = {}
        for p in sorted(self.out_dir.rglob("*")):
            if p.is_file() and p.name not in ("run_log.json", "FAILED"):
                outputs[str(p.relative_to(self.out_dir))] = sha256_file(p)
        self.data["outputs"] = outputs
        (self.out_dir / "run_log.json").write_text(json.dumps(self.data, indent=2, sort_keys=True))


def mmd_config_from(cfg: ExperimentConfig) -> MmdConfig:
    sigma = cfg["mmd.sigma"]
    return MmdConfig(degree_kernel=KernelSpec("gaussian_tv", sigma),
                     clustering_kernel=KernelSpec("gaussian_tv", sigma),
                     orbit_kernel=KernelSpec("gaussian_rbf", sigma),
                     spectral_kernel=KernelSpec("gaussian_tv", sigma),
                     clustering_bins=cfg["mmd.clustering_bins"], spectral_bins=cfg["mmd.spectral_bins"],
                     orbit_max_size=cfg["mmd.orbit_max_size"], nspdk_r_max=cfg["mmd.nspdk_r"],
                     nspdk_d_max=cfg["mmd.nspdk_d"], metrics=tuple(cfg["mmd.metrics"]))


def classifier_from_config(cfg: ExperimentConfig, seed: int) -> GraphEmbeddingClassifier:
    return GraphEmbeddingClassifier(
        hidden=cfg["model.hidden"], heads=cfg["model.heads"], layers=cfg["model.layers"],
        fc_hidden=cfg["model.fc_hidden"], pooling=cfg["model.pooling"], scaling=cfg["features.scaling"],
        lr=cfg["train.lr"], weight_decay=cfg["train.weight_decay"], margin=cfg["train.margin"],
        max_epochs=cfg["train.max_epochs"], patience=cfg["train.patience"], min_delta=cfg["train.min_delta"],
        triplets_per_epoch=cfg["train.triplets_per_epoch"], batch_size=cfg["train.batch_size"],
        val_triplets=cfg["train.val_triplets"], random_state=seed)


def provenance(spec: GeneratorSpec) -> str:
    """Manifest ``meta`` cell recording how a graph was sampled."""
    return json.dumps({"family": spec.family, "params": spec.params, "seed": spec.seed}, sort_keys=True)


def write_graphs(graphs, labels, folder: Path, prefix: str = "", metas=None) -> list[ManifestRecord]:
    folder.mkdir(parents=True, exist_ok=True)
    records = []
    counters: dict = {}
    metas = metas if metas is not None else [""] * len(graphs)
    for g, y, meta in zip(graphs, labels, metas):
        i = counters.get(y, 0)
        counters[y] = i + 1
        name = f"{prefix}{y}_{i:04d}.edges"
        write_edge_list(g, folder / name)
        records.append(ManifestRecord(name, y, meta))
    write_manifest(records, folder / "manifest.csv")
    return records


def write_predictions(path: Path, names, truth, pred, scores, classes) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["graph", "true", "predicted"] + [f"score_{c}" for c in classes])
        for name, t, p, s in zip(names, truth, pred, scores):
            w.writerow([name, t, p] + [fmt(s[c]) for c in classes])


def write_mmd_csv(path: Path, rows: dict, metrics) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["class"] + [MMD_COLUMNS[m] for m in metrics])
        for label, report in rows.items():
            w.writerow([label] + [fmt(report.values[m]) for m in metrics])


def subject_row(pred, classes, label: str):
    counts = np.array([sum(p == c for p in pred) for c in classes], dtype=np.float64)
    return {"label": label, "classes": list(classes), "percent": (100.0 * counts / max(len(pred), 1)).tolist()}


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> RunResult:
    """Run every stage, writing artifacts and ``run_log.json`` under ``out_dir``.

    A failing stage leaves a ``FAILED`` marker next to the partial artifacts
    and raises :class:`StageError` naming the stage.
    """
    out = Path(out_dir if out_dir is not None else cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "FAILED").unlink(missing_ok=True)
    (out / "config.txt").write_text(cfg.to_text())
    runlog = _RunLog(out, cfg)
    master = cfg["seed"]
    result = RunResult(out, runlog.data)
    threads = max(1, cfg["threads"])

    with threadpool_limits(limits=threads):
        with runlog.stage("generate"):
            if cfg["corpus.manifest"]:
                corpus = load_manifest(cfg["corpus.manifest"])
                graphs, labels = corpus.graphs, corpus.labels
                names = [r.path for r in corpus.manifest.records]
            else:
                graphs, labels, metas = [], [], []
                for c in cfg["corpus.classes"]:
                    for i in range(cfg["corpus.per_class"]):
                        seed = runlog.seed(f"corpus:{c}:{i}", derive_seed(master, f"corpus:{c}", i))
                        spec = corpus_spec(c, cfg["corpus.nodes"], seed)
                        graphs.append(generate(spec))
                        labels.append(c)
                        metas.append(provenance(spec))
                names = [r.path for r in write_graphs(graphs, labels, out / "corpus", metas=metas)]
            write_stats_csv(corpus_stats(graphs, labels), out / "corpus_stats.csv")

        with runlog.stage("split"):
            spec = SplitSpec(cfg["split.train"], cfg["split.val"], cfg["split.test"], cfg["split.stratified"],
                             runlog.seed("split", derive_seed(master, "split")))
            tr, va, te = split_indices(labels, spec)
            part = {int(i): p for p, idx in (("train", tr), ("val", va), ("test", te)) for i in idx}
            with open(out / "split.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["graph", "class", "part"])
                for i, (name, y) in enumerate(zip(names, labels)):
                    w.writerow([name, y, part[i]])

        y = np.asarray(labels)
        with runlog.stage("train"):
            clf = classifier_from_config(cfg, runlog.seed("train", derive_seed(master, "train")))
            clf.fit([graphs[i] for i in tr], y[tr], [graphs[i] for i in va], y[va])
            result.classifier = clf
            (out / "model").mkdir(exist_ok=True)
            checkpoint.save(clf.checkpoint(), out / "model" / "checkpoint.json")
            with open(out / "model" / "history.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["epoch", "train_loss", "val_loss"])
                for h in clf.history_:
                    w.writerow([h["epoch"], fmt(h["train_loss"]), fmt(h["val_loss"])])

        classes = [str(c) for c in clf.classes_]
        with runlog.stage("classify"):
            test_graphs = [graphs[i] for i in te]
            emb = clf.transform(test_graphs)
            scored = [classify(h, clf.anchor_index_) for h in emb]
            pred = [p for p, _ in scored]
            write_predictions(out / "predictions_test.csv", [names[i] for i in te], y[te].tolist(), pred,
                              [s for _, s in scored], classes)
            cm = confusion_matrix(pred, y[te].tolist(), classes)
            cm.write_csv(out / "confusion_test.csv")
            result.confusion["test"] = cm

        subjects = {}
        for name in cfg["subjects"]:
            sub = cfg.subject(name)
            with runlog.stage(f"subject:{name}"):
                ref_cls = sub["class"]
                if sub["kind"] == "rewire":
                    ref = [generate(corpus_spec(ref_cls, cfg["corpus.nodes"], runlog.seed(
                        f"subject:{name}:ref:{i}", derive_seed(master, f"subject:{name}:ref", i))))
                        for i in range(sub["count"])]
                    gen = [rewire_preserving_degree(g, sub["swaps_per_edge"], runlog.seed(
                        f"subject:{name}:rewire:{i}", derive_seed(master, f"subject:{name}:rewire", i)))
                        for i, g in enumerate(ref)]
                    folder = out / "subjects" / name
                    write_graphs(ref, ["ref"] * len(ref), folder / "ref")
                    write_graphs(gen, [name] * len(gen), folder / "gen")
                else:
                    gen = load_manifest(sub["manifest"]).graphs
                    ref = [graphs[i] for i in te if labels[i] == ref_cls]
                if not ref:
                    raise ValueError(f"subject {name}: no reference graphs of class {ref_cls!r}")
                subjects[name] = (ref_cls, ref, gen)

        with runlog.stage("classify_subjects"):
            summary = {}
            for name, (ref_cls, _, gen) in subjects.items():
                scored = [classify(h, clf.anchor_index_) for h in clf.transform(gen)]
                pred = [p for p, _ in scored]
                write_predictions(out / f"predictions_{name}.csv", [f"{name}_{i:04d}" for i in range(len(gen))],
                                  [name] * len(gen), pred, [s for _, s in scored], classes)
                summary[name] = subject_row(pred, classes, name)
                result.confusion[name] = summary[name]
            if subjects:
                with open(out / "confusion_subjects.csv", "w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(["subject"] + classes)
                    for name, row in summary.items():
                        w.writerow([name] + [fmt(x) for x in row["percent"]])

        with runlog.stage("mmd"):
            mcfg = mmd_config_from(cfg)
            for name, (ref_cls, ref, gen) in subjects.items():
                report = mmd_suite(ref, gen, mcfg, n_jobs=threads)
                report.metadata.update({"subject": name, "reference_class": ref_cls})
                (out / f"mmd_{name}.json").write_text(report.to_json())
                result.mmd[name] = report
            if subjects:
                write_mmd_csv(out / "mmd.csv", result.mmd, mcfg.metrics)

        with runlog.stage("report"):
            for k, (name, (ref_cls, ref, gen)) in enumerate(subjects.items()):
                comp = compare_ensembles(ref, gen, label=name,
                                         seed=runlog.seed(f"report:{name}", derive_seed(master, "report", k)))
                comp.write_summary_csv(out / "report_summary.csv", append=k > 0)
                comp.write_long_csv(out / "report_long.csv", append=k > 0)
                result.reports[name] = comp

    runlog.data["status"] = "ok"
    runlog.write()
    return result
