"""Command-line entry point: ``ggmeval <subcommand> [options]``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .descriptors import write_descriptor_dump
from .embed import checkpoint
from .estimator import GraphEmbeddingClassifier
from .exceptions import FormatError, StageError
from .features import node_features, write_feature_csv
from .generators import FAMILIES, GeneratorSpec, corpus_spec, generate
from .graph import read_edge_list
from .harness.config import ExperimentConfig, read_config
from .harness.manifest import corpus_stats, load_manifest, write_stats_csv
from .harness.pipeline import (
    classifier_from_config,
    fmt,
    mmd_config_from,
    provenance,
    run_experiment,
    subject_row,
    write_graphs,
    write_mmd_csv,
    write_predictions,
)
from .harness.split import SplitSpec, split_indices
from .knn import classify, confusion_matrix
from .mmd import mmd_suite
from .report import compare_ensembles
from .seeding import derive_seed

log = logging.getLogger("ggmeval")


def _load_config(args) -> ExperimentConfig:
    cfg = read_config(args.config) if args.config else ExperimentConfig()
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise FormatError(f"--set expects key=value, got {item!r}")
        cfg.set(key.strip(), value)
    if args.seed is not None:
        cfg.set("seed", args.seed)
    if args.out is not None:
        cfg.set("out", args.out)
    if args.threads is not None:
        cfg.set("threads", args.threads)
    return cfg


def _parse_param(text: str):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    value = value.strip()
    if "," in value:
        return key.strip(), [float(v) for v in value.split(",")]
    for conv in (int, float):
        try:
            return key.strip(), conv(value)
        except ValueError:
            pass
    return key.strip(), value


def cmd_generate(args, cfg: ExperimentConfig) -> None:
    out = Path(cfg["out"])
    seed = cfg["seed"]
    source = read_edge_list(args.source) if args.source else None
    graphs, labels, metas = [], [], []
    for i in range(args.count):
        if args.cls:
            label = args.cls
            spec = corpus_spec(args.cls, args.nodes, derive_seed(seed, f"generate:{label}", i))
        else:
            label = args.label or args.family
            spec = GeneratorSpec(args.family, dict(args.param or []), derive_seed(seed, f"generate:{label}", i))
        graphs.append(generate(spec, source))
        labels.append(label)
        metas.append(provenance(spec))
    write_graphs(graphs, labels, out, metas=metas)
    write_stats_csv(corpus_stats(graphs, labels), out / "stats.csv")
    print(f"wrote {len(graphs)} graphs to {out}")


def _graphs_from(args):
    if args.manifest:
        corpus = load_manifest(args.manifest)
        return corpus.graphs, corpus.labels, [Path(r.path).stem for r in corpus.manifest.records]
    graphs = [read_edge_list(p) for p in args.graphs]
    return graphs, [""] * len(graphs), [Path(p).stem for p in args.graphs]


def cmd_featurize(args, cfg: ExperimentConfig) -> None:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    graphs, labels, stems = _graphs_from(args)
    scaling = args.scaling or cfg["features.scaling"]
    for g, stem in zip(graphs, stems):
        write_feature_csv(node_features(g, scaling), out / f"{stem}.features.csv")
    if args.descriptors:
        write_descriptor_dump(out / "descriptors.jsonl", graphs, labels, stems,
                              [k.strip() for k in args.descriptors.split(",")],
                              orbit_max_size=cfg["mmd.orbit_max_size"], r_max=cfg["mmd.nspdk_r"],
                              d_max=cfg["mmd.nspdk_d"])
    print(f"wrote {len(graphs)} feature files to {out}")


def cmd_train(args, cfg: ExperimentConfig) -> None:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    corpus = load_manifest(args.manifest)
    master = cfg["seed"]
    spec = SplitSpec(cfg["split.train"], cfg["split.val"], cfg["split.test"], cfg["split.stratified"],
                     derive_seed(master, "split"))
    tr, va, te = split_indices(corpus.labels, spec)
    y = np.asarray(corpus.labels)
    g = corpus.graphs
    clf = classifier_from_config(cfg, derive_seed(master, "train"))
    clf.fit([g[i] for i in tr], y[tr], [g[i] for i in va], y[va])
    checkpoint.save(clf.checkpoint(), out / "checkpoint.json")
    names = [r.path for r in corpus.manifest.records]
    part = {int(i): p for p, idx in (("train", tr), ("val", va), ("test", te)) for i in idx}
    with open(out / "split.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["graph", "class", "part"])
        for i, (name, lab) in enumerate(zip(names, corpus.labels)):
            w.writerow([name, lab, part[i]])
    with open(out / "history.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "train_loss", "val_loss"])
        for h in clf.history_:
            w.writerow([h["epoch"], fmt(h["train_loss"]), fmt(h["val_loss"])])
    print(f"trained for {len(clf.history_)} epochs; checkpoint in {out / 'checkpoint.json'}")


def cmd_classify(args, cfg: ExperimentConfig) -> None:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    clf = GraphEmbeddingClassifier.from_checkpoint(checkpoint.load(args.checkpoint))
    graphs, labels, stems = _graphs_from(args)
    classes = [str(c) for c in clf.classes_]
    scored = [classify(h, clf.anchor_index_) for h in clf.transform(graphs)]
    pred = [p for p, _ in scored]
    write_predictions(out / "predictions.csv", stems, labels, pred, [s for _, s in scored], classes)
    if all(lab in classes for lab in labels):
        cm = confusion_matrix(pred, labels, classes)
        cm.write_csv(out / "confusion.csv")
    else:
        with open(out / "confusion.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["true"] + classes)
            for lab in sorted(set(labels)):
                row = subject_row([p for p, t in zip(pred, labels) if t == lab], classes, lab)
                w.writerow([lab] + [fmt(x) for x in row["percent"]])
    print(f"classified {len(graphs)} graphs; predictions in {out / 'predictions.csv'}")


def cmd_mmd(args, cfg: ExperimentConfig) -> None:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    ref = load_manifest(args.ref).graphs
    gen = load_manifest(args.gen).graphs
    mcfg = mmd_config_from(cfg)
    report = mmd_suite(ref, gen, mcfg, n_jobs=max(1, cfg["threads"]))
    label = args.label or Path(args.gen).parent.name or "gen"
    report.metadata["label"] = label
    (out / "mmd.json").write_text(report.to_json())
    write_mmd_csv(out / "mmd.csv", {label: report}, mcfg.metrics)
    for m, v in report.values.items():
        print(f"{m}\t{fmt(v)}")


def cmd_report(args, cfg: ExperimentConfig) -> None:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    ref = load_manifest(args.ref).graphs
    gen = load_manifest(args.gen).graphs
    label = args.label or Path(args.gen).parent.name or "gen"
    comp = compare_ensembles(ref, gen, label=label, seed=derive_seed(cfg["seed"], "report"))
    comp.write_summary_csv(out / "report_summary.csv")
    comp.write_long_csv(out / "report_long.csv")
    print(f"wrote {out / 'report_summary.csv'} and {out / 'report_long.csv'}")


def cmd_run(args, cfg: ExperimentConfig) -> None:
    result = run_experiment(cfg)
    cm = result.confusion.get("test")
    if cm is not None:
        for cls, v in cm.diagonal().items():
            print(f"{cls}\t{fmt(v)}")
    print(f"artifacts in {result.out_dir}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--threads", type=int, help="worker threads for descriptor computation and BLAS")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="ggmeval", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="sample random graphs into edge-list files")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--class", dest="cls", help="corpus class preset: BA, ER, LFR, nPSO or SBM")
    src.add_argument("--family", choices=FAMILIES, help="generator family with explicit --param values")
    g.add_argument("--param", action="append", type=_parse_param, metavar="KEY=VALUE")
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--nodes", type=int, default=300, help="node count for --class presets")
    g.add_argument("--label", help="class label written to the manifest (default: family name)")
    g.add_argument("--source", help="edge list to rewire or match (REWIRE, ER_MATCH)")
    g.set_defaults(func=cmd_generate)

    for name, func, text in (("featurize", cmd_featurize, "write per-node feature CSVs"),
                             ("classify", cmd_classify, "classify graphs with a trained checkpoint")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("graphs", nargs="*", help="edge-list files")
        s.add_argument("--manifest", help="manifest CSV instead of positional files")
        if name == "featurize":
            s.add_argument("--scaling", choices=("raw", "log1p", "log1p_standardized"))
            s.add_argument("--descriptors", metavar="KINDS",
                           help="also dump descriptors (comma list of degree, clustering, orbits, spectral, nspdk)")
        else:
            s.add_argument("--checkpoint", required=True)
        s.set_defaults(func=func)

    t = sub.add_parser("train", parents=[common], help="train the embedder on a labelled manifest")
    t.add_argument("--manifest", required=True)
    t.set_defaults(func=cmd_train)

    for name, func, text in (("mmd", cmd_mmd, "five-metric MMD between two manifests"),
                             ("report", cmd_report, "topological comparison of two manifests")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("--ref", required=True, help="reference manifest")
        s.add_argument("--gen", required=True, help="generated manifest")
        s.add_argument("--label", help="row label in the output tables")
        s.set_defaults(func=func)

    r = sub.add_parser("run", parents=[common], help="full pipeline from a config file")
    r.set_defaults(func=cmd_run)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command in ("featurize", "classify") and not (args.graphs or args.manifest):
        print(f"error: {args.command} needs edge-list files or --manifest", file=sys.stderr)
        return 2
    try:
        cfg = _load_config(args)
        args.func(args, cfg)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # every failure exits nonzero naming the subcommand
        print(f"error: stage '{args.command}' failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
