"""Manifests, splits, configuration and the experiment pipeline."""

from .config import ExperimentConfig, parse_config, read_config
from .manifest import Corpus, Manifest, ManifestRecord, corpus_stats, load_manifest, read_manifest, write_manifest
from .pipeline import RunResult, run_experiment
from .split import SplitSpec, split_indices

__all__ = [
    "Corpus",
    "ExperimentConfig",
    "Manifest",
    "ManifestRecord",
    "RunResult",
    "SplitSpec",
    "corpus_stats",
    "load_manifest",
    "parse_config",
    "read_config",
    "read_manifest",
    "run_experiment",
    "split_indices",
    "write_manifest",
]
