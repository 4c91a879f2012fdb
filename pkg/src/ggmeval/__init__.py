"""Toolkit for evaluating graph generative models.

Random-graph generators, graph descriptors, a five-metric MMD suite, a
triplet-trained graph-attention classifier of graph families, and
topological comparison reports, tied together by a reproducible pipeline.
"""

__version__ = "0.1.0"

from .estimator import GraphEmbeddingClassifier  # noqa: E402
from .features import NodeFeatureTransformer, node_features  # noqa: E402
from .graph import Graph, from_edge_list, read_edge_list, write_edge_list  # noqa: E402
from .mmd import KernelSpec, MmdConfig, MmdReport, mmd_squared, mmd_suite  # noqa: E402

__all__ = [
    "Graph",
    "GraphEmbeddingClassifier",
    "KernelSpec",
    "MmdConfig",
    "MmdReport",
    "NodeFeatureTransformer",
    "from_edge_list",
    "mmd_squared",
    "mmd_suite",
    "node_features",
    "read_edge_list",
    "write_edge_list",
]
