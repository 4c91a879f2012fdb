"""Per-graph descriptors compared by the MMD suite."""

from .dump import KINDS, descriptor_payload, write_descriptor_dump
from .histograms import Histogram, clustering_histogram, degree_histogram
from .nspdk import nspdk_features
from .orbits import FIVE_NODE_LIMIT, OrbitDescriptor, orbit_counts
from .spectral import EIGEN_LIMIT, normalized_laplacian, normalized_laplacian_spectrum, spectral_descriptor

__all__ = [
    "EIGEN_LIMIT",
    "KINDS",
    "FIVE_NODE_LIMIT",
    "Histogram",
    "OrbitDescriptor",
    "clustering_histogram",
    "degree_histogram",
    "descriptor_payload",
    "normalized_laplacian",
    "normalized_laplacian_spectrum",
    "nspdk_features",
    "orbit_counts",
    "spectral_descriptor",
    "write_descriptor_dump",
]
