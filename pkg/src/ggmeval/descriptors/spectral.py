from __future__ import annotations

import numpy as np

from ..exceptions import CapabilityError
from ..graph import Graph
from .histograms import Histogram

EIGEN_LIMIT = 3000


def normalized_laplacian(g: Graph) -> np.ndarray:
    """Dense ``I - D^-1/2 A D^-1/2``; rows of isolated nodes are all zero."""
    deg = g.degrees.astype(np.float64)
    inv_sqrt = np.zeros(g.n)
    inv_sqrt[deg > 0] = 1.0 / np.sqrt(deg[deg > 0])
    A = g.adjacency().toarray().astype(np.float64)
    L = -(inv_sqrt[:, None] * A * inv_sqrt[None, :])
    L[np.diag_indices(g.n)] = (deg > 0).astype(np.float64)
    return L


def normalized_laplacian_spectrum(g: Graph) -> np.ndarray:
    if g.n > EIGEN_LIMIT:
        raise CapabilityError(f"spectrum limited to {EIGEN_LIMIT} nodes, graph has {g.n}")
    if g.n == 0:
        return np.zeros(0)
    return np.linalg.eigvalsh(normalized_laplacian(g))


def spectral_descriptor(g: Graph, bins: int = 200) -> Histogram:
    """Normalised-Laplacian eigenvalue histogram on ``[0, 2]``."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    # eigensolver noise depends on node order; snapping to a 1e-10 grid keeps
    # eigenvalues that sit exactly on a bin edge (0.5, 1, 1.5 ...) in one bin
    ev = np.clip(np.round(normalized_laplacian_spectrum(g), 10), 0.0, 2.0)
    counts, edges = np.histogram(ev, bins=bins, range=(0.0, 2.0))
    total = counts.sum()
    mass = counts / total if total else counts.astype(np.float64)
    return Histogram(edges, mass, "spectral")
