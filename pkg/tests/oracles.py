"""Independent reference computations shared by the unit and acceptance tests."""

import itertools

import networkx as nx
import numpy as np

from ggmeval.embed.training import batch_loss, loss_and_grad


def to_nx(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(map(tuple, g.edges.tolist()))
    return G


# -- brute-force orbit oracles --------------------------------------------------

def brute_orbits_4(g):
    """Classify every connected induced subgraph on 2-4 nodes by its degree pattern."""
    G = to_nx(g)
    out = np.zeros((g.n, 15), dtype=np.int64)
    for size in (2, 3, 4):
        for nodes in itertools.combinations(range(g.n), size):
            H = G.subgraph(nodes)
            if not nx.is_connected(H):
                continue
            deg = dict(H.degree())
            m = H.number_of_edges()
            for v in nodes:
                d = deg[v]
                if size == 2:
                    o = 0
                elif size == 3:
                    o = 3 if m == 3 else (2 if d == 2 else 1)
                elif m == 3:
                    if max(deg.values()) == 3:
                        o = 7 if d == 3 else 6
                    else:
                        o = 5 if d == 2 else 4
                elif m == 4:
                    if max(deg.values()) == 2:
                        o = 8
                    else:
                        o = {1: 9, 2: 10, 3: 11}[d]
                elif m == 5:
                    o = 13 if d == 3 else 12
                else:
                    o = 14
                out[v, o] += 1
    return out


def fd_relative_errors(params, triplets, graphs, features, cfg, margin=1.0, step=1e-5, floor=1e-5):
    """Worst relative error per parameter between the analytic and central-difference gradients."""
    _, grads = loss_and_grad(params, triplets, graphs, features, cfg, margin)
    worst = {}
    for name, p in params.items():
        fd = np.zeros_like(p)
        for i in np.ndindex(p.shape):
            old = p[i]
            p[i] = old + step
            up = batch_loss(params, triplets, graphs, features, cfg, margin)
            p[i] = old - step
            down = batch_loss(params, triplets, graphs, features, cfg, margin)
            p[i] = old
            fd[i] = (up - down) / (2 * step)
        g = grads[name]
        denom = np.maximum(np.maximum(np.abs(g), np.abs(fd)), floor)
        worst[name] = float(np.max(np.abs(g - fd) / denom))
    return worst
