import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete_graph, cycle_graph, path_graph
from ggmeval.exceptions import FormatError
from ggmeval.generators import gen_er
from ggmeval.graph import (
    EXACT_DISTANCE_LIMIT,
    bfs_eccentricity_sample,
    connected_components,
    disjoint_union,
    distance_sources,
    from_edge_list,
    parse_edge_list,
    permute,
    read_edge_list,
    write_edge_list,
)

edge_lists = st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), max_size=80)


def test_canonicalises_pairs():
    g = from_edge_list([(0, 1), (1, 0), (1, 1), (1, 2)])
    assert g.n == 3
    assert g.edge_set() == {(0, 1), (1, 2)}


def test_empty_with_hint():
    g = from_edge_list([], n_hint=5)
    assert g.n == 5 and g.m == 0


def test_k4_any_order():
    pairs = list(itertools.combinations(range(4), 2))
    np.random.default_rng(0).shuffle(pairs)
    g = from_edge_list([(v, u) for u, v in pairs])
    assert g.m == 6 and g.degrees.tolist() == [3, 3, 3, 3]


def test_negative_id_is_format_error():
    with pytest.raises(FormatError):
        from_edge_list([(0, -1)])


def test_hint_below_max_id_is_rejected():
    with pytest.raises(ValueError):
        from_edge_list([(0, 7)], n_hint=3)


@given(edge_lists)
def test_adjacency_matches_edges(pairs):
    g = from_edge_list(pairs)
    assert g.degrees.sum() == 2 * g.m
    for u, v in g.edges:
        assert u < v
        assert v in g.neighbors(u) and u in g.neighbors(v)
    for v in range(g.n):
        nb = g.neighbors(v)
        assert np.all(np.diff(nb) > 0)


@given(edge_lists)
@settings(max_examples=50)
def test_edge_list_round_trip(tmp_path_factory, pairs):
    g = from_edge_list(pairs)
    path = tmp_path_factory.mktemp("rt") / "g.edges"
    write_edge_list(g, path)
    assert read_edge_list(path) == g


def test_parser_skips_comments_and_blanks():
    text = ["# a comment", "% another", "", "0 1", "  1\t2  ", ""]
    g, labels = parse_edge_list(text)
    assert labels is None
    assert g.edge_set() == {(0, 1), (1, 2)}


def test_parser_relabels_string_ids():
    g, labels = parse_edge_list(["a b", "b c"])
    assert labels == ["a", "b", "c"]
    assert g.edge_set() == {(0, 1), (1, 2)}


def test_parser_rejects_short_lines():
    with pytest.raises(FormatError):
        parse_edge_list(["0 1", "2"])


def test_components_examples():
    two_triangles = from_edge_list([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert connected_components(two_triangles).sizes.tolist() == [3, 3]
    assert connected_components(complete_graph(4)).sizes.tolist() == [4]
    assert connected_components(from_edge_list([], 3)).sizes.tolist() == [1, 1, 1]


def test_components_partition_er_graphs():
    rng = np.random.default_rng(7)
    for s in range(1000):
        n = int(rng.integers(1, 40))
        g = gen_er(n, float(rng.uniform(0, 0.15)), s)
        part = connected_components(g)
        assert part.sizes.sum() == n
        assert np.all(np.diff(part.sizes) <= 0)
        assert np.array_equal(np.bincount(part.labels), part.sizes)


@pytest.mark.parametrize("g, expected", [
    (path_graph(3), (2, 4 / 3)),
    (complete_graph(4), (1, 1.0)),
    (cycle_graph(6), (3, 1.8)),
])
def test_exact_distances(g, expected):
    diam, apl = bfs_eccentricity_sample(g, range(g.n))
    assert diam == expected[0]
    assert apl == pytest.approx(expected[1], abs=1e-12)


def test_cycle_apl_by_enumeration():
    # the 15 pair distances of C6 are 6x1, 6x2, 3x3
    d = [min(abs(i - j), 6 - abs(i - j)) for i, j in itertools.combinations(range(6), 2)]
    assert sum(d) / len(d) == pytest.approx(1.8)


def test_distances_restricted_to_lcc():
    g = disjoint_union(path_graph(4), path_graph(2))
    assert bfs_eccentricity_sample(g, [0, 1, 2, 3]) == (3, pytest.approx(10 / 6))
    with pytest.raises(ValueError):
        bfs_eccentricity_sample(g, [4])
    with pytest.raises(ValueError):
        bfs_eccentricity_sample(g, [9])


def test_distance_source_rule():
    small = path_graph(50)
    assert len(distance_sources(small)) == 50
    big = path_graph(EXACT_DISTANCE_LIMIT + 1)
    src = distance_sources(big, np.random.default_rng(0))
    assert len(src) == max(100, math.ceil(math.sqrt(EXACT_DISTANCE_LIMIT + 1)))


def test_permute_moves_nodes():
    g = path_graph(3)
    h = permute(g, [2, 1, 0])
    assert h.edge_set() == {(1, 2), (0, 1)}
    h = permute(g, [1, 2, 0])
    assert h.edge_set() == {(1, 2), (0, 2)}
