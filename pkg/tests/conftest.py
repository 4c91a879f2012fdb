import itertools

import numpy as np
import pytest

from ggmeval.graph import Graph, from_edge_list


def path_graph(n: int) -> Graph:
    return from_edge_list([(i, i + 1) for i in range(n - 1)], n)


def cycle_graph(n: int) -> Graph:
    return from_edge_list([(i, (i + 1) % n) for i in range(n)], n)


def complete_graph(n: int) -> Graph:
    return from_edge_list(list(itertools.combinations(range(n), 2)), n)


def star_graph(leaves: int) -> Graph:
    return from_edge_list([(0, i) for i in range(1, leaves + 1)], leaves + 1)


def k4_minus_edge() -> Graph:
    # nodes 0 and 1 are the degree-3 pair, (2, 3) is the missing edge
    return from_edge_list([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)], 4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance verdict lines, echoed in the terminal summary
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
