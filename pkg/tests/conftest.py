import os
import sys

import pytest
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from dmr.graph import BipartiteGraph, EdgePartition  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def bipartite_graphs(draw, max_side=6, max_edges=12):
    n_left = draw(st.integers(0, max_side))
    n_right = draw(st.integers(0, max_side))
    if n_left == 0 or n_right == 0:
        return BipartiteGraph(n_left, n_right, ())
    pairs = [(u, v) for u in range(n_left) for v in range(n_right)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=min(max_edges, len(pairs))))
    return BipartiteGraph(n_left, n_right, tuple(edges))


@st.composite
def partitioned_graphs(draw, max_side=8, max_edges=30, max_k=4):
    graph = draw(bipartite_graphs(max_side=max_side, max_edges=max_edges))
    k = draw(st.integers(1, max_k))
    assignment = draw(st.lists(st.integers(0, k - 1), min_size=graph.m, max_size=graph.m))
    return EdgePartition(graph, k, tuple(assignment))


@pytest.fixture
def path3():
    """u0-v0, u1-v0, u1-v1."""
    return BipartiteGraph(2, 2, ((0, 0), (1, 0), (1, 1)))
