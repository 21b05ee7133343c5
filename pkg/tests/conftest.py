import numpy as np
import pytest
from hypothesis import strategies as st

from hgpart.hypergraph import Hypergraph


@st.composite
def hypergraphs(draw, min_n=2, max_n=12, max_edges=20, connected_cover=False):
    n = draw(st.integers(min_n, max_n))
    m = draw(st.integers(0 if not connected_cover else 1, max_edges))
    edges = []
    for _ in range(m):
        size = draw(st.integers(2, min(n, 5)))
        edges.append(draw(st.lists(st.integers(0, n - 1), min_size=size, max_size=size, unique=True)))
    if connected_cover:
        # a path through every node guarantees no isolated node
        edges += [[i, i + 1] for i in range(n - 1)]
    return Hypergraph.from_edges(n, edges)


def random_hypergraph(rng, n, n_edges, max_size=5):
    edges = []
    for _ in range(n_edges):
        s = int(rng.integers(2, min(n, max_size) + 1))
        edges.append(rng.choice(n, size=s, replace=False))
    return Hypergraph.from_edges(n, edges)


@pytest.fixture
def toy():
    # edges {1,2,3} and {1,2} in 1-based terms
    return Hypergraph.from_edges(3, [[0, 1, 2], [0, 1]])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
