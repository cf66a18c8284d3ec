import numpy as np
import pytest
from hypothesis import strategies as st

from mlcores.graph import DirectedMultilayerGraph, MultilayerGraph

ACCEPTANCE_RESULTS = {}


def random_graph(rng, max_nodes=12, max_layers=4, probs=(0.2, 0.5, 0.8)) -> MultilayerGraph:
    n = int(rng.integers(1, max_nodes + 1))
    L = int(rng.integers(1, max_layers + 1))
    p = float(rng.choice(probs))
    rows = [(l, u, v) for l in range(L) for u in range(n) for v in range(u + 1, n)
            if rng.random() < p]
    return _from_rows(MultilayerGraph, rows, n, L)


def random_digraph(rng, max_nodes=8, max_layers=3, probs=(0.2, 0.4, 0.7)) -> DirectedMultilayerGraph:
    n = int(rng.integers(1, max_nodes + 1))
    L = int(rng.integers(1, max_layers + 1))
    p = float(rng.choice(probs))
    rows = [(l, u, v) for l in range(L) for u in range(n) for v in range(n)
            if u != v and rng.random() < p]
    return _from_rows(DirectedMultilayerGraph, rows, n, L)


def _from_rows(cls, rows, n, L):
    arr = np.array(rows, dtype=np.int64).reshape(-1, 3)
    return cls.from_edges(arr[:, 0], arr[:, 1], arr[:, 2], n, L)


def graph_suite(count, seed, **kw):
    rng = np.random.default_rng(seed)
    return [random_graph(rng, **kw) for _ in range(count)]


def digraph_suite(count, seed, **kw):
    rng = np.random.default_rng(seed)
    return [random_digraph(rng, **kw) for _ in range(count)]


@st.composite
def ml_graphs(draw, max_nodes=9, max_layers=3):
    n = draw(st.integers(1, max_nodes))
    L = draw(st.integers(1, max_layers))
    pairs = [(l, u, v) for l in range(L) for u in range(n) for v in range(u + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return _from_rows(MultilayerGraph, [e for e, keep in zip(pairs, mask) if keep], n, L)


@st.composite
def ml_digraphs(draw, max_nodes=6, max_layers=3):
    n = draw(st.integers(1, max_nodes))
    L = draw(st.integers(1, max_layers))
    pairs = [(l, u, v) for l in range(L) for u in range(n) for v in range(n) if u != v]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return _from_rows(DirectedMultilayerGraph, [e for e, keep in zip(pairs, mask) if keep], n, L)


def clique_rows(nodes, layer):
    return [(layer, u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:]]


@pytest.fixture
def from_rows():
    return _from_rows


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split(".")[0])):
        ok, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
