"""Multilayer graph containers, edge-list ingestion and synthetic generators.

Graphs are immutable. Nodes and layers carry dense internal ids
``0..num_nodes-1`` / ``0..num_layers-1``; the original identifiers from the
input file are kept in ``node_labels`` and ``layer_labels`` and every public
output is translated back through them.

Edge-list format: one edge per line, ``layer src dst`` as non-negative
integers, extra trailing columns ignored, ``#`` comments skipped.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "MultilayerGraph",
    "DirectedMultilayerGraph",
    "EdgeListStats",
    "EdgeListParseError",
    "EmptyGraphError",
    "as_nodeset",
    "degree_matrix",
    "load_edge_list",
    "write_edge_list",
    "generate_synthetic",
    "generate_synthetic_directed",
]


class EdgeListParseError(ValueError):
    def __init__(self, path, lineno: int, reason: str):
        self.path = str(path)
        self.lineno = lineno
        self.reason = reason
        super().__init__(f"{self.path}:{lineno}: {reason}")


class EmptyGraphError(ValueError):
    pass


def _csr(heads, tails, layers, num_nodes):
    """Node-major CSR with entries sorted by (head, layer, tail)."""
    order = np.lexsort((tails, layers, heads))
    counts = np.bincount(heads, minlength=num_nodes)
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, tails[order].astype(np.int64), layers[order].astype(np.int64)


def _default_labels(labels, n):
    if labels is None:
        return np.arange(n, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (n,):
        raise ValueError(f"expected {n} labels, got {labels.shape}")
    return labels


def _edge_array(layer, src, dst):
    layer = np.asarray(layer, dtype=np.int64).ravel()
    src = np.asarray(src, dtype=np.int64).ravel()
    dst = np.asarray(dst, dtype=np.int64).ravel()
    if not (layer.shape == src.shape == dst.shape):
        raise ValueError("layer, src and dst must have the same length")
    return layer, src, dst


def _check_range(layer, src, dst, num_nodes, num_layers):
    if layer.size == 0:
        return
    if min(layer.min(), src.min(), dst.min()) < 0:
        raise ValueError("negative node or layer id")
    if src.max() >= num_nodes or dst.max() >= num_nodes:
        raise ValueError("node id out of range")
    if layer.max() >= num_layers:
        raise ValueError("layer id out of range")


@dataclass(frozen=True, eq=False)
class MultilayerGraph:
    """Undirected multilayer graph over a shared node set.

    ``edges`` is an ``(m, 3)`` array of ``(layer, u, v)`` rows with ``u < v``,
    lexicographically sorted and free of duplicates. Use :meth:`from_edges`
    to build one from raw (possibly messy) edge arrays.
    """

    num_nodes: int
    num_layers: int
    edges: np.ndarray
    node_labels: np.ndarray = field(default=None)
    layer_labels: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "node_labels", _default_labels(self.node_labels, self.num_nodes))
        object.__setattr__(self, "layer_labels", _default_labels(self.layer_labels, self.num_layers))
        self.edges.setflags(write=False)

    @classmethod
    def from_edges(cls, layer, src, dst, num_nodes=None, num_layers=None,
                   node_labels=None, layer_labels=None) -> "MultilayerGraph":
        """Build a graph from parallel id arrays, dropping self-loops and duplicates."""
        layer, src, dst = _edge_array(layer, src, dst)
        if num_nodes is None:
            num_nodes = int(max(src.max(initial=-1), dst.max(initial=-1)) + 1)
        if num_layers is None:
            num_layers = int(layer.max(initial=-1) + 1)
        _check_range(layer, src, dst, num_nodes, num_layers)
        keep = src != dst
        u = np.minimum(src[keep], dst[keep])
        v = np.maximum(src[keep], dst[keep])
        rows = np.unique(np.stack([layer[keep], u, v], axis=1), axis=0)
        return cls(int(num_nodes), int(num_layers), rows.reshape(-1, 3), node_labels, layer_labels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def layer_edge_counts(self) -> np.ndarray:
        return np.bincount(self.edges[:, 0], minlength=self.num_layers)

    @cached_property
    def _adjacency(self):
        layer, u, v = self.edges.T
        return _csr(np.concatenate([u, v]), np.concatenate([v, u]),
                    np.concatenate([layer, layer]), self.num_nodes)

    @property
    def indptr(self) -> np.ndarray:
        return self._adjacency[0]

    @property
    def neighbor_ids(self) -> np.ndarray:
        return self._adjacency[1]

    @property
    def neighbor_layers(self) -> np.ndarray:
        return self._adjacency[2]

    def neighbors(self, v: int, layer: int) -> np.ndarray:
        """N_layer(v) as a sorted array."""
        lo, hi = self.indptr[v], self.indptr[v + 1]
        lays = self.neighbor_layers[lo:hi]
        a, b = np.searchsorted(lays, [layer, layer + 1])
        return self.neighbor_ids[lo + a:lo + b]

    @cached_property
    def degrees(self) -> np.ndarray:
        """``(num_nodes, num_layers)`` degree matrix of the whole graph."""
        layer, u, v = self.edges.T
        L = self.num_layers
        flat = np.bincount(np.concatenate([u * L + layer, v * L + layer]),
                           minlength=self.num_nodes * L)
        out = flat.reshape(self.num_nodes, L)
        out.setflags(write=False)
        return out

    def subgraph(self, nodes) -> "MultilayerGraph":
        """Induced subgraph on ``nodes``; labels of surviving nodes are kept."""
        nodes = as_nodeset(nodes, self.num_nodes)
        remap = np.full(self.num_nodes, -1, dtype=np.int64)
        remap[nodes] = np.arange(len(nodes))
        layer, u, v = self.edges.T
        keep = (remap[u] >= 0) & (remap[v] >= 0)
        rows = np.stack([layer[keep], remap[u[keep]], remap[v[keep]]], axis=1)
        return MultilayerGraph(len(nodes), self.num_layers, rows.reshape(-1, 3),
                               self.node_labels[nodes], self.layer_labels)

    def to_directed(self) -> "DirectedMultilayerGraph":
        """Directed view with both orientations of every edge."""
        layer, u, v = self.edges.T
        return DirectedMultilayerGraph.from_edges(
            np.concatenate([layer, layer]), np.concatenate([u, v]), np.concatenate([v, u]),
            self.num_nodes, self.num_layers, self.node_labels, self.layer_labels)

    def __repr__(self):
        return (f"MultilayerGraph(num_nodes={self.num_nodes}, num_layers={self.num_layers}, "
                f"num_edges={self.num_edges})")


@dataclass(frozen=True, eq=False)
class DirectedMultilayerGraph:
    """Directed multilayer graph; ``edges`` rows are ``(layer, src, dst)``."""

    num_nodes: int
    num_layers: int
    edges: np.ndarray
    node_labels: np.ndarray = field(default=None)
    layer_labels: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "node_labels", _default_labels(self.node_labels, self.num_nodes))
        object.__setattr__(self, "layer_labels", _default_labels(self.layer_labels, self.num_layers))
        self.edges.setflags(write=False)

    @classmethod
    def from_edges(cls, layer, src, dst, num_nodes=None, num_layers=None,
                   node_labels=None, layer_labels=None) -> "DirectedMultilayerGraph":
        layer, src, dst = _edge_array(layer, src, dst)
        if num_nodes is None:
            num_nodes = int(max(src.max(initial=-1), dst.max(initial=-1)) + 1)
        if num_layers is None:
            num_layers = int(layer.max(initial=-1) + 1)
        _check_range(layer, src, dst, num_nodes, num_layers)
        keep = src != dst
        rows = np.unique(np.stack([layer[keep], src[keep], dst[keep]], axis=1), axis=0)
        return cls(int(num_nodes), int(num_layers), rows.reshape(-1, 3), node_labels, layer_labels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def layer_edge_counts(self) -> np.ndarray:
        return np.bincount(self.edges[:, 0], minlength=self.num_layers)

    @cached_property
    def out_adjacency(self):
        """CSR ``(indptr, targets, layers)`` keyed by source node."""
        layer, s, t = self.edges.T
        return _csr(s, t, layer, self.num_nodes)

    @cached_property
    def in_adjacency(self):
        """CSR ``(indptr, sources, layers)`` keyed by target node."""
        layer, s, t = self.edges.T
        return _csr(t, s, layer, self.num_nodes)

    def _slice(self, adj, v, layer):
        indptr, ids, lays = adj
        lo, hi = indptr[v], indptr[v + 1]
        a, b = np.searchsorted(lays[lo:hi], [layer, layer + 1])
        return ids[lo + a:lo + b]

    def out_neighbors(self, v: int, layer: int) -> np.ndarray:
        return self._slice(self.out_adjacency, v, layer)

    def in_neighbors(self, v: int, layer: int) -> np.ndarray:
        return self._slice(self.in_adjacency, v, layer)

    def _degrees(self, col):
        L = self.num_layers
        layer = self.edges[:, 0]
        flat = np.bincount(self.edges[:, col] * L + layer, minlength=self.num_nodes * L)
        out = flat.reshape(self.num_nodes, L)
        out.setflags(write=False)
        return out

    @cached_property
    def out_degrees(self) -> np.ndarray:
        return self._degrees(1)

    @cached_property
    def in_degrees(self) -> np.ndarray:
        return self._degrees(2)

    def __repr__(self):
        return (f"DirectedMultilayerGraph(num_nodes={self.num_nodes}, "
                f"num_layers={self.num_layers}, num_edges={self.num_edges})")


def as_nodeset(nodes, num_nodes: int) -> np.ndarray:
    """Normalize an iterable of internal ids into a sorted, duplicate-free array."""
    arr = np.unique(np.fromiter(nodes, dtype=np.int64) if not isinstance(nodes, np.ndarray)
                    else nodes.astype(np.int64, copy=False))
    if arr.size and (arr[0] < 0 or arr[-1] >= num_nodes):
        raise IndexError(f"node id out of range [0, {num_nodes})")
    return arr


def degree_matrix(G: MultilayerGraph, nodes) -> np.ndarray:
    """Per-layer degrees of ``nodes`` inside the subgraph they induce.

    Row ``i`` belongs to the ``i``-th smallest id of ``nodes``.
    """
    nodes = as_nodeset(nodes, G.num_nodes)
    mask = np.zeros(G.num_nodes, dtype=bool)
    mask[nodes] = True
    layer, u, v = G.edges.T
    keep = mask[u] & mask[v]
    L = G.num_layers
    flat = np.bincount(np.concatenate([u[keep] * L + layer[keep], v[keep] * L + layer[keep]]),
                       minlength=G.num_nodes * L)
    return flat.reshape(G.num_nodes, L)[nodes]


@dataclass(frozen=True)
class EdgeListStats:
    lines: int
    self_loops: int
    duplicates: int

    @property
    def dropped(self) -> int:
        return self.self_loops + self.duplicates


def _parse_lines(path):
    rows = []
    with open(path, "r", encoding="utf-8", newline=None) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 3:
                raise EdgeListParseError(path, lineno, f"expected 3 fields, got {len(parts)}")
            try:
                row = (int(parts[0]), int(parts[1]), int(parts[2]))
            except ValueError:
                raise EdgeListParseError(path, lineno, f"non-integer token in {line!r}") from None
            if min(row) < 0:
                raise EdgeListParseError(path, lineno, "negative id")
            rows.append(row)
    return rows


def load_edge_list(path, directed: bool = False):
    """Read a ``layer src dst`` edge list.

    Returns ``(graph, stats)``. External ids are mapped to dense internal ids
    in increasing order of the external value. Self-loops and repeated edges
    are dropped and counted in ``stats``; nodes that only appear on dropped
    lines are still kept as isolated nodes.
    """
    rows = _parse_lines(path)
    if not rows:
        raise EmptyGraphError(f"{path}: no edges")
    data = np.array(rows, dtype=np.int64)
    layer_labels, layer = np.unique(data[:, 0], return_inverse=True)
    node_labels, flat = np.unique(data[:, 1:], return_inverse=True)
    flat = flat.reshape(-1, 2)
    src, dst = flat[:, 0], flat[:, 1]

    loops = int(np.count_nonzero(src == dst))
    cls = DirectedMultilayerGraph if directed else MultilayerGraph
    G = cls.from_edges(layer, src, dst, len(node_labels), len(layer_labels),
                       node_labels, layer_labels)
    stats = EdgeListStats(lines=len(rows), self_loops=loops,
                          duplicates=len(rows) - loops - G.num_edges)
    return G, stats


def write_edge_list(G, path) -> None:
    """Write ``G`` as ``layer src dst`` using external labels."""
    layer, u, v = G.edges.T
    out = np.stack([G.layer_labels[layer], G.node_labels[u], G.node_labels[v]], axis=1)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# layer src dst\n")
        np.savetxt(fh, out, fmt="%d")


def _pair_from_index(t, n):
    # row i of the strict upper triangle starts at i*(2n-i-1)/2
    t = np.asarray(t, dtype=np.int64)
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(b * b - 8.0 * t)) / 2).astype(np.int64)
    i = np.clip(i, 0, n - 2)

    def start(row):
        return row * (2 * n - row - 1) // 2

    i = np.where(start(i) > t, i - 1, i)
    i = np.where(start(i + 1) <= t, i + 1, i)
    j = t - start(i) + i + 1
    return i, j


def _sample_pairs(rng, n, p, directed=False):
    """Erdős–Rényi edge sample: each (ordered, if directed) pair kept with prob. p."""
    if n < 2 or p <= 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    total = n * (n - 1) if directed else n * (n - 1) // 2
    m = int(rng.binomial(total, p)) if p < 1 else total
    idx = rng.choice(total, size=m, replace=False) if m < total else np.arange(total)
    idx = np.sort(idx)
    if directed:
        i, j = np.divmod(idx, n - 1)
        j = j + (j >= i)
        return i, j
    return _pair_from_index(idx, n)


def _check_prob(**probs):
    for name, p in probs.items():
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {p}")


def generate_synthetic(num_nodes: int, num_layers: int, model: str = "uniform", *,
                       p: float = 0.1, core_size: int = 0, p_in: float = 0.9,
                       p_out: float = 0.01, seed=None) -> MultilayerGraph:
    """Random undirected multilayer graph.

    ``model="uniform"`` draws every layer as G(n, p). ``model="planted"`` draws
    a G(n, p_out) background in every layer and overlays a G(core_size, p_in)
    block on nodes ``0..core_size-1`` in every layer.
    """
    rng = np.random.default_rng(seed)
    layers, srcs, dsts = [], [], []
    if model == "uniform":
        _check_prob(p=p)
        for ell in range(num_layers):
            u, v = _sample_pairs(rng, num_nodes, p)
            layers.append(np.full(len(u), ell)), srcs.append(u), dsts.append(v)
    elif model == "planted":
        _check_prob(p_in=p_in, p_out=p_out)
        if not 0 <= core_size <= num_nodes:
            raise ValueError(f"core_size must lie in [0, {num_nodes}]")
        for ell in range(num_layers):
            for n, q in ((num_nodes, p_out), (core_size, p_in)):
                u, v = _sample_pairs(rng, n, q)
                layers.append(np.full(len(u), ell)), srcs.append(u), dsts.append(v)
    else:
        raise ValueError(f"unknown model {model!r}")
    cat = lambda xs: np.concatenate(xs) if xs else np.empty(0, dtype=np.int64)  # noqa: E731
    return MultilayerGraph.from_edges(cat(layers), cat(srcs), cat(dsts), num_nodes, num_layers)


def generate_synthetic_directed(num_nodes: int, num_layers: int, p: float = 0.1,
                                seed=None) -> DirectedMultilayerGraph:
    _check_prob(p=p)
    rng = np.random.default_rng(seed)
    layers, srcs, dsts = [], [], []
    for ell in range(num_layers):
        s, t = _sample_pairs(rng, num_nodes, p, directed=True)
        layers.append(np.full(len(s), ell)), srcs.append(s), dsts.append(t)
    return DirectedMultilayerGraph.from_edges(np.concatenate(layers), np.concatenate(srcs),
                                              np.concatenate(dsts), num_nodes, num_layers)


def threads_from_env(default: int = 1) -> int:
    try:
        return max(1, int(os.environ.get("FIRMCORE_THREADS", default)))
    except ValueError:
        return default
