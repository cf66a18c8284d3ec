"""FirmD-Core decomposition of directed multilayer graphs.

For out-threshold ``k``, in-threshold ``r`` and layer threshold ``lam`` the
(k, r, lam)-FirmD-Core is the maximal pair (S, T) such that every node of S
has at least ``k`` out-neighbours in T in at least ``lam`` layers and every
node of T has at least ``r`` in-neighbours from S in at least ``lam`` layers.

With ``k`` and ``lam`` fixed the cores are nested in ``r``, so one bucket peel
over the in-degree side yields all of them: ``t_index`` records the level at
which a node leaves T and ``s_index`` the last level at which it was in S.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .firmcore import use_linear_scan
from .graph import DirectedMultilayerGraph

__all__ = [
    "DCoreSlice",
    "DCoreRow",
    "DCoreIndexTable",
    "firmdcore_fixed",
    "firmdcore_decomposition",
    "full_firmdcore",
    "write_dcore_table",
]


def _check_lambda(lam, num_layers):
    if not 1 <= lam <= num_layers:
        raise ValueError(f"lambda must lie in [1, {num_layers}], got {lam}")


def _top(matrix, lam):
    if matrix.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return -np.sort(-matrix, axis=1)[:, lam - 1]


def _peel(G: DirectedMultilayerGraph, lam: int, k: int, hybrid_scale: float = 1.0):
    op, on, ol = G.out_adjacency
    ip, inb, il = G.in_adjacency
    return _kernels.firmdcore_peel(op, on, ol, ip, inb, il,
                                   np.ascontiguousarray(G.out_degrees, dtype=np.int64),
                                   lam, k, use_linear_scan(lam, G.num_layers, hybrid_scale))


@dataclass(frozen=True, eq=False)
class DCoreSlice:
    """Sparse indices for one (lam, k): nodes with ``t > 0`` or ``s >= 0``.

    Absent nodes have ``t_index == 0`` and belong to no S side.
    """

    nodes: np.ndarray
    t_index: np.ndarray
    s_index: np.ndarray

    @classmethod
    def from_dense(cls, t, s):
        nodes = np.flatnonzero((t > 0) | (s >= 0))
        return cls(nodes, t[nodes], s[nodes])

    def dense(self, num_nodes):
        t = np.zeros(num_nodes, dtype=np.int64)
        s = np.full(num_nodes, -1, dtype=np.int64)
        t[self.nodes] = self.t_index
        s[self.nodes] = self.s_index
        return t, s

    def __eq__(self, other):
        return (isinstance(other, DCoreSlice)
                and np.array_equal(self.nodes, other.nodes)
                and np.array_equal(self.t_index, other.t_index)
                and np.array_equal(self.s_index, other.s_index))


@dataclass(frozen=True, eq=False)
class DCoreRow:
    lam: int
    k_max: int
    slices: dict = field(default_factory=dict)  # k -> DCoreSlice, k in 1..k_max

    def __eq__(self, other):
        return (isinstance(other, DCoreRow) and self.lam == other.lam
                and self.k_max == other.k_max and self.slices.keys() == other.slices.keys()
                and all(self.slices[k] == other.slices[k] for k in self.slices))


@dataclass(frozen=True, eq=False)
class DCoreIndexTable:
    rows: dict  # lam -> DCoreRow
    num_nodes: int
    node_labels: np.ndarray
    layer_labels: np.ndarray
    # Top-lam in-degree of the whole graph per lam, used for k = 0
    in_top: np.ndarray = field(repr=False, default=None)

    def k_max(self, lam: int) -> int:
        return self.rows[lam].k_max

    def indices(self, k: int, lam: int):
        """Dense ``(t_index, s_index)`` arrays for ``1 <= k``."""
        row = self.rows[lam]
        if k > row.k_max:
            return (np.zeros(self.num_nodes, dtype=np.int64),
                    np.full(self.num_nodes, -1, dtype=np.int64))
        return row.slices[k].dense(self.num_nodes)

    def reconstruct(self, k: int, r: int, lam: int):
        """``(S, T)`` node arrays of the (k, r, lam)-FirmD-Core."""
        if k < 0 or r < 0:
            raise ValueError("k and r must be non-negative")
        if k == 0:
            # no out-degree constraint: S = V and T is a plain Top-lam in-degree filter
            return (np.arange(self.num_nodes),
                    np.flatnonzero(self.in_top[lam - 1] >= r) if r > 0 else np.arange(self.num_nodes))
        t, s = self.indices(k, lam)
        return np.flatnonzero(s >= r), np.flatnonzero(t >= r)

    def max_r(self, k: int, lam: int) -> int:
        t, _ = self.indices(k, lam)
        return int(t.max()) if t.size else 0

    def __eq__(self, other):
        return (isinstance(other, DCoreIndexTable) and self.rows.keys() == other.rows.keys()
                and all(self.rows[l] == other.rows[l] for l in self.rows))


def firmdcore_fixed(G: DirectedMultilayerGraph, k: int, r: int, lam: int):
    """Single (k, r, lam)-FirmD-Core as sorted ``(S, T)`` node arrays."""
    _check_lambda(lam, G.num_layers)
    if k < 0 or r < 0:
        raise ValueError("k and r must be non-negative")
    n = G.num_nodes
    if k == 0:
        return np.arange(n), np.flatnonzero(_top(G.in_degrees, lam) >= r)
    t, s = _peel(G, lam, k)
    return np.flatnonzero(s >= r), np.flatnonzero(t >= r)


def firmdcore_decomposition(G: DirectedMultilayerGraph, lam: int, *,
                            hybrid_scale: float = 1.0) -> DCoreRow:
    """All (k, r) indices for one lam, k running up to the largest Top-lam out-degree."""
    _check_lambda(lam, G.num_layers)
    top_out = _top(G.out_degrees, lam)
    k_max = int(top_out.max()) if top_out.size else 0
    slices = {}
    for k in range(1, k_max + 1):
        t, s = _peel(G, lam, k, hybrid_scale)
        slices[k] = DCoreSlice.from_dense(t, s)
    return DCoreRow(lam, k_max, slices)


def full_firmdcore(G: DirectedMultilayerGraph, threads: int = 1) -> DCoreIndexTable:
    """:func:`firmdcore_decomposition` for every lam; lam runs share a thread pool."""
    if threads < 1:
        raise ValueError("threads must be >= 1")
    lams = range(1, G.num_layers + 1)
    G.out_adjacency, G.in_adjacency  # build once before sharing
    if threads == 1:
        rows = [firmdcore_decomposition(G, lam) for lam in lams]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda lam: firmdcore_decomposition(G, lam), lams))
    in_top = (np.stack([_top(G.in_degrees, lam) for lam in lams])
              if G.num_layers else np.zeros((0, G.num_nodes), dtype=np.int64))
    return DCoreIndexTable({row.lam: row for row in rows}, G.num_nodes,
                           G.node_labels, G.layer_labels, in_top)


def write_dcore_table(table: DCoreIndexTable, fh, lam: int | None = None) -> None:
    """TSV ``node, lambda, k, t_index, s_index`` sorted by (lambda, k, node).

    Only nodes with a positive index on either side are written; the k-level
    with r = 0 (T = V, S = nodes with Top-lam out-degree >= k) is implied.
    """
    fh.write("node\tlambda\tk\tt_index\ts_index\n")
    lams = sorted(table.rows) if lam is None else [lam]
    for l in lams:
        row = table.rows[l]
        for k in range(1, row.k_max + 1):
            sl = row.slices[k]
            keep = (sl.t_index > 0) | (sl.s_index > 0)
            nodes, t, s = sl.nodes[keep], sl.t_index[keep], np.maximum(sl.s_index[keep], 0)
            order = np.argsort(table.node_labels[nodes], kind="stable")
            fh.writelines(f"{table.node_labels[nodes[i]]}\t{l}\t{k}\t{t[i]}\t{s[i]}\n"
                          for i in order)
