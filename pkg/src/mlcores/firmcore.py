"""FirmCore decomposition of undirected multilayer graphs.

A (k, lam)-FirmCore is the maximal node set in which every node has at least
``k`` neighbours inside the set in at least ``lam`` layers. The index
``core_lam(v)`` is the largest such ``k`` for a node. Peeling visits nodes by
their current Top-lam degree (the lam-th largest entry of the per-layer degree
vector), which upper-bounds the index.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import MultilayerGraph

__all__ = [
    "CoreIndexTable",
    "top_lambda",
    "use_linear_scan",
    "firmcore_indices",
    "firmcore_decomposition",
    "extract_firmcore",
    "write_core_table",
]


def top_lambda(deg_vector, lam: int) -> int:
    """Return the lam-th largest entry of ``deg_vector`` (duplicates counted).

    >>> top_lambda([5, 2, 7], 2)
    5
    """
    vec = np.asarray(deg_vector)
    if not 1 <= lam <= vec.size:
        raise ValueError(f"lambda must lie in [1, {vec.size}], got {lam}")
    return int(np.partition(vec, vec.size - lam)[vec.size - lam])


def use_linear_scan(lam: int, num_layers: int, scale: float = 1.0) -> bool:
    """Pick the Top-lam update method.

    The O(|L|) count of entries still >= I[u] wins once lam reaches
    ``scale * |L| / log2 |L|``; below that a bounded heap selection is cheaper.
    """
    if num_layers <= 2:
        return True
    return lam >= scale * num_layers / math.log2(num_layers)


def _check_lambda(lam, num_layers):
    if not 1 <= lam <= num_layers:
        raise ValueError(f"lambda must lie in [1, {num_layers}], got {lam}")


def _sorted_degrees(G: MultilayerGraph) -> np.ndarray:
    # each row descending, so column lam-1 is Top-lam
    return -np.sort(-G.degrees, axis=1)


def _run(G, lam, init_top, hybrid_scale, short_circuit):
    return _kernels.firmcore_peel(
        G.indptr, G.neighbor_ids, G.neighbor_layers, G.degrees,
        np.ascontiguousarray(init_top, dtype=np.int64), lam,
        use_linear_scan(lam, G.num_layers, hybrid_scale), short_circuit)


def firmcore_indices(G: MultilayerGraph, lam: int, *, hybrid_scale: float = 1.0,
                     short_circuit: bool = True) -> np.ndarray:
    """FirmCore index ``core_lam(v)`` of every node, as an int64 array."""
    _check_lambda(lam, G.num_layers)
    init = _sorted_degrees(G)[:, lam - 1] if G.num_nodes else np.zeros(0, np.int64)
    return _run(G, lam, init, hybrid_scale, short_circuit)


@dataclass(frozen=True, eq=False)
class CoreIndexTable:
    """``cores[lam - 1, v] == core_lam(v)`` for every lam in 1..|L|."""

    cores: np.ndarray
    node_labels: np.ndarray
    layer_labels: np.ndarray

    @property
    def num_layers(self) -> int:
        return self.cores.shape[0]

    @property
    def num_nodes(self) -> int:
        return self.cores.shape[1]

    def row(self, lam: int) -> np.ndarray:
        _check_lambda(lam, self.num_layers)
        return self.cores[lam - 1]

    def max_index(self, lam: int) -> int:
        row = self.row(lam)
        return int(row.max()) if row.size else 0

    def __eq__(self, other):
        if not isinstance(other, CoreIndexTable):
            return NotImplemented
        return np.array_equal(self.cores, other.cores)


def firmcore_decomposition(G: MultilayerGraph, threads: int = 1, *,
                           hybrid_scale: float = 1.0) -> CoreIndexTable:
    """Indices for every lam in 1..|L|.

    Degree vectors are sorted once and reused to seed each lam run. Runs for
    different lam are independent and are spread over ``threads`` workers;
    the result does not depend on the worker count.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    L, n = G.num_layers, G.num_nodes
    cores = np.zeros((L, n), dtype=np.int64)
    if L and n:
        sorted_deg = _sorted_degrees(G)
        G.indptr  # build adjacency before workers share it

        def job(lam):
            cores[lam - 1] = _run(G, lam, sorted_deg[:, lam - 1], hybrid_scale, True)

        if threads == 1:
            for lam in range(1, L + 1):
                job(lam)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(job, range(1, L + 1)))
    return CoreIndexTable(cores, G.node_labels, G.layer_labels)


def extract_firmcore(table: CoreIndexTable, k: int, lam: int) -> np.ndarray:
    """Node set of the (k, lam)-FirmCore: ``{v : core_lam(v) >= k}``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return np.flatnonzero(table.row(lam) >= k)


def write_core_table(table: CoreIndexTable, fh, lam: int | None = None) -> None:
    """TSV ``node, lambda, core`` sorted by (lambda, external node id)."""
    fh.write("node\tlambda\tcore\n")
    order = np.argsort(table.node_labels, kind="stable")
    lams = range(1, table.num_layers + 1) if lam is None else [lam]
    for l in lams:
        row = table.row(l)
        fh.writelines(f"{table.node_labels[v]}\t{l}\t{row[v]}\n" for v in order)
