"""Multilayer density objective and FirmCore-based densest-subgraph search.

The objective trades edge density against the number of layers showing it:

    rho(S) = max over non-empty layer sets Lh of  min_{l in Lh} |E_l[S]| / |S| * |Lh|**beta

For a fixed size j the inner minimum is largest on the j densest layers, so
rho reduces to ``max_j d_(j) * j**beta`` over the descending layer densities.
The directed variant normalizes by ``sqrt(|S| |T|)`` and counts edges S -> T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral

import numpy as np

from .firmcore import CoreIndexTable, firmcore_decomposition, firmcore_indices
from .firmdcore import DCoreIndexTable, full_firmdcore
from .graph import DirectedMultilayerGraph, MultilayerGraph, as_nodeset, degree_matrix

__all__ = [
    "DensityReport",
    "rho_undirected",
    "rho_directed",
    "fc_approx",
    "fdc_approx",
    "psi_beta",
    "approx_factor",
    "ApproxDiagnostics",
    "diagnostics",
    "lemma1_bound",
    "lemma4_bound",
    "bff_mm",
    "bff_objective",
    "quasiclique_prune",
    "pruning_ratio",
]

_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class DensityReport:
    beta: float
    rho: float
    chosen_layers: np.ndarray
    per_layer_density: np.ndarray
    nodes: np.ndarray | None = None
    S: np.ndarray | None = None
    T: np.ndarray | None = None
    source_core: tuple | None = None

    @property
    def directed(self) -> bool:
        return self.S is not None

    def to_dict(self, G) -> dict:
        """JSON-ready dict with external node and layer ids."""
        labels = G.layer_labels
        out = {
            "rho": float(self.rho),
            "beta": float(self.beta),
            "layers": [int(labels[l]) for l in sorted(self.chosen_layers.tolist())],
        }
        if self.directed:
            out["S"] = sorted(int(x) for x in G.node_labels[self.S])
            out["T"] = sorted(int(x) for x in G.node_labels[self.T])
        else:
            out["nodes"] = sorted(int(x) for x in G.node_labels[self.nodes])
        out["per_layer_density"] = {str(int(labels[l])): float(d)
                                    for l, d in enumerate(self.per_layer_density)}
        out["source_core"] = list(self.source_core) if self.source_core is not None else None
        return out


def _top_j(densities: np.ndarray, beta: float):
    """(rho, chosen layer ids) by the sorted top-j reduction; ties favour small ids and small j."""
    order = np.lexsort((np.arange(len(densities)), -densities))
    ranked = densities[order]
    scores = ranked * np.arange(1, len(ranked) + 1, dtype=float) ** beta
    j = int(np.argmax(scores))
    return float(scores[j]), np.sort(order[:j + 1])


def _check_beta(beta):
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")


def rho_undirected(G: MultilayerGraph, nodes, beta: float) -> DensityReport:
    _check_beta(beta)
    nodes = as_nodeset(nodes, G.num_nodes)
    if nodes.size == 0:
        raise ValueError("node set must be non-empty")
    if G.num_layers == 0:
        raise ValueError("graph has no layers")
    counts = degree_matrix(G, nodes).sum(axis=0) / 2
    dens = counts / nodes.size
    rho, chosen = _top_j(dens, beta)
    return DensityReport(beta, rho, chosen, dens, nodes=nodes)


def _directed_counts(G, S, T):
    in_s = np.zeros(G.num_nodes, dtype=bool)
    in_t = np.zeros(G.num_nodes, dtype=bool)
    in_s[S] = True
    in_t[T] = True
    layer, src, dst = G.edges.T
    keep = in_s[src] & in_t[dst]
    return np.bincount(layer[keep], minlength=G.num_layers).astype(float)


def rho_directed(G: DirectedMultilayerGraph, S, T, beta: float) -> DensityReport:
    _check_beta(beta)
    S = as_nodeset(S, G.num_nodes)
    T = as_nodeset(T, G.num_nodes)
    if S.size == 0 or T.size == 0:
        raise ValueError("S and T must be non-empty")
    if G.num_layers == 0:
        raise ValueError("graph has no layers")
    dens = _directed_counts(G, S, T) / math.sqrt(S.size * T.size)
    rho, chosen = _top_j(dens, beta)
    return DensityReport(beta, rho, chosen, dens, S=S, T=T)


def _suffix_counts(levels, layers, num_layers, top):
    """hist[k, l] = number of items with level >= k in layer l, for k in 0..top."""
    keep = levels >= 0
    h = np.zeros((top + 2, num_layers), dtype=np.int64)
    np.add.at(h, (np.minimum(levels[keep], top + 1), layers[keep]), 1)
    return np.cumsum(h[::-1], axis=0)[::-1][:top + 1]


def _empty_report(G, beta, directed):
    all_nodes = np.arange(G.num_nodes)
    zeros = np.zeros(G.num_layers)
    chosen = np.arange(min(1, G.num_layers))
    if directed:
        return DensityReport(beta, 0.0, chosen, zeros, S=all_nodes, T=all_nodes)
    return DensityReport(beta, 0.0, chosen, zeros, nodes=all_nodes)


def fc_approx(G: MultilayerGraph, beta: float, threads: int = 1, *,
              table: CoreIndexTable | None = None) -> DensityReport:
    """Densest FirmCore over every (k, lam) with k >= 1.

    Per-layer edge counts of all nested cores of one lam come from a single
    histogram: an edge lies in the (k, lam)-core iff both endpoints have
    index >= k. Ties go to the smaller lam, then the larger k, then the
    smaller core.
    """
    _check_beta(beta)
    if G.num_nodes == 0:
        raise ValueError("graph has no nodes")
    if G.num_edges == 0:
        return _empty_report(G, beta, directed=False)
    if table is None:
        table = firmcore_decomposition(G, threads)
    layer, u, v = G.edges.T
    best = None
    for lam in range(1, G.num_layers + 1):
        core = table.row(lam)
        top = int(core.max())
        if top < 1:
            continue
        edge_hist = _suffix_counts(np.minimum(core[u], core[v]), layer, G.num_layers, top)
        sizes = np.cumsum(np.bincount(core, minlength=top + 1)[::-1])[::-1]
        for k in range(top, 0, -1):
            rho, _ = _top_j(edge_hist[k] / sizes[k], beta)
            key = (-rho, lam, -k, int(sizes[k]))
            if best is None or key < best[0]:
                best = (key, lam, k)
    _, lam, k = best
    report = rho_undirected(G, np.flatnonzero(table.row(lam) >= k), beta)
    return _with_source(report, (k, lam))


def _with_source(report, source):
    return DensityReport(report.beta, report.rho, report.chosen_layers, report.per_layer_density,
                         report.nodes, report.S, report.T, source)


def fdc_approx(G: DirectedMultilayerGraph, beta: float, threads: int = 1, *,
               table: DCoreIndexTable | None = None) -> DensityReport:
    """Densest FirmD-Core over every (k, r, lam) with k, r >= 1.

    Ties go to the smaller lam, larger k, larger r, then fewer nodes.
    """
    _check_beta(beta)
    if G.num_nodes == 0:
        raise ValueError("graph has no nodes")
    if G.num_edges == 0:
        return _empty_report(G, beta, directed=True)
    if table is None:
        table = full_firmdcore(G, threads)
    layer, src, dst = G.edges.T
    best = None
    for lam in range(1, G.num_layers + 1):
        for k in range(1, table.k_max(lam) + 1):
            t, s = table.indices(k, lam)
            top = int(t.max())
            if top < 1:
                continue
            edge_hist = _suffix_counts(np.minimum(s[src], t[dst]), layer, G.num_layers, top)
            size_t = np.cumsum(np.bincount(t, minlength=top + 1)[::-1])[::-1]
            s_clip = s[s >= 0]
            size_s = np.cumsum(np.bincount(np.minimum(s_clip, top), minlength=top + 1)[::-1])[::-1]
            for r in range(top, 0, -1):
                if size_s[r] == 0 or size_t[r] == 0:
                    continue
                norm = math.sqrt(size_s[r] * size_t[r])
                rho, _ = _top_j(edge_hist[r] / norm, beta)
                key = (-rho, lam, -k, -r, int(size_s[r] + size_t[r]))
                if best is None or key < best[0]:
                    best = (key, lam, k, r)
    if best is None:
        return _empty_report(G, beta, directed=True)
    _, lam, k, r = best
    S, T = table.reconstruct(k, r, lam)
    return _with_source(rho_directed(G, S, T, beta), (k, r, lam))


def _exact(x):
    return isinstance(x, (Integral, Fraction))


def psi_beta(lambda_plus: int, beta):
    """max over integer xi in [0, lambda_plus) of (lambda_plus - xi) * (xi + 1)**beta.

    Integer ``beta`` gives an exact integer result.
    """
    if lambda_plus < 1:
        raise ValueError("lambda_plus must be >= 1")
    return max((lambda_plus - xi) * (xi + 1) ** beta for xi in range(lambda_plus))


def approx_factor(num_layers: int, lambda_plus: int, beta):
    """Guaranteed ratio psi_beta / (2 |L|**(beta + 1)); a Fraction for integer beta."""
    psi = psi_beta(lambda_plus, beta)
    denom = 2 * num_layers ** (beta + 1)
    if _exact(psi) and _exact(denom):
        return Fraction(psi) / denom
    return psi / denom


@dataclass(frozen=True)
class ApproxDiagnostics:
    lambda_plus: int
    psi_beta: float
    guaranteed_factor: float


def diagnostics(num_layers: int, lambda_plus: int, beta) -> ApproxDiagnostics:
    return ApproxDiagnostics(lambda_plus, psi_beta(lambda_plus, beta),
                             approx_factor(num_layers, lambda_plus, beta))


def lemma1_bound(k: int, lam: int, num_layers: int, beta):
    """Density floor k / (2|L|) * psi_beta(lam) met by every non-empty (k, lam)-FirmCore."""
    if not 1 <= lam <= num_layers:
        raise ValueError("lambda must lie in [1, num_layers]")
    if k == 0:
        return 0
    psi = psi_beta(lam, beta)
    if _exact(psi):
        return Fraction(k * psi, 2 * num_layers)
    return k * psi / (2 * num_layers)


def lemma4_bound(k: int, r: int, lam: int, num_layers: int, beta, size_s: int, size_t: int) -> float:
    """Density floor psi_beta(lam) / |L| * max(k sqrt(a), r / sqrt(a)), a = |S| / |T|."""
    if size_s < 1 or size_t < 1:
        raise ValueError("both sides must be non-empty")
    root = math.sqrt(size_s / size_t)
    return float(psi_beta(lam, beta)) / num_layers * max(k * root, r / root)


def bff_objective(G: MultilayerGraph, nodes) -> int:
    """min over layers of the minimum induced degree of ``nodes``."""
    deg = degree_matrix(G, nodes)
    return int(deg.min()) if deg.size else 0


def bff_mm(G: MultilayerGraph, *, table: CoreIndexTable | None = None):
    """Exact max-min-min friend group: the (k_max, |L|)-FirmCore and k_max."""
    if G.num_nodes == 0 or G.num_layers == 0:
        raise ValueError("graph must have nodes and layers")
    core = table.row(G.num_layers) if table is not None else firmcore_indices(G, G.num_layers)
    k_max = int(core.max())
    return np.flatnonzero(core >= k_max), k_max


def _ceil(x):
    return math.ceil(x - _EPS)


def quasiclique_prune(G: MultilayerGraph, gamma, min_sup: float, min_size: int) -> np.ndarray:
    """Nodes that can belong to a frequent cross-graph quasi-clique of size >= min_size.

    Returns the (ceil(gamma_min * (min_size - 1)), ceil(min_sup * |L|))-FirmCore.
    ``gamma`` is one value per layer (a scalar is broadcast).
    """
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (G.num_layers,))
    if np.any(gamma <= 0) or np.any(gamma > 1):
        raise ValueError("gamma values must lie in (0, 1]")
    if not 0 < min_sup <= 1:
        raise ValueError("min_sup must lie in (0, 1]")
    if min_size < 1:
        raise ValueError("min_size must be >= 1")
    k = _ceil(float(gamma.min()) * (min_size - 1))
    lam = min(max(_ceil(min_sup * G.num_layers), 1), G.num_layers)
    if k == 0:
        return np.arange(G.num_nodes)
    return np.flatnonzero(firmcore_indices(G, lam) >= k)


def pruning_ratio(G, kept) -> float:
    """Fraction of nodes removed from the search space."""
    return 1.0 - len(kept) / G.num_nodes if G.num_nodes else 0.0
