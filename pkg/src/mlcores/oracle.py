"""Slow, independent reference implementations.

Nothing here touches the bucket queue or the sorted top-j density reduction;
every routine works straight from the definitions so that agreement with the
fast paths means something. The exhaustive routines refuse graphs above an
explicit budget unless ``force=True`` is passed.
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import DirectedMultilayerGraph, MultilayerGraph

_EPS = 1e-9


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_nodes: int = 12
    max_layers: int = 5
    max_directed_nodes: int = 8
    max_quasiclique_nodes: int = 10


DEFAULT_BUDGET = OracleBudget()


def _guard(G, max_nodes, budget, force):
    if force:
        return
    if G.num_nodes > max_nodes or G.num_layers > budget.max_layers:
        raise BudgetExceeded(
            f"{G.num_nodes} nodes / {G.num_layers} layers exceeds the oracle budget "
            f"({max_nodes} nodes / {budget.max_layers} layers)")


def _undirected_sets(G: MultilayerGraph):
    adj = [[set() for _ in range(G.num_nodes)] for _ in range(G.num_layers)]
    for l, u, v in G.edges.tolist():
        adj[l][u].add(v)
        adj[l][v].add(u)
    return adj


def _directed_sets(G: DirectedMultilayerGraph):
    out = [[set() for _ in range(G.num_nodes)] for _ in range(G.num_layers)]
    inc = [[set() for _ in range(G.num_nodes)] for _ in range(G.num_layers)]
    for l, s, t in G.edges.tolist():
        out[l][s].add(t)
        inc[l][t].add(s)
    return out, inc


def naive_firmcore(G: MultilayerGraph, k: int, lam: int, *, rng=None,
                   budget=DEFAULT_BUDGET, force=False) -> frozenset:
    """(k, lam)-FirmCore by removing one violating node at a time.

    With ``rng`` the violator to drop is chosen at random, otherwise the
    smallest id goes first; the fixed point is the same either way.
    """
    _guard(G, budget.max_nodes, budget, force)
    adj = _undirected_sets(G)
    alive = set(range(G.num_nodes))

    def ok(v):
        good = sum(1 for l in range(G.num_layers) if len(adj[l][v] & alive) >= k)
        return good >= lam

    while True:
        bad = sorted(v for v in alive if not ok(v))
        if not bad:
            return frozenset(alive)
        alive.discard(rng.choice(bad) if rng is not None else bad[0])


def classic_core_numbers(num_nodes: int, edges) -> list:
    """Single-layer core numbers by lazy min-heap peeling."""
    adj = [set() for _ in range(num_nodes)]
    for u, v in edges:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)
    deg = [len(a) for a in adj]
    heap = [(d, v) for v, d in enumerate(deg)]
    heapq.heapify(heap)
    done = [False] * num_nodes
    core = [0] * num_nodes
    level = 0
    while heap:
        d, v = heapq.heappop(heap)
        if done[v] or d != deg[v]:
            continue
        level = max(level, d)
        core[v] = level
        done[v] = True
        for u in adj[v]:
            if not done[u]:
                deg[u] -= 1
                heapq.heappush(heap, (deg[u], u))
    return core


def naive_firmdcore(G: DirectedMultilayerGraph, k: int, r: int, lam: int, *, rng=None,
                    budget=DEFAULT_BUDGET, force=False):
    """(k, r, lam)-FirmD-Core as ``(S, T)`` frozensets by alternating removal."""
    _guard(G, budget.max_nodes, budget, force)
    out, inc = _directed_sets(G)
    L = G.num_layers
    S = set(range(G.num_nodes))
    T = set(range(G.num_nodes))
    while True:
        bad = [("S", u) for u in sorted(S)
               if sum(1 for l in range(L) if len(out[l][u] & T) >= k) < lam]
        bad += [("T", v) for v in sorted(T)
                if sum(1 for l in range(L) if len(inc[l][v] & S) >= r) < lam]
        if not bad:
            return frozenset(S), frozenset(T)
        side, x = rng.choice(bad) if rng is not None else bad[0]
        (S if side == "S" else T).discard(x)


def xy_core(num_nodes: int, arcs, x: int, y: int):
    """Single-layer [x, y]-core of a digraph: S-nodes need x out-arcs into T,
    T-nodes need y in-arcs from S. Peels whole violator sets per round."""
    out = [set() for _ in range(num_nodes)]
    inc = [set() for _ in range(num_nodes)]
    for s, t in arcs:
        if s != t:
            out[s].add(t)
            inc[t].add(s)
    S = set(range(num_nodes))
    T = set(range(num_nodes))
    changed = True
    while changed:
        drop_s = {u for u in S if len(out[u] & T) < x}
        drop_t = {v for v in T if len(inc[v] & S) < y}
        changed = bool(drop_s or drop_t)
        S -= drop_s
        T -= drop_t
    return frozenset(S), frozenset(T)


def rho_by_enumeration(densities, beta: float) -> float:
    """max over non-empty layer subsets of (min density in subset) * |subset|**beta."""
    best = 0.0
    idx = range(len(densities))
    for size in range(1, len(densities) + 1):
        for sub in itertools.combinations(idx, size):
            best = max(best, min(densities[i] for i in sub) * size ** beta)
    return best


def _subset_matrix(n):
    masks = np.arange(1, 1 << n, dtype=np.int64)
    return masks, ((masks[:, None] >> np.arange(n)) & 1).astype(np.int64)


def _layer_matrices(G, directed):
    A = np.zeros((G.num_layers, G.num_nodes, G.num_nodes), dtype=np.int64)
    for l, u, v in G.edges.tolist():
        A[l, u, v] = 1
        if not directed:
            A[l, v, u] = 1
    return A


def _rho_table(dens, beta):
    # dens: (num_layers, ...) -> elementwise max over layer subsets
    L = dens.shape[0]
    best = np.zeros(dens.shape[1:])
    for size in range(1, L + 1):
        for sub in itertools.combinations(range(L), size):
            best = np.maximum(best, dens[list(sub)].min(axis=0) * size ** beta)
    return best


@dataclass(frozen=True)
class ExhaustiveOptimum:
    rho: float
    nodes: frozenset = frozenset()
    S: frozenset = frozenset()
    T: frozenset = frozenset()


def _members(mask):
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)


def exhaustive_densest(G, beta: float, *, budget=DEFAULT_BUDGET, force=False) -> ExhaustiveOptimum:
    """Optimal multilayer density over all node subsets (or subset pairs)."""
    directed = isinstance(G, DirectedMultilayerGraph)
    cap = budget.max_directed_nodes if directed else budget.max_nodes
    _guard(G, cap, budget, force)
    if G.num_nodes == 0 or G.num_layers == 0:
        return ExhaustiveOptimum(0.0)
    masks, M = _subset_matrix(G.num_nodes)
    sizes = M.sum(axis=1)
    A = _layer_matrices(G, directed)
    if not directed:
        counts = np.stack([((M @ A[l]) * M).sum(axis=1) // 2 for l in range(G.num_layers)])
        rho = _rho_table(counts / sizes, beta)
        best = int(np.argmax(rho))
        return ExhaustiveOptimum(float(rho[best]), nodes=_members(int(masks[best])))
    counts = np.stack([M @ A[l] @ M.T for l in range(G.num_layers)])
    norm = np.sqrt(np.outer(sizes, sizes))
    rho = _rho_table(counts / norm, beta)
    i, j = np.unravel_index(int(np.argmax(rho)), rho.shape)
    return ExhaustiveOptimum(float(rho[i, j]), S=_members(int(masks[i])), T=_members(int(masks[j])))


def _induced_degrees(M, A):
    return M @ A  # (subsets, n): neighbours of each node inside each subset


def exhaustive_bff(G: MultilayerGraph, *, budget=DEFAULT_BUDGET, force=False) -> int:
    """max over non-empty S of min over layers of the minimum induced degree."""
    _guard(G, budget.max_nodes, budget, force)
    if G.num_nodes == 0:
        return 0
    _, M = _subset_matrix(G.num_nodes)
    A = _layer_matrices(G, False)
    big = G.num_nodes + 1
    worst = np.full(len(M), big)
    for l in range(G.num_layers):
        deg = np.where(M == 1, _induced_degrees(M, A[l]), big)
        worst = np.minimum(worst, deg.min(axis=1))
    return int(worst.max())


def exhaustive_quasicliques(G: MultilayerGraph, gamma, min_sup: float, min_size: int, *,
                            budget=DEFAULT_BUDGET, force=False) -> list:
    """All maximal frequent cross-graph quasi-cliques of size >= min_size.

    ``H`` is a gamma[l]-quasi-clique in layer l when every node of H has at
    least gamma[l] * (|H| - 1) neighbours inside H in that layer.
    """
    _guard(G, budget.max_quasiclique_nodes, budget, force)
    if G.num_nodes == 0 or min_size > G.num_nodes:
        return []
    masks, M = _subset_matrix(G.num_nodes)
    sizes = M.sum(axis=1)
    A = _layer_matrices(G, False)
    layers_ok = np.zeros(len(M), dtype=np.int64)
    for l in range(G.num_layers):
        need = gamma[l] * (sizes - 1) - _EPS
        deg = _induced_degrees(M, A[l])
        good = np.all((M == 0) | (deg >= need[:, None]), axis=1)
        layers_ok += good
    qualifies = (sizes >= min_size) & (layers_ok >= min_sup * G.num_layers - _EPS)
    found = [int(m) for m in masks[qualifies]]
    maximal = [m for m in found if not any(o != m and o & m == m for o in found)]
    return [_members(m) for m in maximal]


def _single_layer_densest(G: MultilayerGraph):
    """All (S, layer) pairs attaining the best single-layer density |E_l[S]|/|S|."""
    masks, M = _subset_matrix(G.num_nodes)
    sizes = M.sum(axis=1)
    A = _layer_matrices(G, False)
    best, winners = Fraction(-1), []
    for l in range(G.num_layers):
        counts = ((M @ A[l]) * M).sum(axis=1) // 2
        for mask, e, s in zip(masks.tolist(), counts.tolist(), sizes.tolist()):
            d = Fraction(e, s)
            if d > best:
                best, winners = d, [(mask, l)]
            elif d == best:
                winners.append((mask, l))
    return best, winners


def lambda_plus(G: MultilayerGraph, *, budget=DEFAULT_BUDGET, force=False) -> int:
    """Largest lam whose (mu, lam)-FirmCore is non-empty, where mu is the minimum
    degree of a best single-layer densest subgraph in its own layer.

    Densest subgraphs tied on density are all valid anchors; the largest lam
    over them is returned.
    """
    _guard(G, budget.max_nodes, budget, force)
    if G.num_edges == 0:
        return 1
    adj = _undirected_sets(G)
    _, winners = _single_layer_densest(G)
    best = 1
    for mask, l in winners:
        members = _members(mask)
        mu = min(len(adj[l][v] & members) for v in members)
        for lam in range(G.num_layers, best, -1):
            if naive_firmcore(G, mu, lam, budget=budget, force=force):
                best = lam
                break
    return best


def lambda_hat(G: DirectedMultilayerGraph, *, budget=DEFAULT_BUDGET, force=False) -> int:
    """Directed counterpart of :func:`lambda_plus`.

    Takes the layer of a best single-layer directed densest subgraph, its
    maximum cn-pair [x*, y*], and returns the largest lam for which some
    non-empty (k, r, lam)-FirmD-Core has k * r >= x* * y*.
    """
    _guard(G, budget.max_directed_nodes, budget, force)
    if G.num_edges == 0:
        return 1
    masks, M = _subset_matrix(G.num_nodes)
    sizes = M.sum(axis=1).tolist()
    A = _layer_matrices(G, True)
    best, layers = Fraction(-1), set()
    for l in range(G.num_layers):
        counts = (M @ A[l] @ M.T).tolist()
        for i, row in enumerate(counts):
            for j, e in enumerate(row):
                d = Fraction(e * e, sizes[i] * sizes[j])
                if d > best:
                    best, layers = d, {l}
                elif d == best:
                    layers.add(l)
    out_deg = G.out_degrees
    in_deg = G.in_degrees
    result = 1
    for l in sorted(layers):
        arcs = [(s, t) for ll, s, t in G.edges.tolist() if ll == l]
        xy = 0
        for x in range(1, int(out_deg[:, l].max()) + 1):
            for y in range(1, int(in_deg[:, l].max()) + 1):
                if x * y > xy and xy_core(G.num_nodes, arcs, x, y)[0]:
                    xy = x * y
        for lam in range(G.num_layers, result, -1):
            if _some_fdc(G, xy, lam, budget, force):
                result = lam
                break
    return result


def _some_fdc(G, product, lam, budget, force):
    kmax = int(G.out_degrees.max())
    rmax = int(G.in_degrees.max())
    for k in range(1, kmax + 1):
        for r in range(1, rmax + 1):
            if k * r >= product and naive_firmdcore(G, k, r, lam, budget=budget, force=force)[0]:
                return True
    return False


def random_removal_rng(seed) -> random.Random:
    return random.Random(seed)
