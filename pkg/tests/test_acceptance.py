"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line in ``ACCEPTANCE_RESULTS``; the lines are
printed in the pytest terminal summary and also written to stdout.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from mlcores import cli, oracle
from mlcores.density import (
    approx_factor, bff_mm, bff_objective, fc_approx, fdc_approx, lemma1_bound, lemma4_bound,
    pruning_ratio, psi_beta, quasiclique_prune, rho_directed, rho_undirected,
)
from mlcores.firmcore import extract_firmcore, firmcore_decomposition, firmcore_indices
from mlcores.firmdcore import full_firmdcore
from mlcores.graph import (MultilayerGraph, degree_matrix, generate_synthetic,
                           generate_synthetic_directed, write_edge_list)

from conftest import ACCEPTANCE_RESULTS, digraph_suite, graph_suite

BETAS = (0.5, 1, 2, 3)
REL = 1e-12


def _record(name, ok, detail=""):
    ACCEPTANCE_RESULTS[name] = (ok, detail)
    print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    assert ok, f"{name}: {detail}"


def _geq(a, b):
    """a >= b, exactly for rationals, else up to relative 1e-12."""
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return a >= b
    return float(a) >= float(b) * (1 - REL) - 1e-300


def _rho_exact(G, nodes, beta):
    """Exact rational rho for integer beta, float otherwise."""
    rep = rho_undirected(G, nodes, beta)
    if isinstance(beta, int):
        counts = degree_matrix(G, nodes).sum(axis=0) // 2
        dens = sorted((Fraction(int(c), len(nodes)) for c in counts), reverse=True)
        return max(d * (j + 1) ** beta for j, d in enumerate(dens))
    return rep.rho


def test_01_firmcore_oracle_equivalence():
    t0 = time.perf_counter()
    failures = checks = 0
    for G in graph_suite(200, seed=1001, max_nodes=12, max_layers=4, probs=(0.2, 0.5, 0.8)):
        table = firmcore_decomposition(G)
        for lam in range(1, G.num_layers + 1):
            for k in range(G.num_nodes + 1):
                checks += 1
                got = frozenset(extract_firmcore(table, k, lam).tolist())
                failures += got != oracle.naive_firmcore(G, k, lam)
    elapsed = time.perf_counter() - t0
    _record("1. FirmCore oracle equivalence", failures == 0 and elapsed < 60,
            f"{checks} (k,lambda) checks, {failures} failures, {elapsed:.1f}s")


def test_02_firmdcore_oracle_equivalence():
    failures = checks = 0
    for G in digraph_suite(200, seed=1002, max_nodes=8, max_layers=3):
        table = full_firmdcore(G)
        for lam in range(1, G.num_layers + 1):
            for k in range(G.num_nodes + 1):
                for r in range(G.num_nodes + 1):
                    checks += 1
                    S, T = table.reconstruct(k, r, lam)
                    got = (frozenset(S.tolist()), frozenset(T.tolist()))
                    failures += got != oracle.naive_firmdcore(G, k, r, lam)
    _record("2. FirmD-Core oracle equivalence", failures == 0,
            f"{checks} (k,r,lambda) checks, {failures} failures")


def test_03_classic_core_degeneration():
    rng = np.random.default_rng(1003)
    sizes = np.unique(np.geomspace(10, 10_000, 50).astype(int))
    sizes = np.concatenate([sizes, rng.integers(10, 10_001, 50 - len(sizes))])
    failures = 0
    for i, n in enumerate(sizes.tolist()):
        avg_deg = float(rng.choice([2.0, 5.0, 12.0]))
        G = generate_synthetic(n, 1, p=min(1.0, avg_deg / max(n - 1, 1)), seed=int(i))
        expected = oracle.classic_core_numbers(n, G.edges[:, 1:].tolist())
        failures += firmcore_indices(G, 1).tolist() != expected
    _record("3. Classic-core degeneration", failures == 0,
            f"{len(sizes)} graphs, n up to {sizes.max()}, {failures} mismatches")


def _fc_violations(G, table):
    bad = 0
    L = G.num_layers
    top = -np.sort(-G.degrees, axis=1)
    for lam in range(1, L + 1):
        row = table.row(lam)
        bad += int(np.sum(row > top[:, lam - 1]))  # Top-lambda degree cap
        if lam < L:
            bad += int(np.sum(table.row(lam + 1) > row))  # hierarchy in lambda
        for k in range(1, int(row.max()) + 1):
            core = extract_firmcore(table, k, lam)
            deg = degree_matrix(G, core)
            bad += int(np.sum((deg >= k).sum(axis=1) < lam))  # degree condition
    return bad


def _fdc_violations(G, table):
    bad = 0
    L = G.num_layers
    for lam in range(1, L + 1):
        for k in range(1, table.k_max(lam) + 2):
            for r in range(0, G.num_nodes + 1):
                S, T = table.reconstruct(k, r, lam)
                in_s = np.zeros(G.num_nodes, bool)
                in_t = np.zeros(G.num_nodes, bool)
                in_s[S], in_t[T] = True, True
                layer, src, dst = G.edges.T
                keep = in_s[src] & in_t[dst]
                out = np.zeros((G.num_nodes, L), int)
                inc = np.zeros((G.num_nodes, L), int)
                np.add.at(out, (src[keep], layer[keep]), 1)
                np.add.at(inc, (dst[keep], layer[keep]), 1)
                bad += int(np.sum((out[S] >= k).sum(axis=1) < lam))
                bad += int(np.sum((inc[T] >= r).sum(axis=1) < lam))
                for kk, rr, ll in ((k + 1, r, lam), (k, r + 1, lam), (k, r, lam + 1)):
                    if ll <= L:
                        S2, T2 = table.reconstruct(kk, rr, ll)
                        bad += int(not (set(S2.tolist()) <= set(S.tolist())
                                        and set(T2.tolist()) <= set(T.tolist())))
    return bad


def test_04_structural_invariants():
    bad_fc = sum(_fc_violations(G, firmcore_decomposition(G))
                 for G in graph_suite(200, seed=1004, max_nodes=30, max_layers=5))
    bad_fc += sum(_fc_violations(G, firmcore_decomposition(G))
                  for G in [generate_synthetic(400, L, p=0.03, seed=L) for L in (2, 4, 6)])
    bad_fdc = sum(_fdc_violations(G, full_firmdcore(G))
                  for G in digraph_suite(100, seed=1005, max_nodes=10, max_layers=3))
    _record("4. Structural invariants", bad_fc + bad_fdc == 0,
            f"{bad_fc} FirmCore and {bad_fdc} FirmD-Core violations")


def test_05_lemma_bounds():
    checked = bad = 0
    for G in graph_suite(100, seed=1006, max_nodes=12, max_layers=4):
        table = firmcore_decomposition(G)
        for lam in range(1, G.num_layers + 1):
            for k in range(1, table.max_index(lam) + 1):
                core = extract_firmcore(table, k, lam)
                for beta in BETAS:
                    checked += 1
                    bad += not _geq(_rho_exact(G, core, beta),
                                    lemma1_bound(k, lam, G.num_layers, beta))
    for G in digraph_suite(100, seed=1007, max_nodes=8, max_layers=3):
        table = full_firmdcore(G)
        for lam in range(1, G.num_layers + 1):
            for k in range(1, table.k_max(lam) + 1):
                for r in range(1, table.max_r(k, lam) + 1):
                    S, T = table.reconstruct(k, r, lam)
                    if not (S.size and T.size):
                        continue
                    for beta in BETAS:
                        checked += 1
                        bound = lemma4_bound(k, r, lam, G.num_layers, beta, S.size, T.size)
                        bad += not _geq(rho_directed(G, S, T, beta).rho, bound)
    _record("5. Core density lower bounds", bad == 0, f"{checked} core/beta checks, {bad} violations")


def test_06_approximation_ratios():
    worst = []
    bad = 0
    for G in graph_suite(50, seed=1008, max_nodes=10, max_layers=3):
        lp = oracle.lambda_plus(G)
        for beta in BETAS:
            opt = oracle.exhaustive_densest(G, beta).rho
            got = fc_approx(G, beta).rho
            factor = float(approx_factor(G.num_layers, lp, beta))
            bad += not _geq(got, factor * opt)
            if opt > 0:
                worst.append(got / opt / factor)
    for G in digraph_suite(50, seed=1009, max_nodes=8, max_layers=3):
        lh = oracle.lambda_hat(G)
        table = full_firmdcore(G)
        for beta in BETAS:
            opt = oracle.exhaustive_densest(G, beta).rho
            got = fdc_approx(G, beta, table=table).rho
            factor = float(approx_factor(G.num_layers, lh, beta))
            bad += not _geq(got, factor * opt)
            if opt > 0:
                worst.append(got / opt / factor)
    _record("6. Approximation ratios", bad == 0,
            f"100 instances x 4 betas, {bad} violations, min achieved/guaranteed = {min(worst):.3f}")


def test_07_example_reproduction():
    got = [approx_factor(3, 2, b) for b in (1, 2, 3)]
    exact = got == [Fraction(1, 9), Fraction(2, 27), Fraction(4, 81)]
    grid = all(psi_beta(lp, b) >= max(lp ** b, lp) for lp in range(1, 11) for b in BETAS)
    _record("7. Approximation factor example", exact and grid,
            f"factors {', '.join(str(x) for x in got)}; psi grid {'ok' if grid else 'violated'}")


def test_08_bff_exact():
    bad = 0
    for G in graph_suite(100, seed=1010, max_nodes=10, max_layers=3):
        nodes, k = bff_mm(G)
        bad += not (bff_objective(G, nodes) == k == oracle.exhaustive_bff(G))
    _record("8. BFF-MM exactness", bad == 0, f"100 instances, {bad} mismatches")


def test_09_quasiclique_containment():
    rng = np.random.default_rng(1011)
    bad = found = 0
    ratios = []
    for G in graph_suite(50, seed=1012, max_nodes=10, max_layers=3, probs=(0.4, 0.6, 0.8)):
        gamma = rng.choice([0.5, 0.6, 0.75, 0.9, 1.0], size=G.num_layers).tolist()
        min_sup = float(rng.choice([0.34, 0.5, 0.67, 1.0]))
        min_size = int(rng.integers(2, 6))
        kept = quasiclique_prune(G, gamma, min_sup, min_size)
        ratios.append(pruning_ratio(G, kept))
        kept = set(kept.tolist())
        for H in oracle.exhaustive_quasicliques(G, gamma, min_sup, min_size):
            found += 1
            bad += not H <= kept
    _record("9. Quasi-clique pruning containment", bad == 0,
            f"{found} quasi-cliques, {bad} outside, mean pruning ratio {np.mean(ratios):.3f}")


def _time_decomposition(G, repeat):
    # a fresh graph per run so adjacency and degree construction are timed too
    times = []
    for _ in range(repeat):
        H = MultilayerGraph.from_edges(G.edges[:, 0], G.edges[:, 1], G.edges[:, 2],
                                       G.num_nodes, G.num_layers)
        t0 = time.perf_counter()
        firmcore_decomposition(H, 1)
        times.append(time.perf_counter() - t0)
    return min(times)


@pytest.mark.slow
def test_10_performance():
    firmcore_decomposition(generate_synthetic(20, 4, p=0.5, seed=0))  # compile outside timing
    n, m = 100_000, 1_000_000
    series = {}
    for L in (2, 4, 8, 16):
        G = generate_synthetic(n, L, p=m / (L * n * (n - 1) / 2), seed=L)
        series[L] = _time_decomposition(G, 2)
    within = series[4] < 30
    ratios = {L: series[L] / series[2] for L in series}
    quad = all(ratios[L] <= (L / 2) ** 2 for L in series)
    slope = np.polyfit(np.log(list(series)), np.log(list(series.values())), 1)[0]
    _record("10. Performance", within and quad and slope <= 2,
            f"|L|=4 in {series[4]:.2f}s; "
            + ", ".join(f"L={L}: {t:.2f}s" for L, t in series.items())
            + f"; log-log slope {slope:.2f}")


def test_11_determinism(tmp_path):
    fixtures = []
    for i in range(7):
        p = tmp_path / f"u{i}.txt"
        write_edge_list(generate_synthetic(80 + 40 * i, 1 + i % 5, p=0.08, seed=100 + i), p)
        fixtures.append(("u", p))
    for i in range(3):
        p = tmp_path / f"d{i}.txt"
        write_edge_list(generate_synthetic_directed(30 + 10 * i, 1 + i, p=0.15, seed=200 + i), p)
        fixtures.append(("d", p))
    commands = {
        "u": [["decompose"], ["densest", "--beta", "1.5"], ["bff"],
              ["prune", "--gamma", "0.6", "--min-sup", "0.5", "--min-size", "3"], ["stats"]],
        "d": [["ddecompose"], ["ddensest", "--beta", "2"]],
    }
    diffs = runs = 0
    for kind, path in fixtures:
        for cmd in commands[kind]:
            outs = []
            for threads in (1, 4):
                target = tmp_path / f"out_{threads}"
                code = cli.run(cmd + ["--input", str(path), "--threads", str(threads),
                                      "--output", str(target)])
                assert code == 0
                outs.append(target.read_bytes())
            runs += 1
            diffs += outs[0] != outs[1]
    _record("11. Determinism across thread counts", diffs == 0,
            f"{len(fixtures)} fixtures, {runs} commands, {diffs} differing outputs")
