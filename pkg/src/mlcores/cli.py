"""Command-line front end.

Exit codes: 0 success, 1 input parse error, 2 invalid flags, 3 budget or
resource refusal. Diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import json
import math
import resource
import sys
import time
import tracemalloc
from contextlib import contextmanager

import numpy as np

from .density import bff_mm, fc_approx, fdc_approx, pruning_ratio, quasiclique_prune
from .firmcore import firmcore_decomposition, firmcore_indices, write_core_table
from .firmdcore import DCoreIndexTable, firmdcore_decomposition, full_firmdcore, write_dcore_table
from .graph import (EdgeListParseError, EmptyGraphError, generate_synthetic, load_edge_list,
                    threads_from_env)
from .oracle import BudgetExceeded

EXIT_PARSE, EXIT_FLAGS, EXIT_RESOURCE = 1, 2, 3

DIRECTED_COMMANDS = {"ddecompose", "ddensest"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_FLAGS)


def _positive_float(text):
    x = float(text)
    if not x > 0 or math.isinf(x):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return x


def _positive_int(text):
    x = int(text)
    if x < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return x


def _gamma_list(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text}")
    if not vals or any(not 0 < g <= 1 for g in vals):
        raise argparse.ArgumentTypeError("gamma values must lie in (0, 1]")
    return vals


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="edge list with 'layer src dst' lines")
    common.add_argument("--directed", action="store_true", help="treat edges as directed")
    common.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads (default: $FIRMCORE_THREADS or 1)")
    common.add_argument("--output", help="output file (default: stdout)")
    common.add_argument("--format", choices=["tsv", "json"], default=None)

    parser = _Parser(prog="firmcore", description="FirmCore tools for multilayer graphs")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name in ("decompose", "ddecompose"):
        p = sub.add_parser(name, parents=[common],
                           help=("FirmD-Core" if name[0] == "d" else "FirmCore") + " index table")
        p.add_argument("--lambda", dest="lam", type=_positive_int)
    for name in ("densest", "ddensest"):
        p = sub.add_parser(name, parents=[common], help="approximate multilayer densest subgraph")
        p.add_argument("--beta", type=_positive_float, required=True)
    sub.add_parser("bff", parents=[common], help="exact BFF-MM via the top FirmCore")
    p = sub.add_parser("prune", parents=[common], help="quasi-clique candidate nodes")
    p.add_argument("--gamma", type=_gamma_list, required=True,
                   help="one value or a comma-separated value per layer")
    p.add_argument("--min-sup", type=_positive_float, required=True)
    p.add_argument("--min-size", type=_positive_int, required=True)
    sub.add_parser("stats", parents=[common], help="graph and Top-lambda degree statistics")
    p = sub.add_parser("bench", parents=[common], help="time a full decomposition")
    p.add_argument("--repeat", type=_positive_int, default=1)
    p.add_argument("--synthetic-edges", type=_positive_int,
                   help="benchmark generated graphs with this many edges instead of --input")
    p.add_argument("--synthetic-nodes", type=_positive_int, default=100_000)
    p.add_argument("--layers", type=_int_list, default=[2, 4, 8, 16],
                   help="layer counts for the synthetic series")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _validate(parser, args):
    if args.command != "bench" or args.synthetic_edges is None:
        if not args.input:
            parser.error(f"{args.command} requires --input")
    if args.command == "prune" and args.min_sup > 1:
        parser.error("--min-sup must lie in (0, 1]")
    if args.command == "bench" and any(l < 1 for l in args.layers):
        parser.error("--layers entries must be >= 1")
    if args.threads is None:
        args.threads = threads_from_env()
    if args.format is None:
        args.format = "tsv" if args.command in ("decompose", "ddecompose") else "json"


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _dump_json(obj, fh):
    json.dump(obj, fh, indent=2, sort_keys=False)
    fh.write("\n")


def _labels(G, nodes):
    return sorted(int(x) for x in G.node_labels[nodes])


def _cmd_decompose(G, args, fh):
    table = firmcore_decomposition(G, args.threads)
    if args.format == "tsv":
        write_core_table(table, fh, args.lam)
        return
    lams = range(1, G.num_layers + 1) if args.lam is None else [args.lam]
    order = np.argsort(G.node_labels, kind="stable")
    _dump_json({str(l): {str(int(G.node_labels[v])): int(table.row(l)[v]) for v in order}
                for l in lams}, fh)


def _cmd_ddecompose(G, args, fh):
    if args.lam is None:
        table = full_firmdcore(G, args.threads)
    else:
        row = firmdcore_decomposition(G, args.lam)
        table = DCoreIndexTable({args.lam: row}, G.num_nodes, G.node_labels, G.layer_labels)
    if args.format == "tsv":
        write_dcore_table(table, fh)
        return
    out = []
    for lam in sorted(table.rows):
        for k in range(1, table.k_max(lam) + 1):
            sl = table.rows[lam].slices[k]
            for v, t, s in zip(sl.nodes.tolist(), sl.t_index.tolist(), sl.s_index.tolist()):
                if t > 0 or s > 0:
                    out.append({"node": int(G.node_labels[v]), "lambda": lam, "k": k,
                                "t_index": t, "s_index": max(s, 0)})
    out.sort(key=lambda d: (d["lambda"], d["k"], d["node"]))
    _dump_json(out, fh)


def _cmd_densest(G, args, fh):
    approx = fdc_approx if args.command == "ddensest" else fc_approx
    _dump_json(approx(G, args.beta, args.threads).to_dict(G), fh)


def _cmd_bff(G, args, fh):
    nodes, k_max = bff_mm(G)
    _dump_json({"k_max": k_max, "nodes": _labels(G, nodes)}, fh)


def _cmd_prune(G, args, fh):
    gamma = args.gamma
    kept = quasiclique_prune(G, gamma if len(gamma) > 1 else gamma[0], args.min_sup, args.min_size)
    if args.format == "tsv":
        fh.write("node\n")
        fh.writelines(f"{x}\n" for x in _labels(G, kept))
        return
    _dump_json({"nodes": _labels(G, kept), "pruning_ratio": pruning_ratio(G, kept)}, fh)


def _cmd_stats(G, args, fh):
    counts = G.layer_edge_counts()
    deg = G.out_degrees if args.directed else G.degrees
    sorted_deg = -np.sort(-deg, axis=1)
    hist = {}
    for lam in range(1, G.num_layers + 1):
        values, freq = np.unique(sorted_deg[:, lam - 1], return_counts=True)
        hist[str(lam)] = {str(int(v)): int(f) for v, f in zip(values, freq)}
    _dump_json({
        "directed": bool(args.directed),
        "nodes": G.num_nodes,
        "edges": G.num_edges,
        "layers": G.num_layers,
        "per_layer_edges": {str(int(G.layer_labels[l])): int(c) for l, c in enumerate(counts)},
        "per_layer_density": {str(int(G.layer_labels[l])): float(c) / G.num_nodes
                              for l, c in enumerate(counts)},
        ("top_lambda_out_degree_histogram" if args.directed else "top_lambda_degree_histogram"): hist,
    }, fh)


def _measure(fn, repeat):
    times = []
    tracemalloc.start()
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    return {"seconds": min(times), "seconds_all": times, "peak_traced_bytes": peak}


def _decompose_fn(G, directed, threads):
    if directed:
        return lambda: full_firmdcore(G, threads)
    return lambda: firmcore_decomposition(G, threads)


def _warm_up(directed):
    # trigger compilation outside the timed region
    tiny = generate_synthetic(4, 2, p=1.0, seed=0)
    firmcore_indices(tiny, 1)
    if directed:
        full_firmdcore(tiny.to_directed())


def _cmd_bench(G, args, fh):
    _warm_up(args.directed)
    result = {"threads": args.threads}
    if G is not None:
        result["input"] = {"nodes": G.num_nodes, "edges": G.num_edges, "layers": G.num_layers,
                           **_measure(_decompose_fn(G, args.directed, args.threads), args.repeat)}
    else:
        series = []
        n, m = args.synthetic_nodes, args.synthetic_edges
        for L in args.layers:
            p = min(1.0, m / (L * n * (n - 1) / 2))
            H = generate_synthetic(n, L, p=p, seed=args.seed)
            run = _measure(_decompose_fn(H, False, args.threads), args.repeat)
            series.append({"layers": L, "nodes": n, "edges": H.num_edges, **run})
        result["series"] = series
    result["max_rss_kb"] = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    _dump_json(result, fh)


class _FlagError(Exception):
    pass


def _check_against_graph(G, args):
    if getattr(args, "lam", None) is not None and args.lam > G.num_layers:
        raise _FlagError(f"--lambda must lie in [1, {G.num_layers}]")
    if args.command == "prune" and len(args.gamma) not in (1, G.num_layers):
        raise _FlagError(f"--gamma needs 1 or {G.num_layers} values, got {len(args.gamma)}")


COMMANDS = {
    "decompose": _cmd_decompose,
    "ddecompose": _cmd_ddecompose,
    "densest": _cmd_densest,
    "ddensest": _cmd_densest,
    "bff": _cmd_bff,
    "prune": _cmd_prune,
    "stats": _cmd_stats,
    "bench": _cmd_bench,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    if args.command in DIRECTED_COMMANDS:
        args.directed = True
    if args.directed and args.command in ("densest", "bff", "prune", "decompose"):
        parser.error(f"{args.command} works on undirected graphs; use the d-prefixed command")

    G = None
    try:
        if args.input:
            G, stats = load_edge_list(args.input, directed=args.directed)
            if stats.dropped:
                print(f"dropped {stats.self_loops} self-loops and {stats.duplicates} duplicate "
                      f"edges", file=sys.stderr)
    except (EdgeListParseError, EmptyGraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc.strerror}", file=sys.stderr)
        return EXIT_PARSE

    try:
        if G is not None:
            _check_against_graph(G, args)
        with _sink(args.output) as fh:
            COMMANDS[args.command](G, args, fh)
    except _FlagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FLAGS
    except (BudgetExceeded, MemoryError) as exc:
        print(f"error: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
