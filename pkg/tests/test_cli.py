import json
import subprocess
import sys

import pytest

from mlcores import cli, oracle
from mlcores.graph import (generate_synthetic, generate_synthetic_directed, write_edge_list)


@pytest.fixture
def single_layer(tmp_path):
    path = tmp_path / "single.txt"
    G = generate_synthetic(30, 1, p=0.2, seed=3)
    write_edge_list(G, path)
    return path, G


@pytest.fixture
def planted(tmp_path):
    path = tmp_path / "planted.txt"
    write_edge_list(generate_synthetic(200, 3, "planted", core_size=20, p_in=0.9,
                                       p_out=0.02, seed=1), path)
    return path


def _run(argv, capsys):
    code = cli.run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_decompose_single_layer_is_classic_core(single_layer, capsys):
    path, G = single_layer
    code, out, _ = _run(["decompose", "--input", path, "--lambda", 1], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "node\tlambda\tcore"
    got = {int(a): int(c) for a, _, c in (ln.split("\t") for ln in lines[1:])}
    expected = oracle.classic_core_numbers(G.num_nodes, G.edges[:, 1:].tolist())
    assert got == {int(G.node_labels[v]): expected[v] for v in range(G.num_nodes)}


def test_densest_covers_planted_core(planted, capsys):
    code, out, _ = _run(["densest", "--input", planted, "--beta", 1], capsys)
    assert code == 0
    report = json.loads(out)
    assert set(range(20)) <= set(report["nodes"])
    assert report["source_core"] is not None


def test_malformed_line_exit_1(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("0 1 2\n0 2 x\n")
    code, _, err = _run(["decompose", "--input", path], capsys)
    assert code == 1
    assert ":2:" in err


def test_missing_file_exit_1(tmp_path, capsys):
    code, _, err = _run(["stats", "--input", tmp_path / "nope.txt"], capsys)
    assert code == 1 and "cannot read" in err


@pytest.mark.parametrize("argv", [
    ["densest"],
    ["decompose"],
    ["densest", "--input", "x", "--beta", "-1"],
    ["prune", "--input", "x", "--gamma", "1.2", "--min-sup", "1", "--min-size", "3"],
    ["prune", "--input", "x", "--gamma", "1", "--min-sup", "1.5", "--min-size", "3"],
    ["bff", "--input", "x", "--directed"],
    ["frobnicate"],
])
def test_bad_flags_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.run(argv)
    assert exc.value.code == 2


def test_lambda_beyond_layers_exit_2(single_layer, tmp_path, capsys):
    out_path = tmp_path / "out.tsv"
    code, _, err = _run(["decompose", "--input", single_layer[0], "--lambda", 2,
                         "--output", out_path], capsys)
    assert code == 2 and "--lambda" in err
    assert not out_path.exists()


def test_gamma_length_mismatch_exit_2(single_layer, capsys):
    code, _, _ = _run(["prune", "--input", single_layer[0], "--gamma", "1,1",
                       "--min-sup", 1, "--min-size", 3], capsys)
    assert code == 2


def test_self_loops_reported(tmp_path, capsys):
    path = tmp_path / "loops.txt"
    path.write_text("0 5 5\n0 5 6\n0 6 5\n")
    code, out, err = _run(["bff", "--input", path], capsys)
    assert code == 0
    assert "1 self-loops and 1 duplicate" in err
    assert json.loads(out) == {"k_max": 1, "nodes": [5, 6]}


def test_stats_and_prune(planted, capsys):
    code, out, _ = _run(["stats", "--input", planted], capsys)
    stats = json.loads(out)
    assert code == 0 and stats["nodes"] == 200 and stats["layers"] == 3
    assert set(stats["top_lambda_degree_histogram"]) == {"1", "2", "3"}
    code, out, _ = _run(["prune", "--input", planted, "--gamma", "0.8", "--min-sup", 1,
                         "--min-size", 10], capsys)
    pruned = json.loads(out)
    assert code == 0 and set(range(20)) <= set(pruned["nodes"])
    assert 0 < pruned["pruning_ratio"] < 1


def test_directed_commands(tmp_path, capsys):
    path = tmp_path / "d.txt"
    write_edge_list(generate_synthetic_directed(25, 2, p=0.2, seed=5), path)
    code, out, _ = _run(["ddecompose", "--input", path], capsys)
    assert code == 0 and out.startswith("node\tlambda\tk\tt_index\ts_index\n")
    code, out, _ = _run(["ddensest", "--input", path, "--beta", 2], capsys)
    report = json.loads(out)
    assert code == 0 and report["S"] and report["T"] and len(report["source_core"]) == 3
    code, out, _ = _run(["stats", "--input", path, "--directed"], capsys)
    assert code == 0 and json.loads(out)["directed"] is True


def test_json_decompose_uses_labels(tmp_path, capsys):
    path = tmp_path / "g.txt"
    path.write_text("7 100 200\n7 200 300\n7 100 300\n")
    code, out, _ = _run(["decompose", "--input", path, "--format", "json"], capsys)
    assert code == 0
    assert json.loads(out) == {"1": {"100": 2, "200": 2, "300": 2}}
    code, out, _ = _run(["densest", "--input", path, "--beta", 1], capsys)
    assert json.loads(out)["layers"] == [7]


def _fixture_files(tmp_path):
    paths = []
    for i in range(4):
        p = tmp_path / f"u{i}.txt"
        write_edge_list(generate_synthetic(60 + 20 * i, 2 + i, p=0.1, seed=i), p)
        paths.append(p)
    p = tmp_path / "d0.txt"
    write_edge_list(generate_synthetic_directed(30, 3, p=0.15, seed=9), p)
    return paths, p


def test_thread_count_does_not_change_bytes(tmp_path, capsys):
    undirected, directed = _fixture_files(tmp_path)
    cases = [["decompose", "--input", p] for p in undirected]
    cases += [["densest", "--input", p, "--beta", 1] for p in undirected[:2]]
    cases += [["ddecompose", "--input", directed], ["ddensest", "--input", directed, "--beta", 1]]
    for argv in cases:
        outs = []
        for threads in (1, 4):
            target = tmp_path / f"out{threads}"
            assert cli.run([str(a) for a in argv] + ["--threads", str(threads),
                                                    "--output", str(target)]) == 0
            outs.append(target.read_bytes())
        assert outs[0] == outs[1]


def test_threads_from_env(monkeypatch, single_layer, capsys):
    monkeypatch.setenv("FIRMCORE_THREADS", "3")
    args = cli.build_parser().parse_args(["stats", "--input", str(single_layer[0])])
    cli._validate(cli.build_parser(), args)
    assert args.threads == 3


def test_bench_synthetic(capsys):
    code, out, _ = _run(["bench", "--synthetic-edges", 2000, "--synthetic-nodes", 500,
                         "--layers", "2,4"], capsys)
    result = json.loads(out)
    assert code == 0
    assert [s["layers"] for s in result["series"]] == [2, 4]
    assert all(s["seconds"] >= 0 for s in result["series"])


def test_module_entry_point(single_layer):
    proc = subprocess.run([sys.executable, "-m", "mlcores", "stats", "--input", str(single_layer[0])],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["layers"] == 1
