import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import path_tree
from ntma import io
from ntma.cli import main, parse_args
from ntma.random_models import GWParams, sample_er
from ntma.structures import Graph, RootedTree


# --- file formats -----------------------------------------------------------


def test_graph_round_trip(tmp_path, k4):
    io.write_graph(k4, tmp_path / "k4.txt")
    assert (tmp_path / "k4.txt").read_text().splitlines()[0] == "4 6"
    assert io.read_graph(tmp_path / "k4.txt") == k4


def test_graph_round_trip_is_byte_identical(tmp_path):
    g = sample_er(500, 2 / 500, 1)
    io.write_graph(g, tmp_path / "a.txt")
    io.write_graph(io.read_graph(tmp_path / "a.txt"), tmp_path / "b.txt")
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()


@pytest.mark.parametrize(
    "text, msg",
    [
        ("4 2\n0 1\n3 3\n", "self-loop at line 3"),
        ("4 2\n0 1\n1 0\n", "duplicate edge at line 3"),
        ("4 1\n0 9\n", "out of range at line 2"),
        ("4 2\n0 1\n", "announces 2 edges"),
        ("4\n", "line 1"),
        ("3 1\n0 x\n", "line 2"),
    ],
)
def test_graph_parse_errors(text, msg):
    with pytest.raises(io.FormatError, match=msg):
        io.parse_graph(text)


def test_empty_graph_round_trip():
    g = Graph.from_edges(3, [])
    assert io.parse_graph(io.format_graph(g)) == g


def test_tree_round_trips(tmp_path):
    for t in (RootedTree.empty(), path_tree(3), RootedTree(np.array([2, 2, -1, 0]))):
        io.write_tree(t, tmp_path / "t.json")
        back = io.read_tree(tmp_path / "t.json")
        assert back == t and back.parent.tolist() == t.parent.tolist()


@pytest.mark.parametrize(
    "doc", [{"parent": [1, 0]}, {"parent": [-1, -1]}, {"parent": [-1, 2, 1]}],
    ids=["two-cycle", "two-roots", "cycle"],
)
def test_tree_parse_rejects_non_trees(doc):
    with pytest.raises(io.FormatError, match="not a tree"):
        io.parse_tree(json.dumps(doc))


def test_tree_parse_checks_root_field():
    with pytest.raises(io.FormatError, match="root"):
        io.parse_tree('{"root": 1, "parent": [-1, 0]}')


def test_sigma_and_matches(tmp_path):
    io.write_sigma([2, 0, 1], tmp_path / "s")
    assert io.read_sigma(tmp_path / "s") == (2, 0, 1)
    io.write_matches([(0, 2), (1, 1)], tmp_path / "m.csv")
    assert io.read_matches(tmp_path / "m.csv").pairs == ((0, 2), (1, 1))
    (tmp_path / "bad").write_text("0\n0\n")
    with pytest.raises(io.FormatError, match="permutation"):
        io.read_sigma(tmp_path / "bad")


# --- argument parsing ---------------------------------------------------------


def test_gen_erc_config():
    cfg = parse_args("gen-erc --n 100 --lambda 2.1 --s 0.9 --seed 7 --out-prefix pair".split())
    assert cfg.command == "gen-erc" and cfg.seed == 7
    assert cfg.params == {"n": 100, "p": pytest.approx(0.021), "s": 0.9}
    assert str(cfg.out) == "pair"


def test_rate_config_matches_hundred_trial_setup():
    cfg = parse_args("rate --lambda 1.2 --independent --dmin 4 --dmax 14 --trials 100 --seed 1 --out r.csv".split())
    assert cfg.params["gw"] == GWParams(1.2, depth_cap=14, independent=True)
    assert (cfg.params["dmin"], cfg.params["dmax"], cfg.params["trials"]) == (4, 14, 100)
    assert cfg.seed == 1


@pytest.mark.parametrize(
    "argv, msg",
    [
        ("align --g1 a --g2 b --depth 3 --gamma -1 --out m.csv", "gamma must be positive"),
        ("gen-erc --n 100 --lambda 2.1 --s 0.9 --out-prefix p", "requires an explicit --seed"),
        ("gen-erc --n 100 --lambda 2.1 --s 1.5 --seed 1 --out-prefix p", "--s"),
        ("rate --lambda 2 --independent --s 0.5 --dmin 1 --dmax 3 --seed 1 --out r", "--independent"),
        ("rate --lambda 2 --independent --dmin 1 --dmax 3 --trials 5 --seed 1 --out r", "--trials"),
        ("tree-test --lambda 2 --s 0.9 --d 4 --gamma 2 --trials 40", "--seed"),
        ("tree-weight --t1 a --t2 b --depth 2 --bogus 1", "unrecognized"),
        ("align --g1 a --g2 b --depth 1 --gamma 1.5 --out m.csv", "depth"),
        ("gen-erc --n 10 --lambda 2 --s 0.9 --seed -1 --out-prefix p", "seed"),
    ],
)
def test_usage_errors_exit_2(argv, msg, capsys):
    with pytest.raises(SystemExit) as exc:
        parse_args(argv.split())
    assert exc.value.code == 2
    assert msg in capsys.readouterr().err


def test_sweep_needs_a_seed(tmp_path, capsys):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("n = 50\nlambda = 2\ns = 0.9\nd = 3\ngamma = 1.5\n")
    with pytest.raises(SystemExit):
        parse_args(["sweep", "--config", str(cfg), "--out", "x"])
    assert parse_args(["sweep", "--config", str(cfg), "--seed", "4", "--out", "x"]).seed == 4


# --- end to end -----------------------------------------------------------------


def test_pipeline(tmp_path, capsys):
    p = str(tmp_path / "pair")
    assert main(f"gen-erc --n 120 --lambda 2.5 --s 1.0 --seed 3 --out-prefix {p}".split()) == 0
    assert main(
        f"align --g1 {p}.g1.txt --g2 {p}.g2.txt --depth 4 --gamma 1.3 --variant ntma2 --out {p}.m.csv".split()
    ) == 0
    capsys.readouterr()
    assert main(f"score --matches {p}.m.csv --sigma {p}.sigma --n 120".split()) == 0
    result = json.loads(capsys.readouterr().out)
    assert set(result) == {"correct_fraction", "err_fraction"}
    assert result["correct_fraction"] > 0


def test_tree_weight_command(tmp_path, capsys):
    p = str(tmp_path / "t")
    assert main(f"gen-gw --lambda 2 --depth-cap 4 --seed 3 --out-prefix {p}".split()) == 0
    outs = []
    for engine in ("dp", "rec"):
        main(f"tree-weight --t1 {p}.t1.json --t2 {p}.t2.json --depth 3 --engine {engine}".split())
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1] and outs[0].strip().isdigit()


def test_runtime_failure_exits_1(tmp_path, capsys):
    code = main(["tree-weight", "--t1", str(tmp_path / "missing"), "--t2", "x", "--depth", "2"])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_commands_are_byte_reproducible(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        main(f"gen-erc --n 80 --lambda 2 --s 0.8 --seed 5 --out-prefix {d}/p".split())
        main(f"rate --lambda 1.8 --independent --dmin 1 --dmax 4 --trials 30 --seed 2 --out {d}/r.csv".split())
        (d / "s.cfg").write_text("n = 60\nlambda = 2\ns = 0.9\nd = 3\ngamma = 1.4\ntrials = 2\nseed = 1\n")
        main(f"sweep --config {d}/s.cfg --out {d}/sw.csv".split())
        outs.append([(d / f).read_bytes() for f in ("p.g1.txt", "p.g2.txt", "p.sigma", "r.csv", "sw.csv")])
    assert outs[0] == outs[1]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ntma", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "gen-erc" in res.stdout
