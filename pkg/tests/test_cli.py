import json
import subprocess
import sys

import pytest

from cosetforge.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_group_commands(capsys, tmp_path):
    path = tmp_path / "g.json"
    rep = report(capsys, "group", "make", "--name", "D6", "--out", path)
    assert rep["outputs"]["order"] == 12 and rep["schema"] == 1
    assert report(capsys, "group", "validate", "--group", path)["outputs"]["valid"]
    subs = report(capsys, "group", "subgroups", "--group", "S3")["outputs"]
    assert subs["count"] == 6 and sum(s["normal"] for s in subs["subgroups"]) == 3


def test_norm_of_coset_indicator(capsys, tmp_path):
    path = tmp_path / "w.json"
    report(capsys, "fn", "make", "--group", "D6", "--set", "1,7", "--out", path)
    rep = report(capsys, "fn", "norm", "--fn", path)
    assert rep["outputs"]["algebra_norm"] == pytest.approx(1.0)


def test_fn_round_and_conv(capsys, tmp_path):
    f = tmp_path / "f.json"
    f.write_text(json.dumps({"group": "Z4", "mode": "float", "values": [0.95, 2.02, 0, -1]}))
    rep = report(capsys, "fn", "round", "--fn", f, "--epsilon", 0.1)
    assert rep["outputs"]["values"] == [1, 2, 0, -1]
    a = tmp_path / "a.json"
    report(capsys, "fn", "make", "--group", "Z5", "--set", "0,1", "--out", a)
    rep = report(capsys, "fn", "conv", "--fn", a, "--fn2", a, "--normalization", "count")
    assert rep["outputs"]["values"] == [1, 2, 1, 0, 0]


def test_decompose_compile_eval_roundtrip(capsys, tmp_path):
    f = tmp_path / "f.json"
    values = [2, 0, 3, 1, 2, 0, 3, 1, -1, 0, 0, 0]
    f.write_text(json.dumps({"group": "Z12", "mode": "exact", "values": values}))
    d, t = tmp_path / "d.json", tmp_path / "t.json"
    rep = report(capsys, "decompose", "--fn", f, "--out", d)
    assert rep["outputs"]["report"]["exact"]
    rep = report(capsys, "tree", "compile", "--decomp", d, "--out", t)
    assert rep["outputs"]["leaves"] <= rep["outputs"]["leaf_bound"]
    assert report(capsys, "tree", "eval", "--tree", t)["outputs"]["values"] == values
    assert report(capsys, "tree", "eval", "--tree", t, "--x", 2)["outputs"]["value"] == 3
    rep = report(capsys, "tree", "prune", "--tree", t)
    assert rep["outputs"]["leaves_after"] <= rep["outputs"]["leaves_before"]
    assert report(capsys, "tree", "dot", "--tree", t)["outputs"]["dot"].startswith("digraph")
    rep = report(capsys, "decompose", "--fn", f, "--exact-min")
    assert rep["outputs"]["report"]["optimal"]


def test_single_leaf_tree_eval(capsys, tmp_path):
    t = tmp_path / "t.json"
    t.write_text(json.dumps({"group": "S3", "root": 0, "nodes": [{"kind": "leaf", "value": 4}]}))
    assert report(capsys, "tree", "eval", "--tree", t)["outputs"]["values"] == [4] * 6


def test_addcomb_commands(capsys):
    rep = report(capsys, "connect", "--group", "Z12", "--set", "0,4,8")
    assert rep["outputs"]["verdict"] == "connected" and rep["outputs"]["witnesses_recheck"]
    rep = report(capsys, "connect", "--group", "Z101", "--set", "3,17,40,58,77,95",
                 "--mode", "samples:50")
    assert rep["outputs"]["exhaustive"] is False
    assert report(capsys, "energy", "--group", "Z8", "--set", "0,1")["outputs"]["energy"] == 6
    rep = report(capsys, "bsg", "--group", "Z64", "--set", "0,4,8,12,16,20,24,28,32,36,40,44,48,52,56,60",
                 "--threshold", 1)
    assert rep["outputs"]["doubling"] == 1.0
    rep = report(capsys, "cs-trial", "--trials", 50)
    assert rep["outputs"]["r_used"] == 64


def test_verify_exit_codes(capsys):
    code, out, _ = run(capsys, "verify", "ct")
    assert code == 0 and json.loads(out)["outputs"]["passed"]
    code, out, _ = run(capsys, "verify", "split")
    assert code == 1 and not json.loads(out)["outputs"]["passed"]


def test_ap_scan_csv(capsys, tmp_path):
    out = tmp_path / "ap.csv"
    code, text, _ = run(capsys, "ap-scan", "--out", out)
    assert code == 0 and out.read_text() == text
    assert text.splitlines()[1].startswith("32,")


def test_output_is_byte_identical(capsys):
    argv = ("--seed", 7, "cs-trial", "--trials", 40)
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    _, other, _ = run(capsys, "--seed", 8, "cs-trial", "--trials", 40)
    assert other != first


@pytest.mark.parametrize("argv,code", [
    (["verify", "nope"], 70),
    (["ap-scan", "--p", "2051"], 71),
    (["ap-scan", "--N", "3000"], 72),
    (["group", "subgroups", "--group", "Q8"], 72),
    (["connect", "--group", "Z12", "--set", "0,4", "--mode", "sometimes"], 72),
    (["bsg", "--group", "Z997", "--set", "1,50,300,701", "--threshold", "1"], 64),
    (["connect", "--group", "Z12", "--set", ""], 60),
])
def test_error_exit_codes(capsys, argv, code):
    got, out, err = run(capsys, *argv)
    assert got == code and out == ""
    assert "error" in json.loads(err)


def test_error_codes_for_files(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"table": [[0, 0], [0, 0]]}))
    assert run(capsys, "group", "validate", "--group", bad)[0] == 11
    f = tmp_path / "f.json"
    f.write_text(json.dumps({"group": "Z3", "mode": "float", "values": [0.4, 1, 2]}))
    assert run(capsys, "fn", "round", "--fn", f, "--epsilon", 0.1)[0] == 21
    assert run(capsys, "decompose", "--fn", f)[0] == 21
    t = tmp_path / "t.json"
    t.write_text(json.dumps({"group": "Z3", "nodes": [{"kind": "leaf", "value": 1},
                                                      {"kind": "leaf", "value": 2}]}))
    assert run(capsys, "tree", "eval", "--tree", t)[0] == 40


def test_argument_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        main(["decompose"])
    assert info.value.code == 2


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "cosetforge.cli", "energy", "--group", "Z8",
                           "--set", "0,1"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["outputs"]["energy"] == 6
