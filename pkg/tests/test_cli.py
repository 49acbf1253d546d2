import json

import pytest

from cbpv_quant.cli import run


@pytest.fixture()
def progdir(tmp_path):
    (tmp_path / "coin.cbpv").write_text(
        "por(return 0, por(nor(return 0, return 1), return 1))\n"
    )
    (tmp_path / "emax1.qf").write_text("Eopt<{1}>\n")
    (tmp_path / "costM.cbpv").write_text("cost[1](return 7)\n")
    (tmp_path / "costN.cbpv").write_text("nor(return 7, cost[3](return 7))\n")
    (tmp_path / "bad.cbpv").write_text("(\\x:nat. return x) ()\n")
    return tmp_path


def _paths(progdir, *names):
    return [str(progdir / n) for n in names]


def test_typecheck_ok(progdir):
    code, report = run(["typecheck", *_paths(progdir, "coin.cbpv"), "--signature", "prob+nondet"])
    assert code == 0
    assert report == "type: F nat"


def test_typecheck_error_exit_two(progdir):
    code, report = run(["typecheck", *_paths(progdir, "bad.cbpv"), "--signature", "prob"])
    assert code == 2
    assert "error" in report and "expected" in report


def test_eval_tree_format(progdir):
    code, report = run(
        ["eval", *_paths(progdir, "coin.cbpv"), "--signature", "prob+nondet", "--fuel", "8"]
    )
    assert code == 0
    assert report.splitlines()[0] == "por:"
    assert "  ret 0" in report
    assert "    nor:" in report


def test_eval_unknown_leaf_marker(tmp_path):
    p = tmp_path / "omega.cbpv"
    p.write_text(r"fix (\x:U(F nat). force x)")
    code, report = run(["eval", str(p), "--signature", "prob", "--fuel", "6"])
    assert code == 0
    assert report == "?"


def test_eval_nat_param_rendering(tmp_path):
    p = tmp_path / "upd.cbpv"
    p.write_text("update[l](3, return ())")
    code, report = run(
        ["eval", str(p), "--signature", "store", "--locations", "l", "--value-bound", "4", "--fuel", "6"]
    )
    assert code == 0
    assert report.splitlines()[0] == "update[l:=3]:"


def test_sat_coin(progdir):
    code, report = run(
        ["sat", *_paths(progdir, "coin.cbpv", "emax1.qf"), "--signature", "prob+nondet", "--fuel", "8"]
    )
    assert code == 0
    assert report.splitlines()[0] == "value = 0.5"
    assert "fragment = positive" in report


def test_sat_json(progdir):
    code, report = run(
        [
            "sat",
            *_paths(progdir, "coin.cbpv", "emax1.qf"),
            "--signature",
            "prob+nondet",
            "--fuel",
            "8",
            "--json",
        ]
    )
    doc = json.loads(report)
    assert doc["interval"] == {"lo": "0.5", "hi": "0.5", "exact": True}


def test_compare_exit_codes_and_witness(progdir):
    code, report = run(
        [
            "compare",
            *_paths(progdir, "costM.cbpv", "costN.cbpv"),
            "--signature",
            "cost+nondet",
            "--suite-size",
            "3",
            "--fuel",
            "8",
        ]
    )
    assert code == 1
    assert "Copt<{7}>" in report
    code2, report2 = run(
        [
            "compare",
            *_paths(progdir, "costM.cbpv", "costM.cbpv"),
            "--signature",
            "cost+nondet",
            "--suite-size",
            "3",
            "--fuel",
            "8",
        ]
    )
    assert code2 == 0
    assert "no distinction found" in report2


def test_distinguish_verb(progdir):
    code, report = run(
        [
            "distinguish",
            *_paths(progdir, "costM.cbpv", "costN.cbpv"),
            "--signature",
            "cost+nondet",
            "--max-size",
            "3",
            "--fuel",
            "16",
        ]
    )
    assert code == 1
    assert "Copt<{7}>" in report
    code2, _ = run(
        [
            "distinguish",
            *_paths(progdir, "costM.cbpv", "costM.cbpv"),
            "--signature",
            "cost+nondet",
            "--max-size",
            "2",
            "--fuel",
            "8",
        ]
    )
    assert code2 == 0


def test_reports_are_deterministic(progdir):
    argv = [
        "compare",
        *_paths(progdir, "costM.cbpv", "costN.cbpv"),
        "--signature",
        "cost+nondet",
        "--suite-size",
        "4",
        "--fuel",
        "16",
        "--json",
    ]
    assert run(argv) == run(argv)


def test_laws_verb_small():
    code, report = run(
        [
            "laws",
            "--modality",
            "E,Epes",
            "--samples",
            "40",
            "--seed",
            "1",
            "--depth",
            "3",
            "--no-relator",
            "--no-congruence",
            "--signature",
            "prob+nondet",
        ]
    )
    assert code == 0
    assert "all laws pass" in report


def test_stdin_program(progdir, monkeypatch):
    import io
    import sys

    monkeypatch.setattr(sys, "stdin", io.StringIO("return 3"))
    code, report = run(["typecheck", "-", "--signature", "prob"])
    assert code == 0
    assert report == "type: F nat"


def test_config_file_discovery(progdir, monkeypatch):
    (progdir / "cbpv-quant.toml").write_text("signature = prob+nondet\nfuel = 8\n")
    monkeypatch.chdir(progdir)
    code, report = run(["sat", "coin.cbpv", "emax1.qf"])
    assert code == 0
    assert report.splitlines()[0] == "value = 0.5"


def test_flags_override_config(progdir, monkeypatch):
    (progdir / "cbpv-quant.toml").write_text("signature = prob\n")
    monkeypatch.chdir(progdir)
    # the file's signature lacks nor, the flag restores it
    code, _ = run(["typecheck", "coin.cbpv", "--signature", "prob+nondet"])
    assert code == 0
    code2, report2 = run(["typecheck", "coin.cbpv"])
    assert code2 == 2
    assert "unknown effect operator" in report2


def test_compare_both_flag_reports_each_direction(progdir):
    code, report = run(
        [
            "compare",
            *_paths(progdir, "costM.cbpv", "costN.cbpv"),
            "--signature",
            "cost+nondet",
            "--suite-size",
            "3",
            "--fuel",
            "16",
            "--both",
        ]
    )
    assert code == 1
    lines = report.splitlines()
    assert len(lines) == 2
    assert "Cpes<{7}>" in lines[0] or "Cpes<{7}>" in lines[1]
    assert "Copt<{7}>" in lines[0] or "Copt<{7}>" in lines[1]


def test_eval_json_structure(progdir):
    code, report = run(
        ["eval", *_paths(progdir, "coin.cbpv"), "--signature", "prob+nondet", "--fuel", "8", "--json"]
    )
    doc = json.loads(report)
    assert doc["tree"]["op"] == "por"
    assert doc["tree"]["children"][0] == {"leaf": "return 0"}


def test_sat_exact_flag(tmp_path):
    p = tmp_path / "geo.cbpv"
    p.write_text(r"fix (\f:U(F nat). por(return 0, force f))")
    q = tmp_path / "phi.qf"
    q.write_text("step(E<{0}>, 0.5)")
    code, report = run(
        ["sat", str(p), str(q), "--signature", "prob", "--fuel", "2", "--exact"]
    )
    assert code == 0
    # fuel 2 alone cannot certify the step; the exact retry loop can
    assert report.splitlines()[0] == "value = 1"
