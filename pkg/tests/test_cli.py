import json
from pathlib import Path

import pytest

from treeshift.cli import main

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_tree_info(capsys):
    code, out, _ = run(capsys, "tree", "info", "--matrix", "golden", "--format", "json")
    assert code == 0
    res = json.loads(out)["result"]
    assert [t["mask"] for t in res["types"]] == ["11", "10"]
    code, out, _ = run(capsys, "tree", "info", "--matrix", "full2")
    assert "|I| = 1" in out
    code, out, _ = run(capsys, "tree", "info", "--matrix", DATA / "upper.txt", "--format", "json")
    assert json.loads(out)["result"]["types"][1]["level_counts"] == [1] * 7


def test_paper_example(capsys):
    code, out, _ = run(capsys, "paper-example")
    assert code == 0
    assert "omega_p^U(t) = {0^eta2[01]}" in out
    assert "omega_q invariant = False; witnesses: 0^eta1[11] g2" in out
    assert "FAIL" not in out


def test_omega_modes(capsys):
    base = ["omega", "--matrix", DATA / "upper.txt", "--t", DATA / "point_u10.txt", "--res", "2^-3"]
    code, out, _ = run(capsys, *base, "--mode", "all", "--format", "json")
    assert code == 0 and json.loads(out)["result"]["count"] == 2
    code, out, _ = run(capsys, *base, "--mode", "followers", "--ray", "2.2.2.2.2.2.2.2.2.2", "--format", "json")
    assert [m["eta"] for m in json.loads(out)["result"]["members"]] == [2]
    code, out, _ = run(capsys, *base, "--mode", "cps", "--format", "json")
    vecs = json.loads(out)["result"]["vectors"]
    assert [v["types"] for v in vecs if v["maximal"]] == [[1, 2]]
    code, _, err = run(capsys, *base, "--mode", "ray")
    assert code == 2 and "needs --ray" in err


def test_lang_and_budget(capsys, monkeypatch):
    code, out, _ = run(capsys, "lang", "enum", "--depth", "1", "--format", "json")
    assert code == 0 and json.loads(out)["result"]["count"] == 8
    code, _, err = run(capsys, "lang", "enum", "--depth", "5")
    assert code == 3 and "budget" in err
    monkeypatch.setenv("TREESHIFT_BUDGET_BITS", "70")
    code, out, _ = run(capsys, "lang", "enum", "--depth", "3", "--format", "json")
    assert code == 0 and json.loads(out)["result"]["count"] == 2 ** 15
    monkeypatch.setenv("TREESHIFT_BUDGET_BITS", "2")
    code, _, _ = run(capsys, "lang", "enum", "--depth", "1")
    assert code == 3


def test_cps_list(capsys):
    code, out, _ = run(capsys, "cps", "list", "--max-depth", "2", "--format", "json")
    assert json.loads(out)["result"]["count"] == 5


def test_pict(capsys):
    code, out, _ = run(capsys, "pict", "check", "--matrix", "upper", "--set", DATA / "pair_u1.txt", "--eps", "2")
    assert code == 1 and "FAIL chain_transitive" in out
    code, out, _ = run(capsys, "pict", "construct", "--matrix", "upper", "--set", DATA / "pair_u1.txt",
                       "--horizon", "24", "--maxscale", "3")
    assert code == 0
    code, _, err = run(capsys, "pict", "check", "--matrix", "upper", "--set", DATA / "pair_u1.txt", "--eps", "2^-1")
    assert code == 2 and "unresolved" in err


def test_shadow_commands(capsys, tmp_path):
    tsft = DATA / "upper_golden_g2.json"
    orbit = tmp_path / "o.json"
    code, out, _ = run(capsys, "shadow", "run", "--matrix", "upper", "--tsft", tsft, "--delta", "2^-2",
                       "--seed", "4", "--emit-orbit", orbit)
    assert code == 0 and orbit.exists()
    code, out2, _ = run(capsys, "shadow", "run", "--matrix", "upper", "--tsft", tsft, "--delta", "2^-2",
                        "--orbit", orbit, "--seed", "4")
    assert code == 0
    code, out, _ = run(capsys, "shadow", "asymptotic", "--matrix", "upper", "--tsft", tsft,
                       "--schedule", DATA / "schedule.json")
    assert code == 0
    code, out, _ = run(capsys, "shadow", "adversarial", "--matrix", "upper", "--tsft", DATA / "upper_adv.json",
                       "--pattern", DATA / "upper_adv_pattern.txt", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["result"]["case"] == "follower of g2" and rep["result"]["scan_ran"]


def test_deterministic_output(capsys):
    argv = ["shadow", "run", "--matrix", "upper", "--tsft", DATA / "upper_golden_g2.json",
            "--delta", "2^-3", "--seed", "9", "--format", "json"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_error_codes(capsys):
    code, out, _ = run(capsys, "tree", "info", "--matrix", "/nonexistent", "--format", "json")
    assert code == 2 and json.loads(out)["error"] == "input"
    code, _, err = run(capsys, "omega", "--matrix", "upper", "--t", DATA / "point_u10.txt", "--res", "5")
    assert code == 2 and "precondition" in err
    with pytest.raises(SystemExit) as e:
        main(["omega"])
    assert e.value.code == 2


def test_suite_fault_injection(capsys):
    code, out, _ = run(capsys, "suite", "--only", "10", "--inject-fault")
    assert code == 1 and "criterion 10 FAIL" in out
    code, out, _ = run(capsys, "suite", "--only", "1,10", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["ok"] and len(rep["result"]["criteria"]) == 2
