import json
import subprocess
import sys

import pytest

from bohrdiff.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, [json.loads(line) for line in out.splitlines() if line.startswith("{")], out, err


def test_verify_lemmas(capsys):
    code, recs, _, err = run(capsys, "verify-lemmas", "--p", "2", "--spec", "3:2", "--shifts", "1",
                             "--mode", "exhaustive")
    assert code == 0
    assert len(recs) == 7 and all(r["violations"] == 0 for r in recs)
    assert set(recs[0]) >= {"check", "lemma_tag", "params", "mode", "trials", "violations", "witnesses",
                            "exact_values"}
    assert err.count("[PASS]") == 7


def test_count(capsys):
    code, (rec,), _, _ = run(capsys, "count", "--p", "2", "--spec", "4:1", "--cell", "0")
    assert code == 0
    assert rec["exact_values"]["count"] == "14893" and rec["exact_values"]["group"] == "65536"
    code, (rec,), _, _ = run(capsys, "count", "--p", "3", "--spec", "2:1", "--cell", "Z")
    assert code == 0 and rec["exact_values"]["count"] == rec["exact_values"]["enumerated"]


def test_bohr_density_reports_missing_coset(capsys):
    code, (rec,), _, _ = run(capsys, "bohr-density", "--p", "2", "--scale", "3", "--dmax", "2", "--balls", "3:1")
    assert code == 1 and rec["violations"] == 1
    assert rec["witnesses"][0].startswith("system=")
    code, (rec,), _, _ = run(capsys, "bohr-density", "--p", "2", "--scale", "3", "--dmax", "2", "--balls", "3:2")
    assert code == 0


def test_construction_commands(capsys):
    code, recs, _, _ = run(capsys, "check-construction", "--preset", "p2-single")
    assert code == 0 and [r["trials"] for r in recs[:2]] == [81, 81]
    code, recs, _, _ = run(capsys, "check-construction", "--p", "2", "--spec", "3:2,6:2", "--shifts", "1,1",
                           "--mode", "sampled", "--samples", "2000")
    assert code == 0 and recs[0]["params"]["samples"] == "2000"
    code, recs, _, _ = run(capsys, "build", "--p", "2", "--spec", "3:2:1,6:2:1")
    assert code == 0 and [r["check"] for r in recs] == ["construction.density"] * 2 + ["construction.ball"] * 2
    assert recs[2]["exact_values"]["size"] == "9"


def test_brute_theorem2(capsys):
    code, (rec,), _, _ = run(capsys, "brute-theorem2", "--p", "3", "--scale", "1")
    assert code == 0 and rec["exact_values"]["subsets"] == "512"


@pytest.mark.parametrize("argv", [
    ["count", "--p", "4", "--spec", "2:1"],
    ["count", "--p", "2", "--spec", "2-1"],
    ["verify-lemmas", "--p", "2", "--spec", "3:2", "--shifts", "2"],
    ["count", "--p", "two", "--spec", "2:1"],
    ["check-construction", "--p", "3", "--spec", "3:2:1", "--E", "1,2"],
    ["verify-lemmas", "--p", "2", "--spec", "3:2", "--parts", "viii"],
])
def test_bad_arguments_exit_2(capsys, argv):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_budget_exit_3(capsys):
    assert main(["brute-theorem2", "--p", "2", "--scale", "3", "--budget", "1000"]) == 3
    assert main(["count", "--p", "2", "--spec", "5:1", "--budget", "1000"]) == 0
    assert main(["verify-lemmas", "--p", "2", "--spec", "5:2", "--budget", "1000"]) == 3


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# counting run\np = 2\nspec = 4:1\ncell = 0\n")
    code, (rec,), _, _ = run(capsys, "count", "--config", str(cfg))
    assert code == 0 and rec["exact_values"]["count"] == "14893"
    # explicit flags win over the file
    code, (rec,), _, _ = run(capsys, "count", "--config", str(cfg), "--spec", "3:2")
    assert rec["exact_values"]["count"] == "9"
    cfg.write_text("p = 2\nspecs = 4:1\n")
    assert main(["count", "--config", str(cfg)]) == 2
    cfg.write_text("command = build\np = 2\nspec = 4:1\n")
    assert main(["count", "--config", str(cfg)]) == 2


def test_config_echo_round_trip(tmp_path, capsys):
    assert main(["verify-lemmas", "--p", "3", "--spec", "3:2", "--shifts", "1", "--seed", "7",
                 "--print-config"]) == 0
    first = capsys.readouterr().out
    cfg = tmp_path / "echo.cfg"
    cfg.write_text(first)
    assert main(["verify-lemmas", "--config", str(cfg), "--print-config"]) == 0
    assert capsys.readouterr().out == first
    assert "seed = 7" in first


def test_output_file(tmp_path, capsys):
    out = tmp_path / "report.jsonl"
    assert main(["count", "--p", "2", "--spec", "3:2", "--output", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["exact_values"]["count"] == "9"


def test_thread_override_keeps_output(monkeypatch, capsys):
    argv = ["check-construction", "--preset", "p3-double", "--mode", "sampled", "--samples", "2000", "--seed", "3"]
    main(argv)
    one = capsys.readouterr().out
    monkeypatch.setenv("BOHRDIFF_THREADS", "4")
    main(argv)
    assert capsys.readouterr().out == one
    monkeypatch.setenv("BOHRDIFF_THREADS", "many")
    assert main(argv) == 2


def test_module_entry_point_is_deterministic():
    argv = [sys.executable, "-m", "bohrdiff", "verify-lemmas", "--p", "2", "--spec", "3:2,6:2", "--shifts", "1,1",
            "--mode", "sampled", "--samples", "500", "--seed", "11", "--parts", "i,iii"]
    a = subprocess.run(argv, capture_output=True, check=True)
    b = subprocess.run(argv, capture_output=True, check=True)
    assert a.stdout == b.stdout and a.stdout.count(b"\n") == 2
