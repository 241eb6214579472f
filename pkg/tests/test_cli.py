import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from multiuntil import cli, report

FOUR_STATE = str(Path(__file__).resolve().parent.parent / "models" / "four_state.ctmc")
G = "a U[1,2] b U[3,4] c"
THRESHOLD = f"P>0.0025 ({G})"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_json(capsys):
    code, out, _ = run(capsys, "check", "--model", FOUR_STATE, "--formula", G, "--json")
    assert code == 0
    rep = json.loads(out)
    entry = rep["results"]["corrected"]
    assert abs(entry["probabilities"][0] - math.exp(-6) * (1 - math.exp(-2))) <= 1e-9
    assert rep["settings"] == {"algorithm": "corrected", "epsilon": 1e-12}
    assert "timing_seconds" not in rep


def test_check_text_and_explain(capsys):
    code, out, _ = run(capsys, "check", "--model", FOUR_STATE, "--formula", G, "--explain")
    assert code == 0
    assert "0.00214328" in out
    assert out.count("factor ") == 9


def test_original_marked_unsafe(capsys):
    code, out, _ = run(capsys, "check", "--model", FOUR_STATE, "--formula", G,
                       "--algorithm", "original")
    assert code == 0 and "UNSAFE" in out


def test_threshold_check_exit_zero(capsys):
    code, out, _ = run(capsys, "check", "--model", FOUR_STATE, "--formula", THRESHOLD, "--json")
    assert code == 0
    assert json.loads(out)["results"]["corrected"]["initial_verdict"] is False


def test_compare(capsys):
    code, out, _ = run(capsys, "compare", "--model", FOUR_STATE, "--formula", THRESHOLD,
                       "--samples", "20000", "--json")
    assert code == 0
    res = json.loads(out)["results"]
    sq2 = math.sqrt(2)
    sinh = (math.exp(sq2) - math.exp(-sq2)) * sq2
    expected = {"corrected": math.exp(-6) * (1 - math.exp(-2)),
                "original": 0.5 * math.exp(-8) * sinh,
                "partial": 0.25 * math.exp(-6) * (1 - math.exp(-2)) * sinh}
    for name, value in expected.items():
        assert abs(res[name]["initial"] - value) <= 1e-6
    assert res["corrected"]["initial_verdict"] is False
    assert res["partial"]["initial_verdict"] is True
    assert res["original"]["unsafe"] is True


def test_compare_text_table(capsys):
    code, out, _ = run(capsys, "compare", "--model", FOUR_STATE, "--formula", THRESHOLD,
                       "--samples", "2000")
    assert code == 0
    rows = {line.split()[0]: line.split() for line in out.splitlines() if line.strip()}
    assert rows["corrected"][-1] == "false"
    assert rows["partial"][-1] == "true"
    assert "original*" in rows


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", "--model", FOUR_STATE, "--formula", G,
                       "--samples", "5000", "--seed", "3", "--json")
    assert code == 0
    o = json.loads(out)["oracle"]
    assert o["samples"] == 5000 and o["seed"] == 3
    assert o["interval"][0] <= o["p_hat"] <= o["interval"][1]


@pytest.mark.parametrize("argv", [
    ["check", "--model", FOUR_STATE, "--formula", ""],
    ["check", "--model", FOUR_STATE, "--formula", "a U[1,3] b U[2,4] c"],
    ["check", "--model", FOUR_STATE, "--formula", "a U[0,1] zz"],
    ["check", "--model", "/nonexistent.ctmc", "--formula", G],
    ["simulate", "--model", FOUR_STATE, "--formula", G, "--samples", "0"],
    ["check", "--model", FOUR_STATE],
    ["check", "--model", FOUR_STATE, "--formula", G, "--algorithm", "fast"],
])
def test_validation_errors_exit_one(capsys, argv):
    code = None
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1
    assert capsys.readouterr().err


def test_syntax_error_caret(capsys):
    code, _, err = run(capsys, "check", "--model", FOUR_STATE, "--formula", "a U[1,2]")
    assert code == 1
    lines = err.splitlines()
    assert lines[-1].index("^") - 2 == len("a U[1,2]")


def test_internal_error_exit_two(capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("boom")
    monkeypatch.setattr(cli, "check", boom)
    code, _, err = run(capsys, "check", "--model", FOUR_STATE, "--formula", G)
    assert code == 2 and "boom" in err


@pytest.mark.parametrize("argv", [
    ["check", "--formula", G, "--json"],
    ["check", "--formula", THRESHOLD, "--json", "--explain"],
    ["simulate", "--formula", G, "--json", "--samples", "3000"],
    ["compare", "--formula", THRESHOLD, "--json", "--samples", "3000"],
    ["compare", "--formula", THRESHOLD, "--samples", "3000"],
])
def test_deterministic_output(capsys, argv):
    argv = argv[:1] + ["--model", FOUR_STATE] + argv[1:]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second


def test_json_round_trip(capsys):
    _, out, _ = run(capsys, "compare", "--model", FOUR_STATE, "--formula", THRESHOLD,
                    "--json", "--samples", "1000")
    assert report.dumps(report.loads(out)) == out


def test_timing_flag(capsys):
    _, out, _ = run(capsys, "check", "--model", FOUR_STATE, "--formula", G, "--json", "--timing")
    assert json.loads(out)["timing_seconds"] >= 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "multiuntil", "check", "--model", FOUR_STATE,
                           "--formula", G], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "0.00214328" in proc.stdout
