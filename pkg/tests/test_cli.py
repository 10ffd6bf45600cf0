import csv
import io
import subprocess
import sys
from fractions import Fraction

import pytest

from summaprob import corpus as cp
from summaprob import evaluators as ev
from summaprob.cli import CSV_COLUMNS, main, rational
from summaprob.dsl import format_scenario

EX22 = ["--corpus", "ex-2.2", "--method", "ps", "--alpha", "1", "--eps", "1/2", "--delta", "1/2"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_eval_example(capsys):
    code, out, err = run(capsys, "eval", *EX22, "--grid", "100:10:3")
    assert code == 0
    table = rows(out)
    assert tuple(table[0]) == CSV_COLUMNS
    assert [r[0] for r in table[1:]] == ["100", "1000", "10000"]
    assert float(table[1][1]) == 0.05
    m = cp.example_2_2().model
    for r in table[1:]:
        n = int(r[0])
        assert r[1] == format(ev.ps_density(m, n, ev.MethodParams(1)), ".17g")
        assert r[2:] == ["ps", "1", "1/2", "1/2", "1", "ex-2.2"]
    assert "elapsed" in err


def test_values_carry_17_significant_digits(capsys):
    _, out, _ = run(capsys, "eval", *EX22, "--grid", "100:10:3")
    assert rows(out)[1][1] == "0.050000000000000003"


def test_liminf_example(capsys):
    assert run(capsys, "liminf", "--theta", "pow2", "--window", "1:20")[:2] == (0, "2\n")
    assert run(capsys, "liminf", "--theta", "fact_odd", "--window", "2:6")[1] == "20\n"


@pytest.mark.parametrize("alpha, code, word", [("0.6", 0, "ConvergesToZero"), ("0.4", 3, "FailsToConverge")])
def test_verdict_exit_codes(capsys, alpha, code, word):
    got, out, _ = run(capsys, "verdict", "--corpus", "ex-2.1", "--method", "ps", "--alpha", alpha)
    assert got == code and out.startswith(word)


def test_verdict_inconclusive(capsys):
    code, out, _ = run(capsys, "verdict", "--corpus", "ex-2.1", "--method", "ps", "--alpha", "0.4",
                       "--grid", "1000:2:2")
    assert code == 4 and out.startswith("Inconclusive")


def test_check_pass(capsys):
    code, out, _ = run(capsys, "check", "--id", "thm-3.4")
    assert code == 0 and out.startswith("thm-3.4\tpass")


def test_check_fail_exit_code(capsys, monkeypatch):
    from summaprob import harness as hn

    def broken():
        return hn.check_thm_2_2iv((cp.example_2_1(),), pairs=(("7/10", "3/10"),))

    monkeypatch.setitem(hn.CHECKS, "thm-2.2iv", broken)
    code, out, _ = run(capsys, "check", "--id", "thm-2.2iv")
    assert code == 5 and "\tfail\t" in out and "witness:" in out


@pytest.mark.parametrize("argv", [
    ["check", "--id", "thm-9.9"],
    ["check"],
    ["eval", "--corpus", "nope", "--method", "ps"],
    ["eval", "--corpus", "ex-2.1", "--method", "ps", "--alpha", "x"],
    ["eval", "--corpus", "ex-2.1", "--method", "ps", "--frobnicate"],
    ["eval", "--corpus", "ex-2.1", "--method", "ps", "--grid", "10:2"],
    ["eval", "--corpus", "ex-2.1", "--method", "stheta", "--theta", "pow2", "--grid", "10:2:3"],
    ["eval", "--corpus", "ex-2.1", "--method", "ps", "--blocks", "2:4"],
    ["eval", "--corpus", "ex-2.1", "--scenario", "a.sumprob", "--method", "ps"],
    ["liminf", "--theta", "pow1", "--window", "1:3"],
    ["parse", "--scenario", "/nonexistent/file.sumprob"],
    [],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


@pytest.mark.parametrize("argv", [
    ["eval", *EX22[:6], "--eps", "2", "--delta", "1/2"],  # beyond the corpus eps range
    ["eval", *EX22[:6], "--eps", "1/2", "--delta", "3/2"],
    ["eval", "--corpus", "ex-2.1", "--param", "s=1", "--method", "ps"],
    ["eval", "--corpus", "ex-3.1-lim0", "--method", "ps", "--grid", "1:10:3", "--eps", "0"],
    ["liminf", "--theta", "pow2", "--window", "5:3"],
])
def test_evaluator_errors_exit_6(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 6 and "summaprob:" in err


def test_param_overrides(capsys):
    code, out, _ = run(capsys, "eval", "--corpus", "ex-2.1", "--param", "s=3", "--method", "ps",
                       "--alpha", "1/2", "--grid", "100:10:2")
    assert code == 0 and rows(out)[1][1] == "0.5"


def test_lacunary_eval(capsys):
    code, out, _ = run(capsys, "eval", "--corpus", "ex-3.1-lim0", "--method", "stheta", "--blocks", "2:4")
    table = rows(out)
    assert code == 0 and [r[0] for r in table[1:]] == ["2", "3", "4"]
    assert float(table[1][1]) == pytest.approx(2 / 11)


def test_out_file(tmp_path, capsys):
    target = tmp_path / "profile.csv"
    code, out, _ = run(capsys, "eval", *EX22, "--grid", "100:10:3", "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_bytes().startswith(b"abscissa,value,method")
    assert b"\r" not in target.read_bytes()


def test_scenario_file_eval_and_defaults(tmp_path, capsys):
    path = tmp_path / "ex21.sumprob"
    path.write_text(format_scenario(cp.example_2_1().scenario) + "\n", encoding="utf-8")
    _, from_file, _ = run(capsys, "eval", "--scenario", str(path), "--method", "ps", "--alpha", "3/5",
                          "--grid", "1000:10:3")
    _, from_corpus, _ = run(capsys, "eval", "--corpus", "ex-2.1", "--method", "ps", "--alpha", "3/5",
                            "--grid", "1000:10:3")
    assert from_file == from_corpus


def test_parse_subcommand(tmp_path, capsys):
    good = tmp_path / "good.sumprob"
    text = format_scenario(cp.example_2_2().scenario)
    good.write_text(text, encoding="utf-8")
    assert run(capsys, "parse", "--scenario", str(good))[:2] == (0, "ok: scenario 'ex-2.2'\n")
    assert run(capsys, "parse", "--scenario", str(good), "--canonical")[1] == text + "\n"
    bad = tmp_path / "bad.sumprob"
    bad.write_text(text.replace("pow", "pwo", 1), encoding="utf-8")
    code, out, err = run(capsys, "parse", "--scenario", str(bad))
    assert code == 2 and out == "" and str(bad) in err


@pytest.mark.parametrize("text, value", [("0.1", Fraction(1, 10)), ("3/5", Fraction(3, 5)),
                                         ("1e-3", Fraction(1, 1000)), (" 2 ", Fraction(2))])
def test_rationals_are_exact(text, value):
    assert rational(text) == value


def test_identical_invocations_are_byte_identical():
    argv = [sys.executable, "-m", "summaprob", "eval", *EX22, "--grid", "1000:2:10"]
    first = subprocess.run(argv, capture_output=True, check=True).stdout
    second = subprocess.run(argv, capture_output=True, check=True).stdout
    assert first == second and first.count(b"\n") == 11
