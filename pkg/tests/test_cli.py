import csv
import io
import json
import math

import pytest

from hyperwkb.cli import parse_list, parse_pfq, parse_scalar, run, UsageError


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, out


def call_json(capsys, *argv):
    code, out = call(capsys, *argv)
    return code, json.loads(out)


def test_parse_scalar():
    assert parse_scalar("0.5") == 0.5
    assert parse_scalar("1,-2") == complex(1, -2)
    with pytest.raises(UsageError):
        parse_scalar("1,2,3")
    with pytest.raises(UsageError):
        parse_scalar("abc")


def test_parse_lists():
    p = parse_pfq("1/3,0.5+0.2j;2")
    assert str(p.upper[0]) == "1/3" and p.upper[1] == complex(0.5, 0.2)
    assert parse_pfq(";1").upper == ()
    assert parse_list("") == ()
    with pytest.raises(UsageError):
        parse_pfq("1,2")


def test_eval_example(capsys):
    code, d = call_json(capsys, "eval", "--pfq", "1,1;2", "--t", "0.5")
    assert code == 0
    assert d["schema"] == "hyperwkb/1"
    assert d["value"][0] == pytest.approx(1.3862944, abs=5e-8) and d["value"][1] == 0
    assert d["est_error"] < 1e-12
    assert abs(d["value"][0] - 2 * math.log(2)) <= 2 * d["est_error"]


def test_eval_complex_t(capsys):
    code, d = call_json(capsys, "eval", "--pfq", "1,1;2", "--t", "0.2,0.1")
    z = complex(0.2, 0.1)
    import cmath

    expect = -cmath.log(1 - z) / z
    assert abs(complex(*d["value"]) - expect) < 1e-13
    assert d["t"] == [0.2, 0.1]


def test_mzv_example(capsys):
    code, d = call_json(capsys, "mzv", "--index", "2")
    assert code == 0 and d["value"] == pytest.approx(1.6449341, abs=5e-8)
    _, d = call_json(capsys, "mzv", "--index", "2,3")
    _, z5 = call_json(capsys, "mzv", "--index", "5")
    _, z2 = call_json(capsys, "mzv", "--index", "2")
    _, z3 = call_json(capsys, "mzv", "--index", "3")
    _, d32 = call_json(capsys, "mzv", "--index", "3,2")
    assert abs(z2["value"] * z3["value"] - d["value"] - d32["value"] - z5["value"]) < 1e-10


def test_mzv_delta(capsys):
    _, d = call_json(capsys, "mzv", "--delta", "2", "--lam", "0.5")
    assert d["value"][0] == pytest.approx(2 / math.pi, abs=1e-14)


def test_verify_determinant_suite(capsys):
    code, d = call_json(capsys, "verify", "--suite", "lemma21", "--qmax", "6")
    assert code == 0 and d["passed"]
    checks = d["suites"][0]["checks"]
    assert all(c["passed"] for c in checks)
    assert "q <= 6" in checks[0]["detail"]


def test_verify_seed_echo_and_determinism(capsys):
    _, a = call(capsys, "verify", "--suite", "lemma21", "--seed", "17")
    _, b = call(capsys, "verify", "--suite", "lemma21", "--seed", "17")
    assert a == b
    assert json.loads(a)["seed"] == 17
    _, c = call(capsys, "verify", "--suite", "lemma21", "--seed", "18")
    assert json.loads(c)["suites"][0]["checks"][0]["measured"] != json.loads(a)["suites"][0]["checks"][0]["measured"]


def test_verify_timings_flag(capsys):
    _, d = call_json(capsys, "verify", "--suite", "wasow")
    assert d["suites"][0]["checks"][-1]["measured"] is None
    _, d = call_json(capsys, "verify", "--suite", "wasow", "--timings")
    assert d["suites"][0]["checks"][-1]["measured"] > 0


def test_verify_threads_same_output(capsys, monkeypatch):
    _, a = call(capsys, "verify", "--suite", "all")
    monkeypatch.setenv("HYPERWKB_THREADS", "3")
    _, b = call(capsys, "verify", "--suite", "all")
    assert a == b
    assert [s["suite"] for s in json.loads(a)["suites"]] == [
        "closedform", "integralrep", "frobenius", "lemma21", "wkb", "variations", "wasow", "connection"]


def test_verify_failure_exit_code(capsys, monkeypatch):
    from hyperwkb import suites

    monkeypatch.setitem(suites.TOLERANCES, ("lemma21", "closed_form_vs_lu"), 0.0)
    code, d = call_json(capsys, "verify", "--suite", "lemma21")
    assert code == 1 and not d["passed"]


def test_csv_output(capsys):
    code, out = call(capsys, "eval", "--pfq", "1,1;2", "--t", "0.5", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[0]["value_re"]) == pytest.approx(1.3862944, abs=5e-8)
    code, out = call(capsys, "verify", "--suite", "lemma21", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["check"] for r in rows] == ["closed_form_vs_lu", "symmetric_identities", "budget_seconds"]


def test_out_file(capsys, tmp_path):
    path = tmp_path / "o.json"
    code, out = call(capsys, "mzv", "--index", "3", "--out", str(path))
    assert out == ""
    assert json.loads(path.read_text())["value"] == pytest.approx(1.2020569, abs=5e-8)


def test_series_exact(capsys):
    _, d = call_json(capsys, "series", "--pfq", "1/2,1;3", "--order", "3")
    assert d["coefficients"] == ["1", "1/6", "1/16", "1/32"] and d["exact"]
    _, d = call_json(capsys, "series", "--pfq", "0.5,1;3", "--order", "1")
    assert d["coefficients"][1] == "1/6"


def test_wkb_commands(capsys):
    _, d = call_json(capsys, "wkb", "--pfq", ";1", "--t", "400", "--compare")
    assert d["rel_error"] <= 0.02
    _, d = call_json(capsys, "wkb", "--nus", "1,-1", "--A", "16", "--t", "0.5")
    assert d["mode"] == "large_parameter" and d["value"][0] != 0


def test_variation_commands(capsys):
    _, d = call_json(capsys, "variation", "--example", "airy", "--order", "7")
    assert [t for t in d["terms"] if t[1] != "0"] == [["4", "1/12"], ["7", "1/168"]]
    _, d = call_json(capsys, "variation", "--example", "first_order", "--order", "200", "--t", "0.3")
    assert d["value"][0] == pytest.approx(d["closed_form"], rel=1e-12)
    _, d = call_json(capsys, "variation", "--pfq", "1/2,1/3;3/2", "--R", "1,1", "--k", "1", "--order", "5")
    from fractions import Fraction as F

    from hyperwkb.opcore import EulerPolynomial
    from hyperwkb.variations import variation_formula

    ref = variation_formula((F(1, 2), F(1, 3)), (F(3, 2),), EulerPolynomial((1, 1)), 1, 5)
    assert d["terms"] == [[str(x), str(c)] for x, c in ref.terms()]


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["eval", "--pfq", "1,1;2"],
    ["eval", "--pfq", "1,1,2", "--t", "0.5"],
    ["eval", "--pfq", "1,1;2", "--t", "0.5", "--tol", "0.5"],
    ["eval", "--pfq", "1,1;2", "--t", "0.5", "--tol", "0"],
    ["eval", "--pfq", "1,1;2", "--t", "1,2,3"],
    ["series", "--pfq", "1;2", "--order", "201"],
    ["verify", "--suite", "nope"],
    ["verify", "--qmax", "9"],
    ["mzv"],
    ["wkb", "--t", "1"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        run(argv)
    assert exc.value.code == 2


@pytest.mark.parametrize("argv", [
    ["mzv", "--u1", "0"],
    ["mzv", "--index", "2,1"],
    ["eval", "--pfq", "1,1;2", "--t", "2"],
    ["wkb", "--pfq", ";1", "--t", "0,1"],
])
def test_domain_errors_exit_1(argv, capsys):
    code, d = call_json(capsys, *argv)
    assert code == 1
    assert d["schema"] == "hyperwkb/1"
    assert set(d["error"]) == {"type", "message"} and d["error"]["message"]


def test_main_entry(capsys):
    from hyperwkb.cli import main

    with pytest.raises(SystemExit) as exc:
        main(["mzv", "--index", "2"])
    assert exc.value.code == 0
