import csv
import io
import json
import subprocess
import sys

import pytest

from epsrank.cli import main

from conftest import sig_digits_agree


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def ok(*argv):
    code, out, err = run(*argv)
    assert code == 0, err
    return out


def error_of(*argv):
    code, out, err = run(*argv)
    assert code == 2 and out == ""
    lines = err.splitlines()
    assert len(lines) == 1
    return json.loads(lines[0])


def test_table_csv_matches_reference(reference_series):
    out = ok("table", "--n-max", "24", "--rows", "99,100,10000,10001", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["N"]) for r in rows] == list(range(1, 25)) + [99, 100, 10000, 10001]
    assert set(reference_series) == {int(r["N"]) for r in rows}
    for r in rows:
        ref = reference_series[int(r["N"])]
        for k in "SstEe":
            assert sig_digits_agree(float(r[k]), ref[k]), (r["N"], k)


def test_table_json_equals_csv():
    j = json.loads(ok("table", "--n-max", "30"))
    c = list(csv.DictReader(io.StringIO(ok("table", "--n-max", "30", "--format", "csv"))))
    assert len(j) == len(c) == 30
    for a, b in zip(j, c):
        assert a["N"] == int(b["N"])
        for k in "SstEe":
            assert a[k] == float(b[k])


def test_constant_example():
    d = json.loads(ok("constant", "--p", "2", "--d-kappa", "1", "--rho", "0", "--e", "1", "--epsilon", "1", "--r", "1"))
    assert d["log_C_total"] == pytest.approx(2.569856, abs=1e-6)
    assert d["levels"][0]["argmax"] == [3, 4]


def test_constant_raw_primes():
    d = json.loads(ok("constant", "--p", "2", "--e", "1", "--epsilon", "1", "--raw-primes", "50"))
    assert d["raw_primes"][0]["value"] <= d["levels"][0]["log_c_sharp"]


def test_constant_csv_equals_json():
    argv = ["constant", "--p", "3", "--e", "2", "--epsilon", "2", "--r", "2"]
    j = json.loads(ok(*argv))
    header, values = list(csv.reader(io.StringIO(ok(*argv, "--format", "csv"))))
    flat = dict(zip(header, values))
    assert float(flat["log_C_total"]) == j["log_C_total"]
    assert float(flat["levels.1.log_c_sharp"]) == j["levels"][1]["log_c_sharp"]
    assert flat["levels.0.argmax"] == ";".join(map(str, j["levels"][0]["argmax"]))


def test_disc():
    d = json.loads(ok("disc", "--p", "2", "--n", "10", "--exact"))
    assert d["exact_value"] == 6469693230
    d = json.loads(ok("disc", "--p", "2", "--n", "3", "--kind", "tame"))
    assert d["log_value"] == pytest.approx(4.653960350157523)


def test_bounds_and_check():
    d = json.loads(ok("bounds", "--p", "2", "--e", "2", "--tame", "0,0", "--r", "1,2"))
    assert [lv["rk_Cl_bound"] for lv in d["levels"]] == [2, 8]
    assert "leopoldt_assumed" in d["flags"]
    d = json.loads(ok("check", "--log-order", "0", "--log-disc", "4", "--log-C", "0", "--epsilon", "1"))
    assert d == {"holds": True, "margin": 2.0}


def test_modlab():
    d = json.loads(ok("modlab", "--p", "3", "--lengths", "1,2", "--mode", "both", "--r", "2"))
    assert [s["order"] for s in d["structural"]["steps"]][:3] == [1, 9, 27] and d["modes_agree"]
    d = json.loads(ok("modlab", "exhaustive", "--p", "3", "--max-len", "2", "--max-s", "2", "--r-max", "2"))
    assert d["modules"] == 5 and d["violations"] == []


def test_modlab_threads_same_result():
    argv = ["modlab", "exhaustive", "--p", "2", "--max-len", "3", "--max-s", "2"]
    assert ok("--threads", "2", *argv) == ok(*argv)


def test_quad():
    d = json.loads(ok("quad", "--disc", "-84"))
    assert d["h"] == 4 and d["elementary_divisors"] == [2, 2] and d["genus_pass"]
    d = json.loads(ok("quad", "scan", "--max", "2000", "--epsilon", "0.5"))
    assert d["violations"] == [] and d["margin"] > 0
    out = ok("quad", "genus", "--max", "100", "--format", "csv")
    assert out.splitlines()[0] == "D,h,two_rank,t,pass"


@pytest.mark.parametrize("argv,kind", [
    (["quad", "--disc", "-9"], "NonFundamental"),
    (["quad", "--disc", "-84", "--disc-cap", "10"], "CapExceeded"),
    (["table", "--n-max", "20", "--prime-cap", "10"], "CapExceeded"),
    (["table", "--n-max", "0"], "UsageError"),
    (["table", "--bogus"], "UsageError"),
    (["constant", "--p", "4", "--e", "1", "--epsilon", "1"], "ValueError"),
    (["constant", "--p", "2", "--e", "1", "--epsilon", "-1"], "UsageError"),
    (["modlab", "--p", "3"], "UsageError"),
    (["modlab", "--p", "3", "--lengths", "4,4", "--enum-cap", "100"], "CapExceeded"),
    (["bounds", "--p", "2", "--e", "2", "--tame", "1"], "ValueError"),
    ([], "UsageError"),
])
def test_validation_errors(argv, kind):
    assert error_of(*argv)["kind"] == kind


def test_non_fundamental_message():
    assert "non-fundamental discriminant" in error_of("quad", "--disc", "-9")["error"]


def test_internal_error_exit_1(monkeypatch):
    from epsrank import cli

    def boom(args, out):
        raise RuntimeError("kaput")

    parser = cli.build_parser
    monkeypatch.setattr(cli, "build_parser", lambda: _with_func(parser(), boom))
    code, out, err = run("check", "--log-order", "0", "--log-disc", "0", "--log-C", "0", "--epsilon", "1")
    assert code == 1 and json.loads(err)["kind"] == "internal"


def _with_func(parser, func):
    for action in parser._subparsers._group_actions:
        action.choices["check"].set_defaults(func=func)
    return parser


def test_deterministic_subprocess():
    argv = [sys.executable, "-m", "epsrank", "constant", "--p", "2", "--e", "3", "--epsilon", "0.7", "--r", "2"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["log_C_total"] > 0
