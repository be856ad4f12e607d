from __future__ import annotations

import json

import pytest

from sts_defining.cli import (
    EXIT_BUDGET,
    EXIT_DOMAIN,
    EXIT_OK,
    EXIT_USAGE,
    main,
    parse_partial,
    strip_timings,
    verify_rows,
)
from sts_defining.defining import DefiningSetRecord
from sts_defining.designs import builtin, parse_text


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_construct_builtin(capsys):
    code, out, err = run(capsys, "construct", "--builtin", "sts13-2")
    assert code == EXIT_OK
    assert "2 7 9" in out.splitlines()
    assert "v=13 b=26 r=6" in err


def test_construct_cyclic_matches_builtin(capsys, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert run(capsys, "construct", "--cyclic", "7", "0,1,3", "--out", str(a))[0] == EXIT_OK
    assert run(capsys, "construct", "--builtin", "sts7", "--out", str(b))[0] == EXIT_OK
    assert a.read_text() == b.read_text()


def test_construct_bose(capsys, tmp_path):
    path = tmp_path / "b2.txt"
    code, out, _ = run(capsys, "construct", "--bose", "2", "--out", str(path))
    assert code == EXIT_OK and "v=15 b=35 r=7" in out
    s = parse_text(path.read_text())
    assert s.v == 15 and s.b == 35


def test_construct_bad_cyclic_is_domain_error(capsys):
    code, _, err = run(capsys, "construct", "--cyclic", "7", "0,1,2")
    assert code == EXIT_DOMAIN and "error" in err


def test_usage_errors(capsys):
    assert run(capsys, "search")[0] == EXIT_USAGE
    assert run(capsys, "search", "not-a-system")[0] == EXIT_USAGE
    assert run(capsys, "frobnicate")[0] == EXIT_USAGE


def test_search_sts9(capsys):
    code, out, _ = run(capsys, "search", "sts9", "--mode", "min")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert list(doc) == ["command", "inputs_digest", "records", "timings", "budget", "status"]
    assert doc["records"][0]["size"] == 7 and doc["status"] == "ok"


def test_search_from_file(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(builtin("sts7").to_text())
    code, out, _ = run(capsys, "search", str(path), "--mode", "largest-minimal")
    assert code == EXIT_OK and json.loads(out)["records"][0]["size"] == 6


def test_search_pattern(capsys):
    code, out, _ = run(capsys, "search", "sts13-1", "--pattern", "5,4,4")
    assert code == EXIT_OK
    rec = json.loads(out)["records"][0]
    assert rec["size"] == 6 and rec["pattern"] == [5, 4, 4]


def test_budget_exhaustion_exit_code(capsys, tmp_path):
    out_path = tmp_path / "r.json"
    code, _, _ = run(capsys, "search", "sts9", "--budget", str(20 * 512), "--out", str(out_path))
    assert code == EXIT_BUDGET
    doc = json.loads(out_path.read_text())
    assert doc["status"] == "budget-exhausted"
    assert doc["partial"]["representatives_done"] == 20 and doc["partial"]["best_bound"] >= 7


def test_deterministic_across_jobs(capsys):
    docs = []
    for jobs in ("1", "3"):
        code, out, _ = run(capsys, "search", "sts9", "--mode", "largest-minimal", "--jobs", jobs)
        assert code == EXIT_OK
        docs.append(strip_timings(json.loads(out)))
    assert docs[0] == docs[1]


def test_spectra_small(capsys):
    code, out, _ = run(capsys, "spectra", "--v", "7")
    assert code == EXIT_OK
    spec = json.loads(out)["spectra"]
    assert (spec["spec_d"], spec["spec_D"], spec["d"], spec["D"]) == ([6], [6], 6, 6)


def test_spectra_rejects_other_orders(capsys):
    assert run(capsys, "spectra", "--v", "19")[0] == EXIT_USAGE


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "sts7", "RRRGGR.")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["strength"] == "strong" and doc["witness"] == "RRRGGRY" and doc["minimal"]
    code, out, _ = run(capsys, "classify", "sts7", "0:R")
    assert code == EXIT_DOMAIN and json.loads(out)["defining"] is False


def test_parse_partial_forms():
    assert parse_partial("R.G", 3) == {0: 0, 2: 1}
    assert parse_partial("0:R, 4:y", 7) == {0: 0, 4: 2}


def test_verify_flags_bad_rows(tmp_path, capsys):
    good = DefiningSetRecord("sts7", 7, (4, 2, 1), {0: 0, 1: 0, 2: 0, 3: 1, 4: 1, 5: 0}, "minimum", "strong", (0, 0, 0, 1, 1, 0, 2))
    wrong_witness = DefiningSetRecord("sts7", 7, (4, 2, 1), good.partial, "minimum", None, (0, 0, 0, 1, 1, 0, 1))
    not_minimal = DefiningSetRecord("sts7", 7, (4, 2, 1), dict(enumerate(good.witness)), "minimum", None, good.witness)
    checks = verify_rows([good, wrong_witness, not_minimal])
    assert [c.passed for c in checks] == [True, False, False]
    assert checks[1].checks["witness"] is False and checks[2].checks["minimal"] is False

    path = tmp_path / "rows.json"
    path.write_text(json.dumps([good.to_json()]))
    assert run(capsys, "verify", str(path))[0] == EXIT_OK
    path.write_text(json.dumps([good.to_json(), wrong_witness.to_json()]))
    code, out, _ = run(capsys, "verify", str(path))
    assert code == EXIT_DOMAIN and "1/2 rows pass" in out
