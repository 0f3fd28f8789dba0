from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from kgtwist.cli import run
from kgtwist.document import fixture_names


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, err = call(*argv, "--format", "json")
    return code, json.loads(out) if out else None, err


CASES = [
    ("validate", "n2", 0),
    ("validate", "two_by_two", 0),
    ("validate", "flip_flop", 0),
    ("validate", "twisted_cube", 1),
    ("check-cocycle", "n2_rotation", 0),
    ("check-cocycle", "n2_corrupt_table", 1),
    ("cohomologous", "n2_rotation", 1),
    ("skew", "skew_n2_rotation", 0),
    ("solve-db", "n2", 1),
    ("solve-db", "skew_n2_rotation", 0),
    ("sigma-c", "sigma_n2", 0),
    ("convolve", "klein", 0),
    ("convolve", "klein_corrupt", 1),
    ("convolve", "matrix_units", 0),
    ("i-norm-scan", "i_norm_scan", 0),
    ("bratteli", "skew_o2_coboundary", 0),
    ("k0", "skew_o2_coboundary", 0),
    ("k0", "skew_n2_rotation", 0),
]


def test_fixtures_are_bundled():
    names = set(fixture_names())
    assert {name for _, name, _ in CASES} <= names


@pytest.mark.parametrize("command,fixture,code", CASES, ids=[f"{c}-{f}" for c, f, _ in CASES])
def test_exit_codes(command, fixture, code):
    got, report, err = call_json(command, f"builtin:{fixture}")
    assert got == code, err
    assert report["command"] == command and report["ok"] is (code == 0)


def test_validate_reports_bound_and_violations():
    _, report, _ = call_json("validate", "builtin:twisted_cube")
    assert report["info"]["bound"] == [1, 1, 1]
    assert {v["kind"] for v in report["violations"]} == {"confluence"}


def test_corrupt_table_witness():
    _, report, _ = call_json("check-cocycle", "builtin:n2_corrupt_table")
    viol = report["base"]["violations"]
    assert viol and all(v["kind"] == "identity" and len(v["witness"]) == 3 for v in viol)


def test_solve_db_outputs():
    _, report, _ = call_json("solve-db", "builtin:n2")
    assert report["obstruction"]["total_degree"] == [1, 0]
    _, report, _ = call_json("solve-db", "builtin:skew_n2_rotation")
    assert report["b"]["v@2,3"] == [2, 3]


def test_sigma_c_values():
    _, report, _ = call_json("sigma-c", "builtin:sigma_n2")
    assert [p["sigma"] for p in report["values"]] == ["1/3", "0"]
    assert report["depth"] == [7, 7] and report["identity"]["violations"] == []


def test_k0_outputs():
    _, report, _ = call_json("k0", "builtin:skew_o2_coboundary")
    assert report["group"] == "Z" and report["classes"]["v@0"] == [8]
    _, report, _ = call_json("k0", "builtin:skew_o2_coboundary", "--levels", "1")
    assert report["classes"]["v@0"] == [2]


def test_bratteli_dot():
    code, out, _ = call("bratteli", "builtin:skew_o2_coboundary", "--format", "dot")
    assert code == 0 and out.startswith("digraph bratteli")
    code, _, err = call("validate", "builtin:n2", "--format", "dot")
    assert code == 2 and "dot" in err


def test_homotopy_report_small_grid():
    code, report, _ = call_json("homotopy-report", "builtin:skew_n2_rotation", "--grid", "3", "--levels", "2", "--no-psi")
    assert code == 0
    assert report["grid"] == ["0", "1/2", "1"]
    assert report["k0_identical"] and report["bratteli_identical"] and report["intertwining_ok"]
    assert all("psi" not in e for e in report["per_t"])


def test_float_mode_scan():
    code, report, _ = call_json("i-norm-scan", "builtin:i_norm_scan", "--float")
    assert code == 0 and isinstance(report["max_jump"], float)
    assert all(isinstance(n, float) for _, n in report["curve"])


@pytest.mark.parametrize("argv", [
    ("validate", "builtin:n2"),
    ("check-cocycle", "builtin:n2_corrupt_table"),
    ("k0", "builtin:skew_n2_rotation", "--format", "json"),
    ("sigma-c", "builtin:sigma_n2", "--format", "json"),
])
def test_deterministic_output(argv):
    assert call(*argv) == call(*argv)


def test_input_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, out, err = call("validate", str(bad))
    assert code == 2 and out == "" and "ParseError" in err
    assert call("validate", str(tmp_path / "missing.json"))[0] == 2
    assert call("validate", "builtin:nope")[0] == 2
    assert call("frobnicate", "builtin:n2")[0] == 2
    assert call("validate", "builtin:n2", "--bound", "x,y")[0] == 2
    dangling = tmp_path / "dangling.json"
    dangling.write_text(json.dumps({"graph": {"k": 1, "vertices": ["v"],
                                              "edges": [{"id": "a", "color": 1, "src": "v", "dst": "w"}]}}))
    code, _, err = call("validate", str(dangling))
    assert code == 2 and "MalformedSkeleton" in err


def test_bound_exceeded_is_reported(tmp_path):
    doc = tmp_path / "d.json"
    doc.write_text(json.dumps({"graph": {"builtin": "N2"}, "bound": [1, 1],
                               "cocycle": {"kind": "rotation", "theta": "1/3"},
                               "sigma_c": {"depth": [1, 1], "verify_lags": 0, "pairs": [
                                   {"a": {"x": "v", "lag": [2, 0], "y": "v"},
                                    "b": {"x": "v", "lag": [0, 1], "y": "v"}}]}}))
    code, report, _ = call_json("sigma-c", str(doc))
    assert code == 1 and report["error"]["kind"] in {"InsufficientDepth", "BoundExceeded"}


def test_console_script_module():
    proc = subprocess.run([sys.executable, "-m", "kgtwist.cli", "validate", "builtin:n2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "ok: true" in proc.stdout
