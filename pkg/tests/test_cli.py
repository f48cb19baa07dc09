import csv
import io
import json
import subprocess
import sys

import pytest

from fyk.certificate import canonical_cases
from fyk.cli import UsageError, parse_grid, run


def invoke(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def doc(*argv):
    code, text = invoke(*argv)
    return code, json.loads(text)


@pytest.mark.parametrize(
    "text, expected",
    [("6,7,8", [6.0, 7.0, 8.0]), ("0.1:0.3:0.1", [0.1, 0.2, 0.3]), ("4:12:4", [4.0, 8.0, 12.0]), ("5", [5.0])],
)
def test_parse_grid(text, expected):
    assert parse_grid(text) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["", "3:1:1", "1:2:0", "a,b"])
def test_parse_grid_rejects(text):
    with pytest.raises(UsageError):
        parse_grid(text)


def test_verify_identities_document():
    code, d = doc("verify-identities", "--gamma-grid", "0.3,0.5", "--n-grid", "7")
    assert code == 0
    assert d["schema"] == "fyk/1" and d["command"] == "verify-identities"
    assert d["summary"]["passed"] and d["summary"]["rows"] == len(d["rows"])
    assert all(row["pass"] for row in d["rows"])


def test_tight_tolerance_gives_exit_2():
    code, d = doc("verify-identities", "--gamma-grid", "0.3", "--n-grid", "7", "--tol", "1e-17")
    assert code == 2
    assert not d["summary"]["passed"]


@pytest.mark.parametrize(
    "argv",
    [
        ["verify-identities", "--gamma-grid", ""],
        ["verify-identities", "--tol", "-1"],
        ["no-such-command"],
        ["certify", "--input", "/nonexistent/curv.json"],
        ["constants", "--gamma", "1.5"],
    ],
)
def test_usage_and_domain_errors_exit_1(argv):
    code, _ = invoke(*argv)
    assert code == 1


def test_integrals_pass_and_gate():
    code, d = doc("integrals", "--n", "8", "--gamma", "0.25")
    assert code == 0
    names = {row.get("name") for row in d["rows"]}
    assert "theta identity" in names
    code, d = doc("integrals", "--n", "5", "--gamma", "0.6")
    assert code == 2


def test_theta_scan_positive():
    code, d = doc("theta-scan", "--n-max", "12")
    assert code == 0
    assert all(row["all_positive"] for row in d["rows"])


def test_constants_csv():
    code, text = invoke("constants", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert float(rows[0]["d_star"]) == pytest.approx(-1.0, abs=1e-12)


def test_fourier_check():
    code, d = doc("fourier-check", "--cases", "5:0.3", "--mc-samples", "20000", "--mc-tol", "5e-2")
    assert code == 0


def test_geometry_check_reports_probes():
    code, d = doc("geometry-check", "--n-grid", "5,6")
    assert code == 0
    assert any(row.get("expect") == "violation" for row in d["rows"])


def test_minimize_command():
    code, d = doc("minimize", "--n", "5", "--gamma", "0.5")
    assert code == 0
    assert d["summary"]["passed"]


def test_certify_round_trip(tmp_path):
    params, curv = canonical_cases()[0]
    path = tmp_path / "curv.json"
    path.write_text(json.dumps(curv.to_dict()))
    code, d = doc("certify", "--input", str(path), "--n", "7", "--gamma", "0.3")
    assert code == 0
    assert d["summary"]["verdict"] == "strict-inequality-certified"
    assert d["summary"]["theorem_applied"] == "Theorem1"


def test_certify_not_certified_exit_2(tmp_path):
    _, curv = canonical_cases()[2]
    path = tmp_path / "flat.json"
    path.write_text(json.dumps(curv.to_dict()))
    code, _ = invoke("certify", "--input", str(path), "--n", "8", "--gamma", "0.4")
    assert code == 2


def test_certify_schema_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"umbilic": "yes"}))
    code, _ = invoke("certify", "--input", str(path))
    assert code == 1
    assert "umbilic" in capsys.readouterr().err


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_output_file_is_byte_identical_across_runs(tmp_path, fmt):
    a, b = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
    argv = ["verify-identities", "--gamma-grid", "0.3", "--n-grid", "7",
            "--monte-carlo-samples", "20000", "--monte-carlo-tol", "1e-2", "--format", fmt]
    assert run(argv + ["--output", str(a)], stdout=io.StringIO()) == 0
    assert run(argv + ["--output", str(b)], stdout=io.StringIO()) == 0
    assert a.read_bytes() == b.read_bytes()


def test_thread_count_does_not_change_output(monkeypatch):
    argv = ["verify-identities", "--gamma-grid", "0.2:0.8:0.2", "--n-grid", "7,8"]
    monkeypatch.setenv("FYK_THREADS", "1")
    _, one = invoke(*argv)
    monkeypatch.setenv("FYK_THREADS", "4")
    _, four = invoke(*argv)
    assert one == four


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fyk", "constants"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["summary"]["passed"]
