import csv
import io
import json
from fractions import Fraction as F

import pytest

from selfsim_ap.cli import SWEEP_COLUMNS, main, parse_command, sweep


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_command():
    spec = parse_command(["member", "-n", "2", "--lambda", "0.35", "--x", "1/4"])
    assert spec.command == "member"
    assert spec.flags["lam"] == F(7, 20) and spec.flags["x"] == F(1, 4)
    assert spec.out is None


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["bounds", "-n", "2"],
    ["member", "-n", "2", "--lambda", "1/3", "--x", "0.333..."],
    ["bounds", "-n", "2", "--lambda", "1/2"],
    ["verify", "--cert", "/nonexistent/cert.json"],
])
def test_usage_errors_exit_64(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 64 and out == "" and err.startswith("error:")


def test_bounds_json(capsys):
    code, out, _ = run(capsys, "bounds", "-n", "2", "--lambda", "3/10")
    doc = json.loads(out)
    assert code == 0
    assert list(doc)[:2] == ["kind", "params"]
    assert doc["params"] == {"n": 2, "lambda": "3/10"}
    assert doc["bounds"]["exact"] == 2


def test_construct_json(capsys):
    code, out, _ = run(capsys, "construct", "-n", "3", "--lambda", "1/4")
    doc = json.loads(out)
    assert code == 0 and doc["kind"] == "EXISTS"
    w = doc["witness"]
    assert (w["first"], w["diff"], w["length"]) == ("0/1", "3/16", 6)
    assert w["codings"][1] == {"preperiod": [0, 2], "period": []}


def test_construct_infeasible_and_truncated(capsys):
    code, out, _ = run(capsys, "construct", "-n", "2", "--lambda", "1/4")
    assert code == 0 and json.loads(out)["kind"] == "INFEASIBLE"
    code, out, _ = run(capsys, "construct", "-n", "2", "--lambda", "2/5", "--digits", "6")
    doc = json.loads(out)
    assert code == 1 and doc["kind"] == "APPROXIMATE"
    assert "residual" in doc["witness"]


def test_member_and_search_exit_codes(capsys):
    code, out, _ = run(capsys, "member", "-n", "2", "--lambda", "1/3", "--x", "1/2")
    assert code == 0 and json.loads(out)["verdict"] == "NO"
    code, out, _ = run(capsys, "member", "-n", "2", "--lambda", "1/3", "--x", "1/7", "--depth", "1")
    assert code == 1 and json.loads(out)["verdict"] == "UNKNOWN"
    code, out, _ = run(capsys, "search", "-n", "2", "--lambda", "2/5", "-k", "3", "--max-depth", "2")
    assert code == 1 and json.loads(out)["kind"] == "UNKNOWN"


def test_solve_lambda(capsys):
    code, out, _ = run(capsys, "solve-lambda", "-n", "2", "-m", "2", "--tol", "1/10^12")
    doc = json.loads(out)
    lo, hi = F(doc["interval"]["low"]), F(doc["interval"]["high"])
    assert code == 0 and hi - lo <= F(1, 10**12)
    assert (lo + 1) ** 2 < 2 < (hi + 1) ** 2


CERT_COMMANDS = [
    ["bounds", "-n", "2", "--lambda", "7/20"],
    ["construct", "-n", "3", "--lambda", "1/4"],
    ["construct", "-n", "2", "--lambda", "1/3"],
    ["construct", "-n", "2", "--lambda", "2/5", "--digits", "10"],
    ["construct", "-n", "3", "--lambda", "1/6"],
    ["member", "-n", "2", "--lambda", "1/3", "--x", "1/4"],
    ["member", "-n", "2", "--lambda", "1/3", "--x", "1/2"],
    ["search", "-n", "2", "--lambda", "1/3", "-k", "4"],
    ["search", "-n", "2", "--lambda", "3/10", "-k", "3"],
    ["solve-lambda", "-n", "3", "-m", "2"],
]


@pytest.mark.parametrize("argv", CERT_COMMANDS)
def test_certificates_round_trip(capsys, tmp_path, argv):
    path = tmp_path / "cert.json"
    code, out, _ = run(capsys, *argv, "--out", str(path))
    assert out == "" and path.exists()
    code, out, _ = run(capsys, "verify", "--cert", str(path))
    doc = json.loads(out)
    assert code == 0 and doc["result"] == "PASS", doc["checks"]


def test_verify_detects_tampering(capsys, tmp_path):
    path = tmp_path / "cert.json"
    run(capsys, "construct", "-n", "3", "--lambda", "1/4", "--out", str(path))
    doc = json.loads(path.read_text())
    doc["witness"]["diff"] = "1/5"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", "--cert", str(path))
    assert code == 2 and json.loads(out)["result"] == "FAIL"

    run(capsys, "search", "-n", "2", "--lambda", "3/10", "-k", "3", "--out", str(path))
    doc = json.loads(path.read_text())
    doc["params"]["lambda"] = "1/3"
    path.write_text(json.dumps(doc))
    code, _, _ = run(capsys, "verify", "--cert", str(path))
    assert code == 2


def _sweep_rows(grid, n=2):
    buf = io.StringIO()
    summary = sweep(n, grid, out=buf)
    return list(csv.DictReader(io.StringIO(buf.getvalue()))), summary, buf.getvalue()


def test_sweep_exact_column():
    rows, summary, _ = _sweep_rows([F(3, 10), F(1, 3), F(7, 20), F(2, 5)])
    assert [r["exact"] for r in rows] == ["2", "4", "4", "4"]
    assert [r["lambda"] for r in rows] == ["3/10", "1/3", "7/20", "2/5"]
    assert summary["exact_non_decreasing"] is True


def test_sweep_boundary_source():
    rows, _, _ = _sweep_rows([F(1, 3)])
    assert "BoundaryWitness" in rows[0]["lower_source"].split("|")


def test_sweep_empty_grid():
    rows, summary, text = _sweep_rows([])
    assert rows == [] and text == ",".join(SWEEP_COLUMNS) + "\n"
    assert summary["rows"] == 0


def test_sweep_row_errors_do_not_stop_run():
    rows, summary, _ = _sweep_rows([F(1, 2), F(9, 20)])
    assert rows[0]["error"].startswith("DomainError")
    assert rows[1]["error"] == "" and rows[1]["lower"] == "4"
    assert summary["errors"] == 1


def test_sweep_cli(capsys, tmp_path):
    path = tmp_path / "sweep.csv"
    code, out, err = run(capsys, "sweep", "-n", "2", "--grid", "3/10, 1/3", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(err)["rows"] == 2
    assert path.read_text().splitlines()[0] == ",".join(SWEEP_COLUMNS)


@pytest.mark.parametrize("argv", CERT_COMMANDS[:4])
def test_output_is_deterministic(capsys, argv):
    first = run(capsys, *argv)
    assert run(capsys, *argv) == first
