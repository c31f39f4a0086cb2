import csv
import io
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from skewell.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sample_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        code, _, _ = _run(capsys, "sample", "--family", "st", "--n", "1000", "--seed", "7",
                          "--out", str(path))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    rows = _rows(a.read_text())
    assert len(rows) == 1000 and list(rows[0]) == ["y1"]


def test_pdf_example(capsys):
    code, out, _ = _run(capsys, "pdf", "--family", "st", "--at", "0", "--xi", "0", "--omega", "1",
                        "--alpha", "3", "--nu", "5")
    assert code == 0
    row = _rows(out)[0]
    assert float(row["pdf"]) == pytest.approx(stats.t(5).pdf(0.0), abs=1e-14)


def test_pdf_json_and_points_file(tmp_path, capsys):
    pts = tmp_path / "pts.csv"
    pts.write_text("a,b\n0,0\n1,-1\n")
    code, out, _ = _run(capsys, "pdf", "--family", "spvii", "--omega", "1,0.3;0.3,1", "--alpha", "1,2",
                        "--points", str(pts), "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "skewell.pdf/1" and len(doc["values"]) == 2


def test_cdf_paths(capsys):
    code, out, _ = _run(capsys, "cdf", "--family", "st", "--at", "0", "--alpha", "0")
    assert code == 0 and float(_rows(out)[0]["cdf"]) == pytest.approx(0.5, abs=1e-12)
    code, _, err = _run(capsys, "cdf", "--family", "st", "--alpha", "0,0", "--at", "0,0")
    assert code == 1 and "--seed" in err
    code, out, _ = _run(capsys, "cdf", "--family", "st", "--alpha", "0,0", "--at", "0,0", "--seed", "3",
                        "--mc", "20000")
    row = _rows(out)[0]
    assert code == 0 and row["method"] == "monte-carlo"
    assert float(row["cdf"]) == pytest.approx(0.25, abs=5 * float(row["error"]) + 1e-3)


def test_moments_output(capsys):
    code, out, _ = _run(capsys, "moments", "--family", "st", "--alpha", "0", "--nu", "7")
    assert code == 0
    rows = {(r["quantity"], r["i"], r["j"]): float(r["value"]) for r in _rows(out)}
    assert rows[("gamma2", "", "")] == pytest.approx(2.0)
    assert rows[("variance", "1", "1")] == pytest.approx(7 / 5)
    code, out, _ = _run(capsys, "moments", "--family", "sn", "--alpha", "2", "--format", "json")
    assert code == 0 and json.loads(out)["schema"] == "skewell.moments/1"


def test_exit_codes(tmp_path, capsys):
    assert _run(capsys, "sample", "--family", "st", "--n", "5")[0] == 1
    assert _run(capsys, "moments", "--family", "st", "--nu", "1")[0] == 2
    assert _run(capsys, "pdf", "--family", "st", "--at", "0", "--nu", "-1")[0] == 2
    assert _run(capsys, "pdf", "--family", "st", "--at", "0", "--omega", "1,2;2,1")[0] == 2
    assert _run(capsys, "nonsense")[0] == 1
    data = tmp_path / "d.csv"
    data.write_text("y\n" + "\n".join(str(v) for v in np.random.default_rng(0).standard_t(3, 40)))
    assert _run(capsys, "fit", "--data", str(data), "--response", "missing")[0] == 1
    assert _run(capsys, "fit", "--data", str(tmp_path / "absent.csv"), "--response", "y")[0] == 1
    out = tmp_path / "r.json"
    with pytest.warns(RuntimeWarning):
        code, _, _ = _run(capsys, "fit", "--data", str(data), "--response", "y", "--max-iter", "1",
                          "--grad-tol", "1e-300", "--out", str(out))
    assert code == 3
    assert json.loads(out.read_text())["convergence"] == "MaxIter"


def _roundtrip(tmp_path, capsys, extra, names):
    draws = tmp_path / "draws.csv"
    code, _, _ = _run(capsys, "sample", "--family", "st", "--n", "10000", "--seed", "11",
                      "--out", str(draws), *extra)
    assert code == 0
    report = tmp_path / "fit.json"
    healy = tmp_path / "healy.csv"
    code, _, _ = _run(capsys, "fit", "--data", str(draws), "--response", ",".join(names),
                      "--out", str(report), "--healy", str(healy))
    assert code == 0
    rep = json.loads(report.read_text())
    assert rep["schema"] == "skewell.fit/1" and rep["convergence"] == "Converged"
    assert len(_rows(healy.read_text())) == 10000
    return rep


def test_roundtrip_scalar(tmp_path, capsys):
    rep = _roundtrip(tmp_path, capsys, ["--xi", "1", "--omega", "4", "--alpha", "3", "--nu", "5"], ["y1"])
    nat, se = rep["natural"], rep["std_errors"]
    assert abs(nat["alpha"][0] - 3.0) <= 3 * se["alpha_delta_method"][0]
    assert abs(nat["nu"] - 5.0) <= 3 * se["nu"]
    assert abs(nat["beta"][0][0] - 1.0) <= 3 * se["beta"][0][0]


def test_roundtrip_bivariate(tmp_path, capsys):
    rep = _roundtrip(tmp_path, capsys, ["--omega", "1,0.5;0.5,2", "--alpha", "2,-1", "--nu", "6"],
                     ["y1", "y2"])
    nat, se = rep["natural"], rep["std_errors"]
    for j, a in enumerate([2.0, -1.0]):
        assert abs(nat["alpha"][j] - a) <= 3 * se["alpha_delta_method"][j]
    assert abs(nat["nu"] - 6.0) <= 3 * se["nu"]


def test_profile_and_healy_commands(tmp_path, capsys):
    data = tmp_path / "d.csv"
    y = np.random.default_rng(5).gamma(2.0, size=150)
    data.write_text("v\n" + "\n".join(repr(float(v)) for v in y) + "\n")
    code, out, _ = _run(capsys, "profile", "--data", str(data), "--response", "v", "--which", "alpha",
                        "--grid", "0:6:4")
    assert code == 0
    rows = _rows(out)
    kinds = [r["kind"] for r in rows]
    assert kinds.count("threshold") == 5 and kinds.count("mle") == 1 and kinds.count("grid") == 5
    assert all(float(r["deviance"]) >= 0 for r in rows if r["kind"] == "grid")
    svg = tmp_path / "h.svg"
    code, out, _ = _run(capsys, "healy", "--data", str(data), "--response", "v", "--fit-family",
                        "normal", "--svg", str(svg))
    assert code == 0 and len(_rows(out)) == 150 and svg.read_text().startswith("<svg")


def test_demo_perturb(capsys):
    code, out, _ = _run(capsys, "demo-perturb", "--preset", "wave", "--grid", "11")
    assert code == 0
    rows = _rows(out)
    assert len(rows) == 121 and list(rows[0]) == ["y1", "y2", "density"]
    assert _run(capsys, "demo-perturb", "--preset", "nope")[0] == 1
    assert _run(capsys, "demo-perturb", "--params", "1,1,0,0,1")[0] == 1


def test_console_script():
    exe = shutil.which("skewell")
    cmd = [exe] if exe else [sys.executable, "-m", "skewell.cli"]
    res = subprocess.run([*cmd, "pdf", "--at", "0"], capture_output=True, text=True, timeout=60)
    assert res.returncode == 0 and res.stdout.startswith("y1,logpdf,pdf")
