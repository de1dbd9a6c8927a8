"""Command-line behavior: outputs, exit codes, determinism, round trips."""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from projflat import catalog_entry, eval_catalog
from projflat.cli import main, parse_metric
from projflat.solver import SolverConfig


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_eval_constructed_origin(capsys):
    code, out, _ = run_cli(capsys, "eval", "--metric", "construct:0:euclidean:euclidean",
                           "--x", "0,0", "--y", "0,1")
    assert code == 0
    data = json.loads(out)
    assert data["F"] == pytest.approx(1.0, abs=1e-12)
    assert data["P"] == pytest.approx(1.0, abs=1e-12)


def test_eval_funk_point(capsys):
    code, out, _ = run_cli(capsys, "eval", "--metric", "catalog:funk",
                           "--x", "0.5,0", "--y", "0,1")
    assert code == 0
    data = json.loads(out)
    assert data["F"] == pytest.approx(1.1547005, abs=1e-6)
    assert data["K_numeric"] == pytest.approx(-0.25, abs=1e-4)


def test_eval_bryant_origin(capsys):
    code, out, _ = run_cli(capsys, "eval", "--metric", "catalog:bryant:0.5236",
                           "--x", "0,0", "--y", "1,0")
    assert code == 0
    data = json.loads(out)
    assert data["F"] == pytest.approx(np.cos(0.5236), abs=1e-9)
    assert data["F"] == pytest.approx(0.8660254, abs=1e-5)


def test_verify_berwald_passes(capsys):
    code, out, _ = run_cli(capsys, "verify", "--metric", "catalog:berwald",
                           "--checks", "hamel,curvature", "--radius", "0.5",
                           "--samples", "50", "--seed", "7")
    assert code == 0
    data = json.loads(out)
    assert data["pass"] is True
    assert data["checks"]["curvature"]["extra"]["mean_K"] == pytest.approx(0.0, abs=1e-4)


def test_verify_dsr_construction(capsys):
    code, out, _ = run_cli(capsys, "verify", "--metric",
                           "construct:1:dsr-b:1,1:dsr-a:1,1",
                           "--checks", "hamel,curvature", "--radius", "0.2",
                           "--samples", "20", "--tol-override", "curvature=1e-3")
    assert code == 0
    data = json.loads(out)
    assert data["pass"] is True
    assert data["checks"]["curvature"]["extra"]["mean_K"] == pytest.approx(1.0, abs=1e-3)


def test_verify_broken_fails_hamel(capsys):
    code, out, _ = run_cli(capsys, "verify", "--metric", "test:broken",
                           "--checks", "hamel", "--radius", "0.4", "--samples", "20")
    assert code == 1
    data = json.loads(out)
    assert data["pass"] is False
    assert data["checks"]["hamel"]["max_residual"] > 1e-3
    assert data["checks"]["hamel"]["failures"]


def test_compare_construct_vs_catalog(capsys):
    code, out, _ = run_cli(capsys, "compare",
                           "--metric", "construct:0:euclidean:euclidean",
                           "--metric-b", "catalog:berwald",
                           "--radius", "0.4", "--samples", "100")
    assert code == 0
    data = json.loads(out)
    assert data["max_rel_diff"] <= 1e-9
    code, out, _ = run_cli(capsys, "compare",
                           "--metric", "construct:-1:euclidean:zero",
                           "--metric-b", "catalog:space-form:-1",
                           "--radius", "0.4", "--samples", "100")
    assert code == 0
    assert json.loads(out)["max_rel_diff"] <= 1e-9


def test_compare_bryant_pair(capsys):
    code, out, _ = run_cli(capsys, "compare",
                           "--metric", "construct:1:bryant:0.5236",
                           "--metric-b", "catalog:bryant:0.5236",
                           "--radius", "0.3", "--samples", "100")
    assert code == 0
    assert json.loads(out)["max_rel_diff"] <= 1e-8


def test_sample_grid_csv(tmp_path, capsys):
    out_file = str(tmp_path / "grid.csv")
    code, out, _ = run_cli(capsys, "sample", "--metric", "catalog:funk",
                           "--grid=-0.5:0.5:21,-0.5:0.5:21",
                           "--y", "0,1", "--out", out_file)
    assert code == 0
    assert json.loads(out)["rows"] == 441
    with open(out_file) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x1", "x2", "y1", "y2", "F", "P", "K"]
    assert len(rows) == 442
    # round trip: re-evaluate F from the parsed coordinates, exact match
    ent = catalog_entry("funk", 2)
    for row in rows[1:6]:
        x = np.array([float(row[0]), float(row[1])])
        y = np.array([float(row[2]), float(row[3])])
        assert float(row[4]) == pytest.approx(eval_catalog(ent, x, y), abs=1e-12)


def test_sample_constant_column_for_flat_norm(tmp_path, capsys):
    out_file = str(tmp_path / "flat.csv")
    code, out, _ = run_cli(capsys, "sample", "--metric", "construct:0:euclidean:zero",
                           "--grid=-0.2:0.2:3,-0.2:0.2:3",
                           "--y", "0,1", "--out", out_file)
    assert code == 0
    with open(out_file) as fh:
        rows = list(csv.reader(fh))[1:]
    values = {row[4] for row in rows}
    assert values == {"1.0"}


def test_sample_grid_over_y(tmp_path, capsys):
    out_file = str(tmp_path / "ygrid.csv")
    code, out, _ = run_cli(capsys, "sample", "--metric", "catalog:funk",
                           "--grid", "0.5:1.5:3,0.5:1.5:3", "--x", "0.2,0",
                           "--out", out_file)
    assert code == 0
    with open(out_file) as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 10
    ent = catalog_entry("funk", 2)
    row = rows[1]
    assert float(row[0]) == 0.2 and float(row[1]) == 0.0
    want = eval_catalog(ent, [0.2, 0.0], [float(row[2]), float(row[3])])
    assert float(row[4]) == pytest.approx(want, abs=1e-12)


def test_sample_marks_domain_exits(tmp_path, capsys):
    out_file = str(tmp_path / "partial.csv")
    code, out, _ = run_cli(capsys, "sample", "--metric", "catalog:funk",
                           "--grid", "0.0:1.2:4,0:0:1", "--y", "0,1",
                           "--out", out_file)
    assert code == 0
    with open(out_file) as fh:
        rows = list(csv.reader(fh))[1:]
    assert rows[-1][4] == ""  # x1 = 1.2 is outside the unit ball
    assert rows[0][4] != ""


def test_geodesic_command(tmp_path, capsys):
    out_file = str(tmp_path / "traj.csv")
    code, out, _ = run_cli(capsys, "geodesic", "--metric", "catalog:funk",
                           "--x", "0.1,0", "--y", "0,1", "--t-end", "0.5",
                           "--steps", "100", "--out", out_file)
    assert code == 0
    data = json.loads(out)
    assert data["collinearity"] <= 1e-8
    assert data["completed"] is True
    with open(out_file) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "t"
    assert len(rows) == data["points"] + 1


def test_catalog_listing(capsys):
    code, out, _ = run_cli(capsys, "catalog")
    assert code == 0
    data = json.loads(out)
    assert len(data["entries"]) == 9
    names = {e["name"] for e in data["entries"]}
    assert "funk" in names and "zhou" in names


def test_exit_code_parse_error(capsys):
    code, _, err = run_cli(capsys, "eval", "--metric", "catalog:nosuch",
                           "--x", "0,0", "--y", "1,0")
    assert code == 2
    assert json.loads(err.splitlines()[-1])["error"]["type"] == "parse"


def test_exit_code_domain_error(capsys):
    code, _, err = run_cli(capsys, "eval", "--metric", "catalog:funk",
                           "--x", "1.5,0", "--y", "1,0")
    assert code == 3
    assert json.loads(err.splitlines()[-1])["error"]["type"] == "domain"


def test_exit_code_solver_error(capsys):
    code, _, err = run_cli(capsys, "eval", "--metric",
                           "construct:0:euclidean:randers:0.2,-0.3",
                           "--x", "0.2,0.1", "--y", "5,-2",
                           "--solver-iters", "1", "--solver-tol", "1e-15")
    assert code == 4
    assert json.loads(err.splitlines()[-1])["error"]["type"] == "solver"


def test_determinism_byte_identical(capsys):
    args = ("verify", "--metric", "catalog:funk", "--checks", "hamel,curvature",
            "--radius", "0.5", "--samples", "25", "--seed", "11")
    _, out1, _ = run_cli(capsys, *args)
    _, out2, _ = run_cli(capsys, *args)
    assert out1 == out2


def test_metric_spec_parsing_errors():
    cfg = SolverConfig()
    with pytest.raises(Exception):
        parse_metric("construct:2:euclidean:zero", 2, cfg)
    with pytest.raises(Exception):
        parse_metric("construct:0:euclidean", 2, cfg)
    with pytest.raises(Exception):
        parse_metric("banana", 2, cfg)
    # pair mode: a single descriptor is only valid for curvature +1 bryant
    m = parse_metric("construct:1:bryant:0.5236", 2, cfg)
    assert m.kind == "constructed-Kpos1"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "projflat", "eval", "--metric", "catalog:funk",
         "--x", "0.5,0", "--y", "0,1"],
        capture_output=True, text=True, cwd="/root/pkg")
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["F"] == pytest.approx(1.1547005, abs=1e-6)


def test_thread_env_does_not_change_output(tmp_path):
    import os
    env = dict(os.environ)
    base = [sys.executable, "-m", "projflat", "verify", "--metric", "catalog:funk",
            "--checks", "hamel", "--radius", "0.4", "--samples", "16", "--seed", "3"]
    env["FINSLER_THREADS"] = "1"
    a = subprocess.run(base, capture_output=True, text=True, env=env, cwd="/root/pkg")
    env["FINSLER_THREADS"] = "4"
    b = subprocess.run(base, capture_output=True, text=True, env=env, cwd="/root/pkg")
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout
