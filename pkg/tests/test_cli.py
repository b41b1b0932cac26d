import csv
import json
import subprocess
import sys

import pytest

from stokesdirac.cli import dumps, main, validate_config
from stokesdirac.errors import ConfigError


def run(*args, cwd=None):
    proc = subprocess.run([sys.executable, "-m", "stokesdirac", *map(str, args)], capture_output=True, text=True, cwd=cwd)
    return proc.returncode, proc.stdout, proc.stderr


@pytest.fixture(scope="module")
def interval_mesh(tmp_path_factory):
    d = tmp_path_factory.mktemp("interval")
    assert main(["mesh", "--length", "1", "--cells", "2", "--out-dir", str(d)]) == 0
    return d / "mesh.json"


@pytest.fixture(scope="module")
def strip_mesh(tmp_path_factory):
    d = tmp_path_factory.mktemp("strip")
    assert main(["--out-dir", str(d), "mesh", "--rows", "1", "--cols", "2"]) == 0
    return d / "mesh.json"


def _string_config(**over):
    cfg = {
        "mesh": {"length": 1, "cells": 50}, "k": 0, "variant": "canonical", "T": 1, "mu": 1,
        "dt": 1e-3, "t_end": 2, "initial": {"u": "sin(pi*z)", "p": "0"}, "boundary": {"default": "zero"},
    }
    cfg.update(over)
    return cfg


def test_mesh_command(tmp_path):
    code, out, _ = run("mesh", "--length", "1", "--cells", "8", "--out-dir", tmp_path)
    assert code == 0
    mesh = json.loads((tmp_path / "mesh.json").read_text())
    assert len(mesh["vertices"]) == 9
    val = json.loads((tmp_path / "validation.json").read_text())
    assert val["passed"] is True
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "mesh" and man["outputs"] == ["mesh.json", "validation.json"]


@pytest.mark.parametrize("args", [
    ["mesh", "--cells", "0"],
    ["mesh", "--length", "1"],
    ["mesh", "--cells", "4", "--rows", "2"],
    ["mesh"],
    ["mesh", "--rows", "1"],
    ["mesh", "--cells", "x"],
    ["frobnicate"],
])
def test_mesh_usage_errors(args, tmp_path):
    code, _, err = run(*args, "--out-dir", tmp_path)
    assert code == 2
    assert "usage" in err or "error" in err


def test_strip_mesh_and_operators(tmp_path):
    code, _, _ = run("mesh", "--rows", "1", "--cols", "2", "--export-operators", "--out-dir", tmp_path)
    assert code == 0
    checks = {c["name"]: c for c in json.loads((tmp_path / "validation.json").read_text())["checks"]}
    assert checks["euler_characteristic"]["passed"]
    ops = sorted(p.name for p in (tmp_path / "operators").iterdir())
    assert "d1.txt" in ops and "d_b1.txt" in ops and "star2.txt" in ops
    assert len(list(tmp_path.glob("manifest.json"))) == 1


def test_verify_interval(interval_mesh, tmp_path):
    code, out, _ = run("verify", interval_mesh, "--k", "0", "--out-dir", tmp_path)
    assert code == 0, out
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["pass"] is True
    names = {c["name"] for c in rep["checks"]}
    assert {"isotropy_p1_q1", "sharp_isotropy_k0", "commutation_k0", "sign_conversion_k0"} <= names
    iso = next(c for c in rep["checks"] if c["name"] == "isotropy_p1_q1")
    assert iso["dim_D"] == iso["dim_F"] == 7


def test_verify_strip_k1(strip_mesh, tmp_path):
    assert main(["verify", str(strip_mesh), "--k", "1", "--samples", "200", "--out-dir", str(tmp_path)]) == 0


@pytest.mark.parametrize("block", ["f_q,e_p", "dirac:f_b,e_p", "sharp:pi_dot,e_rho", "sharp:rho_b_dot,e_pi"])
def test_verify_detects_corruption(interval_mesh, tmp_path, block):
    code, out, _ = run("verify", interval_mesh, "--corrupt-sign", block, "--out-dir", tmp_path)
    assert code == 1
    assert "FAIL" in out


def test_verify_bad_inputs(tmp_path, interval_mesh):
    assert run("verify", tmp_path / "missing.json")[0] == 2
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    assert run("verify", junk)[0] == 2
    assert run("verify", interval_mesh, "--corrupt-sign", "f_q")[0] == 2
    assert run("verify", interval_mesh, "--k", "3")[0] == 2


def test_reduce(strip_mesh, tmp_path):
    assert main(["reduce", str(strip_mesh), "--k", "1", "--out-dir", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "reduce.json").read_text())
    assert rep["n"] == 2 and rep["k"] == 1 and rep["commutation_residual"] == 0
    assert rep["isotropy_pass"] and rep["sign_conversion_pass"]


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_simulate_closed_string(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(_string_config()))
    code, out, _ = run("simulate", cfg, "--out-dir", tmp_path / "a")
    assert code == 0
    assert "balance residual" in out
    rows = _read_csv(tmp_path / "a" / "simulation.csv")
    assert list(rows[0]) == ["t", "H", "P_b", "E_b_cumulative", "balance_residual"]
    assert len(rows) == 2001
    H = [float(r["H"]) for r in rows]
    assert max(H) - min(H) < 1e-12 * H[0]
    assert max(float(r["balance_residual"]) for r in rows) < 1e-10
    # rerun: byte-identical data files
    assert run("simulate", cfg, "--out-dir", tmp_path / "b")[0] == 0
    for name in ("simulation.csv", "snapshots.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_simulate_compare_reduced(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(_string_config(t_end=0.2, boundary={"left": {"type": "sine", "amplitude": 1, "omega": 3},
                                                                   "right": "fixed"})))
    assert main(["simulate", str(cfg), "--compare-reduced", "--out-dir", str(tmp_path)]) == 0
    rows = _read_csv(tmp_path / "simulation.csv")
    assert "trajectory_distance" in rows[0]
    assert max(float(r["trajectory_distance"]) for r in rows) < 1e-9


def test_simulate_strip_with_samples_signal(tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({
        "mesh": {"rows": 2, "cols": 2, "edge_len": 0.5}, "k": 0, "variant": "reduced", "T": 2, "mu": 0.5,
        "dt": 0.01, "t_end": 0.5, "initial": {"u": "x*y", "p": "1"},
        "boundary": {"left": {"type": "samples", "times": [0, 0.25, 0.5], "values": [0, 1, 0]},
                     "right": {"type": "pulse", "amplitude": 1, "t0": 0.1, "width": 0.2},
                     "default": "fixed"},
        "snapshot_every": 10,
    }))
    assert main(["simulate", str(cfg), "--out-dir", str(tmp_path)]) == 0
    snaps = json.loads((tmp_path / "snapshots.json").read_text())
    assert len(snaps["snapshots"]) == 6


@pytest.mark.parametrize("mutate,field", [
    (lambda c: c.pop("T"), "T"),
    (lambda c: c.pop("mu"), "mu"),
    (lambda c: c.update(variant="other"), "variant"),
    (lambda c: c.update(dt=-1), "dt"),
    (lambda c: c["boundary"].update(left={"type": "sine"}), "boundary.left"),
    (lambda c: c["initial"].update(u="q + 1"), "initial.u"),
    (lambda c: c["initial"].update(u=[1.0, 2.0]), "initial.u"),
    (lambda c: c.update(k=1), "k"),
])
def test_simulate_schema_errors(tmp_path, mutate, field):
    cfg = _string_config()
    mutate(cfg)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    code, _, err = run("simulate", path, "--out-dir", tmp_path)
    assert code == 2
    assert f"config field {field}" in err


def test_simulate_compare_needs_canonical(tmp_path):
    path = tmp_path / "r.json"
    path.write_text(json.dumps(_string_config(variant="reduced", t_end=0.01)))
    assert main(["simulate", str(path), "--compare-reduced", "--out-dir", str(tmp_path)]) == 2


def test_validate_config_path():
    with pytest.raises(ConfigError) as err:
        validate_config(_string_config(mesh={"length": 1, "cells": 0}))
    assert err.value.path.startswith("mesh")


def test_dumps_precision():
    text = dumps({"a": 0.1, "b": [1, 2.5], "c": float("nan"), "d": True, "e": -0.0})
    doc = json.loads(text)
    assert '"a": 0.10000000000000001' in text
    assert doc["b"] == [1, 2.5] and doc["c"] is None and doc["d"] is True
