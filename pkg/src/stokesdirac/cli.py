"""Command-line entry point: mesh, verify, reduce, simulate.

Exit codes: 0 success, 1 a check or tolerance failed, 2 bad usage or input.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import jsonschema
import numpy as np
import sympy

from . import __version__, signs
from .dec_ops import (
    Cochain,
    boundary_dual_derivative,
    dual_exterior_derivative,
    dual_space,
    exterior_derivative,
    format_operator,
    hodge_star,
    primal_space,
    trace_map,
)
from .dirac import canonical_sharp_map, check_maximal_isotropy, simplicial_dirac
from .dynamics import BoundaryDrive, make_system, simulate, string_hamiltonian, to_reduced, trajectory
from .errors import ConfigError, InvalidArgument, StokesDiracError, WellCenterednessError
from .mesh import ComplexSkeleton, build_interval_complex, build_triangle_strip_complex, validate_complex
from .reduction import reduction_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


# output helpers


def _fmt(x) -> str:
    # + 0.0 folds negative zero
    return format(float(x) + 0.0, ".17g")


def dumps(obj, indent: int = 1, _level: int = 0) -> str:
    """JSON with every float written at 17 significant digits; non-finite floats become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj) if math.isfinite(obj) else "null"
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Outputs:
    """Collects files written into one directory and finishes with the manifest."""

    def __init__(self, out_dir: str, command: str, argv: list, config=None):
        self.dir = Path(out_dir)
        self.command = command
        self.argv = argv
        self.config = config
        self.inputs: dict = {}
        self.files: list = []
        self.started = _now()

    def add_input(self, path) -> None:
        self.inputs[str(path)] = hashlib.sha256(Path(path).read_bytes()).hexdigest()

    def write(self, name: str, text: str) -> Path:
        p = self.dir / name
        write_atomic(p, text)
        self.files.append(name)
        return p

    def write_json(self, name: str, obj) -> Path:
        return self.write(name, dumps(obj) + "\n")

    def finish(self) -> None:
        manifest = {
            "command": self.command,
            "argv": self.argv,
            "config": self.config,
            "version": __version__,
            "inputs": self.inputs,
            "started": self.started,
            "finished": _now(),
            "outputs": sorted(self.files),
        }
        write_atomic(self.dir / "manifest.json", dumps(manifest) + "\n")


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


# mesh


def _build_mesh(length=None, cells=None, rows=None, cols=None, edge_len=1.0) -> ComplexSkeleton:
    if cells is not None:
        return build_interval_complex(1.0 if length is None else length, cells)
    return build_triangle_strip_complex(rows, cols, edge_len)


def cmd_mesh(args, parser) -> int:
    one_d = args.cells is not None or args.length is not None
    two_d = any(v is not None for v in (args.rows, args.cols, args.edge_len))
    if one_d == two_d:
        parser.error("give either --length/--cells or --rows/--cols/--edge-len")
    try:
        if one_d:
            if args.cells is None or args.cells < 1:
                parser.error("--cells must be a positive integer")
            if args.length is not None and not args.length > 0:
                parser.error("--length must be positive")
            c = build_interval_complex(1.0 if args.length is None else args.length, args.cells)
        else:
            if args.rows is None or args.cols is None or args.rows < 1 or args.cols < 1:
                parser.error("--rows and --cols must be positive integers")
            edge = 1.0 if args.edge_len is None else args.edge_len
            if not edge > 0:
                parser.error("--edge-len must be positive")
            c = build_triangle_strip_complex(args.rows, args.cols, edge)
    except WellCenterednessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = Outputs(args.out_dir, "mesh", args.argv)
    out.write_json("mesh.json", c.to_json_dict())
    report = validate_complex(c)
    out.write_json("validation.json", report.to_dict())
    if args.export_operators:
        _export_operators(c, out)
    out.finish()
    status = "passed" if report.passed else "FAILED"
    print(f"mesh: {c.count(0)} vertices, {c.count(c.dimension)} top cells; validation {status}")
    return EXIT_OK if report.passed else EXIT_FAIL


def _export_operators(c: ComplexSkeleton, out: Outputs) -> None:
    n = c.dimension
    ops = {}
    for k in range(n):
        ops[f"d{k}"] = exterior_derivative(c, k)
        ops[f"tr{k}"] = trace_map(c, k)
    for k in range(n + 1):
        ops[f"star{k}"] = hodge_star(c, k)
    for p in range(1, n + 1):
        q = n + 1 - p
        ops[f"d_i{n - q}"] = dual_exterior_derivative(c, n - q)
        ops[f"d_b{n - q}"] = boundary_dual_derivative(c, n - q)
    for name, op in ops.items():
        out.write(f"operators/{name}.txt", format_operator(op, name))


# verify


def _load_mesh(path: str) -> ComplexSkeleton:
    try:
        return ComplexSkeleton.load(path)
    except (OSError, ValueError, KeyError, TypeError, StokesDiracError) as exc:
        raise ConfigError(f"cannot read mesh {path}: {exc}") from exc


def _parse_corruption(spec: str):
    target, _, block = spec.rpartition(":")
    target = target or "dirac"
    row, sep, col = block.partition(",")
    if target not in ("dirac", "sharp") or not sep or not row or not col:
        raise ConfigError(f"--corrupt-sign expects [dirac|sharp:]ROW,COL, got {spec!r}")
    return target, row.strip(), col.strip()


def _operator_identity_checks(c: ComplexSkeleton) -> list:
    """Exact checks computed from the raw incidence data, independent of the operator library."""
    n = c.dimension
    checks = []
    for k in range(n - 1):
        dd = (c.incidence[k + 2].T @ c.incidence[k + 1].T).tocsr()
        dd.eliminate_zeros()
        checks.append({"name": f"d{k + 1}_d{k}_zero", "pass": dd.nnz == 0, "nnz": int(dd.nnz)})
    for p in range(1, n + 1):
        q = n + 1 - p
        raw_d = c.incidence[n - p + 1].toarray().astype(float)  # (d^{n-p})^T
        want = signs.parity(q) * raw_d
        got = dual_exterior_derivative(c, n - q).toarray()
        checks.append({"name": f"dual_derivative_p{p}_q{q}", "pass": bool(np.array_equal(got, want))})
        idx = c.boundary_cells[n - p]
        tr = np.zeros((len(idx), c.count(n - p)))
        tr[np.arange(len(idx)), idx] = c.boundary_signs[n - p]
        want_b = signs.parity(n - p) * tr.T
        got_b = boundary_dual_derivative(c, n - q).toarray()
        checks.append({"name": f"boundary_dual_derivative_p{p}_q{q}", "pass": bool(np.array_equal(got_b, want_b))})
    return checks


def run_verify(c: ComplexSkeleton, ks, samples: int, tol: float, seed: int, corrupt=None) -> dict:
    n = c.dimension
    rng = np.random.default_rng(seed)
    checks = _operator_identity_checks(c)
    hit = False
    for p in range(1, n + 1):
        d = simplicial_dirac(c, p, n + 1 - p)
        if corrupt and corrupt[0] == "dirac" and (corrupt[1], corrupt[2]) in d.blocks:
            d = d.flipped(corrupt[1], corrupt[2])
            hit = True
        rep = check_maximal_isotropy(d, samples, tol, rng)
        checks.append({"name": f"isotropy_p{p}_q{n + 1 - p}", **rep.to_dict()})
    for k in ks:
        sharp = canonical_sharp_map(c, k)
        if corrupt and corrupt[0] == "sharp" and (corrupt[1], corrupt[2]) in sharp.blocks:
            sharp = sharp.flipped(corrupt[1], corrupt[2])
            hit = True
        rep = check_maximal_isotropy(sharp, samples, tol, rng)
        checks.append({"name": f"sharp_isotropy_k{k}", **rep.to_dict()})
        red = reduction_report(c, k, samples=samples, tol=tol, rng=rng, sharp=sharp)
        d = red.to_dict()
        checks.append({"name": f"commutation_k{k}", "pass": red.commutation_residual < 1e-14,
                       "commutation_residual": red.commutation_residual})
        checks.append({"name": f"reduced_isotropy_k{k}", "pass": red.isotropy_pass, "dim_reduced": red.dim_reduced})
        checks.append({"name": f"sign_conversion_k{k}", "pass": red.sign_conversion_pass,
                       "mismatched_blocks": d["conversion_mismatches"]})
    if corrupt and not hit:
        raise ConfigError(f"no block ({corrupt[1]}, {corrupt[2]}) in any {corrupt[0]} structure")
    return {
        "n": n,
        "k": list(ks),
        "samples": samples,
        "tol": tol,
        "seed": seed,
        "corrupt_sign": None if corrupt is None else f"{corrupt[0]}:{corrupt[1]},{corrupt[2]}",
        "pass": all(ch["pass"] for ch in checks),
        "checks": checks,
    }


def cmd_verify(args, parser) -> int:
    if args.samples < 1:
        parser.error("--samples must be >= 1")
    if not args.tol > 0:
        parser.error("--tol must be positive")
    try:
        c = _load_mesh(args.mesh)
        corrupt = _parse_corruption(args.corrupt_sign) if args.corrupt_sign else None
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    n = c.dimension
    ks = list(range(n)) if args.k is None else [args.k]
    if any(not 0 <= k < n for k in ks):
        print(f"error: --k must lie in [0, {n - 1}] for this mesh", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = run_verify(c, ks, args.samples, args.tol, args.seed, corrupt)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Outputs(args.out_dir, "verify", args.argv)
    out.add_input(args.mesh)
    out.write_json("verify.json", report)
    out.finish()
    for ch in report["checks"]:
        print(f"{'PASS' if ch['pass'] else 'FAIL'}  {ch['name']}")
    return EXIT_OK if report["pass"] else EXIT_FAIL


# reduce


def cmd_reduce(args, parser) -> int:
    try:
        c = _load_mesh(args.mesh)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    n = c.dimension
    ks = list(range(n)) if args.k is None else [args.k]
    if any(not 0 <= k < n for k in ks):
        print(f"error: --k must lie in [0, {n - 1}] for this mesh", file=sys.stderr)
        return EXIT_USAGE
    reports = [reduction_report(c, k, samples=args.samples, rng=args.seed) for k in ks]
    out = Outputs(args.out_dir, "reduce", args.argv)
    out.add_input(args.mesh)
    doc = reports[0].to_dict() if len(reports) == 1 else {"reports": [r.to_dict() for r in reports]}
    out.write_json("reduce.json", doc)
    out.finish()
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'}  n={r.n} k={r.k} commutation={_fmt(r.commutation_residual)}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# simulate

_NUMBERS = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_FIELD = {"oneOf": [{"type": "string", "minLength": 1}, _NUMBERS]}
_SIGNAL = {
    "oneOf": [
        {"enum": ["zero", "fixed"]},
        {"type": "object", "required": ["type"], "additionalProperties": False,
         "properties": {"type": {"enum": ["zero", "fixed"]}}},
        {"type": "object", "required": ["type", "value"], "additionalProperties": False,
         "properties": {"type": {"const": "constant"}, "value": {"type": "number"}}},
        {"type": "object", "required": ["type", "amplitude", "omega"], "additionalProperties": False,
         "properties": {"type": {"const": "sine"}, "amplitude": {"type": "number"},
                        "omega": {"type": "number"}, "phase": {"type": "number"}}},
        {"type": "object", "required": ["type", "amplitude", "t0", "width"], "additionalProperties": False,
         "properties": {"type": {"const": "pulse"}, "amplitude": {"type": "number"},
                        "t0": {"type": "number"}, "width": {"type": "number", "exclusiveMinimum": 0}}},
        {"type": "object", "required": ["type", "times", "values"], "additionalProperties": False,
         "properties": {"type": {"const": "samples"}, "times": _NUMBERS, "values": _NUMBERS}},
    ]
}
CONFIG_SCHEMA = {
    "type": "object",
    "required": ["mesh", "k", "variant", "T", "mu", "dt", "t_end"],
    "additionalProperties": False,
    "properties": {
        "mesh": {
            "oneOf": [
                {"type": "object", "required": ["length", "cells"], "additionalProperties": False,
                 "properties": {"length": {"type": "number", "exclusiveMinimum": 0},
                                "cells": {"type": "integer", "minimum": 1}}},
                {"type": "object", "required": ["rows", "cols"], "additionalProperties": False,
                 "properties": {"rows": {"type": "integer", "minimum": 1},
                                "cols": {"type": "integer", "minimum": 1},
                                "edge_len": {"type": "number", "exclusiveMinimum": 0}}},
            ]
        },
        "k": {"type": "integer", "minimum": 0},
        "variant": {"enum": ["canonical", "reduced"]},
        "T": {"type": "number", "exclusiveMinimum": 0},
        "mu": {"type": "number", "exclusiveMinimum": 0},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "t_end": {"type": "number", "exclusiveMinimum": 0},
        "initial": {"type": "object", "additionalProperties": False, "properties": {"u": _FIELD, "p": _FIELD}},
        "boundary": {"type": "object", "additionalProperties": False,
                     "properties": {"left": _SIGNAL, "right": _SIGNAL, "default": _SIGNAL}},
        "balance_tolerance": {"type": "number", "exclusiveMinimum": 0},
        "snapshot_every": {"type": "integer", "minimum": 0},
    },
}


def validate_config(cfg) -> None:
    """Raise :class:`ConfigError` naming the path of the first schema violation."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        parts = [str(p) for p in err.absolute_path]
        if err.validator == "required":
            # name the missing property itself
            missing = [f for f in err.validator_value if f not in err.instance]
            parts += missing[:1]
        path = ".".join(parts) or "<root>"
        raise ConfigError(err.message, path=path)


def make_signal(spec):
    """Callable ``t -> effort`` for a signal description, or None for a fixed cell."""
    if isinstance(spec, str):
        spec = {"type": spec}
    kind = spec["type"]
    if kind == "fixed":
        return None
    if kind == "zero":
        return lambda t: 0.0
    if kind == "constant":
        v = float(spec["value"])
        return lambda t: v
    if kind == "sine":
        a, w, ph = float(spec["amplitude"]), float(spec["omega"]), float(spec.get("phase", 0.0))
        return lambda t: a * math.sin(w * t + ph)
    if kind == "pulse":
        a, t0, width = float(spec["amplitude"]), float(spec["t0"]), float(spec["width"])

        def pulse(t):
            s = (t - t0) / width
            return a * math.sin(math.pi * s) ** 2 if 0.0 <= s <= 1.0 else 0.0

        return pulse
    if kind == "samples":
        ts, vs = np.asarray(spec["times"], float), np.asarray(spec["values"], float)
        if ts.shape != vs.shape or np.any(np.diff(ts) <= 0):
            raise ConfigError("samples signal needs increasing times and equally many values", path="boundary")
        return lambda t: float(np.interp(t, ts, vs))
    raise ConfigError(f"unknown signal type {kind!r}", path="boundary")


def _eval_field(spec, points: np.ndarray, count: int, path: str) -> np.ndarray:
    if isinstance(spec, list):
        if len(spec) != count:
            raise ConfigError(f"expected {count} samples, got {len(spec)}", path=path)
        return np.asarray(spec, dtype=float)
    names = ("z",) if points.shape[1] == 1 else ("x", "y")
    syms = sympy.symbols(names)
    try:
        expr = sympy.sympify(spec, locals=dict(zip(names, syms)))
    except (sympy.SympifyError, TypeError, SyntaxError) as exc:
        raise ConfigError(f"cannot parse {spec!r}", path=path) from exc
    extra = expr.free_symbols - set(syms)
    if extra:
        raise ConfigError(f"unknown symbols {sorted(map(str, extra))}", path=path)
    f = sympy.lambdify(syms, expr, "numpy")
    vals = np.broadcast_to(np.asarray(f(*points.T), dtype=float), (len(points),))
    return np.array(vals, dtype=float)


def _boundary_drive(c: ComplexSkeleton, k: int, spec: dict) -> BoundaryDrive:
    """Signals per dual-boundary cell; left/right are the cells touching the extreme x coordinate."""
    default = make_signal(spec.get("default", "zero"))
    left = make_signal(spec["left"]) if "left" in spec else default
    right = make_signal(spec["right"]) if "right" in spec else default
    cells = c.boundary_cells[k]
    x = np.array([c.vertices[c.simplices[k][i], 0].mean() for i in cells])
    lo, hi = c.vertices[:, 0].min(), c.vertices[:, 0].max()
    eps = 1e-9 * max(1.0, hi - lo)
    sigs = []
    for xi in x:
        if abs(xi - lo) <= eps and "left" in spec:
            sigs.append(left)
        elif abs(xi - hi) <= eps and "right" in spec:
            sigs.append(right)
        else:
            sigs.append(default)
    return BoundaryDrive(tuple(sigs))


def build_simulation(cfg: dict):
    validate_config(cfg)
    m = cfg["mesh"]
    c = _build_mesh(**m) if "cells" in m else _build_mesh(rows=m["rows"], cols=m["cols"], edge_len=m.get("edge_len", 1.0))
    n, k = c.dimension, cfg["k"]
    if k > n - 1:
        raise ConfigError(f"must be at most {n - 1} on this mesh", path="k")
    init = cfg.get("initial", {})
    u = np.zeros(c.count(k))
    p = np.zeros(c.count(k))
    if "u" in init:
        if k != 0 and not isinstance(init["u"], list):
            raise ConfigError("expressions need k = 0; give samples", path="initial.u")
        u = _eval_field(init["u"], c.vertices, c.count(k), "initial.u")
    if "p" in init:
        if isinstance(init["p"], list):
            p = _eval_field(init["p"], c.circumcenters[k], c.count(k), "initial.p")
        else:
            # density times dual cell measure
            p = _eval_field(init["p"], c.circumcenters[k], c.count(k), "initial.p") * c.dual_measures[k]
    h = string_hamiltonian(c, k, float(cfg["T"]), float(cfg["mu"]))
    drive = _boundary_drive(c, k, cfg.get("boundary", {}))
    rho = Cochain(primal_space(c, k), u)
    pi = Cochain(dual_space(c, n - k), p)
    return make_system(c, k, cfg["variant"], h, drive, rho, pi)


def cmd_simulate(args, parser) -> int:
    try:
        raw = Path(args.config).read_text(encoding="utf-8")
        cfg = json.loads(raw)
        system = build_simulation(cfg)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidArgument, WellCenterednessError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.compare_reduced and system.variant != "canonical":
        print("error: --compare-reduced needs variant 'canonical'", file=sys.stderr)
        return EXIT_USAGE
    dt, t_end = float(cfg["dt"]), float(cfg["t_end"])
    tol = float(cfg.get("balance_tolerance", 1e-10))
    every = int(cfg.get("snapshot_every", 0))
    distances = None
    if args.compare_reduced:
        steps = int(round(t_end / dt))
        cfg_r, pi_r = trajectory(to_reduced(system), dt, steps)
        distances = np.zeros(steps + 1)
        i = [0]

        def track(s):
            i[0] += 1
            distances[i[0]] = max(np.max(np.abs(s.reduced_config().values - cfg_r[i[0]])),
                                  np.max(np.abs(s.pi.values - pi_r[i[0]])))

        rec = simulate(system, t_end, dt, every, on_step=track)
    else:
        rec = simulate(system, t_end, dt, every)
    cols = ["t", "H", "P_b", "E_b_cumulative", "balance_residual"]
    data = [rec.times, rec.H, rec.P_b, rec.E_b, rec.balance_residual]
    if distances is not None:
        cols.append("trajectory_distance")
        data.append(distances)
    lines = [",".join(cols)]
    lines += [",".join(_fmt(v) for v in row) for row in zip(*data)]
    out = Outputs(args.out_dir, "simulate", args.argv, cfg)
    out.add_input(args.config)
    out.write("simulation.csv", "\n".join(lines) + "\n")
    out.write_json("snapshots.json", {"variant": system.variant, "k": system.k, "snapshots": rec.snapshots})
    out.finish()
    worst = rec.max_balance_residual()
    limit = tol * rec.balance_threshold()
    print(f"final balance residual {_fmt(rec.balance_residual[-1])} (max {_fmt(worst)}, limit {_fmt(limit)})")
    return EXIT_OK if worst < limit else EXIT_FAIL


# parser


def _global_options(defaults: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    kw = {} if defaults else {"default": argparse.SUPPRESS}
    p.add_argument("--seed", type=int, help="seed for random sampling in checks (default 0)",
                   **({"default": 0} if defaults else kw))
    p.add_argument("--out-dir", help="directory for output files (default .)",
                   **({"default": "."} if defaults else kw))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stokesdirac", parents=[_global_options(True)],
                                     description="Discrete Stokes-Dirac structures on simplicial meshes.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_options(False)]

    m = sub.add_parser("mesh", parents=common, help="build a mesh and validate it")
    m.add_argument("--length", type=float)
    m.add_argument("--cells", type=int)
    m.add_argument("--rows", type=int)
    m.add_argument("--cols", type=int)
    m.add_argument("--edge-len", type=float)
    m.add_argument("--export-operators", action="store_true", help="also write the sparse operators")
    m.set_defaults(func=cmd_mesh)

    v = sub.add_parser("verify", parents=common, help="run the structural checks on a mesh file")
    v.add_argument("mesh")
    v.add_argument("--k", type=int)
    v.add_argument("--samples", type=int, default=1000)
    v.add_argument("--tol", type=float, default=1e-12)
    v.add_argument("--corrupt-sign", metavar="BLOCK", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("reduce", parents=common, help="reduction report for a mesh file")
    r.add_argument("mesh")
    r.add_argument("--k", type=int)
    r.add_argument("--samples", type=int, default=1000)
    r.set_defaults(func=cmd_reduce)

    s = sub.add_parser("simulate", parents=common, help="integrate a port-Hamiltonian system from a JSON config")
    s.add_argument("config")
    s.add_argument("--compare-reduced", action="store_true")
    s.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    sub = parser._subparsers._group_actions[0].choices[args.command]
    return args.func(args, sub)


if __name__ == "__main__":
    sys.exit(main())
