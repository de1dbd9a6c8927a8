"""Command-line front end.

JSON goes to stdout (for scripts), a one-line human summary to stderr.
Exit codes: 0 success / all checks passed, 1 checks ran but some failed,
2 parse error, 3 domain error, 4 solver failure.  Identical command line
and seed produce byte-identical output.  FINSLER_THREADS > 1 runs sample
sweeps on a thread pool; assembly order is fixed, so output does not
depend on the worker count.
"""

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import catalog as cat
from .construct import broken_metric, build_k0, build_kneg1, build_kpos1
from .errors import DomainError, ProjFlatError, SolverError, SpecParseError
from .norms import NORM_ARITY, parse_norm
from .sampling import ball_points, sphere_points
from .solver import SolverConfig
from . import verify as vfy

CHECK_NAMES = ("hamel", "curvature", "berwald", "convexity", "geodesic", "pde")

DEFAULT_TOLERANCES = {
    "hamel": 1e-6,
    "curvature": 1e-4,
    "berwald": 1e-5,
    "convexity": -1e-8,
    "geodesic": 1e-8,
    "pde": 1e-6,
}


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FINSLER_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    n = _threads()
    if n == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.asarray([float(v) for v in text.split(",")], dtype=float)
    except ValueError as exc:
        raise SpecParseError(f"bad vector '{text}'") from exc


def _solver_cfg(args) -> SolverConfig:
    return SolverConfig(
        tolerance=getattr(args, "solver_tol", None) or 1e-13,
        max_iterations=getattr(args, "solver_iters", None) or 200,
        damping=getattr(args, "solver_damping", None) or 1.0,
    )


def parse_metric(text: str, dimension: int, cfg: SolverConfig):
    """Build an evaluator from ``catalog:...``, ``construct:...`` or
    ``test:broken``."""
    text = text.strip()
    if text == "test:broken":
        return broken_metric(dimension)
    head, _, rest = text.partition(":")
    if head == "catalog":
        return cat.as_evaluator(cat.parse_catalog(rest, dimension))
    if head != "construct":
        raise SpecParseError(f"metric spec must start with 'catalog:', "
                             f"'construct:' or 'test:'; got '{text}'")
    k_text, _, norm_part = rest.partition(":")
    try:
        curvature = int(k_text)
    except ValueError as exc:
        raise SpecParseError(f"bad curvature '{k_text}'") from exc
    if curvature not in (0, -1, 1):
        raise SpecParseError("curvature must be one of 0, -1, 1")
    tokens = norm_part.split(":") if norm_part else []

    def take_descriptor(pos):
        if pos >= len(tokens):
            return None, pos
        fam = tokens[pos]
        if fam not in NORM_ARITY:
            raise SpecParseError(f"unknown norm family '{fam}'")
        end = pos + 1 + NORM_ARITY[fam]
        if end > len(tokens):
            raise SpecParseError(f"norm '{fam}' is missing parameters")
        return ":".join(tokens[pos:end]), end

    psi_text, pos = take_descriptor(0)
    if psi_text is None:
        raise SpecParseError("construct spec needs at least one norm descriptor")
    phi_text, pos = take_descriptor(pos)
    if pos != len(tokens):
        raise SpecParseError(f"trailing tokens in metric spec: {tokens[pos:]}")
    psi = parse_norm(psi_text, dimension)
    phi = parse_norm(phi_text, dimension) if phi_text is not None else None
    if curvature == 1:
        return build_kpos1(psi, phi, cfg)
    if phi is None:
        raise SpecParseError("curvature 0 and -1 constructions need two norms")
    builder = build_k0 if curvature == 0 else build_kneg1
    return builder(psi, phi, cfg)


# ---------------------------------------------------------------------------
# output helpers


def _emit(payload: dict, summary: str) -> None:
    print(json.dumps(payload, allow_nan=False))
    print(summary, file=sys.stderr)


def _fmt(v: float) -> str:
    return repr(float(v))


# ---------------------------------------------------------------------------
# subcommands


def _point_metrics(metric, x, y):
    f = metric.eval(x, y)
    if metric.p_exact is not None:
        p = metric.projective_factor_exact(x, y)
    else:
        p = vfy.projective_factor_numeric(metric, x, y)
    k = vfy.flag_curvature(metric, x, y)
    return f, p, k


def cmd_eval(args) -> int:
    x = _parse_vector(args.x)
    y = _parse_vector(args.y)
    if x.size != y.size:
        raise SpecParseError("x and y must have the same length")
    metric = parse_metric(args.metric, x.size, _solver_cfg(args))
    f, p, k = _point_metrics(metric, x, y)
    _emit({"F": float(f), "P": float(p), "K_numeric": float(k)},
          f"F={f:.9g} P={p:.9g} K={k:.6g}")
    return 0


def _sweep_report(name, metric, points, residual_fn, tolerance, extra=None):
    residuals = _map(lambda pt: residual_fn(*pt), points)
    return vfy.make_report(name, points, residuals, tolerance, extra=extra)


def _run_check(name, metric, rng, radius, samples, tol):
    dim = metric.dimension
    if name == "convexity":
        xs = ball_points(rng, dim, radius, samples)
        us = sphere_points(rng, dim, samples)
        points = list(zip(xs, us))
        eigs = []

        def resid(x, u):
            r, lam = vfy.convexity_residual(metric, x, u)
            eigs.append(lam)
            return r

        report = _sweep_report("convexity", metric, points, resid, tol)
        report.extra["min_eigenvalue"] = float(min(eigs)) if eigs else math.inf
        return report
    if name == "geodesic":
        count = 5
        starts = ball_points(rng, dim, 0.3 * radius, count)
        dirs = sphere_points(rng, dim, count)
        t_end = min(0.2, 0.5 * radius)
        points = list(zip(starts, dirs))

        def resid(x0, v0):
            traj = vfy.integrate_geodesic(metric, x0, v0, t_end, 100)
            return vfy.collinearity_score(traj, x0, v0)

        return _sweep_report("geodesic", metric, points, resid, tol)

    xs = ball_points(rng, dim, radius, samples)
    ys = sphere_points(rng, dim, samples)
    points = list(zip(xs, ys))
    if name == "hamel":
        return _sweep_report("hamel", metric, points,
                             lambda x, y: vfy.hamel_residual(metric, x, y), tol)
    if name == "curvature":
        target = metric.intended_curvature
        values = _map(lambda pt: vfy.flag_curvature(metric, *pt), points)
        if target is None:
            center = float(np.median(values))
            residuals = [abs(v - center) for v in values]
            extra = {"median_K": center}
        else:
            residuals = [abs(v - target) for v in values]
            extra = {"target_K": float(target), "mean_K": float(np.mean(values))}
        return vfy.make_report("curvature", points, residuals, tol, extra=extra)
    if name == "berwald":
        return _sweep_report("berwald", metric, points,
                             lambda x, y: max(vfy.berwald_system_residual(metric, x, y)),
                             tol)
    if name == "pde":
        return _sweep_report("pde", metric, points,
                             lambda x, y: vfy.master_pde_residual(metric, x, y), tol)
    raise SpecParseError(f"unknown check '{name}'")


def _parse_tol_overrides(text):
    out = dict(DEFAULT_TOLERANCES)
    if not text:
        return out
    for chunk in text.split(","):
        key, _, val = chunk.partition("=")
        key = key.strip()
        if key not in out or not val:
            raise SpecParseError(f"bad tolerance override '{chunk}'")
        out[key] = float(val)
    return out


def cmd_verify(args) -> int:
    metric = parse_metric(args.metric, args.dim, _solver_cfg(args))
    names = [c.strip() for c in args.checks.split(",")] if args.checks else list(CHECK_NAMES)
    for c in names:
        if c not in CHECK_NAMES:
            raise SpecParseError(f"unknown check '{c}'")
    tols = _parse_tol_overrides(args.tol_override)
    radius = args.radius
    limit = getattr(metric, "domain_radius", math.inf)
    if radius > limit:
        raise DomainError(f"radius {radius} exceeds the metric's validity "
                          f"radius {limit:.6g}")
    reports = {}
    for name in names:
        rng = np.random.default_rng(args.seed)
        reports[name] = _run_check(name, metric, rng, radius, args.samples, tols[name])
    all_pass = all(r.passed for r in reports.values())
    payload = {
        "metric": args.metric,
        "dimension": args.dim,
        "radius": float(radius),
        "samples": int(args.samples),
        "seed": int(args.seed),
        "pass": bool(all_pass),
        "checks": {name: reports[name].to_json_dict() for name in names},
    }
    summary = " ".join(f"{n}={'ok' if reports[n].passed else 'FAIL'}" for n in names)
    _emit(payload, f"verify {args.metric}: {summary}")
    return 0 if all_pass else 1


def cmd_compare(args) -> int:
    cfg = _solver_cfg(args)
    m_a = parse_metric(args.metric, args.dim, cfg)
    m_b = parse_metric(args.metric_b, args.dim, cfg)
    if m_a.dimension != m_b.dimension:
        raise SpecParseError("metrics must share the dimension")
    rng = np.random.default_rng(args.seed)
    xs = ball_points(rng, args.dim, args.radius, args.samples)
    ys = sphere_points(rng, args.dim, args.samples)

    def one(pt):
        x, y = pt
        fa = m_a.eval(x, y)
        fb = m_b.eval(x, y)
        diff = abs(fa - fb)
        return diff, diff / max(abs(fa), abs(fb), 1e-300)

    results = _map(one, list(zip(xs, ys)))
    abs_diffs = [r[0] for r in results]
    rel_diffs = [r[1] for r in results]
    worst = int(np.argmax(rel_diffs))
    payload = {
        "max_abs_diff": float(max(abs_diffs)),
        "max_rel_diff": float(max(rel_diffs)),
        "worst_point": {"x": [float(v) for v in xs[worst]],
                        "y": [float(v) for v in ys[worst]]},
        "samples": int(args.samples),
        "seed": int(args.seed),
    }
    _emit(payload, f"compare: max_rel_diff={payload['max_rel_diff']:.3e}")
    return 0


def _parse_grid(text: str):
    axes = []
    for chunk in text.split(","):
        parts = chunk.split(":")
        if len(parts) != 3:
            raise SpecParseError(f"grid axis '{chunk}' must be min:max:count")
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise SpecParseError("grid count must be >= 1")
        axes.append(np.linspace(lo, hi, count))
    return axes


def cmd_sample(args) -> int:
    if (args.x is None) == (args.y is None):
        raise SpecParseError("sample needs exactly one of --x (fixed x, grid "
                             "over y) or --y (fixed y, grid over x)")
    fixed_is_y = args.y is not None
    fixed = _parse_vector(args.y if fixed_is_y else args.x)
    axes = _parse_grid(args.grid)
    dim = fixed.size
    if len(axes) != dim:
        raise SpecParseError("grid must have one axis per coordinate")
    metric = parse_metric(args.metric, dim, _solver_cfg(args))

    mesh = np.meshgrid(*axes, indexing="ij")
    grid_points = np.stack([m.reshape(-1) for m in mesh], axis=1)

    def one(gp):
        x, y = (gp, fixed) if fixed_is_y else (fixed, gp)
        try:
            f, p, k = _point_metrics(metric, x, y)
            return _fmt(f), _fmt(p), _fmt(k)
        except DomainError:
            return "", "", ""

    rows = _map(one, list(grid_points))
    header = ([f"x{i+1}" for i in range(dim)] + [f"y{i+1}" for i in range(dim)]
              + ["F", "P", "K"])
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for gp, (fv, pv, kv) in zip(grid_points, rows):
            x, y = (gp, fixed) if fixed_is_y else (fixed, gp)
            writer.writerow([_fmt(v) for v in x] + [_fmt(v) for v in y]
                            + [fv, pv, kv])
    n_ok = sum(1 for r in rows if r[0] != "")
    payload = {"out": args.out, "rows": int(grid_points.shape[0]),
               "evaluated": int(n_ok)}
    _emit(payload, f"sample: wrote {payload['rows']} rows to {args.out}")
    return 0


def cmd_geodesic(args) -> int:
    x0 = _parse_vector(args.x)
    v0 = _parse_vector(args.y)
    if x0.size != v0.size:
        raise SpecParseError("x and y must have the same length")
    metric = parse_metric(args.metric, x0.size, _solver_cfg(args))
    traj = vfy.integrate_geodesic(metric, x0, v0, args.t_end, args.steps)
    score = vfy.collinearity_score(traj, x0, v0)
    if args.out:
        header = (["t"] + [f"x{i+1}" for i in range(x0.size)]
                  + [f"v{i+1}" for i in range(x0.size)])
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for t, p, v in zip(traj.times, traj.points, traj.velocities):
                writer.writerow([_fmt(t)] + [_fmt(c) for c in p] + [_fmt(c) for c in v])
    payload = {"collinearity": float(score), "points": int(traj.points.shape[0]),
               "completed": bool(traj.completed)}
    if args.out:
        payload["out"] = args.out
    _emit(payload, f"geodesic: collinearity={score:.3e} "
                   f"({'complete' if traj.completed else 'truncated at boundary'})")
    return 0


def cmd_catalog(args) -> int:
    entries = cat.list_catalog(args.dim)
    payload = {"entries": [
        {"name": e.name,
         "params": {k: (int(v) if isinstance(v, (int, np.integer)) else float(v))
                    for k, v in e.params.items()},
         "known_curvature": float(e.known_curvature),
         "domain_radius": (None if math.isinf(e.domain_radius)
                           else float(e.domain_radius))}
        for e in entries]}
    _emit(payload, f"catalog: {len(entries)} entries")
    return 0


# ---------------------------------------------------------------------------
# argument plumbing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="projflat",
        description="Evaluate, verify, and compare projectively flat metrics "
                    "of constant flag curvature.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, metric=True):
        if metric:
            p.add_argument("--metric", required=True,
                           help="catalog:<name[:params]> | "
                                "construct:<K>:<psi>[:<phi>] | test:broken")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--dim", type=int, default=2)
        p.add_argument("--solver-tol", type=float, default=None)
        p.add_argument("--solver-iters", type=int, default=None)
        p.add_argument("--solver-damping", type=float, default=None)

    p = sub.add_parser("eval", help="F, P, and numeric K at one point")
    common(p)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("verify", help="identity checks over a seeded sweep")
    common(p)
    p.add_argument("--checks", default=None,
                   help="comma list from: " + ",".join(CHECK_NAMES))
    p.add_argument("--radius", type=float, default=0.3)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--tol-override", default=None,
                   help="comma list of check=tolerance")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("compare", help="sweep |F_A - F_B| over seeded points")
    common(p)
    p.add_argument("--metric-b", required=True)
    p.add_argument("--radius", type=float, default=0.3)
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("sample", help="CSV of F, P, K over a coordinate grid")
    common(p)
    p.add_argument("--x", default=None, help="fixed base point (grid over y)")
    p.add_argument("--y", default=None, help="fixed tangent (grid over x)")
    p.add_argument("--grid", required=True, help="min:max:count per axis, comma-separated")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("geodesic", help="integrate one geodesic and score straightness")
    common(p)
    p.add_argument("--x", required=True, help="initial position")
    p.add_argument("--y", required=True, help="initial velocity")
    p.add_argument("--t-end", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_geodesic)

    p = sub.add_parser("catalog", help="list the closed-form entries")
    common(p, metric=False)
    p.set_defaults(fn=cmd_catalog)
    return parser


def _error_exit(kind: str, exc: Exception, code: int) -> int:
    print(json.dumps({"error": {"type": kind, "message": str(exc)}}),
          file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad flags, matching the parse-error code
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except SpecParseError as exc:
        return _error_exit("parse", exc, 2)
    except SolverError as exc:
        return _error_exit("solver", exc, 4)
    except DomainError as exc:
        return _error_exit("domain", exc, 3)
    except ProjFlatError as exc:
        return _error_exit("error", exc, 2)
    except ValueError as exc:
        return _error_exit("parse", exc, 2)


if __name__ == "__main__":
    sys.exit(main())
