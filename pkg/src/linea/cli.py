"""Command-line front end: ``linea <command> [options]``.

Every command prints one JSON object (default) or a CSV table. Exit codes:
0 success, 2 numerical failure (including a verdict other than the one
demanded by ``--require-verdict``), 3 invalid arguments.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import area, dynamics, linearizer, quad_diff
from .core import poly_roots
from .errors import LineaError
from .parsing import ParseError, parse_coeffs, parse_complex, parse_poly
from .regions import HalfLine, region_from_string
from .series import SeriesEstimate

DEFAULTS = {"seed": 1, "depth": 12, "samples": 100_000, "tol": 1e-12,
            "output_format": "json", "output_path": None, "threads": 1, "partitions": 1}
_CONFIG_TYPES = {"seed": int, "depth": int, "samples": int, "tol": float, "output_format": str,
                 "output_path": str, "threads": int, "partitions": int}
GOLDEN = (math.sqrt(5) - 1) / 2

OUTPUT_SCHEMA = {
    "type": "object",
    "required": ["command", "config", "result", "diagnostics"],
    "properties": {
        "command": {"type": ["string", "null"]},
        "config": {"type": "object"},
        "result": {},
        "diagnostics": {
            "type": "object",
            "required": ["verdict", "levels", "residuals"],
            "properties": {
                "verdict": {"type": ["string", "null"]},
                "levels": {"type": ["array", "null"]},
                "residuals": {"type": "object"},
            },
        },
        "error": {
            "type": "object",
            "required": ["type", "message"],
            "properties": {"type": {"type": "string"}, "message": {"type": "string"}},
        },
    },
}

# CSV columns per command
CSV_COLUMNS = {
    "roots": ["index", "re", "im"],
    "fixed-points": ["index", "re", "im", "multiplier_re", "multiplier_im", "abs_multiplier", "classification"],
    "critical-orbit": ["index", "re", "im"],
    "preimages": ["level", "index", "re", "im", "abs_deriv"],
    "poincare-series": ["level", "level_sum", "partial_sum"],
    "linearize coeffs": ["n", "re", "im"],
    "linearize eval": ["z_re", "z_im", "value_re", "value_im", "deriv_re", "deriv_im"],
    "linearize order": ["radius", "log_max_modulus"],
    "area sum": ["level", "level_sum", "partial_sum"],
    "area mc": ["value", "std_error", "samples", "hits", "seed"],
    "area el-growth": ["n", "area", "std_error"],
    "area distance": ["level", "level_sum", "partial_sum"],
    "area siegel": ["level", "in_level_sum", "out_level_sum"],
    "qd pushforward": ["w_re", "w_im", "sigma_re", "sigma_im", "terms_used", "tail_estimate"],
    "qd exp-identity": ["lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_diff"],
    "qd pole-fit": ["w_abs", "sigma_abs"],
    "schwarzian-order": ["kind", "value", "numerator", "denominator"],
}


class InvalidArguments(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidArguments(message)


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, (complex, np.complexfloating)):
        return [jsonable(float(x.real)), jsonable(float(x.imag))]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def _complex_arg(text):
    try:
        return parse_complex(text)
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _poly_arg(text):
    try:
        return parse_poly(text)
    except (ParseError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p):
    g = p.add_argument_group("run configuration")
    g.add_argument("--seed", type=int)
    g.add_argument("--depth", type=int)
    g.add_argument("--samples", type=int)
    g.add_argument("--tol", type=float)
    g.add_argument("--format", dest="output_format", choices=["json", "csv"])
    g.add_argument("--output", dest="output_path")
    g.add_argument("--config", help="flat key = value file; flags override it")
    g.add_argument("--threads", type=int)
    g.add_argument("--partitions", type=int)
    g.add_argument("--require-verdict", choices=["converged", "diverging_suspected", "undecided"])


def _map_args(p, tags=True):
    if tags:
        p.add_argument("--map", choices=list(area.TAGS), help="closed-form map instead of a linearizer")
    p.add_argument("--poly", type=_poly_arg)
    p.add_argument("--fixed-point", type=_complex_arg)
    p.add_argument("--order", type=int, default=linearizer.DEFAULT_ORDER, help="series truncation M")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="linea", description="Linearizers of polynomials and the area property.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("roots", help="roots of a polynomial")
    p.add_argument("--poly", type=_poly_arg, required=True)
    _common(p)

    p = sub.add_parser("fixed-points", help="fixed points and multipliers")
    p.add_argument("--poly", type=_poly_arg, required=True)
    _common(p)

    p = sub.add_parser("critical-orbit", help="postcritical points and connectivity")
    p.add_argument("--poly", type=_poly_arg, required=True)
    p.add_argument("--n-max", type=int, default=dynamics.POSTCRITICAL_ITER)
    _common(p)

    p = sub.add_parser("preimages", help="iterated preimages of a point")
    p.add_argument("--poly", type=_poly_arg, required=True)
    p.add_argument("--w", type=_complex_arg, required=True)
    _common(p)

    p = sub.add_parser("poincare-series", help="level sums of |(p^n)'|^-t")
    p.add_argument("--poly", type=_poly_arg, required=True)
    p.add_argument("--w", type=_complex_arg, required=True)
    p.add_argument("--t", type=float, default=2.0)
    p.add_argument("--restrict", help="region, e.g. disc:0,0,1 or filled-julia")
    _common(p)

    lin = sub.add_parser("linearize", help="linearizer construction and evaluation")
    lsub = lin.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = lsub.add_parser("coeffs")
    _map_args(p, tags=False)
    _common(p)
    p = lsub.add_parser("eval")
    _map_args(p, tags=False)
    p.add_argument("--z", type=_complex_arg, required=True)
    _common(p)
    for parent, name in ((lsub, "order"), (sub, "order")):
        p = parent.add_parser(name, help="order of growth")
        _map_args(p, tags=False)
        p.add_argument("--empirical", action="store_true")
        p.add_argument("--radii", type=_float_list, default=[1e2, 1e3, 1e4, 1e5])
        p.add_argument("--samples-per-circle", type=int, default=linearizer.SAMPLES_PER_CIRCLE)
        _common(p)

    ar = sub.add_parser("area", help="area-property computations")
    asub = ar.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = asub.add_parser("sum")
    _map_args(p)
    p.add_argument("--w", type=_complex_arg, required=True)
    p.add_argument("--t", type=float, default=2.0)
    p.add_argument("--n-max", type=int, help="lattice index or generation cutoff (default: depth)")
    _common(p)
    p = asub.add_parser("mc")
    _map_args(p)
    p.add_argument("--region", required=True)
    p.add_argument("--r-max", type=float, required=True)
    _common(p)
    p = asub.add_parser("el-growth")
    _map_args(p)
    p.add_argument("--region", required=True)
    p.add_argument("--n-max", type=int, default=7)
    _common(p)
    p = asub.add_parser("distance")
    p.add_argument("--w", type=_complex_arg, required=True)
    p.add_argument("--region", default="ray:0,0,-1,0")
    p.add_argument("--k-max", type=int, default=10_000)
    _common(p)
    p = asub.add_parser("siegel")
    p.add_argument("--theta", type=float, default=GOLDEN)
    p.add_argument("--w-in", type=_complex_arg, default=0.1 + 0j)
    p.add_argument("--w-out", type=_complex_arg, default=3 + 0j)
    p.add_argument("--t", type=float, default=2.0)
    _common(p)

    qd = sub.add_parser("qd", help="quadratic differentials")
    qsub = qd.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = qsub.add_parser("pushforward")
    _map_args(p, tags=False)
    p.add_argument("--q-num", default="1")
    p.add_argument("--q-den", default="z^2")
    p.add_argument("--w", type=_complex_arg, required=True)
    p.add_argument("--n-max", type=int, default=100_000)
    p.add_argument("--skip-poles", action="store_true")
    _common(p)
    p = qsub.add_parser("exp-identity")
    p.add_argument("--w", type=_complex_arg, required=True)
    p.add_argument("--terms", type=int, default=100_000)
    p.add_argument("--branch-shift", type=int, default=0)
    _common(p)
    p = qsub.add_parser("pole-fit")
    p.add_argument("--q-num", default="1")
    p.add_argument("--q-den", default="z^2")
    p.add_argument("--radii", type=_float_list, default=[1e2, 1e3, 1e4, 1e5, 1e6])
    p.add_argument("--direction", type=float, default=0.0, help="argument of the sample points")
    p.add_argument("--n-max", type=int, default=1_000_000)
    p.add_argument("--exact-num", help="sample num/den exactly instead of the exp pushforward")
    p.add_argument("--exact-den")
    _common(p)

    p = sub.add_parser("schwarzian-order", help="order from Schwarzian data")
    p.add_argument("--kind", choices=list(linearizer.SCHWARZIAN_KINDS), required=True)
    p.add_argument("--count", type=int, required=True)
    _common(p)
    return top


def read_config(path: str) -> dict:
    out = {}
    try:
        lines = open(path, encoding="utf-8").read().splitlines()
    except OSError as exc:
        raise InvalidArguments(f"cannot read config {path!r}: {exc}") from None
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or key not in _CONFIG_TYPES:
            raise InvalidArguments(f"{path}:{no}: expected one of {sorted(_CONFIG_TYPES)} = value")
        try:
            out[key] = _CONFIG_TYPES[key](val)
        except ValueError:
            raise InvalidArguments(f"{path}:{no}: bad value {val!r} for {key}") from None
    return out


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if cfg["output_format"] not in ("json", "csv"):
        raise InvalidArguments("output_format must be json or csv")
    for key in ("depth", "samples", "threads", "partitions"):
        if cfg[key] < 1:
            raise InvalidArguments(f"{key} must be positive")
    if not cfg["tol"] > 0:
        raise InvalidArguments("tol must be positive")
    return cfg


def _fixed_point(p, z0):
    """Nearest exact fixed point to the user's approximation."""
    if z0 is None:
        raise InvalidArguments("--fixed-point is required")
    fps = dynamics.fixed_points(p)
    best = min(fps, key=lambda f: abs(f.location - z0))
    if abs(best.location - z0) > 1e-6 * (1 + abs(z0)):
        raise InvalidArguments(f"{z0!r} is not a fixed point; fixed points are "
                               + ", ".join(f"{f.location:.12g}" for f in fps))
    return best.location


def _linearizer(args):
    if args.poly is None:
        raise InvalidArguments("--poly and --fixed-point are required")
    return linearizer.koenigs_coeffs(args.poly, _fixed_point(args.poly, args.fixed_point), args.order)


def _map(args):
    if getattr(args, "map", None):
        return args.map
    return _linearizer(args)


def _qd(num, den):
    try:
        return quad_diff.QDSpec(parse_coeffs(num), parse_coeffs(den))
    except ParseError as exc:
        raise InvalidArguments(str(exc)) from None


def _series_out(est: SeriesEstimate):
    rows = [[i + 1, l, s] for i, (l, s) in enumerate(zip(est.level_sums, est.partial_sums))]
    return est.to_dict(), est.verdict, est.level_sums, rows


# each handler returns (result, verdict, levels, residuals, csv_rows)
def cmd_roots(args, cfg):
    r = poly_roots(args.poly, cfg["tol"])
    res = max(abs(args.poly(z)) for z in r)
    return {"roots": r}, None, None, {"max_residual": res}, [[i, z.real, z.imag] for i, z in enumerate(r)]


def cmd_fixed_points(args, cfg):
    fps = dynamics.fixed_points(args.poly, cfg["tol"])
    rows = [[i, f.location.real, f.location.imag, f.multiplier.real, f.multiplier.imag,
             abs(f.multiplier), f.classification] for i, f in enumerate(fps)]
    res = max(abs(args.poly(f.location) - f.location) for f in fps)
    return {"fixed_points": [f.to_dict() for f in fps]}, None, None, {"max_residual": res}, rows


def cmd_critical_orbit(args, cfg):
    pts, conn = dynamics.critical_orbit_analysis(args.poly, args.n_max, tol=cfg["tol"])
    return ({"postcritical": pts, "connected": conn, "critical_points": dynamics.critical_points(args.poly)},
            None, None, {}, [[i, z.real, z.imag] for i, z in enumerate(pts)])


def cmd_preimages(args, cfg):
    tree = dynamics.preimage_tree(args.poly, args.w, cfg["depth"], tol=cfg["tol"])
    levels, rows, res = [], [], 0.0
    for k, lv in enumerate(tree.levels):
        levels.append({"level": k, "points": lv.z, "abs_deriv": np.abs(lv.deriv)})
        if k:
            res = max(res, float(np.max(np.abs(args.poly(lv.z) - tree.levels[k - 1].z[lv.parent]))))
        rows += [[k, i, z.real, z.imag, abs(d)] for i, (z, d) in enumerate(zip(lv.z, lv.deriv))]
    return ({"w": args.w, "depth": tree.depth, "nodes": tree.node_count(), "levels": levels},
            None, [len(lv.z) for lv in tree.levels], {"max_residual": res}, rows)


def cmd_poincare_series(args, cfg):
    restrict = region_from_string(args.restrict, args.poly) if args.restrict else None
    est = dynamics.poincare_series(args.poly, args.w, args.t, cfg["depth"], restrict)
    result, verdict, levels, rows = _series_out(est)
    return result, verdict, levels, {"tail_bound": est.tail_bound}, rows


def cmd_linearize_coeffs(args, cfg):
    F = _linearizer(args)
    a = F.series.coeffs
    # functional-equation residual of the truncated series in coefficient space
    lam_pows = np.array([F.lam**n for n in range(len(a))])
    lhs = np.array(a) * lam_pows
    rhs = np.zeros(len(a), complex)
    g = np.array(a)
    acc = np.array([1 + 0j])
    for c in F.p.coeffs:
        rhs[: min(len(acc), len(a))] += c * acc[: len(a)]
        acc = np.convolve(acc, g)[: len(a)]
    fe = float(np.max(np.abs(lhs - rhs)))
    return ({**F.to_dict(), "truncation_order": F.series.truncation_order}, None, None,
            {"functional_equation": fe}, [[n, c.real, c.imag] for n, c in enumerate(a)])


def cmd_linearize_eval(args, cfg):
    F = _linearizer(args)
    v, d = linearizer.lin_eval(F, args.z)
    v2, _ = linearizer.lin_eval(F, F.lam * args.z)
    fe = abs(v2 - F.p(v))
    return ({"z": args.z, "value": v, "derivative": d, "eta": F.eta}, None, None,
            {"functional_equation": fe},
            [[args.z.real, args.z.imag, v.real, v.imag, d.real, d.imag]])


def cmd_linearize_order(args, cfg):
    F = _linearizer(args)
    exact = linearizer.order_exact(F)
    out = {"exact": exact.to_dict()}
    rows = []
    resid = {}
    if args.empirical:
        emp = linearizer.order_empirical(F, args.radii, args.samples_per_circle)
        out["empirical"] = emp.to_dict()
        out["value"] = emp.value
        resid = {"fit_residual": emp.fit_residual, "relative_gap": abs(emp.value - exact.value) / exact.value}
        rows = [[r, m] for r, m in zip(emp.radii, emp.log_max_modulus)]
    else:
        out["value"] = exact.value
    return out, None, None, resid, rows


def cmd_area_sum(args, cfg):
    F = _map(args)
    n = args.n_max if args.n_max is not None else cfg["depth"]
    failures = []
    est = area.area_sum(F, args.w, args.t, n, failures)
    result, verdict, levels, rows = _series_out(est)
    return result, verdict, levels, {"seed_failures": len(failures),
                                     "max_residual": est.extra.get("max_residual")}, rows


def _region(text, F):
    try:
        return region_from_string(text, F.p if isinstance(F, linearizer.PoincareMap) else None)
    except ValueError as exc:
        raise InvalidArguments(str(exc)) from None


def cmd_area_mc(args, cfg):
    F = _map(args)
    est = area.cylindrical_area_mc(F, _region(args.region, F), args.r_max, cfg["samples"], cfg["seed"],
                                   cfg["partitions"], cfg["threads"])
    return (est.to_dict(), None, None, {"std_error": est.std_error},
            [[est.value, est.std_error, est.samples, est.hits, est.seed]])


def cmd_area_el_growth(args, cfg):
    F = _map(args)
    seq = area.el_growth(F, _region(args.region, F), args.n_max, cfg["samples"], cfg["seed"],
                         cfg["partitions"], cfg["threads"])
    fit = area.linear_fit(seq[2:]) if len(seq) > 3 else area.linear_fit(seq)
    return ({"growth": [{"n": n, "area": a, "std_error": e} for n, a, e in seq], "fit_n_ge_2": fit},
            None, [a for _, a, _ in seq], {"r2": fit["r2"]}, [list(x) for x in seq])


def cmd_area_distance(args, cfg):
    K = _region(args.region, "exp")
    if not isinstance(K, HalfLine):
        raise InvalidArguments("distance needs a ray region")
    est = area.distance_form_sum("exp", args.w, K, args.k_max)
    result, verdict, levels, rows = _series_out(est)
    return result, verdict, levels, {"tail_bound": est.tail_bound}, rows


def cmd_area_siegel(args, cfg):
    tin, tout = area.siegel_compare(args.theta, args.w_in, args.w_out, cfg["depth"], args.t)
    l1 = tin.level_sums[0]
    result = {"trace_in": tin.to_dict(), "trace_out": tout.to_dict(),
              "in_min_level_over_first": min(tin.level_sums) / l1 if l1 else None}
    rows = [[i + 1, a, b] for i, (a, b) in enumerate(zip(tin.level_sums, tout.level_sums))]
    return result, tout.verdict, tout.level_sums, {"in_verdict": tin.verdict}, rows


def cmd_qd_pushforward(args, cfg):
    q = _qd(args.q_num, args.q_den)
    F = "exp" if args.poly is None else _linearizer(args)
    s = quad_diff.pushforward_eval(F, q, args.w, args.n_max, args.skip_poles)
    return (s.to_dict(), None, None, {"tail_estimate": s.tail_estimate},
            [[s.w.real, s.w.imag, s.sigma.real, s.sigma.imag, s.terms_used, s.tail_estimate]])


def cmd_qd_exp_identity(args, cfg):
    lhs, rhs, diff = quad_diff.exp_identity(args.w, args.terms, args.branch_shift)
    return ({"w": args.w, "terms": args.terms, "lhs": lhs, "rhs": rhs, "abs_diff": diff}, None, None,
            {"abs_diff": diff}, [[lhs.real, lhs.imag, rhs.real, rhs.imag, diff]])


def cmd_qd_pole_fit(args, cfg):
    direction = np.exp(1j * args.direction)
    ws = [r * direction for r in args.radii]
    if args.exact_num is not None or args.exact_den is not None:
        q = _qd(args.exact_num or "1", args.exact_den or "1")
        samples = [quad_diff.PushforwardSample(complex(w), complex(q(w)), 1, 0.0) for w in ws]
        source = "exact"
    else:
        q = _qd(args.q_num, args.q_den)
        samples = [quad_diff.pushforward_eval("exp", q, w, args.n_max) for w in ws]
        source = "exp_pushforward"
    slope, order = quad_diff.pole_fit(samples)
    env = [abs(s.sigma) * abs(s.w) ** 2 / math.log(abs(s.w)) ** 2 for s in samples]
    return ({"source": source, "slope": slope, "pole_order_at_infinity": order,
             "samples": [s.to_dict() for s in samples], "double_pole_envelope": env},
            None, None, {"max_tail_estimate": max(s.tail_estimate for s in samples)},
            [[abs(s.w), abs(s.sigma)] for s in samples])


def cmd_schwarzian_order(args, cfg):
    v = linearizer.schwarzian_order(args.kind, args.count)
    return ({"kind": args.kind, "value": float(v), "fraction": f"{v.numerator}/{v.denominator}"},
            None, None, {}, [[args.kind, float(v), v.numerator, v.denominator]])


HANDLERS = {
    "roots": cmd_roots, "fixed-points": cmd_fixed_points, "critical-orbit": cmd_critical_orbit,
    "preimages": cmd_preimages, "poincare-series": cmd_poincare_series,
    "linearize coeffs": cmd_linearize_coeffs, "linearize eval": cmd_linearize_eval,
    "linearize order": cmd_linearize_order, "area sum": cmd_area_sum, "area mc": cmd_area_mc,
    "area el-growth": cmd_area_el_growth, "area distance": cmd_area_distance,
    "area siegel": cmd_area_siegel, "qd pushforward": cmd_qd_pushforward,
    "qd exp-identity": cmd_qd_exp_identity, "qd pole-fit": cmd_qd_pole_fit,
    "schwarzian-order": cmd_schwarzian_order,
}


def _csv_text(command, rows, error=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if error is not None:
        w.writerow(["error_type", "message"])
        w.writerow([error["type"], error["message"]])
    else:
        w.writerow(CSV_COLUMNS[command])
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    doc = {"command": None, "config": {}, "result": None,
           "diagnostics": {"verdict": None, "levels": None, "residuals": {}}}
    cfg = dict(DEFAULTS)
    command = None
    try:
        args = parser.parse_args(argv)
        command = args.command if args.command not in ("linearize", "area", "qd") else f"{args.command} {args.action}"
        if command == "order":
            command = "linearize order"
        doc["command"] = command
        cfg = resolve_config(args)
        doc["config"] = cfg
        result, verdict, levels, resid, rows = HANDLERS[command](args, cfg)
        doc["result"] = result
        doc["diagnostics"] = {"verdict": verdict, "levels": levels, "residuals": resid}
        code = 0
        if args.require_verdict and verdict != args.require_verdict:
            doc["error"] = {"type": "VerdictMismatch",
                            "message": f"verdict {verdict!r}, required {args.require_verdict!r}"}
            code = 2
    except (InvalidArguments, ParseError, ValueError) as exc:
        doc["error"] = {"type": "InvalidArguments", "message": str(exc)}
        rows, code = [], 3
        print(f"linea: error: {exc}", file=sys.stderr)
    except LineaError as exc:
        doc["error"] = {"type": type(exc).__name__, "message": str(exc)}
        rows, code = [], 2
    if cfg["output_format"] == "csv" and command in CSV_COLUMNS:
        text = _csv_text(command, rows, doc.get("error"))
    else:
        text = json.dumps(jsonable(doc), indent=2) + "\n"
    _emit(text, cfg.get("output_path"))
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
