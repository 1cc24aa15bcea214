"""Command-line front end.

Exit codes: 0 on success (a FAIL verdict is data, not an error), 1 when the
self-test fails, 2 on usage errors, 3 on precondition errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import dynamics, koebe, pade, pickclass, schwarzian, selftest
from .errors import PreconditionError
from .jets import Jet, exp_jet
from .scalar import EXACT, FLOAT, exact, fmt, is_exact, parse

SCHEMA = "v1"

FUNCTIONS: dict[str, Callable] = {
    "sqrt": np.sqrt,
    "square": np.square,
    "cube": lambda t: np.asarray(t) ** 3,
    "log": np.log,
    "exp": np.exp,
    "neg-inverse": lambda t: -1.0 / np.asarray(t),
    "identity": lambda t: np.asarray(t, dtype=float),
}


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------
# argument helpers

def _scalar(text: str, backend: str = EXACT):
    try:
        return parse(text.strip(), backend)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def _scalars(text: str, backend: str = EXACT) -> list:
    return [_scalar(t, backend) for t in text.split(",") if t.strip()]


def _interval(text: str, backend: str = EXACT) -> tuple:
    vals = [t.strip() for t in text.split(",")]
    if len(vals) != 2:
        raise UsageError(f"expected lo,hi but got {text!r}")
    return tuple(float(v) if v in ("inf", "-inf") else _scalar(v, backend) for v in vals)


def _load_json(text: str):
    try:
        if text.startswith("@"):
            return json.loads(Path(text[1:]).read_text())
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON input: {exc}") from exc


def _q_map(args) -> dynamics.IntervalMap:
    alpha = _scalar(args.alpha)
    a = _scalar(args.a if args.a is not None else "0")
    if args.backend == EXACT and exact(alpha).denominator != 1:
        raise UsageError("q with a non-integer alpha needs --backend float")
    if args.backend == FLOAT:
        alpha, a = float(alpha), float(a)
    return dynamics.q_family(alpha, a)


def _interval_map(args) -> dynamics.IntervalMap:
    if args.fn == "logistic":
        a = _scalar(args.a if args.a is not None else "4")
        f = dynamics.logistic(a)
        if args.backend == FLOAT:
            f = dynamics.polynomial_map([float(c) for c in f.poly], name=f.name, backend=FLOAT)
        return f
    if args.fn == "q":
        return _q_map(args)
    raise UsageError(f"--fn {args.fn} is not an interval map; use logistic or q")


def _mobius_coeffs(args) -> list:
    coeffs = _scalars(args.mobius, args.backend)
    if len(coeffs) != 4:
        raise UsageError("--mobius takes four numbers a,b,c,d")
    if coeffs[0] * coeffs[3] - coeffs[1] * coeffs[2] == 0:
        raise UsageError("--mobius coefficients are degenerate (ad - bc = 0)")
    return coeffs


def _rational_map(args, at=None) -> pade.RationalMap:
    """Rational map from --map, --cf or --fn mobius|logistic."""
    if args.map:
        return pade.RationalMap.from_dict(_load_json(args.map), args.backend)
    if args.cf:
        data = _load_json(args.cf)
        cf = schwarzian.ContinuedFractionRep(
            parse(data["base"], args.backend),
            tuple(parse(v, args.backend) for v in data["A"]),
            tuple(parse(v, args.backend) for v in data["mu"]))
        return cf.to_rational_map()
    base = at if at is not None else _scalar(args.at or "0", args.backend)
    if args.fn == "mobius":
        return pade.mobius(*_mobius_coeffs(args), base)
    if args.fn == "logistic":
        a = _scalar(args.a if args.a is not None else "4", args.backend)
        return pade.RationalMap((a * 0, a, -a), (a * 0 + 1,), a * 0).recentre(base)
    raise UsageError("this command needs --map, --cf or --fn mobius|logistic")


def _jet_source(args) -> Callable[[object, int], Jet]:
    """``source(x, order)`` for the selected input."""
    if args.jet:
        fixed = Jet.from_dict(_load_json(args.jet), args.backend)

        def from_jet(x, order):
            if x is not None and exact(x) != exact(fixed.base):
                raise UsageError("a literal --jet is only known at its own base point")
            return fixed if order >= fixed.order else fixed.truncate(order)
        return from_jet
    if args.map or args.cf:
        R = _rational_map(args)
        return lambda x, order: R.jet_at(R.base if x is None else x, order)
    if args.fn == "exp":
        def exp_source(x, order):
            x = _scalar("0") if x is None else x
            if args.backend == EXACT and x != 0:
                raise UsageError("exp has exact jets at 0 only; use --backend float")
            return exp_jet(x if args.backend == EXACT else float(x), order)
        return exp_source
    if args.fn == "mobius":
        coeffs = _mobius_coeffs(args)
        return lambda x, order: pade.mobius(*coeffs, _scalar("0") if x is None else x).jet(order)
    if args.fn in ("logistic", "q"):
        f = _interval_map(args)
        if args.backend == EXACT and not f.is_exact:
            raise UsageError(f"{f.name} has no exact jets; use --backend float")
        if getattr(args, "inverse", False):
            lap = _interval(args.lap, FLOAT)
            return lambda x, order: dynamics.inverse_branch_jet(f, x, order, lap=lap)
        return lambda x, order: f.jet(x, order)
    raise UsageError("no input: give --fn, --jet, --map or --cf")


def _at(args):
    if args.at is None:
        return None
    return _scalar(args.at, args.backend)


def _input_jet(args, order: int) -> Jet:
    jet = _jet_source(args)(_at(args), order)
    if args.backend == FLOAT and jet.is_exact:
        jet = jet.to_float()
    return jet


# ----------------------------------------------------------------------
# commands; each returns (payload, csv rows)

def cmd_pade(args):
    R = pade.pade_approximant(_input_jet(args, 2 * args.d + 1), args.d)
    out = {"d": args.d, **R.to_dict()}
    rows = [{"k": k, "p": fmt(p), "q": fmt(q)}
            for k, (p, q) in enumerate(zip(_pad(R.p, args.d), _pad(R.q, args.d)))]
    return out, rows


def _pad(coeffs, d):
    return list(coeffs) + [coeffs[0] * 0] * (d + 1 - len(coeffs))


ROUTES = {
    "det": schwarzian.schwarzian_det,
    "defect": schwarzian.schwarzian_defect,
}


def cmd_schwarzian(args):
    f = _input_jet(args, 2 * args.d + 1)
    if args.route == "recursive":
        seq = schwarzian.schwarzian_recursive(f, args.d)
        out = seq.to_dict()
    else:
        fn = ROUTES[args.route]
        values = [fn(f, k) for k in range(1, args.d + 1)]
        out = {"base": fmt(f.base), "S": [fmt(v) for v in values]}
    out["route"] = args.route
    rows = [{"k": k, "S": v} for k, v in enumerate(out["S"], start=1)]
    return out, rows


def cmd_cf(args):
    cf = schwarzian.continued_fraction(_input_jet(args, 2 * args.d + 1), args.d)
    rows = [{"k": k, "A": fmt(a), "mu": fmt(cf.mu[k]) if k < cf.depth else None}
            for k, a in enumerate(cf.A)]
    return cf.to_dict(), rows


def cmd_pick_certify(args):
    R = _rational_map(args)
    methods = [pickclass.SCHWARZIAN_SIGNS, pickclass.DEGREE_REDUCTION] if args.method == "both" else [args.method]
    certs = [pickclass.certify_pick(R, _at(args), m) for m in methods]
    out = {"map": R.to_dict(), "certificates": [c.to_dict() for c in certs]}
    rows = [{"method": c.method, "verdict": c.verdict, "degree": c.degree, "strict": c.strict,
             "weak": c.weak} for c in certs]
    return out, rows


def cmd_halfplane(args):
    R = _rational_map(args)
    grid = pickclass.HalfplaneGrid(re=_interval(args.re, FLOAT), im=_interval(args.im, FLOAT),
                                   n_re=args.n, n_im=args.n, log_im=not args.linear)
    rep = pickclass.halfplane_sample_check(R, grid, args.tol)
    out = rep.to_dict()
    return out, [{"min_im": out["min_im"], "n_points": out["n_points"],
                  "failures": len(out["failures"]), "verdict": out["verdict"]}]


def cmd_crossratio(args):
    if not args.points:
        raise UsageError("crossratio needs --points")
    points = _scalars(args.points, args.backend)
    R = _rational_map(args, at=points[0])
    cr = pickclass.crossratio_from_map(R, points)
    out = cr.to_dict()
    out["min_eigenvalue"] = cr.min_eigenvalue
    return out, [{"index": i, "eigenvalue": float(v)} for i, v in enumerate(cr.eigenvalues)]


def cmd_monotone(args):
    f = FUNCTIONS[args.func]
    U = tuple(float(v) for v in _interval(args.U, FLOAT))
    pairs = _load_json(args.pairs) if args.pairs else None
    rep = pickclass.matrix_monotone_test(f, U, args.n, trials=args.trials, seed=args.seed, pairs=pairs)
    out = {"function": args.func, "U": list(U), "seed": args.seed, **rep.to_dict()}
    return out, [{k: out[k] for k in ("function", "n", "trials", "seed", "min_eigenvalue", "verdict")}]


def cmd_koebe(args):
    U = _interval(args.U, args.backend)
    source = _jet_source(args)
    if args.backend == FLOAT:
        raw = source

        def source(x, order):
            jet = raw(x, order)
            return jet.to_float() if jet.is_exact else jet
    pairs = [(args.m, args.n)] if args.m is not None else koebe.valid_pairs(args.d)
    if (args.m is None) != (args.n is None):
        raise UsageError("give both --m and --n, or neither")
    if args.grid:
        grid = _scalars(args.grid, args.backend)
    else:
        grid = koebe.chebyshev_grid(U, args.count)
    reports = []
    for m, n in pairs:
        try:
            q = koebe.KoebeQuery(args.d, m, n, U)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        reports.append(koebe.koebe_check(source, q, grid, constant=args.constant,
                                         require_membership=not args.skip_membership))
    out = {"d": args.d, "U": [fmt(v) for v in U], "constant": args.constant,
           "pairs": [r.to_dict() for r in reports],
           "verdict": "PASS" if all(r.passed for r in reports) else "FAIL"}
    rows = [{"m": r.m, "n": r.n, **{k: fmt(v) for k, v in row.items()}} for r in reports for row in r.rows]
    return out, rows


def cmd_scan(args):
    f = _interval_map(args)
    c = _scalar(args.c) if args.c is not None else None
    if c is None:
        if not f.critical_points:
            raise PreconditionError(f"{f.name} has no critical point in (0, 1)")
        c = f.critical_points[0].point
    eps = _scalars(args.eps)
    rep = dynamics.first_entry_scan(f, c, args.d, eps, samples=args.samples, max_steps=args.max_steps,
                                 include_returns=args.include_returns, workers=args.workers)
    cols = ["eps", "sample", "x", "s", "kind", "Df"] + [f"S{k}" for k in range(1, args.d + 1)] + [
        "all_positive", "identity", "image_bits", "max_bits"]
    return rep.to_dict(events=args.events), [{k: row.get(k) for k in cols} for row in rep.rows()]


def cmd_selftest(args):
    out = selftest.run(args.seed)
    return out, out["checks"]


COMMANDS = {
    "pade": cmd_pade,
    "schwarzian": cmd_schwarzian,
    "cf": cmd_cf,
    "pick-certify": cmd_pick_certify,
    "halfplane": cmd_halfplane,
    "crossratio": cmd_crossratio,
    "monotone": cmd_monotone,
    "koebe": cmd_koebe,
    "scan": cmd_scan,
    "selftest": cmd_selftest,
}


# ----------------------------------------------------------------------
# output

def _json_default(value):
    if is_exact(value):
        return fmt(value)
    if isinstance(value, dynamics.PowerProduct):
        return dynamics._show(value)
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _cell(value):
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True, default=_json_default)
    if isinstance(value, float) and not math.isfinite(value):
        return fmt(value)
    return value


def _csv(rows: Sequence[dict]) -> str:
    cols: list[str] = []
    for row in rows:
        cols.extend(k for k in row if k not in cols)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row.get(k)) for k in cols})
    return buf.getvalue()


def _pretty(value, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for k in sorted(value):
            v = value[k]
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.extend(_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_inline(v)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)) and not _flat(item):
                lines.append(f"{pad}-")
                lines.extend(_pretty(item, indent + 1))
            else:
                lines.append(f"{pad}- {_inline(item)}")
    else:
        lines.append(f"{pad}{_inline(value)}")
    return lines


def _flat(value) -> bool:
    return isinstance(value, list) and all(not isinstance(v, (dict, list)) for v in value)


def _inline(value) -> str:
    if isinstance(value, list):
        return "[" + ", ".join(_inline(v) for v in value) + "]"
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True, default=_json_default)
    if value is None:
        return "-"
    return str(value)


def render(payload: dict, rows: Sequence[dict], form: str) -> str:
    if form == "csv":
        return _csv(rows)
    if form == "pretty":
        return "\n".join(_pretty(payload)) + "\n"
    return json.dumps(payload, sort_keys=True, default=_json_default) + "\n"


# ----------------------------------------------------------------------
# parser

def _add_input(p: argparse.ArgumentParser, fns: Sequence[str]) -> None:
    g = p.add_argument_group("input")
    g.add_argument("--fn", choices=fns, help="builtin function")
    g.add_argument("--at", help="evaluation point (exact rational like 1/3, or decimal)")
    g.add_argument("--mobius", default="1,0,-1,1", help="a,b,c,d for (az+b)/(cz+d); default z/(1-z)")
    g.add_argument("--a", help="logistic parameter, or the shift of q")
    g.add_argument("--alpha", default="2", help="exponent of q")
    g.add_argument("--jet", help='inline JSON or @file: {"base": .., "coeffs": [..]}')
    g.add_argument("--map", help='inline JSON or @file: {"base": .., "p": [..], "q": [..]}')
    g.add_argument("--cf", help='inline JSON or @file: {"base": .., "A": [..], "mu": [..]}')


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", choices=[EXACT, FLOAT], default=EXACT)
    common.add_argument("--format", choices=["json", "csv", "pretty"], default="json")

    parser = argparse.ArgumentParser(prog="hischwarz", description="Higher-order Schwarzian toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    all_fns = ["exp", "mobius", "logistic", "q"]
    map_fns = ["mobius", "logistic"]

    for name, helptext in (("pade", "diagonal Padé approximant"),
                           ("schwarzian", "Schwarzians S_1..S_d at a point"),
                           ("cf", "continued-fraction coefficients")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        _add_input(p, all_fns)
        p.add_argument("--d", type=int, required=True)
        if name == "schwarzian":
            p.add_argument("--route", choices=["recursive", "det", "defect"], default="recursive")

    p = sub.add_parser("pick-certify", parents=[common], help="Pick-class certificate")
    _add_input(p, map_fns)
    p.add_argument("--method", choices=[pickclass.SCHWARZIAN_SIGNS, pickclass.DEGREE_REDUCTION, "both"],
                   default="both")

    p = sub.add_parser("halfplane", parents=[common], help="sample Im R on the upper half-plane")
    _add_input(p, map_fns)
    p.add_argument("--re", default="-5,5")
    p.add_argument("--im", default="0.001,1000")
    p.add_argument("--n", type=int, default=40, help="grid points per axis")
    p.add_argument("--linear", action="store_true", help="linear rather than log spacing in Im")
    p.add_argument("--tol", type=float, default=1e-12)

    p = sub.add_parser("crossratio", parents=[common], help="cross-ratio matrix spectrum")
    _add_input(p, map_fns)
    p.add_argument("--points", help="comma-separated sample points")

    p = sub.add_parser("monotone", parents=[common], help="randomized matrix-monotonicity test")
    p.add_argument("--func", choices=sorted(FUNCTIONS), required=True)
    p.add_argument("--U", default="0,4")
    p.add_argument("--n", type=int, default=2, help="matrix order")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--pairs", help="JSON list of [A, B] pairs replacing the random draws")

    p = sub.add_parser("koebe", parents=[common], help="derivative-ratio bound check")
    _add_input(p, all_fns)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--U", required=True, help="lo,hi (inf allowed); write --U=-1,1 for a negative end")
    p.add_argument("--grid", help="comma-separated points; default Chebyshev points")
    p.add_argument("--count", type=int, default=64, help="size of the default grid")
    p.add_argument("--constant", choices=[koebe.PROOF, koebe.STATEMENT], default=koebe.PROOF)
    p.add_argument("--inverse", action="store_true", help="use the inverse branch of an interval map")
    p.add_argument("--lap", default="0,0.5", help="lap of the inverse branch")
    p.add_argument("--skip-membership", action="store_true")

    p = sub.add_parser("scan", parents=[common], help="first-entry inverse-branch Schwarzian scan")
    _add_input(p, ["logistic", "q"])
    p.add_argument("--c", help="critical point (default: the first one found)")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--eps", default="1/16", help="comma-separated window half-widths")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--max-steps", type=int, default=50)
    p.add_argument("--include-returns", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--events", action="store_true", help="include per-event rows in JSON")

    p = sub.add_parser("selftest", parents=[common], help="run the invariant suite")
    p.add_argument("--seed", type=int, default=0)
    return parser


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        payload, rows = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 2
    except (PreconditionError, ZeroDivisionError) as exc:
        print(f"precondition failed: {type(exc).__name__}: {exc}", file=stderr)
        return 3
    except (ValueError, KeyError, TypeError) as exc:
        print(f"usage error: {type(exc).__name__}: {exc}", file=stderr)
        return 2
    payload = {"schema": SCHEMA, "command": args.command, **payload}
    stdout.write(render(payload, rows, args.format))
    if args.command == "selftest" and not payload["passed"]:
        return 1
    return 0


def main() -> None:
    sys.exit(run())
