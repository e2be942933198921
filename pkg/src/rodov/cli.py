"""Command-line front end: ``rodov {spline,norms,match,rearrange,verify}``.

Exit codes: 0 success, 1 inequality violation, 2 bad configuration,
3 infeasible matching targets, 4 solver bracketing failure, 5 hypothesis or
equality precondition not met.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import piecewise as pw
from .errors import (
    EqualityPreconditionFailed,
    HypothesisFailed,
    Infeasible,
    NoBracket,
    NonMonotone,
    RodovError,
)
from .matcher import CASE_ORDERS, match, residuals
from .rearrange import rearrangement_of
from .scaling import PsiParams, build_Psi, norm_profile
from .splines import build_psi
from .verify.checks import N_T, N_TAU, TOL_VERIFY, comparison_orders
from .verify.generate import KINDS
from .verify.suites import P_EXPONENTS, Q_EXPONENTS, SUITES, Options, run_on_function, run_suite, summarize
from .verify.testfunc import PiecewiseFunction, TrigPoly

log = logging.getLogger("rodov")

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NOBRACKET, EXIT_HYPOTHESIS = range(6)
PARAM_KEYS = ("r", "a1", "a2", "b", "lambda")
MATCH_INFLATE = 1.0 + 1e-10
DEFAULT_SAMPLES = 1025


class ConfigError(ValueError):
    pass


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- configuration --------------------------------------------------------

def load_config(path: str) -> dict:
    """Parameter file: a flat object with keys r, a1, a2, b, lambda, or a ``match`` output."""
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    if isinstance(d, dict) and isinstance(d.get("params"), dict):
        d = d["params"]
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(d) - set(PARAM_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}; expected {PARAM_KEYS}")
    return d


def _resolve(args) -> dict:
    """Parameters from --config overridden by explicit flags."""
    vals = load_config(args.config) if getattr(args, "config", None) else {}
    for key, attr in zip(PARAM_KEYS, ("r", "a1", "a2", "b", "lam")):
        v = getattr(args, attr, None)
        if v is not None:
            vals[key] = v
    return vals


def _int_r(vals) -> int:
    if "r" not in vals:
        raise ConfigError("--r is required")
    r = vals["r"]
    if isinstance(r, float) and not r.is_integer():
        raise ConfigError(f"r must be an integer, got {r}")
    return int(r)


def psi_params(vals: dict, *, default_lam: float | None = None) -> PsiParams:
    r = _int_r(vals)
    a1 = float(vals.get("a1", 0.0))
    a2 = float(vals.get("a2", 0.0))
    lam = vals.get("lambda", default_lam if default_lam is not None else 2.0 * (a1 + a2 + 2.0))
    return PsiParams(r, a1, a2, float(vals.get("b", 1.0)), float(lam))


def is_scaled(vals: dict) -> bool:
    return "b" in vals or "lambda" in vals


def load_trig(path: str) -> TrigPoly:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read test function {path}: {e}") from e
    if not isinstance(d, dict) or not ({"cos", "sin"} & set(d)):
        raise ConfigError('test function must be {"period": 1, "cos": [...], "sin": [...]}')
    try:
        x = TrigPoly.from_dict(d)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad test function: {e}") from e
    if not np.all(np.isfinite(np.concatenate([x.a, x.b]))):
        raise ConfigError("test function coefficients must be finite")
    return x


# -- commands -------------------------------------------------------------

def cmd_spline(args) -> int:
    vals = _resolve(args)
    n = args.samples
    if n < 1:
        raise ConfigError("need at least one sample")
    if is_scaled(vals):
        f = build_Psi(psi_params(vals))
    else:
        f = build_psi(_int_r(vals), float(vals.get("a1", 0.0)), float(vals.get("a2", 0.0)))
    t = np.linspace(0.0, f.period, n) if n > 1 else np.zeros(1)
    y = pw.evaluate(f, t)
    if args.format == "json":
        emit(dump_json({"t": t.tolist(), "value": y.tolist(), "spline": f.to_dict()}), args.out)
        return EXIT_OK
    emit(write_csv(["t", "value"], zip(t, y)), args.out)
    if args.out:
        Path(args.out).with_suffix(".spline.json").write_text(dump_json(f.to_dict()))
    return EXIT_OK


def cmd_norms(args) -> int:
    p = psi_params(_resolve(args))
    rows = norm_profile(p)
    if args.format == "json":
        emit(dump_json({"params": p.to_dict(), "norms": [{"k": k, "norm": v} for k, v in rows]}), args.out)
    else:
        emit(write_csv(["k", "norm"], rows), args.out)
    return EXIT_OK


def cmd_match(args) -> int:
    r = args.r
    if r is None:
        raise ConfigError("--r is required")
    orders = CASE_ORDERS[args.case](r)
    if len(args.targets) != len(orders):
        names = ", ".join(f"M{k}" for k in orders)
        raise ConfigError(f"case {args.case} with r={r} needs {len(orders)} targets ({names})")
    targets = dict(zip(orders, args.targets))
    p = match(args.case, r, targets)
    res = residuals(p, targets)
    if args.format == "csv":
        rows = [(k, v) for k, v in p.to_dict().items()] + [(f"residual_{k}", v) for k, v in res.items()]
        emit(write_csv(["key", "value"], rows), args.out)
    else:
        emit(dump_json({"params": p.to_dict(), "residuals": {str(k): v for k, v in res.items()}}), args.out)
    return EXIT_OK


def cmd_rearrange(args) -> int:
    n = args.samples
    if n < 2:
        raise ConfigError("need at least two samples")
    if args.input:
        x = load_trig(args.input)
    else:
        vals = _resolve(args)
        if is_scaled(vals):
            x = PiecewiseFunction(build_Psi(psi_params(vals)))
        else:
            x = PiecewiseFunction(build_psi(_int_r(vals), float(vals.get("a1", 0.0)), float(vals.get("a2", 0.0))))
    src = x.abs_derivative_pieces((0.0, x.period))
    rea = rearrangement_of(src, n=2, normalize=True)
    u = np.linspace(0.0, 1.0, n)
    r = rea(u)
    cum = src.cumulative(u * src.length) / src.length
    cum[0] = 0.0
    if args.format == "json":
        emit(dump_json({"u": u.tolist(), "r": r.tolist(), "cumulative": cum.tolist()}), args.out)
    else:
        emit(write_csv(["u", "r", "cumulative"], zip(u, r, cum)), args.out)
    return EXIT_OK


def _infer_case(p: PsiParams) -> str:
    if p.a1 == 0:
        return "a"
    return "b" if p.a2 == 0 else "c"


def _single_function(args, vals, case):
    """(x, Psi, case) for a user-supplied x or x = Psi."""
    if args.x == "psi":
        p = psi_params(vals, default_lam=1.0)
        return PiecewiseFunction(build_Psi(p)), p, case or _infer_case(p)
    x = load_trig(args.input)
    r = _int_r(vals)
    if "b" in vals and "lambda" in vals:
        p = psi_params(vals)
        return x, p, case or _infer_case(p)
    case = case or "a"
    targets = {k: x.sup_bound(k) * MATCH_INFLATE for k in comparison_orders(case, r)}
    p = match(case, r, targets)
    log.info("matched %s to the norms of x", p)
    return x, p, case


def _options(args) -> Options:
    if args.tol is not None and not args.tol > 0:
        raise ConfigError("--tol must be positive")
    for name in ("grid", "levels"):
        v = getattr(args, name)
        if v is not None and v < 2:
            raise ConfigError(f"--{name} must be at least 2")
    return Options(
        tol=TOL_VERIFY if args.tol is None else args.tol,
        n_tau=N_TAU if args.grid is None else args.grid,
        n_grid=N_T if args.levels is None else args.levels,
        p_exponents=tuple(args.p) if args.p else P_EXPONENTS,
        q_exponents=tuple(args.q) if args.q else Q_EXPONENTS,
        ks=tuple(args.k) if args.k else None,
    )


def cmd_verify(args) -> int:
    names = SUITES if args.suite == "all" else tuple(s.strip() for s in args.suite.split(","))
    bad = [s for s in names if s not in SUITES]
    if bad:
        raise ConfigError(f"unknown suite(s) {bad}; expected 'all' or any of {', '.join(SUITES)}")
    if args.trials < 1:
        raise ConfigError("--trials must be positive")
    opts = _options(args)
    vals = _resolve(args)
    config = {
        "suite": list(names),
        "case": args.case,
        "x": args.x,
        "input": args.input,
        "seed": args.seed,
        "trials": args.trials,
        "tol": opts.tol,
        "grid": opts.n_tau,
        "levels": opts.n_grid,
        "p": list(opts.p_exponents),
        "q": list(opts.q_exponents),
        "k": None if opts.ks is None else list(opts.ks),
    }
    results = []
    if args.input or args.x == "psi":
        x, p, case = _single_function(args, vals, args.case)
        config.update(params=p.to_dict(), case=case)
        for s in names:
            try:
                reps = run_on_function(s, x, p, case, opts)
            except (ValueError, RodovError) as e:
                if isinstance(e, (HypothesisFailed, EqualityPreconditionFailed)) or len(names) == 1:
                    raise
                results.append({"suite": s, "skipped": str(e)})
                continue
            entry = summarize(s, [reps]).to_dict()
            entry["checks_detail"] = [rep.to_dict() for rep in reps]
            results.append(entry)
        mode = "function"
    else:
        cases = (args.case,) if args.case else ("a", "b", "c")
        kinds = KINDS if args.x is None else (args.x,)
        for s in names:
            results.append(run_suite(s, args.trials, args.seed, cases, args.r_max, args.workers, kinds, opts).to_dict())
        mode = "trials"
    ok = all(res.get("passed", True) for res in results)
    report = {"command": "verify", "mode": mode, "passed": ok, "config": config, "results": results}
    emit(dump_json(report), args.out)
    return EXIT_OK if ok else EXIT_VIOLATION


# -- parser ---------------------------------------------------------------

def _params(sp, *, scaled=True):
    sp.add_argument("--config", help="JSON file with keys r, a1, a2, b, lambda (flags override)")
    sp.add_argument("--r", type=int)
    sp.add_argument("--a1", type=float)
    sp.add_argument("--a2", type=float)
    if scaled:
        sp.add_argument("--b", type=float)
        sp.add_argument("--lambda", dest="lam", type=float)


def _io(sp, default_format="csv"):
    sp.add_argument("--out", help="output file (default stdout)")
    sp.add_argument("--format", choices=("csv", "json"), default=default_format)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rodov", description="Comparison splines, norm matching and inequality checks.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spline", help="sample psi_r, or Psi when --b or --lambda is given, over one period")
    _params(sp)
    sp.add_argument("-n", "--samples", type=int, default=DEFAULT_SAMPLES)
    _io(sp)
    sp.set_defaults(func=cmd_spline)

    sp = sub.add_parser("norms", help="sup norms of Psi^(k), k = 0..r")
    _params(sp)
    _io(sp)
    sp.set_defaults(func=cmd_norms)

    sp = sub.add_parser("match", help="find Psi with prescribed derivative norms")
    sp.add_argument("--case", choices=("a", "b", "c"), required=True)
    sp.add_argument("--r", type=int)
    sp.add_argument(
        "--targets", type=float, nargs="+", required=True,
        help="case a: M0 M(r-1) M(r); case b: M0 M(r-2) M(r); case c: M0 M(r-2) M(r-1) M(r)",
    )
    _io(sp, "json")
    sp.set_defaults(func=cmd_match)

    sp = sub.add_parser("rearrange", help="decreasing rearrangement of |x'| on one period, u in [0, 1]")
    _params(sp)
    sp.add_argument("--input", help='trigonometric test function {"period": 1, "cos": [...], "sin": [...]}')
    sp.add_argument("-n", "--samples", type=int, default=DEFAULT_SAMPLES)
    _io(sp)
    sp.set_defaults(func=cmd_rearrange)

    sp = sub.add_parser("verify", help="run verification suites")
    sp.add_argument("--suite", default="all", help=f"'all' or a comma list of: {', '.join(SUITES)}")
    sp.add_argument("--case", choices=("a", "b", "c"))
    sp.add_argument("--x", choices=("psi",) + KINDS, help="psi: check x = Psi itself; otherwise restrict generated kinds")
    sp.add_argument("--input", help="trigonometric test function JSON")
    _params(sp)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--r-max", type=int, default=5)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--p", type=float, nargs="+")
    sp.add_argument("--q", type=float, nargs="+")
    sp.add_argument("--k", type=int, nargs="+")
    sp.add_argument("--grid", type=int, help=f"shift grid of the comparison check (default {N_TAU})")
    sp.add_argument("--levels", type=int, help=f"t grid of the rearrangement check (default {N_T})")
    sp.add_argument("--tol", type=float, help=f"relative tolerance (default {TOL_VERIFY:g})")
    _io(sp, "json")
    sp.set_defaults(func=cmd_verify)
    return ap


def _setup_logging():
    level = logging.getLevelName(os.environ.get("RODOV_LOG", "WARNING").upper())
    for h in [h for h in log.handlers if getattr(h, "_rodov", False)]:
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    handler._rodov = True
    log.addHandler(handler)
    log.setLevel(level if isinstance(level, int) else logging.WARNING)


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Infeasible as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NoBracket, NonMonotone) as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_NOBRACKET
    except (HypothesisFailed, EqualityPreconditionFailed) as e:
        print(f"hypothesis failed: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (ConfigError, ValueError, KeyError, TypeError, OverflowError) as e:
        print(f"bad configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except RodovError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
