"""Randomised verification suites.

Trial i of a suite draws everything from ``default_rng([seed, i])``, so a
suite is reproducible and trials can be farmed out to worker processes in any
order; results are merged by trial index.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..scaling import PsiParams
from .checks import (
    N_T,
    N_TAU,
    TOL_VERIFY,
    best_constant,
    check_bohr_favard,
    check_comparison,
    check_hypothesis,
    check_ligun,
    check_nagy,
    check_rearrangement_ineq,
    check_sign_changes,
    check_th5,
    comparison_orders,
    centered_orders,
    ligun_orders,
)
from .generate import KINDS, generate_admissible, tune_for_lower_bound, tune_for_nagy
from .report import CheckReport
from .testfunc import TestFunction

log = logging.getLogger(__name__)

SUITES = ("hypothesis", "comparison", "sign-changes", "rearrangement", "ligun", "bohr-favard", "lower-bound", "nagy")
P_EXPONENTS = (1.0, 2.0, 4.0)
Q_EXPONENTS = (2.0, 4.0, 8.0)
KIND_WEIGHTS = (0.6, 0.2, 0.2)


def random_params(rng: np.random.Generator, case: str, r_max: int = 5, lam: float | None = None) -> PsiParams:
    r = int(rng.integers(2 if case == "a" else 3, r_max + 1))
    a1 = 0.0 if case == "a" else float(rng.uniform(0.0, 5.0))
    a2 = 0.0 if case == "b" else float(rng.uniform(0.0, 5.0))
    b = float(rng.uniform(0.5, 3.0) * rng.choice([-1.0, 1.0]))
    lam = float(math.exp(rng.uniform(math.log(0.25), math.log(4.0)))) if lam is None else lam
    return PsiParams(r, a1, a2, b, lam)


@dataclass(frozen=True)
class Options:
    """Grid sizes and tolerance shared by every check of a run."""

    tol: float = TOL_VERIFY
    n_tau: int = N_TAU
    n_grid: int = N_T
    p_exponents: tuple[float, ...] = P_EXPONENTS
    q_exponents: tuple[float, ...] = Q_EXPONENTS
    ks: tuple[int, ...] | None = None


DEFAULT = Options()


def _kind(rng, kinds=KINDS) -> str:
    if tuple(kinds) == KINDS:
        return str(rng.choice(KINDS, p=KIND_WEIGHTS))
    return str(kinds[int(rng.integers(len(kinds)))])


def trial(
    suite: str, seed: int, i: int, cases=("a", "b", "c"), r_max: int = 5, kinds=KINDS, opts: Options = DEFAULT
) -> list[CheckReport]:
    """All reports of trial ``i``."""
    rng = np.random.default_rng([seed, i])
    case = cases[i % len(cases)]
    kind = _kind(rng, kinds)
    if suite in ("hypothesis", "comparison", "sign-changes", "rearrangement", "ligun"):
        p = random_params(rng, case, r_max)
        unit = suite in ("rearrangement", "ligun")
        x = generate_admissible(p, case, kind, rng=rng, unit_period=unit)
        return run_on_function(suite, x, p, case, opts)
    if suite == "bohr-favard":
        p = random_params(rng, case, r_max, lam=1.0)
        x = generate_admissible(p, case, kind, rng=rng, ks=centered_orders(case, p.r), offset=float(rng.normal()))
        return run_on_function(suite, x, p, case, opts)
    if suite in ("lower-bound", "nagy"):
        p1 = random_params(rng, case, r_max, lam=1.0)
        x = generate_admissible(p1, case, kind, rng=rng, ks=centered_orders(case, p1.r), unit_period=True)
        return run_on_function(suite, x, p1, case, opts)
    raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")


def _trial_args(args):
    return trial(*args)


@dataclass
class SuiteResult:
    suite: str
    trials: int
    checks: int
    violations: int
    worst_relative_slack: float
    worst: dict | None
    failures: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "trials": self.trials,
            "checks": self.checks,
            "violations": self.violations,
            "passed": self.passed,
            "worst_relative_slack": self.worst_relative_slack if math.isfinite(self.worst_relative_slack) else None,
            "worst": self.worst,
            "failures": self.failures,
        }


def _relative(rep: CheckReport) -> float:
    return rep.worst_slack / rep.tol if rep.tol > 0 else (0.0 if rep.passed else -math.inf)


def summarize(suite: str, reports_per_trial: list[list[CheckReport]], keep_failures: int = 20) -> SuiteResult:
    flat = [(i, r) for i, reps in enumerate(reports_per_trial) for r in reps]
    bad = [(i, r) for i, r in flat if not r.passed]
    worst = min(flat, key=lambda ir: _relative(ir[1]), default=None)
    return SuiteResult(
        suite=suite,
        trials=len(reports_per_trial),
        checks=len(flat),
        violations=len(bad),
        worst_relative_slack=_relative(worst[1]) if worst else math.inf,
        worst={"trial": worst[0], **worst[1].to_dict()} if worst else None,
        failures=[{"trial": i, **r.to_dict()} for i, r in bad[:keep_failures]],
    )


def run_suite(
    suite: str,
    trials: int,
    seed: int = 0,
    cases=("a", "b", "c"),
    r_max: int = 5,
    workers: int = 1,
    kinds=KINDS,
    opts: Options = DEFAULT,
) -> SuiteResult:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")
    args = [(suite, seed, i, tuple(cases), r_max, tuple(kinds), opts) for i in range(trials)]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_trial_args, args, chunksize=max(1, trials // (4 * workers))))
    else:
        reports = [trial(*a) for a in args]
    res = summarize(suite, reports)
    log.info("suite %s: %d checks, %d violations", suite, res.checks, res.violations)
    return res


def run_on_function(suite: str, x: TestFunction, p: PsiParams, case: str, opts: Options = DEFAULT) -> list[CheckReport]:
    """Run one suite on a given test function.

    ``p`` is the comparison function for the first six suites.  For
    ``lower-bound`` and ``nagy`` only its shape (r, a1, a2) is used: b and
    lambda are tuned to x so that the equality precondition holds.
    """
    tol = opts.tol
    if suite == "hypothesis":
        return [check_hypothesis(x, p, comparison_orders(case, p.r), case, rtol=tol)]
    if suite == "comparison":
        return [check_comparison(x, p, case, n_tau=opts.n_tau, tol_rel=tol)]
    if suite == "sign-changes":
        return [check_sign_changes(x, p, case, tol_rel=tol)]
    if suite == "rearrangement":
        return [check_rearrangement_ineq(x, p, case, n_grid=opts.n_grid, tol_rel=tol)]
    if suite == "ligun":
        ks = ligun_orders(case, p.r) if opts.ks is None else opts.ks
        return [check_ligun(x, p, case, q, k, tol_rel=tol) for k in ks for q in opts.p_exponents]
    if suite == "bohr-favard":
        return [check_bohr_favard(x, p, case, tol_rel=tol)]
    if suite == "lower-bound":
        pt = tune_for_lower_bound(x, p.r, p.a1, p.a2, case)
        return [check_th5(x, pt, case, q, tol_rel=tol) for q in opts.p_exponents]
    if suite == "nagy":
        out = []
        for pe in opts.p_exponents:
            pt = tune_for_nagy(x, p.r, p.a1, p.a2, case, pe)
            out.extend(check_nagy(x, pt, case, pe, qe, tol_rel=tol) for qe in opts.q_exponents if qe > pe)
        return out
    raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")


__all__ = [
    "Options",
    "SUITES",
    "SuiteResult",
    "random_params",
    "run_on_function",
    "run_suite",
    "summarize",
    "trial",
    "best_constant",
]
