"""Executable checks of the comparison inequality and its consequences.

Every check takes a test function x and a member Psi of the scaled family,
first certifies the required norm hypothesis and then evaluates the
inequality on a grid, reporting the worst slack (bound minus quantity).
"""
from __future__ import annotations

import numpy as np

from .. import piecewise as pw
from ..errors import (
    BadExponents,
    EqualityPreconditionFailed,
    HypothesisFailed,
    InvalidParams,
    KOutOfRange,
)
from ..matcher import CASE_ORDERS
from ..rearrange import pieces_from_piecewise
from ..scaling import PsiParams, Psi_derivative_norm, build_Psi
from .report import CheckReport
from .testfunc import TestFunction

TOL_VERIFY = 1e-8
TOL_EQUALITY = 1e-9
LEVEL_MARGIN = 1e-6
_EPS = float(np.finfo(float).eps)
N_TAU = 2048
N_SHIFTS = 64
N_BRANCH = 513
N_T = 512

READING_UNIT = (
    "x is 1-periodic; the norm hypothesis is certified against Psi with the given lambda, "
    "and the right-hand side uses the lambda = 1 member scaled by a power of lambda"
)
READING_LAMBDA = "norm hypothesis without the k = 0 condition, certified against Psi with the given lambda"


def comparison_orders(case: str, r: int) -> tuple[int, ...]:
    """Derivative orders constrained by the comparison hypothesis."""
    return tuple(sorted(CASE_ORDERS[case](r)))


def centered_orders(case: str, r: int) -> tuple[int, ...]:
    """Orders constrained in the Bohr-Favard-type setting (no k = 0 condition)."""
    return tuple(k for k in comparison_orders(case, r) if k != 0)


def ligun_orders(case: str, r: int) -> tuple[int, ...]:
    """Natural k with k < r - 2, or k < r - 1 in case a."""
    top = r - 2 if case == "a" else r - 3
    return tuple(range(1, top + 1))


def check_case(p: PsiParams, case: str):
    if case not in CASE_ORDERS:
        raise InvalidParams(f"unknown case {case!r}")
    if case == "a" and p.a1 != 0:
        raise InvalidParams("case a requires a1 = 0")
    if case == "b" and p.a2 != 0:
        raise InvalidParams("case b requires a2 = 0")
    if p.r < (2 if case == "a" else 3):
        raise InvalidParams(f"case {case} needs r >= {2 if case == 'a' else 3}")


def _unit_period(x: TestFunction):
    n = round(1.0 / x.period)
    if n < 1 or abs(n * x.period - 1.0) > 1e-12:
        raise ValueError(f"x must be 1-periodic, period is {x.period}")


def check_hypothesis(x: TestFunction, p: PsiParams, ks, case: str | None = None, rtol: float = TOL_VERIFY) -> CheckReport:
    """Certified ||x^(k)|| against ||Psi^(k)|| for each k; slack is relative."""
    ks = sorted(set(ks))
    if any(k < 0 or k > p.r for k in ks):
        raise KOutOfRange(f"orders {ks} not within [0, {p.r}]")
    hyp = {}
    worst, where = np.inf, None
    for k in ks:
        measured = x.sup_bound(k)
        bound = Psi_derivative_norm(p, k)
        slack = 1.0 - measured / bound
        hyp[k] = {"measured": measured, "bound": bound, "ok": bool(slack >= -rtol)}
        if slack < worst:
            worst, where = slack, k
    return CheckReport.from_slack(
        "hypothesis", worst, rtol, witness={"k": where}, hypothesis=hyp, case=case, notes="relative slack 1 - measured/bound"
    )


def _require(x, p, ks, case, name) -> dict:
    rep = check_hypothesis(x, p, ks, case)
    if not rep.passed:
        raise HypothesisFailed(f"{name}: norm hypothesis fails at k={rep.witness['k']}", rep)
    return rep.hypothesis


def check_comparison(
    x: TestFunction,
    p: PsiParams,
    case: str,
    n_tau: int = N_TAU,
    margin: float = LEVEL_MARGIN,
    tol: float | None = None,
    tol_rel: float = TOL_VERIFY,
) -> CheckReport:
    """|x'(tau)| <= |Psi'(xi)| whenever x(tau) = Psi(xi)."""
    check_case(p, case)
    hyp = _require(x, p, comparison_orders(case, p.r), case, "comparison")
    Psi = build_Psi(p)
    dPsi = pw.differentiate(Psi)
    norm = Psi_derivative_norm(p, 0)
    scale = Psi_derivative_norm(p, 1)
    tol = tol_rel * scale if tol is None else tol
    tau = np.arange(n_tau) * (x.period / n_tau)
    y = np.asarray(x(tau), dtype=float)
    dx = np.abs(np.asarray(x.deriv(1, tau), dtype=float))
    keep = np.abs(y) <= (1.0 - margin) * norm
    m = np.full(keep.sum(), np.inf)
    xi = np.full(keep.sum(), np.nan)
    for br in pw.monotone_branches(Psi):
        t = pw.invert_on_branch(Psi, br, y[keep])
        v = np.abs(pw.evaluate(dPsi, t))
        better = v < m
        m = np.where(better, v, m)
        xi = np.where(better, t, xi)
    slack = m - dx[keep]
    worst, witness = np.inf, {}
    if len(slack):
        i = int(np.argmin(slack))
        ti = np.flatnonzero(keep)[i]
        worst = float(slack[i])
        witness = {"tau": float(tau[ti]), "xi": float(xi[i]), "y": float(y[ti]), "x_prime": float(dx[ti]), "psi_prime": float(m[i])}
    # Near the extremes inversion is ill-conditioned; use |Psi'|^2 <= 2 ||Psi''|| (||Psi|| - |Psi|),
    # padded by the rounding of y.
    band = ~keep
    if band.any():
        gap = np.maximum(norm - np.abs(y[band]), 0.0) + 4 * _EPS * norm
        bound = np.sqrt(2.0 * Psi_derivative_norm(p, 2) * gap)
        bslack = bound - dx[band]
        j = int(np.argmin(bslack))
        if bslack[j] < worst:
            tj = np.flatnonzero(band)[j]
            worst = float(bslack[j])
            witness = {"tau": float(tau[tj]), "y": float(y[tj]), "x_prime": float(dx[tj]), "psi_prime_bound": float(bound[j])}
    return CheckReport.from_slack(
        "comparison",
        worst,
        tol,
        witness=witness,
        hypothesis=hyp,
        case=case,
        notes=f"levels within {margin:g}*||Psi|| of the extremes use the bound sqrt(2 ||Psi''|| (||Psi|| - |y|))",
        values={"scale": scale, "levels_checked": int(keep.sum())},
    )


def _sign_changes_rows(D: np.ndarray, tol: float) -> np.ndarray:
    out = np.zeros(D.shape[0], dtype=int)
    for i, row in enumerate(D):
        s = np.sign(row[np.abs(row) > tol])
        out[i] = int(np.count_nonzero(s[1:] != s[:-1])) if len(s) > 1 else 0
    return out


def check_sign_changes(
    x: TestFunction,
    p: PsiParams,
    case: str,
    n_shifts: int = N_SHIFTS,
    n_per_branch: int = N_BRANCH,
    tol: float | None = None,
    tol_rel: float = TOL_VERIFY,
) -> CheckReport:
    """Psi - x(. + s) changes sign at most once on each monotone branch of Psi."""
    check_case(p, case)
    hyp = _require(x, p, comparison_orders(case, p.r), case, "sign-changes")
    Psi = build_Psi(p)
    norm = Psi_derivative_norm(p, 0)
    tol = tol_rel * norm if tol is None else tol
    shifts = np.arange(n_shifts) * (x.period / n_shifts)
    worst_count, witness = 0, {}
    for br in pw.monotone_branches(Psi):
        t = np.linspace(br.lo, br.hi, n_per_branch)
        P = pw.evaluate(Psi, t)
        X = x.shift_grid(shifts, t)
        counts = _sign_changes_rows(P[None, :] - X, tol)
        j = int(np.argmax(counts))
        if counts[j] > worst_count or not witness:
            worst_count = int(counts[j])
            witness = {"branch": [br.lo, br.hi], "shift": float(shifts[j]), "changes": int(counts[j])}
    return CheckReport.from_slack(
        "sign-changes",
        1 - worst_count,
        0.0,
        witness=witness,
        hypothesis=hyp,
        case=case,
        notes=f"grid sign scan, dead zone {tol:.3g}",
        values={"max_changes": worst_count},
    )


def check_rearrangement_ineq(
    x: TestFunction, p: PsiParams, case: str, n_grid: int = N_T, tol_rel: float = TOL_VERIFY
) -> CheckReport:
    """int_0^t r(|x'|) <= lam^(r-1) int_0^t r(|Psi_1'|) on a grid of t in (0, 1]."""
    check_case(p, case)
    _unit_period(x)
    hyp = _require(x, p, comparison_orders(case, p.r), case, "rearrangement")
    P1 = build_Psi(p.with_lam(1.0))
    dP1 = pw.differentiate(P1)
    left = x.abs_derivative_pieces((0.0, 1.0))
    right = pieces_from_piecewise(dP1, (0.0, 1.0), absolute=True)
    t = np.arange(1, n_grid + 1) / n_grid
    lhs = left.cumulative(t)
    factor = p.lam ** (p.r - 1)
    rhs = factor * right.cumulative(t)
    scale = factor * pw.sup_norm(dP1)
    slack = rhs - lhs
    i = int(np.argmin(slack))
    return CheckReport.from_slack(
        "rearrangement",
        float(slack[i]),
        tol_rel * scale,
        witness={"t": float(t[i]), "lhs": float(lhs[i]), "rhs": float(rhs[i])},
        hypothesis=hyp,
        case=case,
        notes=READING_UNIT,
        values={"scale": scale, "lhs": float(lhs[-1]), "rhs": float(rhs[-1])},
    )


def check_ligun(x: TestFunction, p: PsiParams, case: str, pexp: float, k: int, tol_rel: float = TOL_VERIFY) -> CheckReport:
    """||x^(k)||_{Lp(0,1)} <= lam^(r-k) ||Psi_1^(k)||_{Lp(0,1)}."""
    check_case(p, case)
    legal = ligun_orders(case, p.r)
    if k not in legal:
        raise KOutOfRange(f"k={k} not in {legal} for case {case}, r={p.r}")
    if not pexp >= 1:
        raise BadExponents(f"p must be >= 1, got {pexp}")
    _unit_period(x)
    hyp = _require(x, p, comparison_orders(case, p.r), case, "ligun")
    P1 = build_Psi(p.with_lam(1.0))
    lhs = x.lp_norm(k, pexp, (0.0, 1.0))
    rhs = p.lam ** (p.r - k) * pw.lp_norm(pw.derivative(P1, k), pexp, (0.0, 1.0))
    return CheckReport.from_slack(
        "ligun",
        rhs - lhs,
        tol_rel * rhs,
        witness={"k": k, "p": pexp},
        hypothesis=hyp,
        case=case,
        notes=READING_UNIT,
        values={"lhs": lhs, "rhs": rhs, "scale": rhs},
    )


def best_constant(x: TestFunction) -> tuple[float, float]:
    """(c, E0): the best uniform constant and the distance to it."""
    lo, hi = x.extrema(0)
    return 0.5 * (hi + lo), 0.5 * (hi - lo)


def check_bohr_favard(x: TestFunction, p0: PsiParams, case: str, tol_rel: float = TOL_VERIFY) -> CheckReport:
    """E0(x) <= ||Psi_1|| under the derivative-only hypothesis with lambda = 1."""
    check_case(p0, case)
    if p0.lam != 1.0:
        raise InvalidParams(f"this check uses lambda = 1, got {p0.lam}")
    _unit_period(x)
    hyp = _require(x, p0, centered_orders(case, p0.r), case, "bohr-favard")
    c, E0 = best_constant(x)
    norm = Psi_derivative_norm(p0, 0)
    return CheckReport.from_slack(
        "bohr-favard",
        norm - E0,
        tol_rel * norm,
        witness={"c": c},
        hypothesis=hyp,
        case=case,
        notes=READING_LAMBDA,
        values={"lhs": E0, "rhs": norm, "scale": norm},
    )


def check_th5(
    x: TestFunction, p: PsiParams, case: str, pexp: float, tol_equality: float = TOL_EQUALITY, tol_rel: float = TOL_VERIFY
) -> CheckReport:
    """||x||_{Lp(0,1)} >= ||Psi||_{Lp(0,lam)} given E0(x) = ||Psi||."""
    check_case(p, case)
    if not pexp > 0:
        raise BadExponents(f"p must be positive, got {pexp}")
    _unit_period(x)
    hyp = _require(x, p, centered_orders(case, p.r), case, "lower-bound")
    c, E0 = best_constant(x)
    norm = Psi_derivative_norm(p, 0)
    if abs(E0 - norm) > tol_equality * norm:
        raise EqualityPreconditionFailed(f"E0(x) = {E0:.17g} differs from ||Psi|| = {norm:.17g}")
    Psi = build_Psi(p)
    lhs = x.lp_norm(0, pexp, (0.0, 1.0))
    rhs = pw.lp_norm(Psi, pexp, (0.0, p.lam))
    return CheckReport.from_slack(
        "lower-bound",
        lhs - rhs,
        tol_rel * rhs,
        witness={"p": pexp, "E0": E0},
        hypothesis=hyp,
        case=case,
        notes=READING_LAMBDA + "; left norm on (0,1), right norm on (0,lambda)",
        values={"lhs": lhs, "rhs": rhs, "scale": rhs},
    )


check_lp_lower_bound = check_th5


def check_nagy(
    x: TestFunction,
    p: PsiParams,
    case: str,
    pexp: float,
    qexp: float,
    tol_equality: float = TOL_EQUALITY,
    tol_rel: float = TOL_VERIFY,
) -> CheckReport:
    """||Psi||_{Lq(0,lam)} >= ||x - c(x)||_{Lq(0,1)} given equality of the Lp norms."""
    check_case(p, case)
    if not 0 < pexp < qexp:
        raise BadExponents(f"need 0 < p < q, got p={pexp}, q={qexp}")
    _unit_period(x)
    c, E0 = best_constant(x)
    if E0 == 0.0:
        return CheckReport.from_slack(
            "nagy", 0.0, 0.0, case=case, notes="x is constant: x - c(x) vanishes and the hypothesis cannot hold; vacuous",
            witness={"p": pexp, "q": qexp}, values={"lhs": 0.0, "rhs": 0.0, "scale": 0.0},
        )
    hyp = _require(x, p, centered_orders(case, p.r), case, "nagy")
    Psi = build_Psi(p)
    psi_p = pw.lp_norm(Psi, pexp, (0.0, p.lam))
    x_p = x.lp_norm(0, pexp, (0.0, 1.0), center=c)
    if abs(psi_p - x_p) > tol_equality * psi_p:
        raise EqualityPreconditionFailed(f"Lp norms differ: {psi_p:.17g} vs {x_p:.17g}")
    psi_q = pw.lp_norm(Psi, qexp, (0.0, p.lam))
    x_q = x.lp_norm(0, qexp, (0.0, 1.0), center=c)
    return CheckReport.from_slack(
        "nagy",
        psi_q - x_q,
        tol_rel * psi_q,
        witness={"p": pexp, "q": qexp, "c": c},
        hypothesis=hyp,
        case=case,
        notes=READING_LAMBDA + "; x centred at its best uniform constant",
        values={"lhs": x_q, "rhs": psi_q, "scale": psi_q},
    )
