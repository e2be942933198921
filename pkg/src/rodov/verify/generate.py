"""Generators of admissible test functions and of Psi tuned to equality preconditions."""
from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .. import piecewise as pw
from ..scaling import PsiParams, Psi_derivative_norm, base_norm, build_Psi
from ..splines import build_psi
from .checks import best_constant, comparison_orders, centered_orders
from .testfunc import PiecewiseFunction, TestFunction, TrigPoly

KINDS = ("trig", "scaled-psi", "shifted-psi")
SAFETY = 1.0 - 1e-12


def _rng(seed=None, rng=None) -> np.random.Generator:
    return rng if rng is not None else np.random.default_rng(seed)


def unit_lambda(lam: float) -> float:
    """Largest 1/n not exceeding lam (1 when lam >= 1): a period that tiles [0, 1]."""
    return 1.0 / math.ceil(1.0 / lam) if lam < 1.0 else 1.0


def random_trig(rng: np.random.Generator, degree: int | None = None, offset: float | None = None) -> TrigPoly:
    n = int(rng.integers(1, 5)) if degree is None else degree
    a = rng.normal(size=n + 1)
    b = rng.normal(size=n + 1)
    a[0] = rng.normal() * 0.3 if offset is None else offset
    return TrigPoly(a, b, 1.0)


def fit_to_bounds(x: TestFunction, p: PsiParams, ks: Iterable[int]) -> TestFunction:
    """Scale x by the largest factor keeping every certified ||x^(k)|| within ||Psi^(k)||."""
    factors = []
    for k in ks:
        m = x.sup_bound(k)
        if m > 0:
            factors.append(Psi_derivative_norm(p, k) / m)
    if not factors:
        return x
    return x.scaled(min(factors) * SAFETY)


def generate_admissible(
    p: PsiParams,
    case: str,
    kind: str = "trig",
    seed=None,
    *,
    rng: np.random.Generator | None = None,
    ks: Iterable[int] | None = None,
    factor: float | None = None,
    shift: float | None = None,
    offset: float = 0.0,
    degree: int | None = None,
    unit_period: bool = False,
) -> TestFunction:
    """A test function satisfying the norm hypothesis for ``p``.

    * ``scaled-psi``: factor * Psi (factor in [0.5, 1) unless given);
    * ``shifted-psi``: Psi(. + shift);
    * ``trig``: a random trigonometric polynomial of period 1 scaled to fit.

    With ``unit_period`` the spline kinds use the member with lambda' = 1/n <= lam
    so that x is 1-periodic; its derivative norms do not exceed those of Psi.
    ``offset`` is added afterwards (only sensible when k = 0 is not constrained).
    """
    rng = _rng(seed, rng)
    ks = comparison_orders(case, p.r) if ks is None else tuple(ks)
    if kind == "trig":
        x = fit_to_bounds(random_trig(rng, degree), p, ks)
    elif kind in ("scaled-psi", "shifted-psi"):
        q = p.with_lam(unit_lambda(p.lam)) if unit_period else p
        x = PiecewiseFunction(build_Psi(q))
        if kind == "scaled-psi":
            c = rng.uniform(0.5, 1.0) if factor is None else factor
            x = x.scaled(c)
        s = rng.uniform(0.0, x.period) if shift is None else shift
        if kind == "shifted-psi" or shift is not None:
            x = x.shifted(s)
    else:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    return x.plus(offset) if offset else x


def _centered_norms(x: TestFunction, r: int, a1: float, a2: float, case: str) -> list[tuple[int, float, float]]:
    out = []
    for k in centered_orders(case, r):
        B = x.sup_bound(k)
        if B > 0:
            out.append((k, B, base_norm(r - k, a1, a2)))
    if not out:
        raise ValueError("x has no nonzero constrained derivative")
    return out


def _tune(x, r, a1, a2, case, target, base, extra) -> PsiParams:
    """Smallest b for each sigma, then sigma from b(sigma) sigma^(r+extra) base = target.

    b(sigma) = max_k B_k / (sigma^(r-k) ||psi_{r-k}||), so the left side is
    max_k B_k sigma^(k+extra) base / ||psi_{r-k}||, increasing in sigma; its
    root is the smallest of the per-k roots.
    """
    norms = _centered_norms(x, r, a1, a2, case)
    sigma = min((target * nk / (B * base)) ** (1.0 / (k + extra)) for k, B, nk in norms)
    b = max(B / (sigma ** (r - k) * nk) for k, B, nk in norms)
    T = a1 + a2 + 2.0
    return PsiParams(r, a1, a2, b, 2.0 * T * sigma)


def tune_for_lower_bound(x: TestFunction, r: int, a1: float, a2: float, case: str) -> PsiParams:
    """Psi satisfying the derivative-only hypothesis with ||Psi|| = E0(x)."""
    _, E0 = best_constant(x)
    return _tune(x, r, a1, a2, case, E0, base_norm(r, a1, a2), 0.0)


def tune_for_nagy(x: TestFunction, r: int, a1: float, a2: float, case: str, pexp: float) -> PsiParams:
    """Psi satisfying the derivative-only hypothesis with ||Psi||_{Lp(0,lam)} = ||x - c(x)||_{Lp(0,1)}."""
    c, _ = best_constant(x)
    target = x.lp_norm(0, pexp, (0.0, 1.0), center=c)
    base = pw.lp_norm(build_psi(r, a1, a2), pexp)
    return _tune(x, r, a1, a2, case, target, base, 1.0 / pexp)
