"""Recover Psi parameters from prescribed derivative sup norms.

Three norm sets are supported:

* case a: s in {0, r-1, r}, solved with a1 = 0;
* case b: s in {0, r-2, r}, solved with a2 = 0;
* case c: s in {0, r-2, r-1, r}.

In every case b = ||x^(r)|| (sign fixed positive) and the remaining
parameters come from one-dimensional monotone root finding.  The solution is
the one found by the deterministic bracket procedure below; uniqueness is not
claimed.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy import optimize

from .errors import Infeasible, NoBracket, NonMonotone
from .scaling import PsiParams, Psi_derivative_norm
from .splines import psi_sup_norm

log = logging.getLogger(__name__)

CASE_ORDERS = {
    "a": lambda r: (0, r - 1, r),
    "b": lambda r: (0, r - 2, r),
    "c": lambda r: (0, r - 2, r - 1, r),
}

BASELINE_RTOL = 1e-12


@dataclass(frozen=True)
class NormTargets:
    r: int
    M: Mapping[int, float]

    def __post_init__(self):
        if any(not v > 0 for v in self.M.values()):
            raise ValueError("all targets must be positive")


def solve_increasing(
    fn: Callable[[float], float],
    target: float,
    *,
    start: float = 0.0,
    width: float = 1.0,
    max_doublings: int = 60,
    xtol: float = 1e-10,
    label: str = "objective",
) -> float:
    """Root of ``fn(a) = target`` for ``fn`` increasing on [start, inf).

    The bracket grows geometrically from [start, start + width] by doubling,
    then Brent's method refines it.  Every evaluation is recorded and any
    observed violation of monotonicity raises :class:`NonMonotone`.
    """
    seen: list[tuple[float, float]] = []

    def g(a: float) -> float:
        v = fn(a) - target
        seen.append((a, v))
        return v

    f_lo = g(start)
    if f_lo >= 0:
        return start
    lo, hi = start, start + width
    prev = f_lo
    for _ in range(max_doublings):
        f_hi = g(hi)
        if not f_hi > prev:
            raise NonMonotone(f"{label} not increasing near {hi:g} ({prev:.6g} -> {f_hi:.6g})")
        if f_hi >= 0:
            break
        lo, f_lo, prev = hi, f_hi, f_hi
        hi = start + 2.0 * (hi - start)
    else:
        raise NoBracket(f"{label}: no sign change up to {hi:g}")
    if f_hi == 0:
        return hi
    x = optimize.brentq(g, lo, hi, xtol=xtol * max(1.0, abs(hi)) * 1e-3, rtol=4 * np.finfo(float).eps)
    pts = sorted(seen)
    for (a0, v0), (a1, v1) in zip(pts, pts[1:]):
        if v1 < v0:
            raise NonMonotone(f"{label} not monotone on [{a0:g}, {a1:g}] ({v0:.6g} -> {v1:.6g})")
    return x


def _positive(**kw):
    for name, v in kw.items():
        if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
            raise ValueError(f"target {name} must be a positive finite number, got {v!r}")


def _at_least_baseline(need: float, base: float, what: str) -> bool:
    """True when ``need`` sits on the baseline (within rounding); raise if below."""
    if need < base * (1 - BASELINE_RTOL):
        raise Infeasible(f"{what}: required {need:.12g} is below the baseline {base:.12g}")
    return need <= base * (1 + BASELINE_RTOL)


def match_case_a(r: int, M0: float, Mr1: float, Mr: float) -> PsiParams:
    if r < 2:
        raise ValueError("case a needs r >= 2")
    _positive(M0=M0, Mr1=Mr1, Mr=Mr)
    sigma = Mr1 / Mr
    need = M0 * Mr ** (r - 1) / Mr1**r
    if _at_least_baseline(need, psi_sup_norm(r, 0.0, 0.0), "case a"):
        a2 = 0.0
    else:
        a2 = solve_increasing(lambda a: psi_sup_norm(r, 0.0, a), need, label=f"||psi_{r}(0, a2)||")
    return PsiParams(r, 0.0, a2, Mr, 2.0 * (a2 + 2.0) * sigma)


def match_case_b(r: int, M0: float, Mr2: float, Mr: float) -> PsiParams:
    if r < 3:
        raise ValueError("case b needs r >= 3")
    _positive(M0=M0, Mr2=Mr2, Mr=Mr)

    def sigma(a1):
        return math.sqrt(Mr2 / (Mr * psi_sup_norm(2, a1, 0.0)))

    def sup(a1):
        return Mr * sigma(a1) ** r * psi_sup_norm(r, a1, 0.0)

    if _at_least_baseline(M0, sup(0.0), "case b"):
        a1 = 0.0
    else:
        a1 = solve_increasing(sup, M0, label=f"||Psi_(a1, 0)|| (r={r})")
    return PsiParams(r, a1, 0.0, Mr, 2.0 * (a1 + 2.0) * sigma(a1))


def match_case_c(r: int, M0: float, Mr2: float, Mr1: float, Mr: float) -> PsiParams:
    if r < 3:
        raise ValueError("case c needs r >= 3")
    _positive(M0=M0, Mr2=Mr2, Mr1=Mr1, Mr=Mr)
    sigma = Mr1 / Mr
    need2 = Mr2 * Mr / Mr1**2
    need0 = M0 * Mr ** (r - 1) / Mr1**r

    def inner(a1):
        if _at_least_baseline(need2, psi_sup_norm(2, a1, 0.0), "case c (order r-2)"):
            return 0.0
        return solve_increasing(lambda a: psi_sup_norm(2, a1, a), need2, label="||psi_2(a1, a2)||")

    # ||psi_2(a1, a2)|| = (1 + a2) / 2 does not depend on a1, so the inner
    # solve is done once and re-checked at the final a1.
    a2 = inner(0.0)
    if _at_least_baseline(need0, psi_sup_norm(r, 0.0, a2), "case c (order 0)"):
        a1 = 0.0
    else:
        a1 = solve_increasing(lambda a: psi_sup_norm(r, a, a2), need0, label=f"||psi_{r}(a1, {a2:g})||")
    drift = abs(psi_sup_norm(2, a1, a2) - need2)
    if drift > 1e-10 * need2:
        raise NonMonotone(f"order r-2 condition drifted by {drift:.3g} at a1={a1:g}")
    return PsiParams(r, a1, a2, Mr, 2.0 * (a1 + a2 + 2.0) * sigma)


def match(case: str, r: int, targets: Mapping[int, float]) -> PsiParams:
    """Dispatch on case with targets keyed by derivative order."""
    orders = CASE_ORDERS[case](r)
    missing = [s for s in orders if s not in targets]
    if missing:
        raise ValueError(f"case {case} with r={r} needs targets for orders {orders}, missing {missing}")
    M = [targets[s] for s in orders]
    log.debug("match case %s r=%d targets=%s", case, r, dict(zip(orders, M)))
    if case == "a":
        return match_case_a(r, *M)
    if case == "b":
        return match_case_b(r, *M)
    return match_case_c(r, *M)


def residuals(p: PsiParams, targets: Mapping[int, float]) -> dict[int, float]:
    """Relative residual of each matched norm."""
    return {s: Psi_derivative_norm(p, s) / v - 1.0 for s, v in targets.items()}
