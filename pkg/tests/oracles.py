"""Independent reference implementations used only by the tests."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import sympy as sp

t = sp.Symbol("t")


@lru_cache(maxsize=None)
def exact_psi(r: int, a1, a2):
    """psi_r(a1, a2) as exact sympy pieces [(start, end, expr in global t)]."""
    a1, a2 = sp.nsimplify(a1), sp.nsimplify(a2)
    T = a1 + a2 + 2
    half = [(0, a1, sp.Integer(0)), (a1, a1 + 1, t - a1), (a1 + 1, a1 + a2 + 1, sp.Integer(1)), (a1 + a2 + 1, T, T - t)]
    pieces = [(s, e, f) for s, e, f in half if e > s]
    pieces += [(s + T, e + T, -f.subs(t, t - T)) for s, e, f in pieces]
    for _ in range(r - 1):
        out, acc = [], sp.Integer(0)
        for s, e, f in pieces:
            F = acc + sp.integrate(f, (t, s, t))
            out.append((s, e, sp.expand(F)))
            acc = F.subs(t, e)
        P = 2 * T
        mean = sum(sp.integrate(F, (t, s, e)) for s, e, F in out) / P
        pieces = [(s, e, sp.expand(F - mean)) for s, e, F in out]
    return tuple(pieces)


def exact_value(r, a1, a2, x):
    pieces = exact_psi(r, a1, a2)
    P = 2 * (sp.nsimplify(a1) + sp.nsimplify(a2) + 2)
    x = sp.nsimplify(x) % P
    for s, e, f in pieces:
        if s <= x < e:
            return sp.nsimplify(f.subs(t, x))
    raise AssertionError("point not covered")


def exact_sup(r, a1, a2):
    best = sp.Integer(0)
    for s, e, f in exact_psi(r, a1, a2):
        cands = [s, e] + [c for c in sp.solve(sp.diff(f, t), t) if c.is_real and s <= c <= e]
        for c in cands:
            best = sp.Max(best, sp.Abs(f.subs(t, c)))
    return sp.nsimplify(best)


def fourier_psi00(r: int, x, terms: int = 4000):
    """psi_r(0, 0; x) from the sine series of the triangle wave, integrated termwise."""
    x = np.asarray(x, dtype=float)
    k = np.arange(terms)
    w = (2 * k + 1) * math.pi / 2
    c = 8 / math.pi**2 * (-1.0) ** k / (2 * k + 1) ** 2 * w ** (1.0 - r)
    return np.sin(np.multiply.outer(x, w) - (r - 1) * math.pi / 2) @ c


def dense_sort_rearrangement(values: np.ndarray) -> np.ndarray:
    """Decreasing rearrangement of equally spaced samples."""
    return np.sort(values)[::-1]
