"""Calculus of periodic piecewise polynomials.

A :class:`PiecewisePoly` stores one coefficient row per segment, lowest power
first, in the local variable ``t - breakpoints[i]``.  All operations are pure
and return new objects.
"""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np
from scipy import integrate, optimize

from .errors import IdenticallyZero, LevelOutOfRange, NonZeroMeanInput

DEGREE_CAP = 64


@dataclass(frozen=True)
class Tolerances:
    """Relative tolerances; each is multiplied by a scale at the point of use."""

    root: float = 1e-12
    mean: float = 1e-12
    quad: float = 1e-10
    continuity: float = 1e-11


TOL = Tolerances()


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo


class Branch(NamedTuple):
    """A maximal monotone run ``[lo, hi]``; may extend past one period."""

    lo: float
    hi: float
    increasing: bool

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True, eq=False)
class PiecewisePoly:
    period: float
    breakpoints: np.ndarray
    coeffs: np.ndarray
    continuous: bool = False
    _ends: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        bp = np.array(self.breakpoints, dtype=float).reshape(-1)
        rows = [np.atleast_1d(np.asarray(c, dtype=float)) for c in self.coeffs]
        if len(rows) != len(bp):
            raise ValueError("need one coefficient vector per breakpoint")
        width = max(len(r) for r in rows)
        if width - 1 > DEGREE_CAP:
            raise ValueError(f"degree above cap {DEGREE_CAP}")
        C = np.zeros((len(rows), width))
        for i, r in enumerate(rows):
            C[i, : len(r)] = r
        period = float(self.period)
        if not period > 0:
            raise ValueError("period must be positive")
        if bp[0] != 0.0 or np.any(np.diff(bp) <= 0) or bp[-1] >= period:
            raise ValueError("breakpoints must start at 0, increase strictly and stay below the period")
        bp.setflags(write=False)
        C.setflags(write=False)
        ends = np.append(bp[1:], period)
        ends.setflags(write=False)
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "coeffs", C)
        object.__setattr__(self, "_ends", ends)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def n_segments(self) -> int:
        return len(self.breakpoints)

    @property
    def lengths(self) -> np.ndarray:
        return self._ends - self.breakpoints

    def __call__(self, t):
        return evaluate(self, t)

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "breakpoints": self.breakpoints.tolist(),
            "coefficients": [row.tolist() for row in self.coeffs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewisePoly":
        return cls(d["period"], d["breakpoints"], d["coefficients"])


def constant(value: float, period: float = 1.0) -> PiecewisePoly:
    return PiecewisePoly(period, [0.0], [[value]], continuous=True)


# -- scalar polynomial helpers (lowest power first) -------------------------

def _horner(c, s):
    v = c[-1] * np.ones_like(s) if isinstance(s, np.ndarray) else c[-1]
    for a in c[-2::-1]:
        v = v * s + a
    return v


def _pder(c):
    if len(c) <= 1:
        return np.zeros(1)
    return c[1:] * np.arange(1, len(c))


def _pint(c):
    return np.concatenate(([0.0], c / np.arange(1, len(c) + 1)))


def _taylor_shift(c, delta):
    """Coefficients of ``p(u + delta)`` in ``u``."""
    n = len(c)
    out = np.zeros(n)
    for j in range(n):
        for k in range(j, n):
            out[j] += math.comb(k, j) * c[k] * delta ** (k - j)
    return out


def _trim(c, h):
    """Drop leading coefficients that are negligible on an interval of length h."""
    c = np.asarray(c, dtype=float)
    h = max(h, 1.0)
    mags = np.abs(c) * h ** np.arange(len(c))
    top = mags.max() if len(mags) else 0.0
    n = len(c)
    while n > 1 and mags[n - 1] <= 1e-14 * top:
        n -= 1
    return c[:n]


def _bound(c, h):
    return float(np.sum(np.abs(c) * h ** np.arange(len(c))))


def _poly_roots(c, lo, hi, atol, touch=True):
    """Real roots of a polynomial on [lo, hi] by recursive isolation.

    Critical points (roots of the derivative chain) split the interval into
    monotone pieces; each piece holds at most one crossing.  With ``touch``,
    critical points where |p| <= atol are reported as touching roots.
    """
    c = _trim(c, hi - lo)
    n = len(c) - 1
    if n <= 0:
        return []
    if n == 1:
        x = -c[0] / c[1]
        return [min(max(x, lo), hi)] if lo - 1e-15 * (1 + abs(lo)) <= x <= hi + 1e-15 * (1 + abs(hi)) else []
    crit = _poly_roots(_pder(c), lo, hi, 0.0, touch=False)
    knots = [lo] + [x for x in crit if lo < x < hi] + [hi]
    vals = [float(_horner(c, x)) for x in knots]
    out = []
    xtol = 1e-15 * max(1.0, abs(lo), abs(hi))
    for i, (x, v) in enumerate(zip(knots, vals)):
        at_end = i == 0 or i == len(knots) - 1
        if abs(v) <= atol and (at_end or touch):
            out.append(x)
    for (x0, v0), (x1, v1) in zip(zip(knots, vals), zip(knots[1:], vals[1:])):
        if abs(v0) > atol and abs(v1) > atol and (v0 < 0) != (v1 < 0):
            out.append(optimize.brentq(lambda s: _horner(c, s), x0, x1, xtol=xtol, rtol=4 * np.finfo(float).eps))
    out.sort()
    merged = []
    for x in out:
        if not merged or x - merged[-1] > 1e-12 * max(1.0, abs(x)):
            merged.append(x)
    return merged


def _is_zero(c, h, atol):
    return _bound(c, h) <= atol


# -- iteration over segments intersected with a window ----------------------

def _pieces(f: PiecewisePoly, lo: float, hi: float) -> Iterator[tuple[int, float, float, float]]:
    """Yield (segment, local start, local end, global origin) covering [lo, hi]."""
    P = f.period
    k0 = math.floor(lo / P)
    k1 = math.ceil(hi / P)
    sliver = 1e-14 * P
    for k in range(k0, k1 + 1):
        base = k * P
        for i in range(f.n_segments):
            a = base + f.breakpoints[i]
            e = base + f._ends[i]
            s0 = max(a, lo)
            s1 = min(e, hi)
            if s1 - s0 > sliver:
                yield i, s0 - a, s1 - a, a


def _window(f, window) -> tuple[float, float]:
    if window is None:
        return 0.0, f.period
    if isinstance(window, Interval):
        return window.lo, window.hi
    lo, hi = window
    if not lo < hi:
        raise ValueError(f"empty window [{lo}, {hi}]")
    return float(lo), float(hi)


def _scale(f: PiecewisePoly) -> float:
    """Cheap upper bound on sup |f|."""
    return max(_bound(f.coeffs[i], f.lengths[i]) for i in range(f.n_segments))


# -- operations --------------------------------------------------------------

def evaluate(f: PiecewisePoly, t):
    """Value at t (mod period); the right segment wins at a breakpoint."""
    scalar = np.ndim(t) == 0
    s = np.mod(np.asarray(t, dtype=float), f.period)
    s = np.where(s >= f.period, 0.0, s)
    idx = np.searchsorted(f.breakpoints, s, side="right") - 1
    local = s - f.breakpoints[idx]
    C = f.coeffs
    v = C[idx, -1]
    for k in range(C.shape[1] - 2, -1, -1):
        v = v * local + C[idx, k]
    return float(v) if scalar else v


def eval_left(f: PiecewisePoly, t):
    """Left limit at t; differs from :func:`eval` only at jump breakpoints."""
    s = np.mod(np.asarray(t, dtype=float), f.period)
    s = np.where(s <= 0.0, f.period, s)
    idx = np.searchsorted(f.breakpoints, s, side="left") - 1
    local = s - f.breakpoints[idx]
    C = f.coeffs
    v = C[idx, -1]
    for k in range(C.shape[1] - 2, -1, -1):
        v = v * local + C[idx, k]
    return float(v) if np.ndim(t) == 0 else v


def differentiate(f: PiecewisePoly) -> PiecewisePoly:
    return PiecewisePoly(f.period, f.breakpoints, [_pder(c) for c in f.coeffs])


def derivative(f: PiecewisePoly, k: int) -> PiecewisePoly:
    for _ in range(k):
        f = differentiate(f)
    return f


def _segment_integrals(f: PiecewisePoly) -> np.ndarray:
    C = f.coeffs
    h = f.lengths
    powers = np.arange(1, C.shape[1] + 1)
    return np.sum(C / powers * h[:, None] ** powers, axis=1)


def mean(f: PiecewisePoly) -> float:
    return float(np.sum(_segment_integrals(f)) / f.period)


def antiderivative_zero_mean(f: PiecewisePoly, tol: Tolerances = TOL) -> PiecewisePoly:
    """The periodic antiderivative of ``f`` normalised to zero mean."""
    ints = _segment_integrals(f)
    total = float(np.sum(ints))
    limit = tol.mean * f.period * max(_scale(f), 1e-300)
    if abs(total) / f.period > limit:
        raise NonZeroMeanInput(f"mean {total / f.period:.3e} exceeds {limit:.3e}")
    starts = np.concatenate(([0.0], np.cumsum(ints)[:-1]))
    rows = []
    for i, c in enumerate(f.coeffs):
        F = _pint(c)
        F[0] = starts[i]
        rows.append(F)
    F = PiecewisePoly(f.period, f.breakpoints, rows)
    m = mean(F)
    rows = [np.concatenate(([r[0] - m], r[1:])) for r in F.coeffs]
    return PiecewisePoly(f.period, f.breakpoints, rows, continuous=True)


def rescale(f: PiecewisePoly, amplitude: float, sigma: float) -> PiecewisePoly:
    """``t -> amplitude * f(t / sigma)``, period ``sigma * period``."""
    powers = sigma ** -np.arange(f.coeffs.shape[1])
    return PiecewisePoly(
        sigma * f.period, sigma * f.breakpoints, amplitude * f.coeffs * powers, continuous=f.continuous
    )


def add_constant(f: PiecewisePoly, c: float) -> PiecewisePoly:
    C = np.array(f.coeffs)
    C[:, 0] += c
    return PiecewisePoly(f.period, f.breakpoints, C, continuous=f.continuous)


def shift(f: PiecewisePoly, delta: float) -> PiecewisePoly:
    """``t -> f(t + delta)``."""
    P = f.period
    delta = delta % P
    if delta == 0.0:
        return f
    # each old breakpoint keeps its own segment; only t = 0 needs a lookup
    starts = list(np.mod(f.breakpoints - delta, P))
    src = [(i, 0.0) for i in range(f.n_segments)]
    i0 = int(np.searchsorted(f.breakpoints, delta, side="right") - 1)
    starts.append(0.0)
    src.append((i0, delta - f.breakpoints[i0]))
    starts = [0.0 if s >= P * (1 - 1e-14) else s for s in starts]
    order = np.argsort(starts, kind="stable")
    kept_s, rows = [], []
    for j in order:
        s = starts[j]
        if kept_s and abs(s - kept_s[-1]) <= 1e-14 * P:
            if src[j][1] == 0.0:  # prefer the exact breakpoint source
                rows[-1] = f.coeffs[src[j][0]]
            continue
        i, off = src[j]
        kept_s.append(s)
        rows.append(_taylor_shift(f.coeffs[i], off) if off else f.coeffs[i])
    return PiecewisePoly(P, kept_s, rows, continuous=f.continuous)


def extremum(f: PiecewisePoly) -> tuple[float, float]:
    """(sup |f|, a point attaining it)."""
    best, where = -1.0, 0.0
    for i in range(f.n_segments):
        c = f.coeffs[i]
        h = f.lengths[i]
        cands = [0.0, h] + _poly_roots(_pder(c), 0.0, h, 0.0, touch=False)
        for s in cands:
            v = abs(float(_horner(c, s)))
            if v > best:
                best, where = v, f.breakpoints[i] + s
    return best, where


def sup_norm(f: PiecewisePoly) -> float:
    return extremum(f)[0]


def value_range(f: PiecewisePoly) -> tuple[float, float]:
    """(min f, max f) over one period."""
    lo, hi = math.inf, -math.inf
    for i in range(f.n_segments):
        c = f.coeffs[i]
        h = f.lengths[i]
        cands = [0.0, h] + _poly_roots(_pder(c), 0.0, h, 0.0, touch=False)
        vals = [float(_horner(c, s)) for s in cands]
        lo, hi = min(lo, *vals), max(hi, *vals)
    return lo, hi


def _root_atol(f, tol):
    return tol.root * (1.0 + _scale(f))


def roots(f: PiecewisePoly, window=None, level: float = 0.0, with_intervals: bool = False, tol: Tolerances = TOL):
    """Sorted points in the window where ``f`` crosses or touches ``level``.

    Runs where ``f == level`` identically contribute their endpoints; with
    ``with_intervals`` those runs are also returned as :class:`Interval`.
    """
    lo, hi = _window(f, window)
    atol = _root_atol(f, tol)
    pts = []
    zero_runs: list[list[float]] = []
    covered = 0.0
    for i, s0, s1, origin in _pieces(f, lo, hi):
        c = np.array(f.coeffs[i])
        c[0] -= level
        if _is_zero(c, s1 - s0, atol):
            a, b = origin + s0, origin + s1
            if zero_runs and abs(zero_runs[-1][1] - a) <= 1e-12 * max(1.0, abs(a)):
                zero_runs[-1][1] = b
            else:
                zero_runs.append([a, b])
            covered += s1 - s0
            continue
        shifted = _taylor_shift(c, s0)
        pts.extend(origin + s0 + x for x in _poly_roots(shifted, 0.0, s1 - s0, atol))
    # the window is half-open: an isolated root at hi belongs to the next window
    pts = [x for x in pts if hi - x > 1e-12 * max(1.0, abs(hi))]
    if zero_runs and covered >= (hi - lo) * (1 - 1e-12):
        raise IdenticallyZero(f"function equals {level} on the whole window")
    for a, b in zero_runs:
        pts.extend([a, b])
    pts.sort()
    merged = []
    for x in pts:
        if not merged or x - merged[-1] > 1e-11 * max(1.0, abs(x)):
            merged.append(x)
    out = np.array(merged)
    if with_intervals:
        return out, [Interval(a, b) for a, b in zero_runs]
    return out


def _cut_signs(f, lo, hi, tol):
    """Signs of f on the open pieces between consecutive roots in [lo, hi]."""
    try:
        pts = roots(f, (lo, hi), tol=tol)
    except IdenticallyZero:
        return []
    cuts = np.unique(np.concatenate(([lo], pts[(pts > lo) & (pts < hi)], [hi])))
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    vals = evaluate(f, mids)
    atol = _root_atol(f, tol)
    return [int(np.sign(v)) if abs(v) > atol else 0 for v in vals]


def sign_changes(f: PiecewisePoly, window=None, tol: Tolerances = TOL) -> int:
    lo, hi = _window(f, window)
    signs = [s for s in _cut_signs(f, lo, hi, tol) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def monotone_branches(f: PiecewisePoly, tol: Tolerances = TOL) -> list[Branch]:
    """Partition one period into maximal monotone runs.

    Flat runs (derivative identically zero) are attached to the preceding
    non-flat run, cyclically.
    """
    d = differentiate(f)
    atol = _root_atol(d, tol)
    pieces = []  # (start, end, sign)
    for i in range(f.n_segments):
        c = d.coeffs[i]
        h = f.lengths[i]
        a = f.breakpoints[i]
        if _is_zero(c, h, atol):
            pieces.append((a, a + h, 0))
            continue
        cuts = [0.0] + [x for x in _poly_roots(c, 0.0, h, atol, touch=False) if 0.0 < x < h] + [h]
        for s0, s1 in zip(cuts, cuts[1:]):
            v = float(_horner(c, 0.5 * (s0 + s1)))
            pieces.append((a + s0, a + s1, int(np.sign(v)) if abs(v) > atol else 0))
    signs = [p[2] for p in pieces]
    if not any(signs):
        return [Branch(0.0, f.period, True)]
    n = len(pieces)
    first = next(j for j in range(n) if signs[j] != 0)
    last = first
    resolved = list(signs)
    for j in range(first, first + n):
        k = j % n
        if resolved[k] == 0:
            resolved[k] = resolved[last]
        else:
            last = k
    starts = [j for j in range(n) if resolved[j] != resolved[j - 1]]
    if not starts:
        return [Branch(0.0, f.period, resolved[0] > 0)]
    P = f.period
    out = []
    for m, j in enumerate(starts):
        j_next = starts[(m + 1) % len(starts)]
        lo = pieces[j][0]
        hi = pieces[j_next][0]
        if hi <= lo:
            hi += P
        out.append(Branch(float(lo), float(hi), resolved[j] > 0))
    return out


def invert_on_branch(f: PiecewisePoly, branch, y, tol: Tolerances = TOL):
    """Solve ``f(t) = y`` for t on a monotone branch (vectorised in y).

    Safeguarded Newton: every iterate keeps a sign bracket and falls back to
    bisection when the Newton step leaves it.
    """
    lo, hi = (branch.lo, branch.hi) if hasattr(branch, "lo") else branch
    fa, fb = float(evaluate(f, lo)), float(eval_left(f, hi))
    scalar = np.ndim(y) == 0
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    atol = _root_atol(f, tol)
    ymin, ymax = min(fa, fb), max(fa, fb)
    if np.any(yv < ymin - atol) or np.any(yv > ymax + atol):
        raise LevelOutOfRange(f"level outside [{ymin}, {ymax}]")
    sgn = 1.0 if fb >= fa else -1.0
    df = differentiate(f)
    a = np.full(yv.shape, float(lo))
    b = np.full(yv.shape, float(hi))
    span = fb - fa
    frac = np.clip((yv - fa) / span, 0.0, 1.0) if span != 0 else np.full(yv.shape, 0.5)
    t = a + frac * (b - a)
    htol = 2 * np.finfo(float).eps * max(1.0, abs(fa), abs(fb))
    live = np.ones(yv.shape, dtype=bool)
    for _ in range(200):
        if not live.any():
            break
        k = np.flatnonzero(live)
        tk = t[k]
        h = sgn * (evaluate(f, tk) - yv[k])
        dh = sgn * evaluate(df, tk)
        neg = h < 0
        a[k] = np.where(neg, tk, a[k])
        b[k] = np.where(neg, b[k], tk)
        with np.errstate(divide="ignore", invalid="ignore"):
            tn = tk - h / dh
        xtol = 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(tk))
        # a Newton step below resolution is convergence, not a bracket escape
        conv = np.isfinite(tn) & (np.abs(tn - tk) <= xtol)
        bad = ~conv & (~((tn > a[k]) & (tn < b[k])) | ~np.isfinite(tn))
        tn = np.where(bad, 0.5 * (a[k] + b[k]), np.where(conv, np.clip(tn, a[k], b[k]), tn))
        small = np.abs(h) <= htol
        done = small | conv | (b[k] - a[k] <= xtol)
        t[k] = np.where(small, tk, tn)
        live[k[done]] = False
    return float(t[0]) if scalar else t


@lru_cache(maxsize=None)
def _gauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def lp_norm(f: PiecewisePoly, p: float, window=None, tol: Tolerances = TOL) -> float:
    """``(int_window |f|^p)^(1/p)``; exact Gauss rules for integer p."""
    if not p > 0:
        raise ValueError("p must be positive")
    lo, hi = _window(f, window)
    atol = _root_atol(f, tol)
    integer = float(p).is_integer()
    total = 0.0
    for i, s0, s1, _ in _pieces(f, lo, hi):
        c = _trim(f.coeffs[i], s1 - s0)
        if _is_zero(c, s1 - s0, atol):
            continue
        if integer and int(p) % 2 == 0:
            cuts = [s0, s1]
        else:
            inner = _poly_roots(_taylor_shift(c, s0), 0.0, s1 - s0, atol)
            cuts = sorted({s0, s1, *(s0 + x for x in inner if 0.0 < x < s1 - s0)})
        for a, b in zip(cuts, cuts[1:]):
            if integer:
                x, w = _gauss((len(c) - 1) * int(p) // 2 + 2)
                s = 0.5 * (b - a) * x + 0.5 * (a + b)
                total += 0.5 * (b - a) * float(np.dot(w, np.abs(_horner(c, s)) ** p))
            else:
                val, _ = integrate.quad(lambda s: abs(_horner(c, s)) ** p, a, b, epsrel=tol.quad, epsabs=0.0, limit=200)
                total += val
    return total ** (1.0 / p)


def absolute(f: PiecewisePoly, tol: Tolerances = TOL) -> PiecewisePoly:
    """``|f|`` as a piecewise polynomial, split at the roots of ``f``."""
    atol = _root_atol(f, tol)
    starts, rows = [], []
    for i in range(f.n_segments):
        c = f.coeffs[i]
        h = f.lengths[i]
        a = f.breakpoints[i]
        cuts = [0.0] + [x for x in _poly_roots(c, 0.0, h, atol) if 1e-14 * f.period < x < h - 1e-14 * f.period] + [h]
        for s0, s1 in zip(cuts, cuts[1:]):
            sgn = -1.0 if _horner(c, 0.5 * (s0 + s1)) < 0 else 1.0
            starts.append(a + s0)
            rows.append(sgn * _taylor_shift(c, s0))
    return PiecewisePoly(f.period, starts, rows, continuous=f.continuous)


def continuity_gaps(f: PiecewisePoly) -> np.ndarray:
    """|right value - left limit| at every breakpoint (wrapping at the period)."""
    right = f.coeffs[:, 0]
    h = f.lengths
    left = np.array([_horner(f.coeffs[i], h[i]) for i in range(f.n_segments)])
    return np.abs(right - np.roll(left, 1))


# the operation is called ``eval`` in the public vocabulary
eval = evaluate
