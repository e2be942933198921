"""Decreasing rearrangements of nonnegative functions on a window.

The source is split into pieces on which it is monotone (or constant).  The
distribution function d(y) = |{g > y}| is then a sum of per-piece crossing
lengths, the rearrangement r(u) = inf{y >= 0 : d(y) <= u} is found by a
safeguarded Newton solve in y between consecutive critical levels, and
integrals of r come from the level identity

    int_0^t r(u) du = t r(t) + int (g - r(t))_+ ,

which is exact given per-piece primitives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import piecewise as pw
from .errors import LevelOutOfRange, NegativeInput, TOutOfRange
from .piecewise import Interval, PiecewisePoly

DEFAULT_N = 4096
_EPS = np.finfo(float).eps
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _snap_levels(v0: np.ndarray, v1: np.ndarray, tol: float):
    """Map endpoint values that differ by rounding only onto one representative."""
    v = np.concatenate([v0, v1])
    if len(v) == 0:
        return v0, v1
    order = np.argsort(v)
    sv = v[order]
    new_cluster = np.concatenate([[True], np.diff(sv) > tol])
    # the smallest member represents its cluster, so an exact zero survives
    rep = sv[np.flatnonzero(new_cluster)][np.cumsum(new_cluster) - 1]
    out = np.empty_like(v)
    out[order] = rep
    n = len(v0)
    return out[:n], out[n:]


class LevelPieces:
    """A nonnegative function on a window as a list of monotone pieces.

    Subclasses supply vectorised ``_g``, ``_dg`` and ``_G`` (value, derivative
    and primitive) taking piece indices and global abscissae.
    """

    def __init__(self, s0, s1, window: tuple[float, float], tol: float = 1e-12):
        self.s0 = np.asarray(s0, dtype=float)
        self.s1 = np.asarray(s1, dtype=float)
        self.window = window
        self.length = window[1] - window[0]
        n = len(self.s0)
        idx = np.arange(n)
        v0 = self._g(idx, self.s0)
        v1 = self._g(idx, self.s1)
        scale = float(max(np.abs(v0).max(), np.abs(v1).max())) if n else 0.0
        low = min(v0.min(), v1.min()) if n else 0.0
        if low < -tol * max(1.0, scale):
            raise NegativeInput(f"function dips to {low:.3g} on the window")
        # rounding-level negatives at zeros of the input
        v0, v1 = np.maximum(v0, 0.0), np.maximum(v1, 0.0)
        v0, v1 = _snap_levels(v0, v1, 4 * _EPS * max(1.0, scale))
        self.v_start, self.v_end = v0, v1
        self.lo_val = np.minimum(v0, v1)
        self.hi_val = np.maximum(v0, v1)
        self.increasing = v1 > v0
        self.scale = float(self.hi_val.max()) if n else 0.0
        self.const = self.hi_val - self.lo_val <= 4 * _EPS * max(1.0, self.scale)
        self.lens = self.s1 - self.s0
        self.integrals = self._G(idx, self.s1) - self._G(idx, self.s0)
        self._levels()

    # -- subclass hooks --------------------------------------------------
    def _g(self, idx, t):
        raise NotImplementedError

    def _dg(self, idx, t):
        raise NotImplementedError

    def _G(self, idx, t):
        raise NotImplementedError

    def _g_dg(self, idx, t):
        return self._g(idx, t), self._dg(idx, t)

    # -- level structure -------------------------------------------------
    def _levels(self):
        lv = np.unique(np.concatenate([self.lo_val, self.hi_val]))[::-1]
        self.levels = lv
        d = self.measure_above(lv)
        mass = np.array([self.lens[self.const & (np.abs(self.hi_val - c) <= 4 * _EPS * max(1.0, self.scale))].sum() for c in lv])
        self.D_gt = d
        self.D_ge = np.minimum(d + mass, self.length)

    def crossings(self, idx, y, t0=None):
        """Solve g = y on each listed piece (monotone, y inside its range)."""
        idx = np.asarray(idx)
        y = np.asarray(y, dtype=float)
        lo = self.s0[idx].copy()
        hi = self.s1[idx].copy()
        sgn = np.where(self.increasing[idx], 1.0, -1.0)
        gv0 = self.v_start[idx]
        gv1 = self.v_end[idx]
        span = gv1 - gv0
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(span != 0, (y - gv0) / span, 0.5)
        t = lo + np.clip(frac, 0.0, 1.0) * (hi - lo) if t0 is None else np.clip(t0, lo, hi)
        live = np.ones(len(t), dtype=bool)
        htol = 2 * _EPS * max(1.0, self.scale)
        for _ in range(200):
            if not live.any():
                break
            k = np.flatnonzero(live)
            tk = t[k]
            gv, dgv = self._g_dg(idx[k], tk)
            h = sgn[k] * (gv - y[k])
            dh = sgn[k] * dgv
            neg = h < 0
            lo[k] = np.where(neg, tk, lo[k])
            hi[k] = np.where(neg, hi[k], tk)
            with np.errstate(divide="ignore", invalid="ignore"):
                tn = tk - h / dh
            xtol = 4 * _EPS * np.maximum(1.0, np.abs(tk))
            # a Newton step below resolution is convergence, not a bracket escape
            conv = np.isfinite(tn) & (np.abs(tn - tk) <= xtol)
            bad = ~conv & (~((tn > lo[k]) & (tn < hi[k])) | ~np.isfinite(tn))
            tn = np.where(bad, 0.5 * (lo[k] + hi[k]), np.where(conv, np.clip(tn, lo[k], hi[k]), tn))
            done = conv | (hi[k] - lo[k] <= xtol) | (np.abs(h) <= htol)
            t[k] = np.where(np.abs(h) <= htol, tk, tn)
            live[k[done]] = False
        return t

    def _active(self, y):
        """Broadcast masks (len(y) x pieces): fully above y, and crossing y."""
        y = y[:, None]
        above = (y < self.lo_val) & ~self.const
        above |= self.const & (self.hi_val > y)
        cross = ~self.const & (y >= self.lo_val) & (y < self.hi_val)
        return above, cross

    def measure_above(self, y, with_slope: bool = False):
        """d(y) = |{g > y}| (and d'(y) when requested) for an array of levels."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        above, cross = self._active(y)
        d = above.astype(float) @ self.lens
        slope = np.zeros(len(y))
        r, p = np.nonzero(cross)
        if len(r):
            t = self.crossings(p, y[r])
            part = np.where(self.increasing[p], self.s1[p] - t, t - self.s0[p])
            np.add.at(d, r, part)
            if with_slope:
                dg = np.abs(self._dg(p, t))
                with np.errstate(divide="ignore"):
                    np.add.at(slope, r, -1.0 / dg)
        return (d, slope) if with_slope else d

    def excess(self, y):
        """int (g - y)_+ over the window for an array of levels."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        above, cross = self._active(y)
        out = above.astype(float) @ self.integrals - y * (above.astype(float) @ self.lens)
        r, p = np.nonzero(cross)
        if len(r):
            t = self.crossings(p, y[r])
            inc = self.increasing[p]
            Gt = self._G(p, t)
            part = np.where(
                inc,
                self._G(p, self.s1[p]) - Gt - y[r] * (self.s1[p] - t),
                Gt - self._G(p, self.s0[p]) - y[r] * (t - self.s0[p]),
            )
            np.add.at(out, r, part)
        return out

    def quantile(self, u):
        """r(u) for u in [0, length]; r(length) is the left limit min g."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(u < -1e-12 * self.length) or np.any(u > self.length * (1 + 1e-12)):
            raise LevelOutOfRange("u outside the window")
        lv, Dgt, Dge = self.levels, self.D_gt, self.D_ge
        m = len(lv) - 1
        j = np.clip(np.searchsorted(Dgt, u, side="right") - 1, 0, m)
        out = lv[j].copy()
        solve = (u > Dge[j]) & (j < m)
        k = np.flatnonzero(solve)
        if len(k):
            out[k] = self._solve_levels(u[k], lv[j[k] + 1], lv[j[k]], Dge[j[k]], Dgt[j[k] + 1])
        return out

    def _solve_levels(self, u, ylo, yhi, d_at_hi, d_at_lo):
        """d(y) = u with y in (ylo, yhi); d continuous and decreasing there.

        No critical level lies strictly inside a bracket, so the pieces fully
        above y and those crossing y are fixed; crossings are warm-started.
        """
        above, cross = self._active(0.5 * (ylo + yhi))
        d_fixed = above.astype(float) @ self.lens
        r, p = np.nonzero(cross)
        inc = self.increasing[p]
        lo, hi = ylo.copy(), yhi.copy()
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(d_at_lo > d_at_hi, (d_at_lo - u) / (d_at_lo - d_at_hi), 0.5)
        y = ylo + np.clip(frac, 0.0, 1.0) * (yhi - ylo)
        tp = None
        live = np.ones(len(y), dtype=bool)
        ftol = 4 * _EPS * self.length
        xtol = 4 * _EPS * max(1.0, self.scale)
        for _ in range(200):
            if not live.any():
                break
            sel = live[r]
            rs, ps = r[sel], p[sel]
            tp_sel = self.crossings(ps, y[rs], None if tp is None else tp[sel])
            if tp is None:
                tp = np.empty(len(r))
            tp[sel] = tp_sel
            d = d_fixed.copy()
            np.add.at(d, rs, np.where(inc[sel], self.s1[ps] - tp_sel, tp_sel - self.s0[ps]))
            slope = np.zeros(len(y))
            with np.errstate(divide="ignore"):
                np.add.at(slope, rs, -1.0 / np.abs(self._dg(ps, tp_sel)))
            k = np.flatnonzero(live)
            yk = y[k]
            f = d[k] - u[k]
            pos = f > 0  # too much measure above: raise y
            lo[k] = np.where(pos, yk, lo[k])
            hi[k] = np.where(pos, hi[k], yk)
            with np.errstate(divide="ignore", invalid="ignore"):
                yn = yk - f / slope[k]
            conv = np.isfinite(yn) & (np.abs(yn - yk) <= xtol)
            bad = ~conv & (~((yn > lo[k]) & (yn < hi[k])) | ~np.isfinite(yn))
            yn = np.where(bad, 0.5 * (lo[k] + hi[k]), np.where(conv, np.clip(yn, lo[k], hi[k]), yn))
            done = conv | (hi[k] - lo[k] <= xtol) | (np.abs(f) <= ftol)
            y[k] = np.where(np.abs(f) <= ftol, yk, yn)
            live[k[done]] = False
        return y

    def cumulative(self, t):
        """int_0^t r(u) du for an array of t in [0, length]."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        y = self.quantile(t)
        return t * y + self.excess(y)

    def critical_u(self) -> np.ndarray:
        return np.unique(np.clip(np.concatenate([[0.0, self.length], self.D_gt, self.D_ge]), 0.0, self.length))


class _PolyPieces(LevelPieces):
    def __init__(self, starts, s1, rows, sign, window, tol):
        self.origin = np.asarray(starts, dtype=float)
        width = max(len(r) for r in rows)
        C = np.zeros((len(rows), width))
        for i, r in enumerate(rows):
            C[i, : len(r)] = r
        self.C = C * np.asarray(sign, dtype=float)[:, None]
        self.dC = C[:, 1:] * np.arange(1, width) * np.asarray(sign, dtype=float)[:, None] if width > 1 else np.zeros((len(rows), 1))
        self.IC = np.concatenate([np.zeros((len(rows), 1)), self.C / np.arange(1, width + 1)], axis=1)
        super().__init__(starts, s1, window, tol)

    @staticmethod
    def _horner_rows(C, idx, s):
        rows = C[idx]
        v = rows[:, -1].copy()
        for j in range(C.shape[1] - 2, -1, -1):
            v = v * s + rows[:, j]
        return v

    def _g(self, idx, t):
        return self._horner_rows(self.C, idx, t - self.origin[idx])

    def _dg(self, idx, t):
        return self._horner_rows(self.dC, idx, t - self.origin[idx])

    def _G(self, idx, t):
        return self._horner_rows(self.IC, idx, t - self.origin[idx])


class _CallablePieces(LevelPieces):
    def __init__(self, f, df, F, cuts, window, tol, fdf=None):
        self.f, self.df, self.F = f, df, F
        self.fdf = fdf
        cuts = np.asarray(cuts, dtype=float)
        mid = 0.5 * (cuts[:-1] + cuts[1:])
        self.sign = np.where(f(mid) < 0, -1.0, 1.0)
        super().__init__(cuts[:-1], cuts[1:], window, tol)

    def _g(self, idx, t):
        return self.sign[idx] * self.f(t)

    def _dg(self, idx, t):
        return self.sign[idx] * self.df(t)

    def _G(self, idx, t):
        return self.sign[idx] * self.F(t)

    def _g_dg(self, idx, t):
        if self.fdf is None:
            return super()._g_dg(idx, t)
        v, dv = self.fdf(t)
        sg = self.sign[idx]
        return sg * v, sg * dv


def _as_window(g: PiecewisePoly, window) -> tuple[float, float]:
    return pw._window(g, window)


def pieces_from_piecewise(g: PiecewisePoly, window=None, *, absolute: bool = False, tol: float = 1e-12) -> LevelPieces:
    """Monotone pieces of ``g`` (or of ``|g|`` with ``absolute``) on a window."""
    lo, hi = _as_window(g, window)
    atol = pw._root_atol(g, pw.TOL)
    starts, ends, rows, signs = [], [], [], []
    for i, a, b, origin in pw._pieces(g, lo, hi):
        c = np.asarray(g.coeffs[i], dtype=float)
        h = b - a
        sh = pw._taylor_shift(c, a)
        cuts = set(pw._poly_roots(pw._pder(sh), 0.0, h, 0.0, touch=False))
        if absolute:
            cuts |= set(pw._poly_roots(sh, 0.0, h, atol))
        inner = sorted(x for x in cuts if 1e-13 * max(1.0, h) < x < h - 1e-13 * max(1.0, h))
        knots = [0.0] + inner + [h]
        for s0, s1 in zip(knots, knots[1:]):
            sgn = -1.0 if absolute and pw._horner(sh, 0.5 * (s0 + s1)) < 0 else 1.0
            starts.append(origin + a + s0)
            ends.append(origin + a + s1)
            rows.append(pw._taylor_shift(sh, s0))
            signs.append(sgn)
    return _PolyPieces(starts, ends, rows, signs, (lo, hi), tol)


def pieces_from_callable(
    f: Callable,
    df: Callable,
    F: Callable,
    cuts: Sequence[float],
    window: tuple[float, float],
    tol: float = 1e-12,
    fdf: Callable | None = None,
) -> LevelPieces:
    """Pieces of |f| from vectorised f, f', a primitive F and cut points.

    ``cuts`` must contain the window ends and every root of f and f' inside,
    so that |f| is monotone between consecutive cuts.  ``fdf`` optionally
    returns (f, f') in one call.
    """
    cuts = np.unique(np.concatenate([[window[0], window[1]], np.asarray(cuts, dtype=float)]))
    cuts = cuts[(cuts >= window[0]) & (cuts <= window[1])]
    return _CallablePieces(f, df, F, cuts, window, tol, fdf)


@dataclass(frozen=True)
class Rearrangement:
    """Sampled non-increasing rearrangement; callable for exact evaluation."""

    length: float
    u: np.ndarray
    values: np.ndarray
    critical_values: np.ndarray
    source: LevelPieces = field(repr=False, compare=False)
    u_scale: float = 1.0  # source window length / length

    def __call__(self, u):
        return self.source.quantile(np.asarray(u, dtype=float) * self.u_scale)

    def integral(self, t: float) -> float:
        """int_0^t r(u) du on this (possibly normalised) axis."""
        if not -1e-12 <= t <= self.length * (1 + 1e-12):
            raise TOutOfRange(f"t={t} outside [0, {self.length}]")
        t = min(max(t, 0.0), self.length)
        return float(self.source.cumulative(t * self.u_scale)[0]) / self.u_scale

    def lp_norm(self, p: float) -> float:
        """(int r^p du)^(1/p) by Gauss-Legendre between critical u values."""
        knots = self.source.critical_u()
        knots = knots[np.concatenate([[True], np.diff(knots) > 1e-15 * self.source.length])]
        a, b = knots[:-1], knots[1:]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        vals = np.abs(self.source.quantile(nodes)).reshape(len(a), -1)
        total = float(np.sum(half * (vals**p @ _GL_WEIGHTS))) / self.u_scale
        return total ** (1.0 / p)


def _build(src: LevelPieces, n: int, normalize: bool) -> Rearrangement:
    if n < 2:
        raise ValueError("n must be at least 2")
    L = src.length
    u = np.unique(np.concatenate([np.linspace(0.0, L, n), src.critical_u()]))
    vals = src.quantile(u)
    guarded = np.minimum.accumulate(vals)
    drift = np.max(vals - guarded) if len(vals) else 0.0
    if drift > 1e-12 * max(1.0, src.scale):
        raise ArithmeticError(f"rearrangement lost monotonicity by {drift:.3g}")
    scale = L if normalize else 1.0
    return Rearrangement(
        length=L / scale,
        u=u / scale,
        values=guarded,
        critical_values=np.sort(src.levels),
        source=src,
        u_scale=scale,
    )


def distribution(g: PiecewisePoly, window=None, *, tol: float = 1e-12) -> Callable:
    """y -> |{t in window : g(t) > y}| (vectorised)."""
    src = pieces_from_piecewise(g, window, tol=tol)

    def d(y):
        out = src.measure_above(y)
        return float(out[0]) if np.ndim(y) == 0 else out

    d.source = src
    return d


def rearrangement(g: PiecewisePoly, window=None, n: int = DEFAULT_N, *, normalize: bool = False, tol: float = 1e-12) -> Rearrangement:
    """Non-increasing rearrangement of ``g >= 0`` sampled on ``n`` points plus critical points.

    With ``normalize`` the u axis is rescaled to [0, 1].
    """
    return _build(pieces_from_piecewise(g, window, tol=tol), n, normalize)


def rearrangement_of(src: LevelPieces, n: int = DEFAULT_N, *, normalize: bool = False) -> Rearrangement:
    return _build(src, n, normalize)


def cumulative_rearrangement(g: PiecewisePoly, window, t: float, *, normalize: bool = False, tol: float = 1e-12) -> float:
    """int_0^t r(g, u) du."""
    src = pieces_from_piecewise(g, window, tol=tol)
    L = src.length
    top = 1.0 if normalize else L
    if not (0.0 <= t <= top * (1 + 1e-12)) or math.isnan(t):
        raise TOutOfRange(f"t={t} outside [0, {top}]")
    if t == 0:
        return 0.0
    s = min(t, top) * (L if normalize else 1.0)
    val = float(src.cumulative(s)[0])
    return val / L if normalize else val


__all__ = [
    "DEFAULT_N",
    "Interval",
    "LevelPieces",
    "Rearrangement",
    "cumulative_rearrangement",
    "distribution",
    "pieces_from_callable",
    "pieces_from_piecewise",
    "rearrangement",
    "rearrangement_of",
]
