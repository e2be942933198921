"""Periodic test functions with exact derivatives: trig polynomials and wrapped splines."""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import Sequence

import numpy as np

from .. import piecewise as pw
from ..errors import DerivativeUnavailable, IdenticallyZero
from ..piecewise import PiecewisePoly
from ..rearrange import LevelPieces, pieces_from_callable, pieces_from_piecewise

CERT_GRID = 4096
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


class TestFunction(ABC):
    """A periodic function x whose derivatives can be evaluated exactly."""

    __test__ = False  # not a pytest class
    period: float
    max_order: int

    def __call__(self, t):
        return self.deriv(0, t)

    def _need(self, k: int):
        if k < 0 or k > self.max_order:
            raise DerivativeUnavailable(f"derivative of order {k} not available (max {self.max_order})")

    @abstractmethod
    def deriv(self, k: int, t): ...

    @abstractmethod
    def sup_bound(self, k: int) -> float:
        """Certified upper bound on ||x^(k)||."""

    @abstractmethod
    def extrema(self, k: int = 0) -> tuple[float, float]:
        """(min, max) of x^(k) over a period."""

    @abstractmethod
    def lp_norm(self, k: int, p: float, window: tuple[float, float], center: float = 0.0) -> float:
        """(int_window |x^(k) - center|^p)^(1/p)."""

    @abstractmethod
    def abs_derivative_pieces(self, window: tuple[float, float]) -> LevelPieces:
        """|x'| on the window as monotone pieces for rearrangement."""

    @abstractmethod
    def shifted(self, s: float) -> "TestFunction":
        """t -> x(t + s)."""

    @abstractmethod
    def scaled(self, c: float) -> "TestFunction": ...

    @abstractmethod
    def plus(self, c: float) -> "TestFunction": ...

    def shift_grid(self, shifts, t) -> np.ndarray:
        """Matrix of x(s + t) for s in shifts (rows) and t (columns)."""
        shifts, t = np.asarray(shifts, dtype=float), np.asarray(t, dtype=float)
        return np.asarray(self((shifts[:, None] + t[None, :]).ravel()), dtype=float).reshape(len(shifts), len(t))

    def sup_exact(self, k: int = 0) -> float:
        lo, hi = self.extrema(k)
        return max(abs(lo), abs(hi))


class TrigPoly(TestFunction):
    """x(t) = sum_j a_j cos(w j t) + b_j sin(w j t), w = 2 pi / period, j >= 0."""

    max_order = 64

    def __init__(self, cos: Sequence[float], sin: Sequence[float] = (), period: float = 1.0, cert_grid: int = CERT_GRID):
        n = max(len(cos), len(sin), 1)
        a = np.zeros(n)
        b = np.zeros(n)
        a[: len(cos)] = cos
        b[: len(sin)] = sin
        b[0] = 0.0
        if not period > 0:
            raise ValueError("period must be positive")
        self.a, self.b = a, b
        self.period = float(period)
        self.omega = 2.0 * math.pi / self.period
        self.cert_grid = int(cert_grid)
        self._freq = self.omega * np.arange(n)
        self._table = None

    # -- coefficients ----------------------------------------------------
    def coeffs(self, k: int = 0) -> tuple[np.ndarray, np.ndarray]:
        self._need(k)
        a, b = self.a, self.b
        m = k % 4
        if m == 1:
            a, b = b, -a
        elif m == 2:
            a, b = -a, -b
        elif m == 3:
            a, b = -b, a
        if k == 0:
            return a.copy(), b.copy()
        w = self._freq**k
        return a * w, b * w

    def amplitude_bound(self, k: int) -> float:
        a, b = self.coeffs(k)
        return float(np.sum(np.hypot(a, b)))

    def deriv(self, k: int, t):
        a, b = self.coeffs(k)
        t = np.asarray(t, dtype=float)
        th = np.multiply.outer(t, self._freq)
        return np.cos(th) @ a + np.sin(th) @ b

    def deriv_pair(self, k: int, t):
        """(x^(k)(t), x^(k+1)(t)) sharing one table of sines and cosines."""
        a, b = self.coeffs(k)
        a1, b1 = self.coeffs(k + 1)
        t = np.asarray(t, dtype=float)
        th = np.multiply.outer(t, self._freq)
        C, S = np.cos(th), np.sin(th)
        return C @ a + S @ b, C @ a1 + S @ b1

    def shift_grid(self, shifts, t) -> np.ndarray:
        # a cos + b sin = Re((a - i b) e^{i theta}) and e^{i w (s + t)} factors
        z = self.a - 1j * self.b
        A = np.exp(1j * np.multiply.outer(np.asarray(shifts, dtype=float), self._freq)) * z
        B = np.exp(1j * np.multiply.outer(np.asarray(t, dtype=float), self._freq))
        return (A @ B.T).real

    def roots(self, k: int = 0, level: float = 0.0, window: tuple[float, float] | None = None) -> np.ndarray:
        """Zeros of x^(k) - level in the window (default one period)."""
        a, b = self.coeffs(k)
        a = a.copy()
        a[0] -= level
        lo, hi = window if window is not None else (0.0, self.period)
        try:
            base = _trig_roots(a, b, self.omega, self.period)
        except IdenticallyZero:
            return np.empty(0)
        if len(base) == 0:
            return base
        n0 = math.floor(lo / self.period)
        n1 = math.ceil(hi / self.period)
        pts = np.concatenate([base + j * self.period for j in range(n0, n1 + 1)])
        return np.unique(pts[(pts >= lo) & (pts <= hi)])

    def extrema(self, k: int = 0) -> tuple[float, float]:
        crit = self.roots(k + 1)
        grid = np.linspace(0.0, self.period, 257)
        v = self.deriv(k, np.concatenate([crit, grid]))
        return float(v.min()), float(v.max())

    def _cert_table(self) -> tuple[np.ndarray, np.ndarray]:
        """cos and sin tables on the certification grid, shared by all orders."""
        if self._table is None:
            th = np.multiply.outer(np.arange(self.cert_grid) * (self.period / self.cert_grid), self._freq)
            self._table = (np.cos(th), np.sin(th))
        return self._table

    def sup_bound(self, k: int) -> float:
        self._need(k)
        n = self.cert_grid
        h = self.period / n
        C, S = self._cert_table()
        a, b = self.coeffs(k)
        top = float(np.max(np.abs(C @ a + S @ b)))
        margin = min(self.amplitude_bound(k + 1) * h / 2.0, self.amplitude_bound(k + 2) * h * h / 8.0)
        return top + margin

    def lp_norm(self, k: int, p: float, window: tuple[float, float], center: float = 0.0) -> float:
        lo, hi = window
        cuts = self.roots(k, level=center, window=(lo, hi))
        n_sub = max(1, len(self.a) - 1) * 4
        knots = np.unique(np.concatenate([[lo, hi], cuts, np.linspace(lo, hi, int(n_sub * (hi - lo) / self.period) + 2)]))
        a, b = knots[:-1], knots[1:]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        vals = np.abs(self.deriv(k, nodes) - center).reshape(len(a), -1)
        return float(np.sum(half * (vals**p @ _GL_WEIGHTS))) ** (1.0 / p)

    def abs_derivative_pieces(self, window: tuple[float, float]) -> LevelPieces:
        cuts = np.concatenate([self.roots(1, window=window), self.roots(2, window=window)])
        return pieces_from_callable(
            lambda t: self.deriv(1, t),
            lambda t: self.deriv(2, t),
            lambda t: self.deriv(0, t),
            cuts,
            window,
            fdf=lambda t: self.deriv_pair(1, t),
        )

    def shifted(self, s: float) -> "TrigPoly":
        phi = self._freq * s
        c, sn = np.cos(phi), np.sin(phi)
        return TrigPoly(self.a * c + self.b * sn, -self.a * sn + self.b * c, self.period, self.cert_grid)

    def scaled(self, c: float) -> "TrigPoly":
        return TrigPoly(c * self.a, c * self.b, self.period, self.cert_grid)

    def plus(self, c: float) -> "TrigPoly":
        a = self.a.copy()
        a[0] += c
        return TrigPoly(a, self.b, self.period, self.cert_grid)

    def to_dict(self) -> dict:
        return {"period": self.period, "cos": self.a.tolist(), "sin": self.b.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "TrigPoly":
        return cls(d.get("cos", []), d.get("sin", []), d.get("period", 1.0))

    def __repr__(self):
        return f"TrigPoly(cos={self.a.tolist()}, sin={self.b.tolist()}, period={self.period})"


def _trig_roots(a: np.ndarray, b: np.ndarray, omega: float, period: float) -> np.ndarray:
    """Real zeros in [0, period) of sum a_j cos(w j t) + b_j sin(w j t).

    With z = exp(i w t) the sum times z^n is a degree-2n polynomial; its roots
    near the unit circle give the real zeros, which are polished by Newton.
    """
    mags = np.hypot(a, b)
    top = mags.max() if len(mags) else 0.0
    if top == 0:
        raise IdenticallyZero("trigonometric polynomial is identically zero")
    n = len(a) - 1
    while n > 0 and mags[n] <= 1e-15 * top:
        n -= 1
    if n == 0:
        return np.empty(0)
    c = np.zeros(2 * n + 1, dtype=complex)
    c[n] = a[0]
    j = np.arange(1, n + 1)
    c[n + j] = 0.5 * (a[j] - 1j * b[j])
    c[n - j] = 0.5 * (a[j] + 1j * b[j])
    z = np.roots(c[::-1])
    z = z[np.abs(np.abs(z) - 1.0) < 1e-4]
    if len(z) == 0:
        return np.empty(0)
    t = np.mod(np.angle(z) / omega, period)
    freq = omega * np.arange(n + 1)
    A, B = a[: n + 1], b[: n + 1]
    for _ in range(4):
        th = np.multiply.outer(t, freq)
        f = np.cos(th) @ A + np.sin(th) @ B
        df = np.cos(th) @ (B * freq) - np.sin(th) @ (A * freq)
        step = np.where(np.abs(df) > 0, f / np.where(df == 0, 1.0, df), 0.0)
        step = np.clip(step, -period / (8 * n), period / (8 * n))
        t = t - step
    t = np.sort(np.mod(t, period))
    if len(t) > 1:
        keep = np.concatenate([[True], np.diff(t) > 1e-12 * period])
        t = t[keep]
    return t


class PiecewiseFunction(TestFunction):
    """A test function given by a periodic piecewise polynomial."""

    def __init__(self, f: PiecewisePoly, max_order: int | None = None):
        self.f = f
        self.period = f.period
        self.max_order = f.degree if max_order is None else max_order
        self._derivs: dict[int, PiecewisePoly] = {0: f}

    def derivative_poly(self, k: int) -> PiecewisePoly:
        self._need(k)
        if k not in self._derivs:
            self._derivs[k] = pw.derivative(self.f, k)
        return self._derivs[k]

    def deriv(self, k: int, t):
        return pw.evaluate(self.derivative_poly(k), t)

    def sup_bound(self, k: int) -> float:
        return pw.sup_norm(self.derivative_poly(k))

    def extrema(self, k: int = 0) -> tuple[float, float]:
        return pw.value_range(self.derivative_poly(k))

    def lp_norm(self, k: int, p: float, window: tuple[float, float], center: float = 0.0) -> float:
        g = self.derivative_poly(k)
        if center:
            g = pw.add_constant(g, -center)
        return pw.lp_norm(g, p, window)

    def abs_derivative_pieces(self, window: tuple[float, float]) -> LevelPieces:
        return pieces_from_piecewise(self.derivative_poly(1), window, absolute=True)

    def shifted(self, s: float) -> "PiecewiseFunction":
        return PiecewiseFunction(pw.shift(self.f, s), self.max_order)

    def scaled(self, c: float) -> "PiecewiseFunction":
        return PiecewiseFunction(pw.rescale(self.f, c, 1.0), self.max_order)

    def plus(self, c: float) -> "PiecewiseFunction":
        return PiecewiseFunction(pw.add_constant(self.f, c), self.max_order)

    def __repr__(self):
        return f"PiecewiseFunction(period={self.period}, segments={self.f.n_segments})"
