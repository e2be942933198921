"""Rodov comparison splines psi_r(a1, a2; t) and the Euler special case."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import piecewise as pw
from .errors import NegativeParameter, NonPositiveLambda, NotApplicable
from .piecewise import PiecewisePoly

PLATEAU_FLOOR = 1e-13


@dataclass(frozen=True)
class RodovParams:
    r: int
    a1: float
    a2: float

    def __post_init__(self):
        _check(self.r, self.a1, self.a2)

    @property
    def T(self) -> float:
        """Half-period."""
        return self.a1 + self.a2 + 2.0

    @property
    def period(self) -> float:
        return 2.0 * self.T


def _check(r, a1, a2):
    if int(r) != r or r < 1:
        raise ValueError(f"order r must be a positive integer, got {r}")
    if not (a1 >= 0 and a2 >= 0):
        raise NegativeParameter(f"a1, a2 must be non-negative, got ({a1}, {a2})")


def build_psi1(a1: float, a2: float) -> PiecewisePoly:
    """The trapezoidal wave: 0, ramp up, plateau 1, ramp down on [0, T]; odd shift on [T, 2T]."""
    _check(1, a1, a2)
    a1, a2 = float(a1), float(a2)
    # plateaus shorter than the spacing of floats near T cannot be represented
    a1 = 0.0 if a1 < PLATEAU_FLOOR else a1
    a2 = 0.0 if a2 < PLATEAU_FLOOR else a2
    T = a1 + a2 + 2.0
    half = [  # (start, local coefficients)
        (0.0, [0.0]),
        (a1, [0.0, 1.0]),
        (a1 + 1.0, [1.0]),
        (a1 + a2 + 1.0, [1.0, -1.0]),
    ]
    ends = [a1, a1 + 1.0, a1 + a2 + 1.0, T]
    kept = [(s, c) for (s, c), e in zip(half, ends) if e > s]
    starts = [s for s, _ in kept] + [T + s for s, _ in kept]
    rows = [c for _, c in kept] + [[-x for x in c] for _, c in kept]
    return PiecewisePoly(2.0 * T, starts, rows, continuous=True)


@lru_cache(maxsize=4096)
def _psi_cached(r: int, a1: float, a2: float) -> PiecewisePoly:
    if r == 1:
        return build_psi1(a1, a2)
    return pw.antiderivative_zero_mean(_psi_cached(r - 1, a1, a2))


def build_psi(r: int, a1: float, a2: float) -> PiecewisePoly:
    """psi_r as r-1 zero-mean periodic antiderivatives of psi_1 (cached)."""
    _check(r, a1, a2)
    return _psi_cached(int(r), float(a1), float(a2))


def psi_zeros(r: int, a1: float, a2: float) -> tuple[float, float]:
    """The two zeros of psi_r in one period [0, 2T).

    Even r: a1 + a2/2 + 1 and 2 a1 + 3 a2/2 + 3.  Odd r: psi_1 is odd about
    the centre a1/2 of its zero plateau, so odd orders vanish at a1/2 and
    a1/2 + T (which reduces to 0 and T when a1 = 0).
    """
    _check(r, a1, a2)
    if r == 1 and a1 > 0:
        raise NotApplicable("psi_1 vanishes on whole intervals when a1 > 0")
    T = a1 + a2 + 2.0
    if r % 2 == 0:
        z = a1 + a2 / 2.0 + 1.0
    else:
        z = a1 / 2.0
    return z, z + T


@lru_cache(maxsize=4096)
def _sup_cached(r: int, a1: float, a2: float) -> float:
    if r == 1:
        return 1.0
    psi = build_psi(r, a1, a2)
    if r == 2:
        # extremum on the flat run [0, a1]
        return abs(pw.evaluate(psi, 0.0))
    z, _ = psi_zeros(r - 1, a1, a2)
    return abs(pw.evaluate(psi, z))


def psi_sup_norm(r: int, a1: float, a2: float) -> float:
    """||psi_r(a1, a2)|| from the value at the first zero of psi_{r-1}."""
    _check(r, a1, a2)
    return _sup_cached(int(r), float(a1), float(a2))


def euler_phi(r: int, lam: float) -> PiecewisePoly:
    """The Euler perfect spline of order r and frequency lam, period 2 pi / lam.

    Built by rescaling psi_r(0, 0): phi(t) = (pi / (2 lam))^r psi_r(0, 0; 2 lam t / pi).
    The phase is that of psi_r(0, 0), i.e. the r-th derivative is sgn cos(lam t).
    """
    if not lam > 0:
        raise NonPositiveLambda(f"lambda must be positive, got {lam}")
    sigma = math.pi / (2.0 * lam)
    return pw.rescale(build_psi(r, 0.0, 0.0), sigma**r, sigma)
