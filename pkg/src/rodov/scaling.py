"""The scaled family Psi_{a1,a2,b,lam}(t) = b sigma^r psi_r(a1, a2; t / sigma)."""
from __future__ import annotations

from dataclasses import dataclass

from . import piecewise as pw
from .errors import InvalidParams, KOutOfRange
from .piecewise import PiecewisePoly
from .splines import build_psi, psi_sup_norm


@dataclass(frozen=True)
class PsiParams:
    r: int
    a1: float
    a2: float
    b: float
    lam: float

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 1:
            raise InvalidParams(f"r must be a positive integer, got {self.r}")
        if not (self.a1 >= 0 and self.a2 >= 0):
            raise InvalidParams(f"a1, a2 must be non-negative, got ({self.a1}, {self.a2})")
        if self.b == 0 or self.b != self.b:
            raise InvalidParams("b must be nonzero")
        if not self.lam > 0:
            raise InvalidParams(f"lambda must be positive, got {self.lam}")

    @property
    def T(self) -> float:
        return self.a1 + self.a2 + 2.0

    @property
    def sigma(self) -> float:
        """Time scale lam / (2 a1 + 2 a2 + 4)."""
        return self.lam / (2.0 * self.T)

    def with_lam(self, lam: float) -> "PsiParams":
        return PsiParams(self.r, self.a1, self.a2, self.b, lam)

    def to_dict(self) -> dict:
        return {"r": self.r, "a1": self.a1, "a2": self.a2, "b": self.b, "lambda": self.lam}


def build_Psi(p: PsiParams) -> PiecewisePoly:
    """lam-periodic member of the family; equals b sigma^r psi_r(t / sigma)."""
    s = p.sigma
    return pw.rescale(build_psi(p.r, p.a1, p.a2), p.b * s**p.r, s)


def base_norm(m: int, a1: float, a2: float) -> float:
    """||psi_m(a1, a2)||, with ||psi_0|| := 1 (the slope modulus on the ramps)."""
    return 1.0 if m == 0 else psi_sup_norm(m, a1, a2)


def Psi_derivative_norm(p: PsiParams, k: int) -> float:
    """Closed form |b| sigma^(r-k) ||psi_{r-k}||."""
    if not 0 <= k <= p.r:
        raise KOutOfRange(f"k={k} outside [0, {p.r}]")
    return abs(p.b) * p.sigma ** (p.r - k) * base_norm(p.r - k, p.a1, p.a2)


def norm_profile(p: PsiParams) -> list[tuple[int, float]]:
    return [(k, Psi_derivative_norm(p, k)) for k in range(p.r + 1)]
