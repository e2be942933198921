"""Rodov comparison splines, the scaled family Psi, norm matching and inequality checks."""
from . import errors, matcher, piecewise, rearrange, scaling, splines, verify
from .errors import RodovError
from .matcher import match, residuals
from .piecewise import PiecewisePoly
from .rearrange import Rearrangement, cumulative_rearrangement, distribution, rearrangement
from .scaling import PsiParams, Psi_derivative_norm, build_Psi, norm_profile
from .splines import RodovParams, build_psi, build_psi1, euler_phi, psi_sup_norm, psi_zeros

__version__ = "0.1.0"

__all__ = [
    "PiecewisePoly",
    "PsiParams",
    "Psi_derivative_norm",
    "Rearrangement",
    "RodovError",
    "RodovParams",
    "build_Psi",
    "build_psi",
    "build_psi1",
    "cumulative_rearrangement",
    "distribution",
    "errors",
    "euler_phi",
    "match",
    "matcher",
    "norm_profile",
    "piecewise",
    "psi_sup_norm",
    "psi_zeros",
    "rearrange",
    "rearrangement",
    "residuals",
    "scaling",
    "splines",
    "verify",
]
