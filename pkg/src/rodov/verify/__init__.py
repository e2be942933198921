"""Verification of Kolmogorov-type comparison inequalities on concrete functions."""
from .checks import (
    TOL_EQUALITY,
    TOL_VERIFY,
    best_constant,
    check_bohr_favard,
    check_comparison,
    check_hypothesis,
    check_ligun,
    check_lp_lower_bound,
    check_nagy,
    check_rearrangement_ineq,
    check_sign_changes,
    check_th5,
    comparison_orders,
    centered_orders,
    ligun_orders,
)
from .generate import KINDS, fit_to_bounds, generate_admissible, random_trig, tune_for_lower_bound, tune_for_nagy
from .report import CheckReport
from .suites import SUITES, SuiteResult, random_params, run_on_function, run_suite, trial
from .testfunc import PiecewiseFunction, TestFunction, TrigPoly

__all__ = [
    "CheckReport",
    "KINDS",
    "PiecewiseFunction",
    "SUITES",
    "SuiteResult",
    "TOL_EQUALITY",
    "TOL_VERIFY",
    "TestFunction",
    "TrigPoly",
    "best_constant",
    "check_bohr_favard",
    "check_comparison",
    "check_hypothesis",
    "check_ligun",
    "check_lp_lower_bound",
    "check_nagy",
    "check_rearrangement_ineq",
    "check_sign_changes",
    "check_th5",
    "comparison_orders",
    "fit_to_bounds",
    "generate_admissible",
    "centered_orders",
    "ligun_orders",
    "random_params",
    "random_trig",
    "run_on_function",
    "run_suite",
    "trial",
    "tune_for_lower_bound",
    "tune_for_nagy",
]
