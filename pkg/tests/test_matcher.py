import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rodov.errors import Infeasible, NoBracket, NonMonotone
from rodov.matcher import (
    CASE_ORDERS,
    NormTargets,
    match,
    match_case_a,
    match_case_b,
    match_case_c,
    residuals,
    solve_increasing,
)
from rodov.scaling import PsiParams, norm_profile
from rodov.splines import psi_sup_norm


def targets_of(p: PsiParams, case: str) -> dict:
    prof = dict(norm_profile(p))
    return {k: prof[k] for k in CASE_ORDERS[case](p.r)}


def close(p: PsiParams, a1, a2, lam, b, tol=1e-6):
    return abs(p.a1 - a1) <= tol and abs(p.a2 - a2) <= tol and abs(p.lam - lam) <= tol and abs(p.b - b) <= tol


def test_case_a_examples():
    assert close(match_case_a(2, 1.5, 1, 1), 0, 2, 8, 1)
    assert close(match_case_a(2, 0.5, 1, 1), 0, 0, 4, 1)
    with pytest.raises(Infeasible):
        match_case_a(2, 0.4, 1, 1)


def test_case_b_examples():
    # ||psi_3(1, 0)|| = 7/12 and ||psi_2(1, 0)|| = 1/2 give sigma = 1
    assert close(match_case_b(3, 7 / 12, 0.5, 1), 1, 0, 6, 1)
    assert close(match_case_b(3, 1 / 3, 0.5, 1), 0, 0, 4, 1)
    with pytest.raises(Infeasible):
        match_case_b(3, 0.2, 0.5, 1)


def test_case_b_target_five_sixths():
    # 5/6 is ||psi_3(2, 0)||, so these targets are met by a1 = 2, lam = 8
    assert psi_sup_norm(3, 2, 0) == pytest.approx(5 / 6, rel=1e-14)
    assert close(match_case_b(3, 5 / 6, 0.5, 1), 2, 0, 8, 1)


def test_case_c_examples():
    assert close(match_case_c(3, 35 / 24, 1, 1, 1), 1, 1, 8, 1)
    assert close(match_case_c(3, 1 / 3, 0.5, 1, 1), 0, 0, 4, 1)
    with pytest.raises(Infeasible):
        match_case_c(3, 10, 0.4, 1, 1)


def test_case_c_target_47_24():
    p = match_case_c(3, 47 / 24, 1, 1, 1)
    assert close(p, 2, 1, 10, 1)
    assert max(abs(v) for v in residuals(p, {0: 47 / 24, 1: 1, 2: 1, 3: 1}).values()) < 1e-12


def test_feasibility_boundary():
    for r in (2, 3, 5):
        p = match("a", r, {0: psi_sup_norm(r, 0, 0), r - 1: 1.0, r: 1.0})
        assert abs(p.a2) <= 1e-8
    for r in (3, 4):
        base = psi_sup_norm(r, 0, 0) * (0.5 / psi_sup_norm(2, 0, 0)) ** (r / 2)
        p = match("b", r, {0: base, r - 2: 0.5, r: 1.0})
        assert abs(p.a1) <= 1e-8


def test_match_dispatch_and_validation():
    with pytest.raises(ValueError):
        match("a", 2, {0: 1.5, 1: 1})
    with pytest.raises(ValueError):
        match_case_a(1, 1, 1, 1)
    with pytest.raises(ValueError):
        match_case_b(2, 1, 1, 1)
    with pytest.raises(ValueError):
        match_case_a(2, -1, 1, 1)
    with pytest.raises(ValueError):
        NormTargets(2, {0: 1.0, 1: 0.0})


def test_solve_increasing():
    assert solve_increasing(lambda a: a**3, 27.0) == pytest.approx(3.0, abs=1e-10)
    assert solve_increasing(lambda a: math.exp(a), 1e6) == pytest.approx(math.log(1e6), abs=1e-10)
    with pytest.raises(NoBracket):
        solve_increasing(math.atan, 2.0, max_doublings=20)
    with pytest.raises(NonMonotone):
        solve_increasing(lambda a: -a, 5.0)
    with pytest.raises(NonMonotone):
        solve_increasing(lambda a: math.sin(3 * a), 0.9, width=2.0)


def test_solution_monotone_in_target():
    vals = [match_case_a(3, m, 1.0, 1.0).a2 for m in np.linspace(0.34, 5, 15)]
    assert np.all(np.diff(vals) > 0)


def test_negative_b_round_trips_with_positive_sign():
    p = PsiParams(4, 0, 1.3, -2.0, 1.7)
    q = match("a", 4, targets_of(p, "a"))
    assert q.b == 2.0
    assert close(q, 0, 1.3, 1.7, 2.0, tol=1e-8)


rt_params = dict(
    a1=st.floats(0, 10),
    a2=st.floats(0, 10),
    b=st.floats(0.1, 10),
    lam=st.floats(0.1, 10),
)


@given(st.integers(2, 6), rt_params["a2"], rt_params["b"], rt_params["lam"])
def test_round_trip_case_a(r, a2, b, lam):
    p = PsiParams(r, 0.0, a2, b, lam)
    t = targets_of(p, "a")
    q = match("a", r, t)
    assert max(abs(v) for v in residuals(q, t).values()) <= 1e-8
    assert close(q, 0, a2, lam, b, tol=1e-6 * max(1, a2, lam))


@given(st.integers(3, 6), rt_params["a1"], rt_params["b"], rt_params["lam"])
def test_round_trip_case_b(r, a1, b, lam):
    p = PsiParams(r, a1, 0.0, b, lam)
    t = targets_of(p, "b")
    q = match("b", r, t)
    assert max(abs(v) for v in residuals(q, t).values()) <= 1e-8


@given(st.integers(3, 6), rt_params["a1"], rt_params["a2"], rt_params["b"], rt_params["lam"])
def test_round_trip_case_c(r, a1, a2, b, lam):
    p = PsiParams(r, a1, a2, b, lam)
    t = targets_of(p, "c")
    q = match("c", r, t)
    assert max(abs(v) for v in residuals(q, t).values()) <= 1e-8
    assert close(q, a1, a2, lam, b, tol=1e-6 * max(1, a1, a2, lam))
