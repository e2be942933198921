import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from rodov import piecewise as pw
from rodov.errors import NegativeParameter, NonPositiveLambda, NotApplicable
from rodov.splines import RodovParams, build_psi, build_psi1, euler_phi, psi_sup_norm, psi_zeros

from conftest import dense_max
from oracles import exact_sup, exact_value, fourier_psi00

params = st.tuples(st.integers(1, 8), st.floats(0, 10), st.floats(0, 10))


def test_params_type():
    p = RodovParams(3, 1.0, 2.0)
    assert p.T == 5.0 and p.period == 10.0
    with pytest.raises(NegativeParameter):
        RodovParams(2, -1.0, 0.0)
    with pytest.raises(ValueError):
        RodovParams(0, 0.0, 0.0)


def test_build_psi1_examples():
    tri = build_psi1(0, 0)
    assert tri.period == 4.0 and pw.sup_norm(tri) == 1.0
    assert np.allclose(pw.evaluate(tri, [0, 1, 2, 3]), [0, 1, 0, -1])
    assert pw.evaluate(build_psi1(1, 2), 2.0) == 1.0
    assert pw.evaluate(build_psi1(1, 0), 4.5) == -0.5
    with pytest.raises(NegativeParameter):
        build_psi1(-0.1, 0)


def test_build_psi1_degenerate_rows_elided():
    assert build_psi1(0, 0).n_segments == 4
    assert build_psi1(1, 0).n_segments == 6
    assert build_psi1(1, 1).n_segments == 8
    assert build_psi1(1e-300, 0).n_segments == 4


def test_build_psi_examples():
    assert pw.evaluate(build_psi(2, 0, 0), 0.0) == pytest.approx(-0.5, abs=1e-15)
    assert build_psi(1, 1.5, 2.5) is build_psi1(1.5, 2.5) or np.array_equal(
        build_psi(1, 1.5, 2.5).coeffs, build_psi1(1.5, 2.5).coeffs
    )
    ref = exact_value(3, 1, 1, "5/2")
    assert ref == sp.Rational(-35, 24)
    assert pw.evaluate(build_psi(3, 1, 1), 2.5) == pytest.approx(float(ref), rel=1e-14)


@pytest.mark.parametrize("r,a1,a2", [(2, 1, 0), (3, 1, 1), (4, "1/2", 2), (5, 3, "3/2")])
def test_build_psi_matches_exact_construction(r, a1, a2):
    f = build_psi(r, float(sp.nsimplify(a1)), float(sp.nsimplify(a2)))
    for x in np.linspace(0, f.period, 23)[:-1]:
        ref = float(exact_value(r, a1, a2, sp.nsimplify(round(x, 6))))
        assert pw.evaluate(f, round(x, 6)) == pytest.approx(ref, abs=1e-13)


def test_psi_zeros_examples():
    assert psi_zeros(2, 0, 0) == (1.0, 3.0)
    assert psi_zeros(4, 2, 4) == (5.0, 13.0)
    # odd orders: zeros at the centre of the zero plateau of psi_1 and half a period later
    assert psi_zeros(3, 1, 0) == (0.5, 3.5)
    assert exact_value(3, 1, 0, "1/2") == 0 and exact_value(3, 1, 0, "7/2") == 0
    assert psi_zeros(3, 0, 2) == (0.0, 4.0)
    assert psi_zeros(1, 0, 3) == (0.0, 5.0)
    with pytest.raises(NotApplicable):
        psi_zeros(1, 1, 0)


def test_psi_sup_norm_examples():
    assert psi_sup_norm(1, 5, 9) == 1.0
    assert psi_sup_norm(2, 1, 1) == pytest.approx(1.0, rel=1e-14)
    assert psi_sup_norm(3, 1, 0) == pytest.approx(7 / 12, rel=1e-14)
    assert exact_sup(3, 1, 0) == sp.Rational(7, 12)
    assert psi_sup_norm(3, 1, 1) == pytest.approx(float(exact_sup(3, 1, 1)), rel=1e-14)


@pytest.mark.parametrize("r,a1,a2", [(2, 0.3, 4.1), (3, 2.2, 0.7), (4, 5.0, 5.0), (6, 0.0, 1.7), (7, 9.1, 0.2)])
def test_psi_sup_norm_dense_grid(r, a1, a2):
    assert psi_sup_norm(r, a1, a2) == pytest.approx(dense_max(build_psi(r, a1, a2)), rel=1e-8)


def test_psi2_norm_closed_form():
    for a1, a2 in [(0, 0), (1, 0), (3, 2), (0.5, 7)]:
        assert psi_sup_norm(2, a1, a2) == pytest.approx((1 + a2) / 2, rel=1e-14)


def test_euler_phi_examples():
    assert pw.sup_norm(euler_phi(1, math.pi / 2)) == pytest.approx(1.0, rel=1e-14)
    assert pw.sup_norm(euler_phi(2, 1.0)) == pytest.approx(math.pi**2 / 8, rel=1e-13)
    for r in range(1, 6):
        assert pw.sup_norm(pw.derivative(euler_phi(r, 1.7), r)) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(NonPositiveLambda):
        euler_phi(2, 0.0)


@pytest.mark.parametrize("r,K", [(1, math.pi / 2), (2, math.pi**2 / 8), (3, math.pi**3 / 24)])
def test_favard_constants(r, K):
    assert pw.sup_norm(euler_phi(r, 1.0)) == pytest.approx(K, rel=1e-12)


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_euler_identity_against_fourier_series(r):
    f = build_psi(r, 0, 0)
    x = np.linspace(0, 4, 97)
    assert np.max(np.abs(pw.evaluate(f, x) - fourier_psi00(r, x))) < 1e-11


def test_cache_returns_same_object():
    assert build_psi(4, 1.25, 0.5) is build_psi(4, 1.25, 0.5)


# -- structural properties --------------------------------------------------

@given(params)
def test_antisymmetry_and_zero_mean(rp):
    r, a1, a2 = rp
    f = build_psi(r, a1, a2)
    T = f.period / 2
    s = pw.sup_norm(f)
    t = np.linspace(0, f.period, 1024, endpoint=False)
    assert np.max(np.abs(pw.evaluate(f, t + T) + pw.evaluate(f, t))) <= 1e-11 * s
    assert abs(pw.mean(f)) <= 1e-12 * s


@given(params)
def test_derivative_continuity_and_top_derivative(rp):
    r, a1, a2 = rp
    f = build_psi(r, a1, a2)
    for k in range(r):
        d = pw.derivative(f, k)
        assert np.max(pw.continuity_gaps(d)) <= 1e-11 * max(1.0, pw.sup_norm(d))
    top = pw.derivative(f, r)
    vals = np.abs(top.coeffs[:, 0])
    assert np.all(np.isclose(vals, 0, atol=1e-12) | np.isclose(vals, 1, atol=1e-12))
    assert np.all(np.abs(top.coeffs[:, 1:]) <= 1e-12)


@given(st.integers(2, 8), st.floats(0, 10), st.floats(0, 10))
def test_two_zeros_and_closed_form(r, a1, a2):
    f = build_psi(r, a1, a2)
    s = pw.sup_norm(f)
    z = psi_zeros(r, a1, a2)
    assert max(abs(pw.evaluate(f, zi)) for zi in z) <= 1e-10 * s
    found = pw.roots(f)
    assert len(found) == 2
    assert np.allclose(np.sort(found), np.sort(np.mod(z, f.period)), atol=1e-8 * f.period)


@given(st.integers(2, 8), st.floats(0, 10), st.floats(0, 10))
def test_symmetric_about_zeros(r, a1, a2):
    f = build_psi(r, a1, a2)
    s = pw.sup_norm(f)
    z = psi_zeros(r, a1, a2)[0]
    d = np.linspace(0, f.period / 2, 257)
    assert np.max(np.abs(pw.evaluate(f, z + d) + pw.evaluate(f, z - d))) <= 1e-11 * s


@given(st.integers(3, 8), st.floats(0, 10), st.floats(0, 10))
def test_convex_between_zeros(r, a1, a2):
    f = build_psi(r, a1, a2)
    dd = pw.derivative(f, 2)
    z0, z1 = psi_zeros(r, a1, a2)
    for lo, hi in ((z0, z1), (z1, z0 + f.period)):
        inner = np.linspace(lo, hi, 403)[1:-1]
        v = pw.evaluate(dd, inner)
        tol = 1e-10 * pw.sup_norm(dd)
        assert np.all(v >= -tol) or np.all(v <= tol)


def test_sup_norm_at_first_zero_of_lower_order():
    for r, a1, a2 in [(3, 1, 1), (4, 0.5, 3), (5, 2, 0)]:
        z = psi_zeros(r - 1, a1, a2)[0]
        assert abs(pw.evaluate(build_psi(r, a1, a2), z)) == pytest.approx(pw.sup_norm(build_psi(r, a1, a2)), rel=1e-13)
