import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst
from scipy.special import hyp2f1

from singlab.numerics_core import (
    BracketError, ExactPolynomial3, IvpProblem, MultiIndex, NonConvergenceError,
    ParameterError, bisect, fd_derivative, find_root, gauss_legendre, gaussian_moment,
    gaussian_moment_float, gaussian_weight_rule, integrate_fixed_rk8, integrate_ivp,
    kummer_F, kummer_F_derivative, multi_indices, richardson, spectral_derivative, sphere_rule,
)

Y1, Y2, Y3 = (ExactPolynomial3.variable(i) for i in range(3))
coef = hst.integers(-5, 5)


@hst.composite
def polys(draw, max_deg=3):
    terms = draw(hst.dictionaries(
        hst.tuples(*[hst.integers(0, max_deg)] * 3), coef, max_size=4))
    return ExactPolynomial3(terms)


def test_multi_indices_count_and_order():
    for k in range(7):
        idx = multi_indices(k)
        assert len(idx) == (k + 1) * (k + 2) // 2
        assert all(m.order == k for m in idx)
    assert multi_indices(1)[0] == MultiIndex((1, 0, 0))


def test_multi_index_rejects_negative():
    with pytest.raises(ParameterError):
        MultiIndex((1, -1, 0))


@given(polys(), polys(), polys())
def test_ring_axioms(p, q, r):
    assert (p + q) * r == p * r + q * r
    assert p * q == q * p
    assert (p - p).is_zero()


@given(polys(), polys(), hst.integers(0, 2))
def test_product_rule(p, q, axis):
    assert (p * q).diff(axis) == p.diff(axis) * q + p * q.diff(axis)


@given(polys(), hst.tuples(*[hst.floats(-2, 2)] * 3))
def test_evaluation_matches_terms(p, y):
    expected = sum(float(c) * y[0] ** a * y[1] ** b * y[2] ** d for (a, b, d), c in p.terms.items())
    assert p(*y) == pytest.approx(expected, abs=1e-9)


def test_scalar_multiple():
    p = Y1 * Y2 + 3
    assert (Fraction(2, 3) * p).scalar_multiple_of(p) == Fraction(2, 3)
    assert (Y1 * Y2).scalar_multiple_of(p) is None


def test_gaussian_moments_exact():
    # int exp(-|y|^2/4) dy = (4 pi)^{3/2}
    m = gaussian_moment(ExactPolynomial3.constant(1))
    assert float(m) == pytest.approx((4 * math.pi) ** 1.5, rel=1e-14)
    assert gaussian_moment(Y1).is_zero()
    second = gaussian_moment(Y1 * Y1)
    assert float(second) == pytest.approx(2 * (4 * math.pi) ** 1.5, rel=1e-14)


def test_gaussian_moment_float_agrees_with_quadrature():
    p = Y1 * Y1 * Y2 * Y2 + Y3 * Y3 * Y3 * Y3
    rule = gaussian_weight_rule(60, width=1.0, truncation=8.0)
    quad = rule.integrate(lambda a, b, c: p(a, b, c) * np.exp(-0.5 * (a * a + b * b + c * c)))
    assert gaussian_moment_float(p, 0.5) == pytest.approx(quad, rel=1e-10)


def test_gauss_legendre_and_sphere():
    assert gauss_legendre(8, 0, 2).integrate(lambda x: x ** 5) == pytest.approx(64 / 6)
    area = sphere_rule(10, 2.0).integrate(lambda x, y, z: np.ones_like(x))
    assert area == pytest.approx(16 * math.pi, rel=1e-13)
    z2 = sphere_rule(10).integrate(lambda x, y, z: z * z)
    assert z2 == pytest.approx(4 * math.pi / 3, rel=1e-13)


def test_adaptive_against_exact_and_rk8():
    prob = IvpProblem(lambda t, y: np.array([y[1], -y[0]]), [0.0, 1.0], (0.0, 10.0), 1e-12, 1e-14)
    a = integrate_ivp(prob)
    f = integrate_fixed_rk8(prob, 2000)
    assert a.status == "completed" and f.status == "completed"
    assert a.y_end[0] == pytest.approx(math.sin(10), abs=1e-9)
    assert f.y_end[0] == pytest.approx(math.sin(10), abs=1e-12)
    assert a(5.0)[0] == pytest.approx(math.sin(5), abs=1e-9)


def test_rk8_order():
    prob = IvpProblem(lambda t, y: -y, [1.0], (0.0, 1.0))
    e1 = abs(integrate_fixed_rk8(prob, 4).y_end[0] - math.exp(-1))
    e2 = abs(integrate_fixed_rk8(prob, 8).y_end[0] - math.exp(-1))
    assert e1 / e2 > 2 ** 7


def test_blowup_raises_nonconvergence():
    prob = IvpProblem(lambda t, y: y ** 2, [1.0], (0.0, 2.0))
    with pytest.raises(NonConvergenceError):
        integrate_ivp(prob)
    assert integrate_ivp(prob, raise_on_failure=False).status == "failed"


def test_bad_problem():
    with pytest.raises(ParameterError):
        IvpProblem(lambda t, y: y, [1.0], (0.0, 0.0))
    with pytest.raises(ParameterError):
        IvpProblem(lambda t, y: y, [1.0], (0.0, 1.0), rtol=0)


def test_fd_derivatives():
    r = fd_derivative(np.sin, 0.7, 1)
    assert r.value == pytest.approx(math.cos(0.7), abs=1e-11)
    assert abs(r.value - math.cos(0.7)) <= r.error
    r4 = fd_derivative(np.sin, 0.7, 4, h0=0.2)
    assert r4.value == pytest.approx(math.sin(0.7), abs=1e-7)
    mixed = fd_derivative(lambda z: np.sin(z[0]) * np.exp(z[1]), [0.3, 0.2], (1, 1))
    assert mixed.value == pytest.approx(math.cos(0.3) * math.exp(0.2), abs=1e-9)


def test_richardson_removes_even_errors():
    r = richardson(lambda h: 2.0 + h * h + h ** 4, 0.5, levels=4)
    assert r.value == pytest.approx(2.0, abs=1e-13)


def test_roots():
    f = lambda x: x ** 3 - 2
    assert find_root(f, (0, 2)) == pytest.approx(2 ** (1 / 3), abs=1e-13)
    assert bisect(f, (0, 2)) == pytest.approx(2 ** (1 / 3), abs=1e-12)
    with pytest.raises(BracketError):
        find_root(f, (2, 3))


@settings(max_examples=40)
@given(hst.floats(-3, 3), hst.floats(-3, 3), hst.floats(0.5, 4), hst.floats(-0.8, 0.8))
def test_kummer_against_scipy(a, b, c, z):
    assert kummer_F(a, b, c, z) == pytest.approx(hyp2f1(a, b, c, z), rel=1e-11, abs=1e-12)


def test_kummer_values_and_errors():
    assert kummer_F(1, 1, 2, 0.5) == pytest.approx(2 * math.log(2), abs=1e-14)
    assert kummer_F(2, 3, 3, 0.5) == pytest.approx(4, abs=1e-13)
    h = 1e-5
    num = (kummer_F(1.2, 0.4, 2, 0.3 + h) - kummer_F(1.2, 0.4, 2, 0.3 - h)) / (2 * h)
    assert kummer_F_derivative(1.2, 0.4, 2, 0.3) == pytest.approx(num, rel=1e-8)
    with pytest.raises(ParameterError):
        kummer_F(1, 1, 2, 1.0)
    with pytest.raises(ParameterError):
        kummer_F(1, 1, -2, 0.5)


def test_spectral_derivative():
    x = 2 * np.pi * np.arange(32) / 32
    d = spectral_derivative(np.sin(3 * x))
    assert np.max(np.abs(d - 3 * np.cos(3 * x))) < 1e-12
    d2 = spectral_derivative(np.cos(x), order=2)
    assert np.max(np.abs(d2 + np.cos(x))) < 1e-12
