import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as hst

from singlab import blowup_ode_lab as bl
from singlab.numerics_core import BracketError, ParameterError


def test_critical_exponents():
    e = bl.critical_exponents(bl.ExponentQuery(3))
    assert e["p_S(2m)"].value == 5
    assert e["p_star"].value is None and not e["p_star"].present
    assert e["nse_absorption_lower"].value == Fraction(7, 2)
    assert bl.critical_exponents(bl.ExponentQuery(7, m=2))["p_S(2m)"].value == Fraction(11, 3)
    assert bl.critical_exponents(bl.ExponentQuery(17))["p_star"].value == 1 + Fraction(4, 5)


@given(hst.integers(3, 40))
def test_sobolev_exponent_formula(N):
    assert bl.critical_exponents(bl.ExponentQuery(N))["p_S(2m)"].value == Fraction(N + 2, N - 2)


def test_query_validation():
    with pytest.raises(ParameterError):
        bl.ExponentQuery(0)
    with pytest.raises(ParameterError):
        bl.ExponentQuery(3, p=1.0)


@pytest.mark.parametrize("N,p", [(3, 4), (3, 5), (10, 2)])
def test_sss_profile(N, p):
    s = bl.emden_fowler_sss(N, p)
    assert s.exists and s.residual < 1e-12


def test_sss_profile_absent_below_threshold():
    assert not bl.emden_fowler_sss(3, 2).exists


def test_biharmonic():
    assert not bl.biharmonic_reduction(5, 3).exists
    b = bl.biharmonic_reduction(7, 3)
    assert b.exists and b.residual < 1e-12
    pc = bl.biharmonic_printed_coefficients(7, Fraction(2))
    dc = bl.biharmonic_derived_coefficients(7, Fraction(2))
    assert set(pc) == set(dc)


def test_autonomous_coefficient():
    af = bl.autonomous_form_coefficient(3)
    assert af.linear_derived == Fraction(-1, 4) and af.linear_printed == Fraction(-1, 8)
    assert af.discrepancy and af.verdict == "unadjudicated"
    assert bl.autonomous_form_coefficient(6).linear_derived == -4


def test_classification_of_stable_and_periodic_shots():
    out = bl.emden_fowler_shoot(3, 4.0, 0.1, 0.0, 60.0)
    assert out.label in ("stabilize+", "stabilize-")
    assert abs(out.phi[-1]) == pytest.approx((2 / 9) ** (1 / 3), abs=1e-4)


def test_unknown_preset():
    with pytest.raises(ParameterError):
        bl.run_preset("fig9")


def test_presets_match_expectations():
    for name in ("fig2a", "fig4a"):
        out = bl.run_preset(name)
        assert out.label in bl.PRESETS[name].expected


def test_regular_profile_and_separatrix():
    r = bl.regular_profile_shoot(3, 4, 6.0)
    r2 = bl.regular_profile_shoot(3, 4, -6.0)
    assert r.u_end == pytest.approx(-r2.u_end)
    a0 = bl.separating_amplitude(3, 4, (5.0, 7.0))
    assert abs(bl.regular_profile_shoot(3, 4, a0).u_end) < 1e-9
    with pytest.raises(BracketError):
        bl.separating_amplitude(3, 4, (5.0, 5.5))
    with pytest.raises(ParameterError):
        bl.regular_profile_shoot(3, 4, 0.0)


@pytest.mark.parametrize("N", [3, 4, 11, 17])
def test_fk_equilibrium(N):
    assert bl.fk_singular_equilibrium(N)["scaled_residual"] < 1e-12


def test_fk_exponents():
    assert bl.fk_exponents(11).delta == 3
    assert bl.fk_exponents(10).delta == 4
    assert bl.fk_exponents(3).b == pytest.approx(math.sqrt(7) / 2, abs=1e-15)
    assert bl.fk_exponents(10).hardy_equality
    assert bl.fk_exponents(3).oscillatory


def test_fk_ladder_eigenfunctions_are_polynomial_times_power():
    y = np.linspace(0.5, 3, 5)
    assert bl.fk_ladder(11, 2) == pytest.approx(-0.5)
    f = bl.fk_ladder_eigenfunction(11, 0, y)
    assert np.allclose(f, y ** -3.0)


def test_fk_spectrum_low_mode():
    e = bl.fk_spectrum_shoot(11, 4)
    assert e.found
    assert e.eigenvalue == pytest.approx(e.ladder, abs=1e-6)


def test_fk_inner_profile_band():
    p = bl.fk_inner_profile(11)
    assert p.band_max < 1e-3
    assert p.far_const == pytest.approx(math.log(18))


def test_rates_and_region_two():
    r = bl.blowup_rates(bl.RateInputs(-3, 3, 2.0, 2))
    assert r["alpha_k"] == 2 and r["critical_sobolev_rate"] == Fraction(5, 4)
    assert bl.region_two_exponents(3.0)["perturbation_coefficient"] == 1.5
    with pytest.raises(ParameterError):
        bl.blowup_rates(bl.RateInputs(gamma=0.5))


@pytest.mark.parametrize("N", [3, 4, 5])
def test_loewner_nirenberg(N):
    ln = bl.loewner_nirenberg(N)
    assert ln["residual"] < 1e-10


def test_hardy():
    h = bl.hardy_constants(3)
    assert h.c_H == Fraction(1, 4)
    assert h.axisymmetric_printed_formula == Fraction(19, 44)
    assert h.axisymmetric_repaired == h.axisymmetric_printed_value == Fraction(25, 68)
    assert all(h.holds(k) for k in h.quotients)
    assert bl.hardy_constants(10).c_H == 16


def test_hamilton_jacobi():
    a = bl.hamilton_jacobi_profile(3)
    assert a.compact and a.monotone
    assert a.endpoint == pytest.approx(1.5551203, abs=1e-6)
    two = bl.hamilton_jacobi_profile(2)
    assert not two.compact and two.reason
    with pytest.raises(ParameterError):
        bl.hamilton_jacobi_profile(1)
