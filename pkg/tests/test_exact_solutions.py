import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from singlab import coordinate_residuals as cr
from singlab import exact_solutions as es
from singlab.numerics_core import ParameterError


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(3)


def test_sl_values_at_known_points():
    assert es.slezkin_landau_cartesian(2).evaluate("u", [1, 0, 0]) == pytest.approx(-0.5)
    assert es.slezkin_landau_spherical(2).evaluate("v", [1, np.pi / 2, 0]) == pytest.approx(1.0)


def test_sl_rejects_bad_c():
    with pytest.raises(ParameterError):
        es.slezkin_landau_cartesian(0.5)


def test_sl_cross_check_ratios(rng):
    cc = es.sl_cross_check(5, rng.normal(size=(5, 3)))
    assert cc.radial_fit == pytest.approx(-2.0, abs=1e-12)
    assert cc.polar_fit == pytest.approx(-1.0, abs=1e-12)
    assert cc.radial_spread < 1e-12 and cc.polar_spread < 1e-12


def test_printed_spherical_profiles_fail_canonical_pass(rng):
    pts = np.column_stack([rng.uniform(.5, 2, 10), rng.uniform(.3, 2.8, 10), rng.uniform(0, 6, 10)])
    printed = cr.nse_residual(es.slezkin_landau_spherical(3.0, "printed"), pts).max_residual
    canon = cr.nse_residual(es.slezkin_landau_spherical(3.0, "canonical"), pts).max_residual
    assert canon < 1e-8 < printed


def test_flux_coefficient():
    reports = [es.sl_flux_coefficient(10, R) for R in (0.5, 1.0, 2.0)]
    vals = [r.value for r in reports]
    assert max(vals) - min(vals) < 1e-12 * abs(vals[0])
    assert all(abs(r.mass_flux) < 1e-12 for r in reports)
    forms = reports[0].closed_forms
    assert forms["repaired"] == pytest.approx(vals[0], rel=1e-12)
    assert abs(forms["printed"] - vals[0]) > 1.0


def test_large_c_expansion():
    c = 200.0
    v = es.sl_flux_coefficient(c).value
    forms = es.flux_closed_forms(c)
    assert abs(forms["derived_expansion"] - v) < abs(forms["printed_expansion"] - v) / 100


def test_large_c_limit_decays():
    rows = es.sl_large_c_limit([0.3, 0.4, 0.5])
    gaps = [abs(r.third_vs_derived) for r in rows]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] * 1000 == pytest.approx(gaps[1] * 100, rel=0.05)


def test_oseen_moffatt(rng):
    om = es.oseen_moffatt_vortex(1.3, 1.0)
    pts = np.column_stack([rng.uniform(.1, 3, 20), np.zeros(20), np.zeros(20), rng.uniform(-2, .9, 20)])
    rep = es.vortex_report(om, pts)
    assert rep.curl_mismatch < 1e-10 and rep.heat_residual < 1e-10


def test_simple_fields(rng):
    pts = rng.uniform(-1, 1, (10, 3))
    assert cr.nse_residual(es.rigid_rotation(2.0), pts).max_residual < 1e-10
    assert cr.nse_residual(es.zero_field(), pts).max_residual == 0


def test_von_karman():
    sol = es.von_karman([0.1, 0.2, -0.3, 0.5, 0.1])
    assert sol.agreement() < 1e-10
    assert sol.ode_residual() < 1e-8
    f0, f1, f2, f3, g0, g1, g2 = (0.3, -0.2, 0.1, 0.4, 0.2, 0.5, -0.1)
    r1, r2 = es.von_karman_ode_residual(f0, f1, f2, f3, g0, g1, g2)
    assert np.isfinite(r1) and np.isfinite(r2)


def test_yaceev_closed_branch():
    # alpha + beta = 1 and gamma = 0: chi is sin^2(theta) here, 1 - cos(theta) in the printed form
    th = np.linspace(0.3, 2.8, 9)
    y = es.yaceev(-1, 2, 0, c1=0, c2=1)
    assert y.evaluate("v_hat", [[1, 1.0, 0]])[0] == pytest.approx(-4 / math.tan(1))
    assert cr.yaceev_reduced(y, th).max_residual < 1e-8
    yp = es.yaceev(-1, 2, 0, c1=0, c2=1, form="printed")
    assert yp.evaluate("v_hat", [[1, 1.0, 0]])[0] == pytest.approx(-2 * math.sin(1) / (1 - math.cos(1)))
    assert cr.yaceev_reduced(yp, th).max_residual < 1e-8


@pytest.mark.parametrize("args", [(0.3, 0.4, 0.7, 1, 0.5), (0.2, 1.4, 0.9, 1, 0.0),
                                  (0.3, 0.7, 0.4, 0, 1), (-0.6, 0.3, 1.7, 0.4, 1.0)])
def test_yaceev_generic_members(args):
    th = np.linspace(0.4, 2.7, 7)
    assert cr.yaceev_reduced(es.yaceev(*args), th).max_residual < 1e-8
    assert cr.yaceev_reduced(es.yaceev(*args, form="printed"), th).max_residual > 1e-3


def test_yaceev_constants_forms_agree_when_sum_is_zero_or_one():
    for s in (0.0, 1.0):
        p = es.yaceev_constants(s - 0.3, 0.3, 0.6, "printed")
        r = es.yaceev_constants(s - 0.3, 0.3, 0.6, "repaired")
        assert p["b"] == pytest.approx(r["b"]) and p["a"] == r["a"]
    with pytest.raises(ParameterError):
        es.yaceev_constants(0, 0, 1, "other")


@settings(max_examples=15, deadline=None)
@given(hst.floats(-0.5, 0.5), hst.floats(-0.5, 0.5), hst.floats(0.5, 3))
def test_squire_repaired_form_is_quadratic(alpha, beta, b):
    assert es.squire_residual(es.squire(alpha, beta, b, "repaired")).bernoulli_residual < 1e-9


def test_squire_printed_form_is_not():
    assert es.squire_residual(es.squire(0.3, 0.2, 2.5, "printed")).bernoulli_residual > 1e-3


def test_squire_stream_integration():
    assert es.squire_integrate(0.4, (0.1, 0.2, 0.3))["quadratic_residual"] < 1e-10


@pytest.mark.parametrize("A", [2.0, 3.0, 5.0, 7.5])
def test_landau_from_riccati(A):
    sol, dev = es.landau_from_riccati(A)
    assert dev < 1e-10
    tau = np.linspace(-0.9, 0.9, 7)
    assert np.allclose(es.landau_profile(A)(tau), -2 * (1 - tau ** 2) / (A + tau))


def test_riccati_forms_disagree_when_Q_nonzero():
    p = es.RiccatiParams(1.0, 0.5, 0.2, 1.0)
    ident = es.slezkin_riccati(p, f0=0.3, form="identity")
    printed = es.slezkin_riccati(p, f0=0.3, form="printed")
    assert ident.identity_residual < 1e-10
    assert printed.identity_residual > 1e-3
    q0 = es.RiccatiParams(0.0, 0.0, 0.0, 1.0)
    for form in es.LINEAR_FORMS:
        s = es.slezkin_riccati(q0, f0=0.3, form=form)
        assert s.identity_residual < 1e-10
