import numpy as np
import pytest
import sympy as sp

from singlab import coordinate_residuals as cr
from singlab import exact_solutions as es
from singlab.coordinate_residuals import MU, TAU, Y, phi, r, t, theta


@pytest.fixture
def rng():
    return np.random.default_rng(11)


@pytest.fixture
def cyl(rng):
    return np.column_stack([rng.uniform(.5, 2, 8), rng.uniform(0, 6, 8), rng.uniform(-1, 1, 8),
                            rng.uniform(-2, -0.2, 8)])


@pytest.fixture
def tw(rng):
    return np.column_stack([rng.uniform(.5, 2, 8), rng.uniform(0, 6, 8), rng.uniform(-1, 1, 8)])


def test_scale_factors():
    assert cr.scale_factors("cartesian") == (1, 1, 1)
    assert len(cr.scale_factors("spherical")) == 3


def test_sl_cartesian_residual(rng):
    pts = rng.uniform(-1, 1, (15, 3))
    pts = pts[np.linalg.norm(pts, axis=1) > 0.3]
    rep = cr.nse_residual(es.slezkin_landau_cartesian(3.0), pts)
    assert rep.max_residual < 1e-10
    assert np.max(np.abs(cr.divergence(es.slezkin_landau_cartesian(3.0), pts))) < 1e-12


def test_report_shape(rng):
    rep = cr.nse_residual(es.rigid_rotation(1.0), rng.uniform(-1, 1, (4, 3)))
    assert len(rep.equations) == len(rep.max_abs)
    assert rep.max_residual == max(rep.max_abs)


def test_vortex_is_backward_viscous_not_inviscid(cyl):
    om = es.oseen_moffatt_vortex(1.3, 1.0)
    assert cr.euler_residual(om, cyl, nu=-1.0).max_residual < 1e-8
    assert cr.euler_residual(om, cyl).max_residual > 1e-3


def test_w2_exact_blowup(cyl):
    s = -t
    rep = cr.w2_consistency(r / (2 * s), 0, -1 / s, -3 * r ** 2 / (8 * s ** 2), cyl)
    assert rep.printed.max_residual < 1e-10
    assert rep.oracle.max_residual < 1e-10


def test_w2_generic_agrees_with_oracle(cyl):
    rep = cr.w2_consistency(sp.sin(phi) * r ** 2 * sp.exp(t), r * sp.cos(phi), t * r,
                            r ** 3 * sp.sin(2 * phi), cyl)
    assert rep.difference.max_residual < 1e-9
    assert rep.flagged == () or not rep.flagged


@pytest.mark.parametrize("stationary", [False, True])
def test_twistor_exact_profile(tw, stationary):
    rep = cr.twistor_residual(Y / 2, 0, -1, -3 * Y ** 2 / 8, 0.0, tw, stationary=stationary)
    assert rep.printed.max_residual < 1e-10
    assert rep.oracle.max_residual < 1e-10


@pytest.mark.parametrize("stationary", [False, True])
def test_twistor_printed_flagged_derived_agrees(tw, stationary):
    gen = (Y * sp.sin(MU) + (0 if stationary else TAU * Y ** 2), Y ** 2 * sp.cos(MU),
           Y * sp.sin(2 * MU), Y ** 3 * sp.cos(MU))
    printed = cr.twistor_residual(*gen, 0.7, tw, stationary=stationary)
    derived = cr.twistor_residual(*gen, 0.7, tw, stationary=stationary, form="derived")
    assert printed.difference.max_residual > 1e-3 and printed.flagged
    assert derived.difference.max_residual < 1e-9


def test_potential_vortex_separates_printed_forms(tw):
    stat = cr.twistor_residual(0, 1.5 / Y, 0, -1.125 / Y ** 2, 0.0, tw, stationary=True)
    dyn = cr.twistor_residual(0, 1.5 / Y, 0, -1.125 / Y ** 2, 0.0, tw, stationary=False)
    assert stat.printed.max_residual < 1e-10
    assert stat.oracle.max_residual < 1e-10
    assert dyn.printed.max_residual > 1e-3


def test_circle_exact_and_zero():
    c = cr.circle_system(-4, 0, 0, -8, 0.0)
    assert c.full.max_residual == 0 and c.irrotational.max_residual == 0
    assert cr.circle_system(0, 0, 0, 0, 0.0).full.max_residual == 0


def test_circle_nonsolution_detected():
    assert cr.circle_system(-4, 0, 0, -7, 0.0).full.max_residual > 1e-3


def test_circle_generic_consistency():
    g = cr.circle_system(sp.cos(phi), sp.sin(phi) + sp.cos(2 * phi),
                         -sp.cos(phi) + 2 * sp.sin(2 * phi), sp.sin(3 * phi), 0.4)
    assert g.elimination_gap < 1e-9
    assert g.oracle_gap.max_residual < 1e-9


def test_spherical_homogeneous(rng):
    d = es.sl_angular_profiles(3.0, "canonical")
    ang = np.column_stack([np.linspace(.3, 2.8, 9), rng.uniform(0, 6, 9)])
    assert cr.spherical_homogeneous(d["u_hat"], d["v_hat"], 0, d["p_hat"], ang).printed.max_residual < 1e-8
    g = (sp.sin(theta) * sp.cos(phi), sp.cos(theta) * sp.sin(2 * phi),
         sp.sin(theta) ** 2 * sp.cos(phi), sp.cos(theta) * sp.sin(phi))
    assert cr.spherical_homogeneous(*g, ang).difference.max_residual < 1e-9
    assert cr.spherical_homogeneous(*g, ang, stray_r=2.0).flagged


def test_yaceev_reduced_examples():
    th = np.linspace(0.3, 2.8, 9)
    ex = cr.yaceev_reduced({"u_hat": -2 * sp.cos(theta), "v_hat": sp.sin(theta), "p_hat": 0}, th)
    assert ex.max_abs[ex.equations.index("continuity")] < 1e-14
    zero = cr.yaceev_reduced({"u_hat": 0, "v_hat": 0, "p_hat": 0}, th)
    assert zero.max_residual == 0


def test_rescaled_local_system(rng):
    sl = es.slezkin_landau_cartesian(3.0).components
    pts = rng.uniform(-1, 1, (10, 3))
    pts = pts[np.linalg.norm(pts, axis=1) > 0.3]
    a, b = cr.rescaled_nse_local([sl["u"], sl["v"], sl["w"]], sl["p"], pts)
    assert a.max_residual < 1e-10 and b.max_residual < 1e-10


def test_squire_stream_residual_zero_for_consistent_state():
    assert cr.squire_stream_residual(0.0, 0.0, 0.0, 0.0, 0.2, 0.0) == pytest.approx(0.0)
