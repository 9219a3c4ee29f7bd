import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from singlab import scaling_transforms as st
from singlab.hermite_spectral import solenoidal_basis
from singlab.numerics_core import DomainError, ParameterError


def _sample(rng, kind, n=20):
    if kind == "twistor":
        return st.FrameSample(np.column_stack([rng.uniform(0.1, 3, n), rng.uniform(0, 6, n)]),
                              -rng.uniform(0.01, 2, n), rng.normal(size=(n, 4)),
                              ("velocity", "velocity", "axial", "pressure"))
    return st.FrameSample(rng.normal(size=(n, 3)), rng.uniform(0.01, 0.99, n),
                          rng.normal(size=(n, 4)), ("velocity",) * 3 + ("pressure",))


def _frame(kind, **kw):
    base = dict(T=0.0 if kind == "twistor" else 1.0, sigma=2.0, Ck=8.0, x_k=(0.1, 0.2, 0.3), t_k=0.1)
    base.update(kw)
    return st.ScalingFrame(kind, **base)


@settings(max_examples=25, deadline=None)
@given(hst.sampled_from(st.FRAME_KINDS), hst.integers(0, 2 ** 31))
def test_round_trip(kind, seed):
    rng = np.random.default_rng(seed)
    assert st.round_trip_error(_frame(kind), _sample(rng, kind)) <= 1e-13


def test_frame_validation():
    with pytest.raises(ParameterError):
        st.ScalingFrame("bogus")
    with pytest.raises(DomainError):
        st.ScalingFrame("ck-rescale", Ck=0.5)
    with pytest.raises(DomainError):
        st.ScalingFrame("blowup-similarity", T=1.0).log_time(1.5)
    with pytest.raises(DomainError):
        st.ScalingFrame("global-similarity").log_time(-1.0)


def test_frame_serialisation():
    f = _frame("ck-rescale")
    assert st.ScalingFrame.from_dict(f.to_dict()) == f


def test_log_time_inverse():
    f = st.ScalingFrame("blowup-similarity", T=2.0)
    assert f.physical_time(f.log_time(0.5)) == pytest.approx(0.5)
    g = st.ScalingFrame("global-similarity")
    assert g.log_time(math.e) == pytest.approx(1.0)


def test_exponents():
    _, amp = st.ScalingFrame("burnett", T=1.0).factors(0.0, ("velocity", "pressure"))
    assert amp == pytest.approx([1.0, 1.0])
    length, amp = st.ScalingFrame("blowup-similarity", T=1.0).factors(0.75, ("velocity", "pressure"))
    assert length == pytest.approx(0.5) and amp == pytest.approx([2.0, 4.0])
    ck = st.ScalingFrame("ck-rescale", Ck=8.0)
    assert ck.a_k == pytest.approx(0.25) and ck.delta_k == pytest.approx(2.0)


def test_translation_composes():
    rng = np.random.default_rng(1)
    f = st.ScalingFrame("blowup-similarity", T=1.0)
    s = st.FrameSample(rng.normal(size=(5, 3)), rng.uniform(0, .5, 5), rng.normal(size=(5, 3)))
    a = st.rescale(f, s)
    b = st.rescale(f.translated(0.4), st.FrameSample(s.coords, s.times + 0.4, s.values))
    assert np.allclose(a.coords, b.coords) and np.allclose(a.times, b.times)
    with pytest.raises(ParameterError):
        st.ScalingFrame("global-similarity").translated(1.0)


def test_twistor_angle_drifts():
    assert st.twistor_angle(0.3, 3.0, 2.0) - st.twistor_angle(0.3, 0.0, 2.0) == pytest.approx(6.0)


def test_ck_rescale_bump():
    r = st.ck_rescale(st.gaussian_bump(10.0, 0.7, centre=(0.2, 0, 0)))
    assert r.sup_after == pytest.approx(1.0, abs=1e-9)
    assert r.l2_relative_change < 1e-8
    assert r.Ck == pytest.approx(r.sup_before)


def test_functionals_of_zero_and_mode():
    z = st.functionals(st.VectorField(lambda x: np.zeros((len(x), 3)),
                                      lambda x: np.zeros((len(x), 3, 3))))
    assert z.energy == 0 and z.dissipation == 0 and z.conclusive
    mf = st.mode_field(solenoidal_basis(2)[1].components)
    fn = st.functionals(mf, tau=1.0)
    assert max(abs(m) for m in fn.masses) < 1e-10
    assert fn.l2_growth == pytest.approx(math.exp(0.5), rel=1e-9)


def test_stokes_evolution_and_projection():
    m1, m2 = solenoidal_basis(1)[0].label, solenoidal_basis(2)[0].label
    st1 = st.StokesModeState({m1: 1.0})
    assert st.stokes_mode_evolution(st1, 2.0).coefficients[m1] == pytest.approx(math.exp(-2))
    assert st.stokes_rate(3) == -2
    state = st.StokesModeState({m1: 1.0, m2: -0.5})
    trip = state.polynomials()
    p1 = st.project(st.evolve_polynomial_field(trip, 1.3), 3)
    p2 = st.stokes_mode_evolution(st.project(trip, 3), 1.3)
    assert max(abs(p1.coefficients[k] - p2.coefficients[k]) for k in p1.coefficients) < 1e-12


def test_energy_identity_forms():
    m1, m2 = solenoidal_basis(1)[0].label, solenoidal_basis(2)[0].label
    state = st.StokesModeState({m1: 1.0, m2: -0.5})
    assert st.energy_identity(state, 0.3, form="weighted").passed
    printed = st.energy_identity(state, 0.3, form="printed")
    assert not printed.passed and printed.relative == pytest.approx(0.75, rel=1e-6)
    with pytest.raises(ParameterError):
        st.energy_identity(state, form="nope")


def test_energy_identity_on_l2_flow():
    e = st.energy_identity(st.heat_stokes_blowup((0.3, 0.0, 1.0), 1.0), 0.7, form="printed")
    assert e.relative < 1e-8


def test_slow_swirl():
    assert st.slow_swirl(st.kappa_profile("logtw"), -0.3, 2.0).value == pytest.approx(2.0)
    assert st.slow_swirl(st.kappa_profile("constant"), -0.3).value == 0
    vals, decreasing = st.slow_swirl_decay(st.kappa_profile("double-log", 1.0))
    assert decreasing and vals[0].value == pytest.approx(0.2457, abs=1e-4)
    with pytest.raises(DomainError):
        st.slow_swirl(st.kappa_profile("logtw"), 0.5)
    with pytest.raises(ParameterError):
        st.kappa_profile("other")
