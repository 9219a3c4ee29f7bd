from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as hst

from singlab import hermite_spectral as hs
from singlab.numerics_core import MultiIndex, ParameterError, multi_indices

betas = hst.tuples(*[hst.integers(0, 3)] * 3).map(MultiIndex)


@given(betas)
def test_mode_eigenvalue_and_norm(beta):
    m = hs.hermite_mode(beta)
    assert m.eigenvalue == Fraction(-beta.order, 2)
    assert hs.eigen_residual(m).is_zero()
    assert m.norm_sq == Fraction(4 ** beta.order, beta.factorial())


@given(betas, hst.integers(0, 2))
def test_derivative_shift(beta, axis):
    if beta.exponents[axis] == 0:
        with pytest.raises(ParameterError):
            hs.derivative_shift(beta, axis)
    else:
        assert hs.derivative_shift(beta, axis) == Fraction(-beta.exponents[axis], 2)


def test_low_order_polynomials():
    assert hs.hermite_mode((0, 0, 0)).polynomial == 1
    assert hs.hermite_mode((1, 0, 0)).polynomial == Fraction(-1, 2) * hs.Y1


@pytest.mark.parametrize("k", [1, 2, 3])
def test_solenoidal_basis(k):
    basis = hs.solenoidal_basis(k)
    assert len(basis) == k * (k + 2)
    for mode in basis:
        assert hs.is_solenoidal_member(mode.components, k)
        assert mode.eigenvalue == Fraction(-k, 2)
    assert len({m.label for m in basis}) == len(basis)


def test_basis_bounds():
    with pytest.raises(ParameterError):
        hs.solenoidal_basis(0)
    with pytest.raises(ParameterError):
        hs.solenoidal_basis(7)


def test_table_verdicts():
    v = {t.label: t for t in hs.adjudicate_hp1()}
    assert v["v26"].status == "repaired"
    comp, poly = v["v26"].repair
    assert comp == 0 and poly == -(hs.Y1 * hs.Y3)
    assert not v["v26"].weighted_divergence.is_zero()
    assert all(t.status == "confirmed" for k, t in v.items() if k != "v26")


def test_direct_modes_divergence_free():
    for mode in hs.solenoidal_basis(2):
        assert hs.plain_divergence_of_direct(mode.components).is_zero()


def test_gram_small():
    entries = hs.gram_matrix(2)
    for e in entries:
        if e.beta == e.gamma:
            assert e.value > 0
        else:
            assert e.is_exact_zero
    with pytest.raises(ParameterError):
        hs.gram_matrix(7)


def test_pairing_diagonal_is_one():
    for k in range(4):
        for b in multi_indices(k):
            assert hs.pairing(b, b) == 1
    e = hs.gram_matrix(1)
    assert all(x.deviation_from_one == 0 for x in e if x.beta == x.gamma)
    assert all(x.deviation_from_one is None for x in e if x.beta != x.gamma)


@pytest.mark.parametrize("family", sorted(hs.LADDERS))
def test_ladders(family):
    value, mult = hs.spectral_ladder(family, 2)
    lam, count = hs.LADDERS[family]
    assert value == lam(2) and mult == count(2)


def test_planar_radial_modes_and_swirl():
    for j in range(4):
        p = hs.planar_radial_mode(j)
        assert hs.angular_derivative(p).is_zero()
        assert hs.swirl_invariance(p, Fraction(7, 3)).is_zero()
    with pytest.raises(ParameterError):
        hs.swirl_invariance(hs.Y1, 1)


def test_basis_rows_cover_all_modes():
    rows = hs.basis_rows(2)
    assert {r[1] for r in rows} == {m.label for k in (1, 2) for m in hs.solenoidal_basis(k)}
    assert all(r[5] > 0 for r in rows)


def test_adjoint_operator_on_monomials():
    for k in range(4):
        for b in multi_indices(k):
            m = hs.hermite_mode(b)
            assert hs.in_hermite_span(m.polynomial, k)
