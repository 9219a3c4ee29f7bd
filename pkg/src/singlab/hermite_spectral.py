"""Generalised Hermite eigenfunctions and solenoidal eigenspaces in exact arithmetic.

The adjoint operator is B* = Delta - (1/2) y.grad acting on polynomials in
R^3; its eigenfunctions are H_beta = D^beta F / F with the Gaussian
F = exp(-|y|^2/4).  Solenoidal adjoint modes are polynomial triples v*
whose Gaussian multiple v* F is divergence free, i.e.
div v* - (1/2) y.v* = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import sympy

from .numerics_core import (
    ExactPolynomial3,
    MultiIndex,
    ParameterError,
    SqrtPiMultiple,
    Y1,
    Y2,
    Y3,
    gaussian_moment,
    multi_indices,
)

Triple = tuple[ExactPolynomial3, ExactPolynomial3, ExactPolynomial3]
YS = (Y1, Y2, Y3)


def adjoint_operator(p: ExactPolynomial3) -> ExactPolynomial3:
    """B* p = Delta p - (1/2) y . grad p."""
    return p.laplacian() - Fraction(1, 2) * p.euler()


def gaussian_derivative_step(p: ExactPolynomial3, axis: int) -> ExactPolynomial3:
    """Polynomial part of D_axis (p F): D_axis p - (y_axis / 2) p."""
    return p.diff(axis) - Fraction(1, 2) * YS[axis] * p


def weighted_divergence(v: Sequence[ExactPolynomial3]) -> ExactPolynomial3:
    """div v - (1/2) y.v, the polynomial part of div(v F)."""
    total = ExactPolynomial3()
    for i in range(3):
        total = total + gaussian_derivative_step(v[i], i)
    return total


def plain_divergence(v: Sequence[ExactPolynomial3]) -> ExactPolynomial3:
    return v[0].diff(0) + v[1].diff(1) + v[2].diff(2)


# ---------------------------------------------------------------------------
# Scalar modes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HermiteMode:
    index: MultiIndex
    polynomial: ExactPolynomial3   # H_beta = D^beta F / F (unnormalised)
    eigenvalue: Fraction
    norm_sq: Fraction              # c_beta^2 = 4^{|beta|} / beta!

    @property
    def normalisation(self) -> float:
        return math.sqrt(self.norm_sq)


@lru_cache(maxsize=None)
def _gaussian_derivative_poly(beta: MultiIndex) -> ExactPolynomial3:
    if beta.order == 0:
        return ExactPolynomial3.constant(1)
    for axis in range(3):
        if beta.exponents[axis] > 0:
            lower = _gaussian_derivative_poly(beta.shifted(axis, -1))
            return gaussian_derivative_step(lower, axis)
    raise AssertionError


def hermite_mode(beta: MultiIndex | Sequence[int]) -> HermiteMode:
    """psi*_beta = c_beta D^beta F / F with its eigen-identity checked exactly."""
    beta = beta if isinstance(beta, MultiIndex) else MultiIndex(tuple(beta))
    poly = _gaussian_derivative_poly(beta)
    lam = Fraction(-beta.order, 2)
    if adjoint_operator(poly) != lam * poly:
        raise AssertionError(f"eigen-identity fails for beta={beta}")
    return HermiteMode(beta, poly, lam, Fraction(4 ** beta.order, beta.factorial()))


def eigen_residual(mode: HermiteMode) -> ExactPolynomial3:
    return adjoint_operator(mode.polynomial) - mode.eigenvalue * mode.polynomial


def derivative_shift(beta: MultiIndex, axis: int) -> Fraction | None:
    """Rational r with D_axis H_beta = r H_{beta - e_axis}, or None if no such r."""
    if beta.exponents[axis] == 0:
        raise ParameterError("direction needs a positive exponent")
    d = _gaussian_derivative_poly(beta).diff(axis)
    return d.scalar_multiple_of(_gaussian_derivative_poly(beta.shifted(axis, -1)))


# ---------------------------------------------------------------------------
# Spectral ladders
# ---------------------------------------------------------------------------

LADDERS = {
    # adjoint blow-up operator shifted by -1/2
    "adjoint-blowup": (lambda k: Fraction(-k, 2) - Fraction(1, 2),
                       lambda k: (k + 1) * (k + 2) // 2),
    # direct operator for global similarity, shifted by -1
    "direct-global": (lambda k: Fraction(-k, 2) - 1, lambda k: (k + 1) * (k + 2) // 2),
    # planar radial modes of B*, indexed by lambda_{2k}
    "radial-2D": (lambda k: Fraction(-k), lambda k: 1),
    # planar radial modes of B* + I
    "shifted-2D": (lambda k: Fraction(1 - 2 * k), lambda k: 1),
    # all planar modes of B* + I indexed by |beta|
    "twistor-linearized": (lambda k: Fraction(1 - k), lambda k: k + 1),
    # fourth-order operator -Delta^2 - (1/4) y.grad
    "burnett": (lambda k: Fraction(-k, 4), lambda k: (k + 1) * (k + 2) // 2),
}


@dataclass(frozen=True)
class SpectralLadder:
    family: str

    def eigenvalue(self, order: int) -> Fraction:
        return spectral_ladder(self.family, order)[0]


def spectral_ladder(family: str, order: int) -> tuple[Fraction, int]:
    if family not in LADDERS:
        raise ParameterError(f"unknown ladder family {family!r}")
    if order < 0:
        raise ParameterError("order must be non-negative")
    lam, mult = LADDERS[family]
    return lam(order), mult(order)


# ---------------------------------------------------------------------------
# Solenoidal modes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolenoidalMode:
    components: Triple
    degree: int
    eigenvalue: Fraction
    label: str = ""

    def weighted_divergence(self) -> ExactPolynomial3:
        return weighted_divergence(self.components)


def _monomials_upto(deg: int) -> list[tuple[int, int, int]]:
    return [m.exponents for d in range(deg, -1, -1) for m in multi_indices(d)]


@lru_cache(maxsize=None)
def _solenoidal_nullspace(k: int) -> tuple[Triple, ...]:
    """Exact nullspace of v* -> div v* - (1/2) y.v* on triples of order-k Hermite polynomials."""
    betas = multi_indices(k)
    columns: list[Triple] = []
    for comp in range(3):
        for b in betas:
            trip = [ExactPolynomial3(), ExactPolynomial3(), ExactPolynomial3()]
            trip[comp] = _gaussian_derivative_poly(b)
            columns.append(tuple(trip))
    images = [weighted_divergence(c) for c in columns]
    rows = _monomials_upto(k + 1)
    mat = sympy.Matrix(len(rows), len(columns),
                       lambda i, j: sympy.Rational(images[j].terms.get(rows[i], 0)))
    basis = []
    for vec in mat.nullspace():
        trip = [ExactPolynomial3(), ExactPolynomial3(), ExactPolynomial3()]
        # clear denominators for readability
        lcm = sympy.ilcm(*[sympy.fraction(x)[1] for x in vec]) if len(vec) else 1
        for j, coef in enumerate(vec):
            if coef != 0:
                c = Fraction(int(sympy.fraction(coef * lcm)[0]), int(sympy.fraction(coef * lcm)[1]))
                comp = j // len(betas)
                trip[comp] = trip[comp] + c * columns[j][comp]
        basis.append(tuple(trip))
    return tuple(basis)


def solenoidal_basis(k: int) -> list[SolenoidalMode]:
    if not 1 <= k <= 6:
        raise ParameterError("k must lie in 1..6")
    lam = Fraction(-k, 2)
    out = []
    for n, trip in enumerate(_solenoidal_nullspace(k), start=1):
        mode = SolenoidalMode(trip, k, lam, f"S{k}.{n}")
        assert mode.weighted_divergence().is_zero()
        out.append(mode)
    return out


def in_hermite_span(p: ExactPolynomial3, k: int) -> bool:
    """True when p is a combination of order-k Hermite polynomials.

    Equivalent to B* p = -(k/2) p, which is how it is tested.
    """
    return adjoint_operator(p) == Fraction(-k, 2) * p


def is_solenoidal_member(v: Sequence[ExactPolynomial3], k: int) -> bool:
    return all(in_hermite_span(c, k) for c in v) and weighted_divergence(v).is_zero()


# the printed table of low-order solenoidal adjoint modes
def _t(a, b, c) -> Triple:
    return (a if isinstance(a, ExactPolynomial3) else ExactPolynomial3.constant(a),
            b if isinstance(b, ExactPolynomial3) else ExactPolynomial3.constant(b),
            c if isinstance(c, ExactPolynomial3) else ExactPolynomial3.constant(c))


PRINTED_TABLE: dict[str, tuple[int, Triple]] = {
    "v11": (1, _t(0, -Y3, Y2)),
    "v12": (1, _t(Y3, 0, -Y1)),
    "v13": (1, _t(-Y2, Y1, 0)),
    "v21": (2, _t(4 - Y2 * Y2 - Y3 * Y3, Y1 * Y2, Y1 * Y3)),
    "v22": (2, _t(Y1 * Y2, 4 - Y1 * Y1 - Y3 * Y3, Y2 * Y3)),
    "v23": (2, _t(Y1 * Y3, Y2 * Y3, 4 - Y1 * Y1 - Y2 * Y2)),
    "v24": (2, _t(0, Y1 * Y3, -Y1 * Y2)),
    "v25": (2, _t(-Y2 * Y3, 0, Y2 * Y1)),
    "v26": (2, _t(-Y2 * Y3, Y2 * Y3, Y1 * Y1 - Y2 * Y2)),
    "v27": (2, _t(Y1 * Y2, Y3 * Y3 - Y1 * Y1, -Y2 * Y3)),
    "v28": (2, _t(Y2 * Y2 - Y3 * Y3, -Y1 * Y2, Y1 * Y3)),
}


@dataclass(frozen=True)
class TableVerdict:
    label: str
    degree: int
    status: str                 # confirmed / repaired / refuted
    weighted_divergence: ExactPolynomial3
    repair: tuple[int, ExactPolynomial3] | None = None   # (component, replacement)
    note: str = ""


def _single_monomial_repair(v: Triple, k: int) -> tuple[int, ExactPolynomial3] | None:
    """Search replacements of one term in one component by c * monomial."""
    monos = _monomials_upto(k)
    for comp in range(3):
        old_terms = [None] + sorted(v[comp].terms)
        for old in old_terms:
            base = list(v)
            if old is not None:
                base[comp] = base[comp] - ExactPolynomial3({old: v[comp].terms[old]})
            for m in monos:
                if m == old:
                    continue
                probe = [ExactPolynomial3(), ExactPolynomial3(), ExactPolynomial3()]
                probe[comp] = ExactPolynomial3.monomial(m)
                target = -weighted_divergence(base)
                unit = weighted_divergence(probe)
                if unit.is_zero():
                    continue
                c = target.scalar_multiple_of(unit)
                if c is None or c == 0:
                    continue
                cand = list(base)
                cand[comp] = cand[comp] + ExactPolynomial3.monomial(m, c)
                if is_solenoidal_member(cand, k):
                    return comp, cand[comp]
    return None


def adjudicate_hp1() -> list[TableVerdict]:
    out = []
    for label, (k, v) in PRINTED_TABLE.items():
        wd = weighted_divergence(v)
        if is_solenoidal_member(v, k):
            out.append(TableVerdict(label, k, "confirmed", wd))
            continue
        rep = _single_monomial_repair(v, k)
        if rep is None:
            out.append(TableVerdict(label, k, "refuted", wd, None,
                                    "no single-term repair inside the order-k space"))
        else:
            comp, poly = rep
            out.append(TableVerdict(label, k, "repaired", wd, rep,
                                    f"component {comp + 1} -> {poly}"))
    return out


def plain_divergence_of_direct(v: Sequence[ExactPolynomial3]) -> ExactPolynomial3:
    """Polynomial P with div(v F) = P F; zero iff v F is divergence free."""
    return weighted_divergence(v)


def direct_mode(mode: SolenoidalMode) -> Triple:
    """The Gaussian-multiplied field v = v* F, stored as its polynomial factor.

    The plain divergence of v F is checked to vanish identically.
    """
    if not isinstance(mode, SolenoidalMode):
        raise TypeError("direct_mode needs a SolenoidalMode")
    if not plain_divergence_of_direct(mode.components).is_zero():
        raise AssertionError("direct field is not divergence free")
    return mode.components


# the printed asymptotic pattern (y3, y3, 0) exp(-|y|^2/4), constant omitted
GLOBAL_PATTERN: Triple = _t(Y3, Y3, 0)


def global_pattern_verdict() -> tuple[bool, ExactPolynomial3]:
    d = plain_divergence_of_direct(GLOBAL_PATTERN)
    return d.is_zero(), d


# ---------------------------------------------------------------------------
# Gram matrix of the adjoint/direct pairing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GramEntry:
    beta: MultiIndex
    gamma: MultiIndex
    value: Fraction   # <psi*_beta, psi_gamma> with int F = 1

    @property
    def is_exact_zero(self) -> bool:
        return self.value == 0

    @property
    def deviation_from_one(self) -> Fraction | None:
        return self.value - 1 if self.beta == self.gamma else None


def pairing(beta: MultiIndex, gamma: MultiIndex) -> Fraction:
    """<psi*_beta, psi_gamma> with psi_gamma = D^gamma F / sqrt(gamma!) and int F = 1.

    The moment int H_beta H_gamma F is rational and vanishes for
    beta != gamma, so the irrational constants never enter off the
    diagonal; on it the product of constants is 2^|beta| / beta!.
    """
    hb, hg = _gaussian_derivative_poly(beta), _gaussian_derivative_poly(gamma)
    m: SqrtPiMultiple = gaussian_moment(hb * hg, Fraction(1, 4))
    # int exp(-|y|^2/4) = (4 pi)^{3/2} = 8 pi^{3/2}
    moment = m.coefficient / 8
    if moment == 0:
        return Fraction(0)
    if beta != gamma:
        raise AssertionError(f"non-orthogonal pair {beta}, {gamma}")
    return moment * Fraction(2 ** beta.order, beta.factorial())


def gram_matrix(k_max: int) -> list[GramEntry]:
    if k_max > 6:
        raise ParameterError("k_max must be at most 6")
    idx = [b for k in range(k_max + 1) for b in multi_indices(k)]
    return [GramEntry(b, g, pairing(b, g)) for b in idx for g in idx]


# ---------------------------------------------------------------------------
# Planar radial modes and the rotational operator
# ---------------------------------------------------------------------------

def planar_radial_mode(j: int) -> ExactPolynomial3:
    """Delta_2^j F / F in the (y1, y2) plane; eigenvalue -j of the planar B*."""
    p = ExactPolynomial3.constant(1)
    for _ in range(j):
        p = (gaussian_derivative_step(gaussian_derivative_step(p, 0), 0)
             + gaussian_derivative_step(gaussian_derivative_step(p, 1), 1))
    return p


def _planar_adjoint(p: ExactPolynomial3) -> ExactPolynomial3:
    euler2 = Y1 * p.diff(0) + Y2 * p.diff(1)
    return p.diff(0, 2) + p.diff(1, 2) - Fraction(1, 2) * euler2


def angular_derivative(p: ExactPolynomial3) -> ExactPolynomial3:
    """d/dmu in the plane: y1 d/dy2 - y2 d/dy1."""
    return Y1 * p.diff(1) - Y2 * p.diff(0)


def swirl_invariance(mode: ExactPolynomial3, sigma) -> ExactPolynomial3:
    """Residual of (B* + I - sigma d/dmu - lambda) on a planar radial polynomial.

    The operator is the planar Delta - (1/2) y.grad + I, so lambda is
    1 - degree/2.  The residual is the zero polynomial for every sigma when
    the input is radial.
    """
    if any(m[2] for m in mode.terms) or not angular_derivative(mode).is_zero():
        raise ParameterError("swirl invariance is claimed for planar radial modes only")
    sigma = Fraction(sigma).limit_denominator(10 ** 12) if not isinstance(sigma, Fraction) else sigma
    lam = 1 - Fraction(mode.degree(), 2)
    return (_planar_adjoint(mode) + mode - sigma * angular_derivative(mode) - lam * mode)


# ---------------------------------------------------------------------------
# CSV rows
# ---------------------------------------------------------------------------

def basis_rows(k_max: int) -> list[tuple]:
    rows = []
    for k in range(1, k_max + 1):
        for mode in solenoidal_basis(k):
            for comp, poly in enumerate(mode.components, start=1):
                for mono in sorted(poly.terms, reverse=True):
                    c = poly.terms[mono]
                    rows.append((k, mode.label, comp, "".join(map(str, mono)),
                                 c.numerator, c.denominator))
    return rows
