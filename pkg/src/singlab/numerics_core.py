"""Shared numerical substrate.

Exact polynomial algebra over the rationals, Gaussian moments, ODE
integration (an adaptive 5(4) pair and a fixed-step order-8 oracle),
Richardson finite differences, bracketing root finding and the Kummer
hypergeometric series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.integrate._ivp import dop853_coefficients as _dop853
from scipy.optimize import brentq

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
ROOT_TOL = 1e-12
RESIDUAL_TOL = 1e-8


class NonConvergenceError(RuntimeError):
    """Raised when an iterative method stops short of its target.

    ``where`` carries the abscissa (or iteration count) reached.
    """

    def __init__(self, message: str, where: float | None = None):
        super().__init__(message)
        self.where = where


class ParameterError(ValueError):
    pass


class BracketError(ValueError):
    pass


class DomainError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Multi-indices and exact polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class MultiIndex:
    exponents: tuple[int, int, int]

    def __post_init__(self):
        e = tuple(int(v) for v in self.exponents)
        if len(e) != 3 or any(v < 0 for v in e):
            raise ParameterError(f"bad multi-index {self.exponents}")
        object.__setattr__(self, "exponents", e)

    @property
    def order(self) -> int:
        return sum(self.exponents)

    def factorial(self) -> int:
        return math.prod(math.factorial(v) for v in self.exponents)

    def shifted(self, axis: int, by: int) -> "MultiIndex":
        e = list(self.exponents)
        e[axis] += by
        return MultiIndex(tuple(e))

    def __iter__(self):
        return iter(self.exponents)

    def __str__(self):
        return "".join(str(v) for v in self.exponents)


def multi_indices(order: int) -> list[MultiIndex]:
    """All multi-indices of the given order in lexicographic (descending y1) order."""
    out = []
    for a in range(order, -1, -1):
        for b in range(order - a, -1, -1):
            out.append(MultiIndex((a, b, order - a - b)))
    return out


Monomial = tuple[int, int, int]


class ExactPolynomial3:
    """Polynomial in (y1, y2, y3) with Fraction coefficients.

    Immutable by convention; all arithmetic returns new objects and drops
    zero coefficients, so equality is structural.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction | int] | None = None):
        clean: dict[Monomial, Fraction] = {}
        for mono, coef in (terms or {}).items():
            c = Fraction(coef)
            if c != 0:
                key = tuple(int(v) for v in mono)
                clean[key] = clean.get(key, Fraction(0)) + c
                if clean[key] == 0:
                    del clean[key]
        self.terms = clean

    # constructors
    @classmethod
    def constant(cls, c) -> "ExactPolynomial3":
        return cls({(0, 0, 0): c})

    @classmethod
    def variable(cls, axis: int) -> "ExactPolynomial3":
        e = [0, 0, 0]
        e[axis] = 1
        return cls({tuple(e): 1})

    @classmethod
    def monomial(cls, exps: Sequence[int], coef=1) -> "ExactPolynomial3":
        return cls({tuple(exps): coef})

    # algebra
    def __add__(self, other):
        other = _as_poly(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, Fraction(0)) + c
        return ExactPolynomial3(t)

    __radd__ = __add__

    def __neg__(self):
        return ExactPolynomial3({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        t: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = (m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2])
                t[m] = t.get(m, Fraction(0)) + c1 * c2
        return ExactPolynomial3(t)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            return self.terms == _as_poly(other).terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def diff(self, axis: int, times: int = 1) -> "ExactPolynomial3":
        p = self
        for _ in range(times):
            t = {}
            for m, c in p.terms.items():
                if m[axis] > 0:
                    e = list(m)
                    e[axis] -= 1
                    t[tuple(e)] = c * m[axis]
            p = ExactPolynomial3(t)
        return p

    def laplacian(self) -> "ExactPolynomial3":
        return self.diff(0, 2) + self.diff(1, 2) + self.diff(2, 2)

    def euler(self) -> "ExactPolynomial3":
        """y . grad p (multiplies each monomial by its degree)."""
        return ExactPolynomial3({m: c * sum(m) for m, c in self.terms.items()})

    def __call__(self, y1, y2, y3):
        total = 0.0
        for (a, b, c), coef in self.terms.items():
            total = total + float(coef) * (y1 ** a) * (y2 ** b) * (y3 ** c)
        return total

    def scalar_multiple_of(self, other: "ExactPolynomial3") -> Fraction | None:
        """Return r with self == r*other, or None."""
        if other.is_zero():
            return Fraction(0) if self.is_zero() else None
        m0, c0 = next(iter(other.terms.items()))
        r = self.terms.get(m0, Fraction(0)) / c0
        return r if self == other * r else None

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, reverse=True):
            c = self.terms[m]
            mono = "*".join(f"y{i+1}^{e}" if e > 1 else f"y{i+1}" for i, e in enumerate(m) if e)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _as_poly(x) -> ExactPolynomial3:
    if isinstance(x, ExactPolynomial3):
        return x
    if isinstance(x, (int, Fraction)):
        return ExactPolynomial3.constant(x)
    raise TypeError(f"cannot promote {type(x).__name__} to ExactPolynomial3")


Y1, Y2, Y3 = (ExactPolynomial3.variable(i) for i in range(3))


# ---------------------------------------------------------------------------
# Gaussian moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SqrtPiMultiple:
    """Exact value ``coefficient * pi**(power/2)``."""

    coefficient: Fraction
    power: int

    def __float__(self):
        return float(self.coefficient) * math.pi ** (self.power / 2)

    def is_zero(self) -> bool:
        return self.coefficient == 0


def _gauss_moment_1d(n: int, a: Fraction) -> Fraction:
    """int x^n exp(-a x^2) dx with the factor sqrt(pi/a) stripped."""
    if n % 2:
        return Fraction(0)
    dfact = math.prod(range(n - 1, 0, -2)) if n > 1 else 1
    return Fraction(dfact) / (2 * a) ** (n // 2)


def gaussian_moment(p: ExactPolynomial3, a: Fraction = Fraction(1, 4)) -> SqrtPiMultiple:
    """Exact int_{R^3} p(y) exp(-a|y|^2) dy as a rational multiple of pi^{3/2}.

    Exactness needs a^{-1/2} rational (a = 1/4, 1, 1/16, ...); use
    ``gaussian_moment_float`` otherwise.
    """
    a = Fraction(a)
    root = _rational_sqrt(1 / a)
    if root is None:
        raise ParameterError("exact Gaussian moment needs 1/a to be a rational square")
    total = Fraction(0)
    for (i, j, k), c in p.terms.items():
        total += c * _gauss_moment_1d(i, a) * _gauss_moment_1d(j, a) * _gauss_moment_1d(k, a)
    return SqrtPiMultiple(total * root ** 3, 3)


def gaussian_moment_float(p: ExactPolynomial3, a: float) -> float:
    total = 0.0
    for (i, j, k), c in p.terms.items():
        m = 1.0
        for n in (i, j, k):
            if n % 2:
                m = 0.0
                break
            m *= math.prod(range(n - 1, 0, -2)) / (2 * a) ** (n // 2) * math.sqrt(math.pi / a)
        total += float(c) * m
    return total


def _rational_sqrt(q: Fraction) -> Fraction | None:
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def gaussian_weighted_inner(p: ExactPolynomial3, q: ExactPolynomial3,
                            weight_sign: str = "adjoint") -> SqrtPiMultiple:
    """Exact pairing int p q exp(-|y|^2/4) dy over R^3.

    Both pairings in use carry a single factor exp(-|y|^2/4): the adjoint
    one is the rho*-weighted product of two polynomials, the direct one is
    <psi*_beta, psi_gamma> with psi_gamma = (polynomial) * F.  The
    normalisation (4 pi)^{-3/2} of F is left to the caller.
    """
    if weight_sign not in ("adjoint", "direct"):
        raise ParameterError(f"unknown weight {weight_sign!r}")
    return gaussian_moment(p * q, Fraction(1, 4))


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    kind: str
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f: Callable) -> float:
        vals = f(*self.nodes.T) if self.nodes.ndim == 2 else f(self.nodes)
        return float(np.dot(self.weights, vals))


def gauss_legendre(order: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    x, w = np.polynomial.legendre.leggauss(order)
    xm, xr = 0.5 * (b + a), 0.5 * (b - a)
    return QuadratureRule("gauss-legendre", order, xm + xr * x, xr * w)


def sphere_rule(order: int, radius: float = 1.0) -> QuadratureRule:
    """Product rule on the sphere: Gauss-Legendre in cos(theta), trapezoid in phi.

    Nodes are Cartesian points (n, 3); weights include radius^2.
    """
    ct, wt = np.polynomial.legendre.leggauss(order)
    nphi = 2 * order
    phi = 2 * np.pi * np.arange(nphi) / nphi
    C, P = np.meshgrid(ct, phi, indexing="ij")
    S = np.sqrt(1 - C ** 2)
    pts = radius * np.stack([S * np.cos(P), S * np.sin(P), C], axis=-1).reshape(-1, 3)
    w = (np.outer(wt, np.full(nphi, 2 * np.pi / nphi)) * radius ** 2).reshape(-1)
    return QuadratureRule("sphere-product", order, pts, w)


def gaussian_weight_rule(order: int, width: float = 1.0, dims: int = 3,
                         truncation: float = 12.0) -> QuadratureRule:
    """Tensor Gauss-Legendre rule on the box [-L, L]^dims, L = truncation*width.

    Plain (unweighted) nodes: the Gaussian factor stays in the integrand, so
    the same rule serves products of Gaussian fields of any width.
    """
    L = truncation * width
    x, w = np.polynomial.legendre.leggauss(order)
    x, w = L * x, L * w
    grids = np.meshgrid(*([x] * dims), indexing="ij")
    wgrid = np.ones_like(grids[0])
    for ax, _ in enumerate(grids):
        shape = [1] * dims
        shape[ax] = order
        wgrid = wgrid * w.reshape(shape)
    nodes = np.stack([g.reshape(-1) for g in grids], axis=-1)
    return QuadratureRule("gaussian-box", order, nodes, wgrid.reshape(-1))


# ---------------------------------------------------------------------------
# ODE integration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IvpProblem:
    rhs: Callable[[float, np.ndarray], np.ndarray]
    y0: Sequence[float]
    span: tuple[float, float]
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    events: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ParameterError("tolerances must be positive")
        if self.span[0] == self.span[1]:
            raise ParameterError("degenerate span")

    @property
    def dimension(self) -> int:
        return len(self.y0)


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray  # shape (dim, n)
    dense: Callable | None
    status: str  # "completed", "event", "failed"
    message: str = ""
    t_events: list = field(default_factory=list)

    def __call__(self, t):
        if self.dense is None:
            raise RuntimeError("no dense output available")
        return self.dense(t)

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def y_end(self) -> np.ndarray:
        return self.y[:, -1]


def integrate_ivp(problem: IvpProblem, max_step: float = np.inf,
                  raise_on_failure: bool = True) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) with dense output (scipy's RK45)."""
    sol = solve_ivp(problem.rhs, problem.span, np.asarray(problem.y0, dtype=float),
                    method="RK45", rtol=problem.rtol, atol=problem.atol,
                    dense_output=True, events=list(problem.events) or None,
                    max_step=max_step)
    if sol.status == -1:
        if raise_on_failure:
            raise NonConvergenceError(sol.message, where=float(sol.t[-1]))
        return Trajectory(sol.t, sol.y, sol.sol, "failed", sol.message)
    status = "event" if sol.status == 1 else "completed"
    return Trajectory(sol.t, sol.y, sol.sol, status, sol.message,
                      list(sol.t_events or []))


_RK8_A = _dop853.A[:_dop853.N_STAGES, :_dop853.N_STAGES]
_RK8_B = _dop853.B
_RK8_C = _dop853.C[:_dop853.N_STAGES]


def integrate_fixed_rk8(problem: IvpProblem, steps: int,
                        stop: Callable[[float, np.ndarray], bool] | None = None) -> Trajectory:
    """Fixed-step explicit order-8 Runge-Kutta (the 12-stage Dormand-Prince tableau).

    Used only as an independent oracle for the adaptive integrator.
    ``stop`` ends the march early (returns status "event").
    """
    t0, t1 = problem.span
    h = (t1 - t0) / steps
    y = np.asarray(problem.y0, dtype=float)
    ts, ys = [t0], [y.copy()]
    s = len(_RK8_C)
    K = np.zeros((s, y.size))
    t = t0
    for n in range(steps):
        for i in range(s):
            yi = y + h * (_RK8_A[i, :i] @ K[:i]) if i else y
            K[i] = problem.rhs(t + _RK8_C[i] * h, yi)
        y = y + h * (_RK8_B @ K)
        t = t0 + (n + 1) * h
        if not np.all(np.isfinite(y)):
            return Trajectory(np.array(ts), np.array(ys).T, None, "failed",
                              "non-finite state")
        ts.append(t)
        ys.append(y.copy())
        if stop is not None and stop(t, y):
            return Trajectory(np.array(ts), np.array(ys).T, None, "event")
    return Trajectory(np.array(ts), np.array(ys).T, None, "completed")


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FdResult:
    value: float
    error: float


_CENTRAL = {
    1: (np.array([-1.0, 0.0, 1.0]), np.array([-0.5, 0.0, 0.5])),
    2: (np.array([-1.0, 0.0, 1.0]), np.array([1.0, -2.0, 1.0])),
    3: (np.array([-2.0, -1.0, 0.0, 1.0, 2.0]), np.array([-0.5, 1.0, 0.0, -1.0, 0.5])),
    4: (np.array([-2.0, -1.0, 0.0, 1.0, 2.0]), np.array([1.0, -4.0, 6.0, -4.0, 1.0])),
}


def _directional(f, x, direction, h, order):
    offs, coefs = _CENTRAL[order]
    total = 0.0
    for o, c in zip(offs, coefs):
        if c == 0.0:
            continue
        v = f(x + o * h * direction)
        if not np.all(np.isfinite(v)):
            raise DomainError(f"non-finite evaluation near {x}")
        total = total + c * v
    return total / h ** order


def fd_derivative(f: Callable, point, direction: Sequence[int] | int = 1,
                  h0: float = 0.05, levels: int = 6) -> FdResult:
    """Richardson-extrapolated central differences.

    ``f`` maps an array point (or scalar) to a scalar. ``direction`` is a
    derivative multi-index (one entry per coordinate) or, for scalar
    functions, the derivative order.  Mixed partials are built by nesting.
    """
    x = np.atleast_1d(np.asarray(point, dtype=float))
    scalar = np.ndim(point) == 0
    if isinstance(direction, int):
        direction = (direction,)
    direction = tuple(direction)
    if len(direction) != x.size:
        raise ParameterError("direction length must match point dimension")
    axes = [ax for ax, n in enumerate(direction) if n > 0]
    if not axes:
        return FdResult(float(f(point)), 0.0)

    g = (lambda z: f(z[0])) if scalar else f

    def single(func, ax, n):
        e = np.zeros_like(x)
        e[ax] = 1.0

        def op(z, h):
            return _directional(func, z, e, h, n)
        return op

    # nest: innermost directions are differentiated with their own ladders
    def build(idx):
        if idx == len(axes):
            return g
        inner = build(idx + 1)
        ax = axes[idx]
        n = direction[ax]

        def func(z):
            return richardson(lambda h: single(inner, ax, n)(z, h), h0, levels).value
        return func

    ax0 = axes[0]
    inner = build(1)
    return richardson(lambda h: single(inner, ax0, direction[ax0])(x, h), h0, levels)


def richardson(approx: Callable[[float], float], h0: float, levels: int = 6,
               ratio: float = 2.0) -> FdResult:
    """Neville table for an even-power error expansion in h."""
    table = [[approx(h0 / ratio ** i)] for i in range(levels)]
    best, err = table[0][0], np.inf
    for i in range(1, levels):
        for j in range(1, i + 1):
            fac = ratio ** (2 * j)
            table[i].append(table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (fac - 1))
            e = max(abs(table[i][j] - table[i][j - 1]), abs(table[i][j] - table[i - 1][j - 1]))
            if e <= err:
                best, err = table[i][j], e
    # safety factor plus a floor for cancellation in the finest stencil
    floor = 64 * np.finfo(float).eps * max(abs(v) for row in table for v in row)
    return FdResult(float(best), float(4 * err + floor))


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

def find_root(f: Callable[[float], float], bracket: tuple[float, float],
              tol: float = ROOT_TOL) -> float:
    """Bisection-secant hybrid (Brent) on a sign-changing bracket."""
    a, b = bracket
    fa, fb = f(a), f(b)
    if fa == 0:
        return float(a)
    if fb == 0:
        return float(b)
    if np.sign(fa) == np.sign(fb):
        raise BracketError(f"no sign change on [{a}, {b}]")
    return float(brentq(f, a, b, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500))


def bisect(f: Callable[[float], float], bracket: tuple[float, float],
           tol: float = ROOT_TOL, max_iter: int = 400) -> float:
    """Plain bisection; the slow but assumption-free oracle for find_root."""
    a, b = bracket
    fa = f(a)
    if np.sign(fa) == np.sign(f(b)):
        raise BracketError(f"no sign change on [{a}, {b}]")
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0 or 0.5 * (b - a) < tol:
            return m
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# Kummer series
# ---------------------------------------------------------------------------

KUMMER_MAX_TERMS = 10_000


def kummer_F(a: float, b: float, c: float, z: float, tol: float = 1e-15,
             max_terms: int = KUMMER_MAX_TERMS) -> float:
    """Gauss hypergeometric series 2F1(a, b; c; z) summed term by term.

    The tail after term n is bounded by |t_n| * q / (1 - q), where q bounds
    the ratio of successive terms from then on.
    """
    if abs(z) >= 1:
        raise ParameterError("series needs |z| < 1")
    if c == 0 or (c < 0 and float(c).is_integer()):
        raise ParameterError(f"c = {c} is a pole")
    term, total = 1.0, 1.0
    for n in range(max_terms):
        ratio = (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        term *= ratio
        total += term
        if term == 0.0:
            return total
        # ratio tends to z; once it is below 1 we can bound the tail
        q = max(abs(ratio), abs(z))
        if n > 2 and q < 1 and abs(term) * q / (1 - q) < tol * max(1.0, abs(total)):
            return total
    raise NonConvergenceError("Kummer series did not converge", where=max_terms)


def kummer_F_derivative(a: float, b: float, c: float, z: float, tol: float = 1e-15) -> float:
    return a * b / c * kummer_F(a + 1, b + 1, c + 1, z, tol)


# ---------------------------------------------------------------------------
# Periodic spectral differentiation
# ---------------------------------------------------------------------------

def spectral_derivative(values: np.ndarray, order: int = 1, period: float = 2 * np.pi,
                        axis: int = -1) -> np.ndarray:
    """Derivative of a periodic sample set on a uniform grid by FFT."""
    n = values.shape[axis]
    k = np.fft.fftfreq(n, d=period / (2 * np.pi * n)) * (2 * np.pi / period)
    if n % 2 == 0 and order % 2 == 1:
        k[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    mult = ((1j * k) ** order).reshape(shape)
    return np.real(np.fft.ifft(np.fft.fft(values, axis=axis) * mult, axis=axis))
