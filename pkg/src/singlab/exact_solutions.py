"""Closed-form flow families and the ODE-reduced families behind them.

Every family is a :class:`FieldSpec`: sympy expressions in the native
coordinates, compiled lazily to numeric evaluators.  Families driven by an
ODE (von Karman, Yaceev) carry numeric *providers* for their undefined
functions, so the same symbolic machinery applies to them.

Printed formulas are kept as named candidates next to the forms the residual
oracles confirm; nothing here decides which one is right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import sympy as sp
from numpy.polynomial import chebyshev as cheb
from scipy.integrate import quad

from .numerics_core import (
    DEFAULT_RTOL,
    DomainError,
    IvpProblem,
    NonConvergenceError,
    ParameterError,
    Trajectory,
    integrate_fixed_rk8,
    integrate_ivp,
    kummer_F,
    sphere_rule,
)

COORDINATES = {
    "cartesian": ("x", "y", "z"),
    "cylindrical": ("r", "phi", "z"),
    "spherical": ("r", "theta", "phi"),
}

# canonical symbols shared with coordinate_residuals
x, y, z = sp.symbols("x y z", real=True)
r = sp.Symbol("r", positive=True)
theta = sp.Symbol("theta", positive=True)
phi = sp.Symbol("phi", real=True)
t = sp.Symbol("t", real=True)
SPATIAL = {
    "cartesian": (x, y, z),
    "cylindrical": (r, phi, z),
    "spherical": (r, theta, phi),
}


def exact(value) -> sp.Expr:
    """Turn a float parameter into an exact rational when that is lossless."""
    if isinstance(value, sp.Basic):
        return value
    if isinstance(value, int):
        return sp.Integer(value)
    return sp.nsimplify(float(value), rational=True)


Provider = Callable[[float], Sequence[float]]


@dataclass
class FieldSpec:
    """A velocity/pressure family in its native frame.

    ``components`` maps names to sympy expressions.  Velocity components are
    ``u, v, w`` (ordered as the frame's unit vectors), pressure is ``p``;
    families may add auxiliary entries (vorticity, angular profiles).
    ``functions`` supplies numeric derivative tables for any undefined sympy
    functions appearing in the expressions: ``provider(arg)`` returns
    ``[F, F', F'', ...]`` at the argument value.
    """

    family: str
    coords: str
    params: dict
    components: dict
    time_dependent: bool = False
    singular_set: str = ""
    functions: dict = field(default_factory=dict)
    guard: Callable | None = None
    _compiled: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def variables(self) -> tuple:
        base = SPATIAL[self.coords]
        return base + (t,) if self.time_dependent else base

    @property
    def has_pressure(self) -> bool:
        return "p" in self.components

    def velocity_exprs(self) -> list:
        return [self.components.get(k, sp.Integer(0)) for k in ("u", "v", "w")]

    def expr(self, name: str, orders: Sequence[int] | None = None) -> sp.Expr:
        e = self.components[name]
        if orders:
            for var, n in zip(self.variables, orders):
                if n:
                    e = sp.diff(e, var, n)
        return e

    def compile(self, expression: sp.Expr) -> Callable[[np.ndarray], np.ndarray]:
        """Numeric evaluator of an arbitrary expression in this family's variables.

        Returns a function of an (n, nvars) array giving n values.
        """
        key = sp.srepr(expression)
        if key in self._compiled:
            return self._compiled[key]
        fn = _compile(expression, self.variables, self.functions)
        guard = self.guard

        def evaluate(points):
            pts = np.atleast_2d(np.asarray(points, dtype=float))
            if guard is not None:
                guard(pts)
            return fn(pts)
        self._compiled[key] = evaluate
        return evaluate

    def evaluate(self, name: str, points, orders: Sequence[int] | None = None):
        pts = np.asarray(points, dtype=float)
        out = self.compile(self.expr(name, orders))(pts)
        return out[0] if pts.ndim == 1 else out

    def velocity(self, points):
        return np.stack([self.evaluate(k, points) if k in self.components
                         else np.zeros(np.atleast_2d(points).shape[0]).squeeze()
                         for k in ("u", "v", "w")], axis=-1)


def _compile(expression, variables, functions):
    """lambdify with undefined functions replaced by provider-fed symbols."""
    from sympy.core.function import AppliedUndef

    replacements = {}
    slots = []  # (symbol, function name, derivative order, argument index)
    for d in sorted(expression.atoms(sp.Derivative), key=sp.srepr):
        fexpr = d.expr
        if not isinstance(fexpr, AppliedUndef):
            raise ParameterError(f"cannot compile derivative {d}")
        name = fexpr.func.__name__
        order = sum(n for _, n in d.variable_count)
        sym = sp.Symbol(f"_{name}_{order}")
        replacements[d] = sym
        slots.append((sym, name, order, variables.index(fexpr.args[0])))
    e = expression.xreplace(replacements)
    for f_app in sorted(e.atoms(AppliedUndef), key=sp.srepr):
        name = f_app.func.__name__
        sym = sp.Symbol(f"_{name}_0")
        e = e.xreplace({f_app: sym})
        slots.append((sym, name, 0, variables.index(f_app.args[0])))
    for _, name, _, _ in slots:
        if name not in functions:
            raise ParameterError(f"no provider for function {name}")
    args = list(variables) + [s for s, *_ in slots]
    lam = sp.lambdify(args, e, modules="numpy")

    def fn(pts):
        cols = [pts[:, i] for i in range(len(variables))]
        extra = []
        cache = {}
        for _, name, order, idx in slots:
            vals = []
            for a in pts[:, idx]:
                k = (name, float(a))
                if k not in cache:
                    cache[k] = functions[name](float(a))
                vals.append(cache[k][order])
            extra.append(np.asarray(vals, dtype=float))
        out = lam(*cols, *extra)
        return np.broadcast_to(np.asarray(out, dtype=float), (pts.shape[0],)).copy()
    return fn


# ---------------------------------------------------------------------------
# Slezkin-Landau jets
# ---------------------------------------------------------------------------

def _check_c(c) -> sp.Expr:
    if abs(float(c)) <= 1:
        raise ParameterError("the jet constant needs |c| > 1")
    return exact(c)


def slezkin_landau_cartesian(c) -> FieldSpec:
    """The jet in Cartesian components; the form the momentum residual confirms."""
    cc = _check_c(c)
    rr = sp.sqrt(x ** 2 + y ** 2 + z ** 2)
    den = (cc * rr - z) ** 2 * rr
    comps = {
        "u": 2 * (cc * z - rr) * x / den,
        "v": 2 * (cc * z - rr) * y / den,
        "w": 2 * (cc * rr ** 2 - 2 * z * rr + cc * z ** 2) / den,
        "p": 4 * (cc * z - rr) / den,
    }
    return FieldSpec("slezkin-landau-cartesian", "cartesian", {"c": float(c)}, comps,
                     singular_set="origin")


def sl_angular_profiles(c, form: str = "canonical") -> dict:
    """Angular profiles (u_hat, v_hat, p_hat) with u = u_hat/r, p = p_hat/r^2.

    ``printed`` is the spherical form as usually quoted; ``canonical`` is the
    Cartesian jet projected onto spherical unit vectors, which differs by a
    factor -2 in the radial profile and a sign in the polar one.
    """
    cc = _check_c(c)
    ct, st = sp.cos(theta), sp.sin(theta)
    radial = (1 + ct ** 2 - 2 * cc * ct) / (cc - ct) ** 2
    polar = 2 * st / (cc - ct)
    pressure = 4 * (cc * ct - 1) / (cc - ct) ** 2
    if form == "printed":
        return {"u_hat": radial, "v_hat": polar, "p_hat": pressure}
    if form == "canonical":
        return {"u_hat": -2 * radial, "v_hat": -polar, "p_hat": pressure}
    raise ParameterError(f"unknown form {form!r}")


def slezkin_landau_spherical(c, form: str = "printed") -> FieldSpec:
    prof = sl_angular_profiles(c, form)
    comps = {"u": prof["u_hat"] / r, "v": prof["v_hat"] / r, "w": sp.Integer(0),
             "p": prof["p_hat"] / r ** 2, **prof}
    return FieldSpec(f"slezkin-landau-spherical-{form}", "spherical", {"c": float(c)},
                     comps, singular_set="origin")


def _spherical_frame(pts):
    X, Y, Z = pts.T
    R = np.sqrt(X ** 2 + Y ** 2 + Z ** 2)
    rho = np.hypot(X, Y)
    th = np.arctan2(rho, Z)
    ph = np.arctan2(Y, X)
    er = np.stack([X / R, Y / R, Z / R], axis=-1)
    et = np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)], axis=-1)
    ep = np.stack([-np.sin(ph), np.cos(ph), np.zeros_like(ph)], axis=-1)
    return R, th, ph, er, et, ep


@dataclass(frozen=True)
class CrossCheck:
    c: float
    radial_ratios: np.ndarray
    polar_ratios: np.ndarray
    radial_fit: float
    polar_fit: float
    radial_spread: float
    polar_spread: float
    pressure_mismatch: float
    swirl_cartesian: float
    swirl_spherical: float


def sl_cross_check(c, points) -> CrossCheck:
    """Compare the Cartesian jet with the printed spherical form at Cartesian points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    cart = slezkin_landau_cartesian(c)
    sph = slezkin_landau_spherical(c, "printed")
    U = cart.velocity(pts).reshape(-1, 3)
    R, th, ph, er, et, ep = _spherical_frame(pts)
    spts = np.stack([R, th, ph], axis=-1)
    su, sv, sw = (np.atleast_1d(sph.evaluate(k, spts)) for k in ("u", "v", "w"))
    cr = np.einsum("ij,ij->i", U, er)
    ctheta = np.einsum("ij,ij->i", U, et)
    cphi = np.einsum("ij,ij->i", U, ep)

    def fit(a, b):
        k = float(np.dot(a, b) / np.dot(b, b))
        mask = np.abs(b) > 1e-8
        ratios = a[mask] / b[mask]
        return ratios, k, float(np.ptp(ratios)) if ratios.size else 0.0

    rr_, kr, sr = fit(cr, su)
    rt_, kt, stt = fit(ctheta, sv)
    pc = np.atleast_1d(cart.evaluate("p", pts))
    ps = np.atleast_1d(sph.evaluate("p", spts))
    return CrossCheck(float(c), rr_, rt_, kr, kt, sr, stt,
                      float(np.max(np.abs(pc - ps))),
                      float(np.max(np.abs(cphi))), float(np.max(np.abs(sw))))


@lru_cache(maxsize=32)
def _stress_evaluator(c):
    spec = slezkin_landau_cartesian(c)
    U = spec.velocity_exprs()
    X = (x, y, z)
    P = spec.components["p"]
    Pi = [[(P if i == j else 0) + U[i] * U[j] - (sp.diff(U[i], X[j]) + sp.diff(U[j], X[i]))
           for j in range(3)] for i in range(3)]
    return sp.lambdify(X, Pi, "numpy"), sp.lambdify(X, U, "numpy")


def flux_closed_forms(c: float) -> dict:
    """Printed closed form, its repaired variant and two large-c expansions."""
    L = math.log((c + 1) / (c - 1))
    pref = 8 * math.pi * c / (3 * (c * c - 1))
    return {
        "printed": pref * (2 + 6 * c - 3 * c * (c * c - 1) * L),
        "repaired": pref * (2 + 6 * c * c - 3 * c * (c * c - 1) * L),
        "printed_expansion": 16 * math.pi / c - 32 * math.pi / (3 * c ** 3),
        "derived_expansion": 16 * math.pi / c + 272 * math.pi / (15 * c ** 3),
    }


@dataclass(frozen=True)
class FluxReport:
    c: float
    radius: float
    force: tuple
    mass_flux: float
    closed_forms: dict

    @property
    def value(self) -> float:
        return self.force[2]

    def deviations(self) -> dict:
        return {k: self.value - v for k, v in self.closed_forms.items()}


def sl_flux_coefficient(c, radius: float = 1.0, order: int = 64) -> FluxReport:
    """Net momentum flux (convective + pressure - viscous) through a sphere.

    Because the jet solves the steady equations away from the origin, the
    result is the strength of the point force sitting there.
    """
    if radius <= 0:
        raise ParameterError("radius must be positive")
    _check_c(c)
    Pi_f, U_f = _stress_evaluator(float(c))
    rule = sphere_rule(order, radius)
    nodes, w = rule.nodes, rule.weights
    n = nodes / radius
    Pi = np.array([[np.broadcast_to(np.asarray(e, float), w.shape) for e in row]
                   for row in Pi_f(*nodes.T)])
    force = tuple(float(np.dot(np.einsum("jn,nj->n", Pi[i], n), w)) for i in range(3))
    U = np.array([np.broadcast_to(np.asarray(e, float), w.shape) for e in U_f(*nodes.T)])
    mass = float(np.dot(np.einsum("jn,nj->n", U, n), w))
    if not all(np.isfinite(force)):
        raise NonConvergenceError("non-finite surface integral", where=radius)
    return FluxReport(float(c), radius, force, mass, flux_closed_forms(float(c)))


@dataclass(frozen=True)
class LimitRow:
    c: float
    scaled_minus_profile: tuple  # c*u_i - u0_i for the printed leading profile
    third_vs_derived: float  # c*w - 2(r^2+z^2)/r^3


def sl_large_c_limit(point, cs: Sequence[float] = (10, 100, 1000)) -> list[LimitRow]:
    """c times the jet against the printed leading profile, for growing c."""
    p = np.asarray(point, dtype=float)
    X, Y, Z = p
    R = float(np.linalg.norm(p))
    u0 = np.array([2 * Z * X / R ** 3, 2 * Z * Y / R ** 3, 2 / R])
    rows = []
    for c in cs:
        U = slezkin_landau_cartesian(c).velocity(p)
        dev = c * U - u0
        derived = 2 * (R ** 2 + Z ** 2) / R ** 3
        rows.append(LimitRow(float(c), tuple(float(d) for d in dev), float(c * U[2] - derived)))
    return rows


# ---------------------------------------------------------------------------
# Time-dependent explicit families
# ---------------------------------------------------------------------------

def _time_guard(T, time_index):
    def guard(pts):
        if np.any(pts[:, time_index] >= T):
            raise DomainError(f"requires t < T = {T}")
    return guard


def oseen_moffatt_vortex(circulation, T) -> FieldSpec:
    """Azimuthal vortex whose axial vorticity solves the backward heat equation."""
    if circulation == 0:
        raise ParameterError("circulation must be nonzero")
    G, TT = exact(circulation), exact(T)
    s = TT - t
    v = G / (2 * sp.pi * r) * (1 - sp.exp(-r ** 2 / (4 * s)))
    omega = G / (4 * sp.pi * s) * sp.exp(-r ** 2 / (4 * s))
    return FieldSpec("oseen-moffatt", "cylindrical", {"Gamma": float(circulation), "T": float(T)},
                     {"u": sp.Integer(0), "v": v, "w": sp.Integer(0), "omega": omega},
                     time_dependent=True, singular_set="t = T",
                     guard=_time_guard(float(T), 3))


@dataclass(frozen=True)
class VortexReport:
    curl_mismatch: float
    heat_residual: float


def vortex_report(spec: FieldSpec, points) -> VortexReport:
    """Axial curl of the velocity against the closed-form vorticity, and the
    backward-heat residual omega_t + omega_rr + omega_r / r."""
    v, om = spec.components["v"], spec.components["omega"]
    curl = sp.diff(r * v, r) / r
    heat = sp.diff(om, t) + sp.diff(om, r, 2) + sp.diff(om, r) / r
    pts = np.atleast_2d(points)
    scale = np.maximum(1.0, np.abs(spec.compile(om)(pts)))
    return VortexReport(float(np.max(np.abs(spec.compile(curl - om)(pts)) / scale)),
                        float(np.max(np.abs(spec.compile(heat)(pts)) / scale)))


def euler_separable(T) -> FieldSpec:
    """Stretched axisymmetric field with w = z*gamma(r, t), blowing up at t = T."""
    TT = exact(T)
    s = TT - t
    gamma = -sp.exp(-r ** 2) / s
    comps = {"u": (1 - sp.exp(-r ** 2)) / (2 * r * s), "v": sp.Integer(0),
             "w": z * gamma, "gamma": gamma}
    return FieldSpec("euler-separable", "cylindrical", {"T": float(T)}, comps,
                     time_dependent=True, singular_set="t = T",
                     guard=_time_guard(float(T), 3))


def rigid_rotation(omega: float = 1.0) -> FieldSpec:
    W = exact(omega)
    return FieldSpec("rigid-rotation", "cartesian", {"Omega": float(omega)},
                     {"u": -W * y, "v": W * x, "w": sp.Integer(0),
                      "p": W ** 2 * (x ** 2 + y ** 2) / 2})


def zero_field(coords: str = "cartesian") -> FieldSpec:
    zero = sp.Integer(0)
    return FieldSpec("zero", coords, {}, {"u": zero, "v": zero, "w": zero, "p": zero})


# ---------------------------------------------------------------------------
# von Karman swirling flow
# ---------------------------------------------------------------------------

_f, _g = sp.Function("f"), sp.Function("g")


def von_karman_rhs(_, s):
    f0, f1, f2, g0, g1 = s
    return np.array([f1, f2, -2 * f0 * f2 + f1 ** 2 - g0 ** 2, g1, -2 * f0 * g1 + 2 * f1 * g0])


def von_karman_ode_residual(f0, f1, f2, f3, g0, g1, g2) -> tuple[float, float]:
    return (f3 + 2 * f0 * f2 - f1 ** 2 + g0 ** 2, g2 + 2 * f0 * g1 - 2 * f1 * g0)


@dataclass
class VonKarmanSolution:
    span: tuple
    trajectory: Trajectory
    oracle: Trajectory

    def state(self, zz: float) -> np.ndarray:
        return self.trajectory(zz)

    def derivatives(self, zz: float) -> tuple[list, list]:
        """[f, f', f'', f''', f''''] and [g, g', g'', g'''] from the ODE."""
        f0, f1, f2, g0, g1 = self.state(zz)
        f3 = -2 * f0 * f2 + f1 ** 2 - g0 ** 2
        g2 = -2 * f0 * g1 + 2 * f1 * g0
        f4 = -2 * f0 * f3 - 2 * g0 * g1
        g3 = -2 * f0 * g2 + 2 * f2 * g0
        return [f0, f1, f2, f3, f4], [g0, g1, g2, g3]

    def agreement(self) -> float:
        """Max state difference between the adaptive and fixed-step solutions."""
        dense = self.trajectory(self.oracle.t)
        return float(np.max(np.abs(dense - self.oracle.y)))

    def ode_residual(self, degree: int = 30) -> float:
        """Residual with derivatives taken from a Chebyshev interpolant of the
        computed trajectory (independent of the right-hand side)."""
        a, b = self.span
        fits = [cheb.Chebyshev.interpolate(lambda s, i=i: self.trajectory(s)[i], degree,
                                           domain=[a, b]) for i in range(5)]
        zs = np.linspace(a, b, 101)
        S = self.trajectory(zs)
        d = [fit.deriv()(zs) for fit in fits]
        r1, r2 = von_karman_ode_residual(S[0], S[1], S[2], d[2], S[3], S[4], d[4])
        chain = [d[0] - S[1], d[1] - S[2], d[3] - S[4]]
        return float(max(np.max(np.abs(r1)), np.max(np.abs(r2)),
                         *(np.max(np.abs(c)) for c in chain)))

    def field(self, form: str = "repaired") -> FieldSpec:
        """Cartesian field built from (f, g).  ``printed`` keeps the second line
        as f'x + g y; ``repaired`` uses g x + f'y."""
        fz, gz = _f(z), _g(z)
        fp = sp.diff(fz, z)
        if form == "printed":
            v = fp * x + gz * y
        elif form == "repaired":
            v = gz * x + fp * y
        else:
            raise ParameterError(f"unknown form {form!r}")
        comps = {"u": fp * x - gz * y, "v": v, "w": -2 * fz, "p": -2 * (fp + fz ** 2)}
        cache = {}

        def table(zz):
            if zz not in cache:
                cache[zz] = self.derivatives(zz)
            return cache[zz]
        return FieldSpec(f"von-karman-{form}", "cartesian", {}, comps,
                         functions={"f": lambda zz: table(zz)[0], "g": lambda zz: table(zz)[1]})


def von_karman(initial: Sequence[float], span: tuple = (0.0, 1.0), rtol: float = 1e-12,
               oracle_steps: int = 400) -> VonKarmanSolution:
    """Integrate (f, f', f'', g, g') from ``initial`` with both integrators."""
    if len(initial) != 5:
        raise ParameterError("initial data is (f, f', f'', g, g')")
    prob = IvpProblem(von_karman_rhs, tuple(initial), span, rtol=rtol, atol=rtol * 1e-2)
    traj = integrate_ivp(prob)
    ref = integrate_fixed_rk8(prob, oracle_steps)
    if ref.status == "failed":
        raise NonConvergenceError("fixed-step oracle failed", where=float(ref.t[-1]))
    return VonKarmanSolution(span, traj, ref)


# ---------------------------------------------------------------------------
# Yaceev family (axisymmetric, no swirl, homogeneous of degree -1)
# ---------------------------------------------------------------------------

_chi = sp.Function("chi")


YACEEV_FORMS = ("printed", "repaired")


def yaceev_constants(alpha: float, beta: float, gamma: float, form: str = "repaired") -> dict:
    """Constants of the pressure profile.

    The printed b carries -s/2 where the chi equation needs -s^2/2
    (s = alpha + beta); the two agree only for s in {0, 1}.
    """
    if form not in YACEEV_FORMS:
        raise ParameterError(f"form must be one of {YACEEV_FORMS}")
    s = alpha + beta
    a = gamma ** 2 - (1 + s) * gamma + 0.5 * s ** 2 - 0.5
    b = (s - 1) * gamma - 0.5 * (s if form == "printed" else s ** 2) + 0.5
    c = 0.5 * ((alpha - beta) ** 2 - 1)
    return {"a": a, "b": b, "c": c, "regular": abs(a) < 1e-14 and abs(b) < 1e-14}


def _pochhammer_ratio(a, b, c, n):
    out = 1.0
    for k in range(n):
        out *= (a + k) * (b + k) / (c + k)
    return out


def _hyper_table(a, b, c, zz, order):
    return [_pochhammer_ratio(a, b, c, n) * kummer_F(a + n, b + n, c + n, zz)
            if _pochhammer_ratio(a, b, c, n) != 0 else 0.0 for n in range(order + 1)]


def _chain(F, th):
    """theta-derivatives 0..4 of F(z(theta)), z = cos^2(theta/2) = (1+cos)/2."""
    s, c = math.sin(th), math.cos(th)
    z1, z2, z3, z4 = -s / 2, -c / 2, s / 2, c / 2
    return [F[0],
            F[1] * z1,
            F[2] * z1 ** 2 + F[1] * z2,
            F[3] * z1 ** 3 + 3 * F[2] * z1 * z2 + F[1] * z3,
            F[4] * z1 ** 4 + 6 * F[3] * z1 ** 2 * z2 + F[2] * (3 * z2 ** 2 + 4 * z1 * z3) + F[1] * z4]


def _chi_provider(alpha, beta, gamma, c1, c2, form="repaired"):
    """chi and its first four theta-derivatives.

    The second hypergeometric solution is z^(1-gamma) F(...), z = cos^2(theta/2);
    the printed representation drops the z^(1-gamma) factor.
    """
    e = 1 + alpha + beta - gamma
    base = sp.cos(theta / 2) ** exact(gamma) * sp.sin(theta / 2) ** exact(e)
    prefs = []
    if c1:
        if gamma <= 0 and float(gamma).is_integer():
            raise ParameterError("first hypergeometric branch has a pole at this gamma")
        prefs.append((c1, (alpha, beta, gamma), base))
    if c2:
        g2 = 2 - gamma
        if g2 <= 0 and float(g2).is_integer():
            raise ParameterError("second hypergeometric branch has a pole at this gamma")
        pref2 = base if form == "printed" else base * sp.cos(theta / 2) ** exact(2 - 2 * gamma)
        prefs.append((c2, (alpha + 1 - gamma, beta + 1 - gamma, g2), pref2))
    branches = [(coef, abc, [sp.lambdify(theta, sp.diff(pref, theta, n), "math") for n in range(5)])
                for coef, abc, pref in prefs]

    def provider(th):
        if not 0 < th < math.pi:
            raise DomainError("theta must lie strictly between the poles")
        zz = math.cos(th / 2) ** 2
        out = [0.0] * 5
        for coef, (a, b, c), pref_d in branches:
            G = _chain(_hyper_table(a, b, c, zz, 4), th)
            P = [pd(th) for pd in pref_d]
            for n in range(5):
                out[n] += coef * sum(math.comb(n, k) * P[n - k] * G[k] for k in range(n + 1))
        return out
    return provider


def yaceev(alpha: float, beta: float, gamma: float, c1: float = 1.0, c2: float = 0.0,
           form: str = "repaired") -> FieldSpec:
    """Profiles v_hat = -2 chi'/chi, u_hat = -v_hat' - cot v_hat and the
    pressure profile, with chi from the two hypergeometric branches."""
    consts = yaceev_constants(alpha, beta, gamma, form)
    ch = _chi(theta)
    v_hat = -2 * sp.diff(ch, theta) / ch
    u_hat = -sp.diff(v_hat, theta) - sp.cot(theta) * v_hat
    p_hat = (-2 * sp.diff(v_hat, theta)
             + 2 * (exact(consts["b"]) * sp.cos(theta) - exact(consts["a"])) / sp.sin(theta) ** 2)
    comps = {"u": u_hat / r, "v": v_hat / r, "w": sp.Integer(0), "p": p_hat / r ** 2,
             "u_hat": u_hat, "v_hat": v_hat, "p_hat": p_hat, "chi": ch}
    params = {"alpha": alpha, "beta": beta, "gamma": gamma, "c1": c1, "c2": c2, "form": form,
              **consts}
    return FieldSpec("yaceev", "spherical", params, comps, singular_set="origin and poles",
                     functions={"chi": _chi_provider(alpha, beta, gamma, c1, c2, form)})


# ---------------------------------------------------------------------------
# Squire family
# ---------------------------------------------------------------------------

def _squire_integral(alpha, beta, xi):
    """int_1^xi (1+eta)^beta / (1-eta)^alpha d eta via QUADPACK's algebraic weight."""
    if alpha >= 1:
        raise ParameterError("integral diverges at eta = 1 for alpha >= 1")
    val, err = quad(lambda e: (1 + e) ** beta, xi, 1.0, weight="alg", wvar=(0.0, -alpha),
                    epsabs=1e-14, epsrel=1e-13)
    return -val


@dataclass(frozen=True)
class SquireProfile:
    alpha: float
    beta: float
    b: float
    form: str  # "printed" or "repaired"

    def _linear(self, xi):
        a, be = self.alpha, self.beta
        if self.form == "printed":
            return a * (1 + xi) + be * (1 + xi), a + be
        return a * (1 + xi) + be * (1 - xi), a - be

    def values(self, xi: float) -> tuple[float, float]:
        """(f, f') at xi in (-1, 1)."""
        if not -1 < xi < 1:
            raise DomainError("xi must lie in (-1, 1)")
        a, be = self.alpha, self.beta
        L, dL = self._linear(xi)
        mu = (1 + xi) ** (be + 1) * (1 - xi) ** (1 - a)
        dmu = mu * ((be + 1) / (1 + xi) - (1 - a) / (1 - xi))
        D = self.b - _squire_integral(a, be, xi)
        dI = (1 + xi) ** be / (1 - xi) ** a
        return L + 2 * mu / D, dL + 2 * dmu / D + 2 * mu * dI / D ** 2

    def bernoulli_q(self, xi: float) -> float:
        """Q(xi) = c1 xi^2 + c2 xi + c3 implied by the once-integrated form."""
        f, fp = self.values(xi)
        return -(f * f - 4 * xi * f - 2 * (1 - xi * xi) * fp) / 2


@dataclass(frozen=True)
class SquireReport:
    coefficients: tuple  # (c1, c2, c3) fitted from three nodes
    bernoulli_residual: float  # deviation of Q from that quadratic at check nodes


def squire(alpha: float, beta: float, b: float, form: str = "printed") -> SquireProfile:
    if form not in ("printed", "repaired"):
        raise ParameterError(f"unknown form {form!r}")
    return SquireProfile(alpha, beta, b, form)


def squire_residual(profile: SquireProfile, nodes: Sequence[float] | None = None) -> SquireReport:
    """Is Q(xi) quadratic?  Exactly then f solves the third-order stream equation."""
    fit_nodes = (-0.5, 0.0, 0.5)
    Qf = [profile.bernoulli_q(s) for s in fit_nodes]
    coef = np.polyfit(fit_nodes, Qf, 2)
    nodes = np.linspace(-0.9, 0.9, 19) if nodes is None else np.asarray(nodes)
    dev = [profile.bernoulli_q(s) - np.polyval(coef, s) for s in nodes]
    scale = max(1.0, max(abs(q) for q in Qf))
    return SquireReport(tuple(float(c) for c in coef), float(np.max(np.abs(dev)) / scale))


def squire_stream_rhs(c1: float):
    """Third-order stream equation as a first-order system in xi."""
    def rhs(xi, s):
        f0, f1, f2 = s
        f3 = (f1 ** 2 + f0 * f2 - 2 * f1 + 2 * c1 + 2 * xi * f2) / (1 - xi ** 2)
        return np.array([f1, f2, f3])
    return rhs


def squire_integrate(c1: float, state0: Sequence[float], span: tuple = (0.0, 0.8)) -> dict:
    """Integrate the stream equation directly and test the Bernoulli relation
    along the trajectory: Q must be a quadratic with leading coefficient c1."""
    prob = IvpProblem(squire_stream_rhs(c1), tuple(state0), span, rtol=1e-12, atol=1e-14)
    traj = integrate_ivp(prob)
    xs = np.linspace(*span, 41)
    S = traj(xs)
    Q = -(S[0] ** 2 - 4 * xs * S[0] - 2 * (1 - xs ** 2) * S[1]) / 2
    coef = np.polyfit(xs, Q, 2)
    return {"trajectory": traj, "q_coefficients": tuple(coef),
            "quadratic_residual": float(np.max(np.abs(np.polyval(coef, xs) - Q))),
            "leading_vs_c1": float(coef[0] - c1)}


# ---------------------------------------------------------------------------
# Slezkin's Riccati reduction and Landau's jet
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RiccatiParams:
    C0: float = 0.0
    C1: float = 0.0
    C2: float = 0.0
    nu: float = 1.0

    def Q(self, tau):
        return self.C0 + self.C1 * tau + self.C2 * tau * tau


LINEAR_FORMS = ("identity", "riccati", "printed")


def _linear_coefficient(params: RiccatiParams, form: str):
    """y'' = k(tau) y for the three candidate linearizations.

    identity: implied by the thrice-integrated relation,
    riccati:  implied by the printed first-order Riccati equation,
    printed:  the second-order equation as printed.
    """
    nu = params.nu
    if form == "identity":
        return lambda tau: params.Q(tau) / (2 * nu * nu * (1 - tau * tau) ** 2)
    if form == "riccati":
        return lambda tau: -params.Q(tau) / (2 * nu * (1 - tau * tau) ** 2)
    if form == "printed":
        return lambda tau: -params.Q(tau) / (1 - tau * tau)
    raise ParameterError(f"unknown linear form {form!r}")


def riccati_rhs_printed(params: RiccatiParams, tau, f):
    one = 1 - tau * tau
    return f * f / (2 * params.nu * one) - 2 * tau * f / one + params.Q(tau) / one


def integrated_identity(params: RiccatiParams, tau, f, fp):
    """(1/2) f^2 - nu[(1 - tau^2) f' + 2 tau f] - Q, zero on exact solutions."""
    return 0.5 * f * f - params.nu * ((1 - tau * tau) * fp + 2 * tau * f) - params.Q(tau)


@dataclass
class RiccatiSolution:
    params: RiccatiParams
    form: str
    taus: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    riccati_residual: float  # against the printed first-order equation
    identity_residual: float  # against the thrice-integrated relation
    oracle_gap: float  # adaptive vs fixed-step on y, y'


def slezkin_riccati(params: RiccatiParams, span: tuple = (-0.9, 0.9), f0: float = 0.0,
                    tau0: float = 0.0, form: str = "identity", samples: int = 181) -> RiccatiSolution:
    """Solve the linear second-order equation from tau0 with y(tau0)=1 and
    y'(tau0) chosen so that f(tau0) = f0, then rebuild f = -2 nu (1-tau^2) y'/y."""
    a, b = span
    if not (-1 < a < b < 1) or not a <= tau0 <= b:
        raise ParameterError("span must sit inside (-1, 1) and contain tau0")
    nu = params.nu
    k = _linear_coefficient(params, form)
    yp0 = -f0 / (2 * nu * (1 - tau0 * tau0))

    def rhs(tau, s):
        return np.array([s[1], k(tau) * s[0]])

    taus = np.linspace(a, b, samples)
    pieces = []
    gap = 0.0
    for end in (a, b):
        if end == tau0:
            continue
        prob = IvpProblem(rhs, (1.0, yp0), (tau0, end), rtol=1e-13, atol=1e-15)
        traj = integrate_ivp(prob)
        ref = integrate_fixed_rk8(prob, 400)
        gap = max(gap, float(np.max(np.abs(traj(ref.t) - ref.y))))
        pieces.append(traj)

    def state(tau):
        if len(pieces) == 1:
            return pieces[0](tau)
        return pieces[0](tau) if tau <= tau0 else pieces[-1](tau)

    Y = np.array([state(s) for s in taus]).T
    if np.any(np.abs(Y[0]) < 1e-12) or np.any(np.diff(np.sign(Y[0])) != 0):
        idx = int(np.argmax(np.diff(np.sign(Y[0])) != 0))
        raise DomainError(f"y vanishes near tau = {taus[idx]:.6g}; f has a pole there")
    one = 1 - taus ** 2
    L = Y[1] / Y[0]
    ypp = np.array([k(s) for s in taus]) * Y[0]
    f = -2 * nu * one * L
    fp = -2 * nu * (-2 * taus * L + one * (ypp / Y[0] - L * L))
    ric = fp - riccati_rhs_printed(params, taus, f)
    ident = integrated_identity(params, taus, f, fp)
    return RiccatiSolution(params, form, taus, f, fp, float(np.max(np.abs(ric))),
                           float(np.max(np.abs(ident))), gap)


def landau_profile(A: float, nu: float = 1.0):
    """f = -2 nu (1 - tau^2)/(A + tau), the zero-constant case."""
    if abs(A) <= 1:
        raise ParameterError("need |A| > 1 for a profile regular on [-1, 1]")
    return lambda tau: -2 * nu * (1 - np.asarray(tau) ** 2) / (A + np.asarray(tau))


def landau_from_riccati(A: float, nu: float = 1.0, span: tuple = (-0.9, 0.9)) -> tuple[RiccatiSolution, float]:
    """Rebuild the Landau jet from the linear equation and return its max deviation."""
    sol = slezkin_riccati(RiccatiParams(0, 0, 0, nu), span, f0=-2 * nu / A)
    return sol, float(np.max(np.abs(sol.f - landau_profile(A, nu)(sol.taus))))
