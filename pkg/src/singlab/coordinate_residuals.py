"""Residual oracles for the full Navier-Stokes/Euler systems and their reductions.

The full systems are written once, coordinate-free, through scale factors of
orthogonal frames:

    (u.grad)u = grad(|u|^2/2) - u x curl u,   vector Laplacian = grad div - curl curl.

Printed reduced systems are transcribed term by term and compared against
these oracles evaluated on the corresponding ansatz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from .exact_solutions import SPATIAL, FieldSpec, exact, phi, r, t, theta, x, y, z
from .numerics_core import RESIDUAL_TOL, DomainError, ParameterError, spectral_derivative

POLE_GUARD = 0.05
ORIGIN_GUARD = 1e-3


@dataclass(frozen=True)
class ResidualReport:
    system: str
    equations: tuple
    max_abs: tuple
    rms: tuple
    tolerance: float
    oracle: str
    worst_point: tuple = ()

    @property
    def max_residual(self) -> float:
        return max(self.max_abs) if self.max_abs else 0.0

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def rows(self) -> list[list]:
        worst = " ".join(f"{c:.6g}" for c in self.worst_point)
        return [[self.system, eq, f"{m:.6e}", f"{q:.6e}", worst, self.verdict]
                for eq, m, q in zip(self.equations, self.max_abs, self.rms)]


def report(system: str, names: Sequence[str], values: np.ndarray, points: np.ndarray,
           tolerance: float, oracle: str) -> ResidualReport:
    """values: (n_equations, n_points)."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    absval = np.abs(values)
    if not np.all(np.isfinite(absval)):
        absval = np.where(np.isfinite(absval), absval, np.inf)
    worst = np.unravel_index(int(np.argmax(absval)), absval.shape)[1] if absval.size else 0
    pts = np.atleast_2d(points)
    return ResidualReport(system, tuple(names),
                          tuple(float(v) for v in absval.max(axis=1)),
                          tuple(float(v) for v in np.sqrt((absval ** 2).mean(axis=1))),
                          tolerance, oracle,
                          tuple(float(c) for c in pts[worst]) if pts.size else ())


# ---------------------------------------------------------------------------
# Orthogonal-frame vector calculus
# ---------------------------------------------------------------------------

def scale_factors(coords: str) -> tuple:
    if coords == "cartesian":
        return (sp.Integer(1),) * 3
    if coords == "cylindrical":
        return (sp.Integer(1), r, sp.Integer(1))
    if coords == "spherical":
        return (sp.Integer(1), r, r * sp.sin(theta))
    raise ParameterError(f"unknown frame {coords!r}")


class Frame:
    def __init__(self, coords: str):
        self.coords = coords
        self.q = SPATIAL[coords]
        self.h = scale_factors(coords)

    def grad(self, f):
        return [sp.diff(f, qi) / hi for qi, hi in zip(self.q, self.h)]

    def div(self, u):
        h1, h2, h3 = self.h
        J = h1 * h2 * h3
        return sum(sp.diff(J / hi * ui, qi) for ui, qi, hi in zip(u, self.q, self.h)) / J

    def curl(self, u):
        (q1, q2, q3), (h1, h2, h3) = self.q, self.h
        u1, u2, u3 = u
        return [(sp.diff(h3 * u3, q2) - sp.diff(h2 * u2, q3)) / (h2 * h3),
                (sp.diff(h1 * u1, q3) - sp.diff(h3 * u3, q1)) / (h3 * h1),
                (sp.diff(h2 * u2, q1) - sp.diff(h1 * u1, q2)) / (h1 * h2)]

    @staticmethod
    def cross(a, b):
        return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]

    def scalar_laplacian(self, f):
        return self.div(self.grad(f))

    def convective(self, u):
        ke = sum(ui ** 2 for ui in u) / 2
        g = self.grad(ke)
        c = self.cross(u, self.curl(u))
        return [gi - ci for gi, ci in zip(g, c)]

    def vector_laplacian(self, u):
        gd = self.grad(self.div(u))
        cc = self.curl(self.curl(u))
        return [a - b for a, b in zip(gd, cc)]


def nse_expressions(spec: FieldSpec, nu=1, time_dependent: bool | None = None,
                    pressure: bool = True) -> list:
    """[momentum_1, momentum_2, momentum_3, continuity] as sympy expressions."""
    F = Frame(spec.coords)
    u = spec.velocity_exprs()
    conv = F.convective(u)
    lap = F.vector_laplacian(u) if nu else [0, 0, 0]
    gp = F.grad(spec.components["p"]) if pressure else [0, 0, 0]
    td = spec.time_dependent if time_dependent is None else time_dependent
    ut = [sp.diff(ui, t) for ui in u] if td else [0, 0, 0]
    mom = [ut[i] + conv[i] + gp[i] - nu * lap[i] for i in range(3)]
    return mom + [F.div(u)]


def _guard_points(spec: FieldSpec, pts: np.ndarray):
    if spec.coords == "spherical":
        if np.any(pts[:, 0] < ORIGIN_GUARD):
            raise DomainError("point too close to the origin")
        th = pts[:, 1]
        if np.any((th < POLE_GUARD) | (th > math.pi - POLE_GUARD)):
            raise DomainError("point inside the pole guard")
    elif spec.coords == "cylindrical":
        if np.any(pts[:, 0] < ORIGIN_GUARD):
            raise DomainError("point too close to the axis")
    elif spec.singular_set == "origin":
        if np.any(np.linalg.norm(pts[:, :3], axis=1) < ORIGIN_GUARD):
            raise DomainError("point too close to the origin")


def _evaluate(spec: FieldSpec, exprs, pts) -> np.ndarray:
    return np.array([spec.compile(sp.sympify(e))(pts) for e in exprs])


def nse_residual(spec: FieldSpec, points, nu: float = 1.0, frame: str | None = None,
                 steady: bool | None = None, tolerance: float = RESIDUAL_TOL) -> ResidualReport:
    if frame is not None and frame != spec.coords:
        raise ParameterError(f"field is given in {spec.coords} components, not {frame}")
    if not spec.has_pressure:
        raise ParameterError("no pressure: use euler_residual or the curl form")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    _guard_points(spec, pts)
    td = spec.time_dependent and not steady
    exprs = nse_expressions(spec, exact(nu), td)
    vals = _evaluate(spec, exprs, pts)
    return report(f"{spec.coords}-nse:{spec.family}",
                  ("momentum-1", "momentum-2", "momentum-3", "continuity"), vals, pts,
                  tolerance, f"coordinate-free {spec.coords} momentum and continuity")


def euler_residual(spec: FieldSpec, points, pressure_free: bool | None = None,
                   tolerance: float = RESIDUAL_TOL, nu: float = 0.0) -> ResidualReport:
    """Inviscid residual; without a pressure the curl of the momentum equation
    is used: omega_t - curl(u x omega) + nu curl curl omega.  A negative ``nu``
    tests the backward viscous flow."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    _guard_points(spec, pts)
    if pressure_free is None:
        pressure_free = not spec.has_pressure
    if not pressure_free:
        exprs = nse_expressions(spec, exact(nu), spec.time_dependent)
        names = ("momentum-1", "momentum-2", "momentum-3", "continuity")
    else:
        F = Frame(spec.coords)
        u = spec.velocity_exprs()
        w = F.curl(u)
        wt = [sp.diff(c, t) for c in w] if spec.time_dependent else [0, 0, 0]
        adv = F.curl(F.cross(u, w))
        visc = F.curl(F.curl(w)) if nu else [0, 0, 0]
        exprs = [wt[i] - adv[i] + exact(nu) * visc[i] for i in range(3)] + [F.div(u)]
        names = ("vorticity-1", "vorticity-2", "vorticity-3", "continuity")
    vals = _evaluate(spec, exprs, pts)
    return report(f"euler:{spec.family}", names, vals, pts, tolerance,
                  "curl of momentum" if pressure_free else "momentum with pressure")


def divergence(spec: FieldSpec, points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return spec.compile(Frame(spec.coords).div(spec.velocity_exprs()))(pts)


# ---------------------------------------------------------------------------
# W2 subspace: u, p independent of z and w = z * W~
# ---------------------------------------------------------------------------

def _laplacian_polar(f, rv, av):
    return sp.diff(f, rv, 2) + sp.diff(f, rv) / rv + sp.diff(f, av, 2) / rv ** 2


def w2_printed(U, V, Wt, P, rv=r, av=phi, tv=t) -> list:
    """The subspace system as printed (LHS - RHS of each line)."""
    L = lambda f: _laplacian_polar(f, rv, av)  # noqa: E731
    d = sp.diff
    return [
        d(U, tv) + U * d(U, rv) + V * d(U, av) / rv - V ** 2 / rv + d(P, rv) - L(U)
        + 2 * d(V, av) / rv ** 2 + U / rv ** 2,
        d(V, tv) + U * d(V, rv) + V * d(V, av) / rv + U * V / rv + d(P, av) / rv - L(V)
        - 2 * d(U, av) / rv ** 2 + V / rv ** 2,
        d(Wt, tv) + U * d(Wt, rv) + V * d(Wt, av) / rv + Wt ** 2 - L(Wt),
        d(U, rv) + U / rv + d(V, av) / rv + Wt,
    ]


@dataclass(frozen=True)
class PairedReport:
    printed: ResidualReport
    oracle: ResidualReport
    difference: ResidualReport

    @property
    def flagged(self) -> tuple:
        return tuple(eq for eq, m in zip(self.difference.equations, self.difference.max_abs)
                     if m > self.difference.tolerance)


def _paired(system, names, printed_vals, oracle_vals, pts, tol, oracle_name):
    return PairedReport(
        report(f"{system}:printed", names, printed_vals, pts, tol, "printed transcription"),
        report(f"{system}:oracle", names, oracle_vals, pts, tol, oracle_name),
        report(f"{system}:difference", names, np.asarray(printed_vals) - np.asarray(oracle_vals),
               pts, tol, oracle_name))


def w2_consistency(U, V, Wt, P, points, tolerance: float = 1e-9) -> PairedReport:
    """Profiles are sympy expressions in (r, phi, t); points are (r, phi, z, t).

    The third printed equation is compared after multiplication by z.
    """
    comps = {"u": sp.sympify(U), "v": sp.sympify(V), "w": z * sp.sympify(Wt), "p": sp.sympify(P)}
    spec = FieldSpec("w2-ansatz", "cylindrical", {}, comps, time_dependent=True)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    _guard_points(spec, pts)
    full = _evaluate(spec, nse_expressions(spec, 1, True), pts)
    pr = w2_printed(*(sp.sympify(e) for e in (U, V, Wt, P)))
    pr[2] = z * pr[2]
    printed = _evaluate(spec, pr, pts)
    return _paired("w2-subspace", ("radial", "swirl", "axial", "continuity"), printed, full,
                   pts, tolerance, "full cylindrical system on the ansatz")


# ---------------------------------------------------------------------------
# Twistor (logarithmic travelling wave) rescaling
# ---------------------------------------------------------------------------

Y, MU, TAU = sp.symbols("y mu tau", real=True)


TWISTOR_FORMS = ("printed", "derived")


def twistor_printed(u, v, w, p, sigma, stationary: bool = False, form: str = "printed") -> list:
    """Rescaled system as printed: the nonstationary lines, or the stationary
    lines (which differ in two coefficients of the first equation).

    ``derived`` uses the stationary coefficients throughout and advects with
    -sigma d/dmu, which is what the change of variables produces."""
    if form not in TWISTOR_FORMS:
        raise ParameterError(f"form must be one of {TWISTOR_FORMS}")
    d = sp.diff
    L = lambda f: _laplacian_polar(f, Y, MU)  # noqa: E731
    tt = (lambda f: 0) if stationary else (lambda f: d(f, TAU))  # noqa: E731
    s = exact(sigma) if form == "printed" else -exact(sigma)
    if stationary or form == "derived":
        v2, vmu = v ** 2 / Y, 2 * d(v, MU) / Y ** 2
    else:
        v2, vmu = v ** 2 / Y ** 2, 2 * d(v, MU) / Y
    return [
        tt(u) + Y * d(u, Y) / 2 + u / 2 + s * d(u, MU) + u * d(u, Y) + v * d(u, MU) / Y - v2
        + d(p, Y) - L(u) + vmu + u / Y ** 2,
        tt(v) + Y * d(v, Y) / 2 + v / 2 + s * d(v, MU) + u * d(v, Y) + v * d(v, MU) / Y
        + u * v / Y + d(p, MU) / Y - L(v) - 2 * d(u, MU) / Y ** 2 + v / Y ** 2,
        tt(w) + Y * d(w, Y) / 2 + w + s * d(w, MU) + u * d(w, Y) + v * d(w, MU) / Y + w ** 2 - L(w),
        d(u, Y) + u / Y + d(v, MU) / Y + w,
    ]


def twistor_oracle(u, v, w, p, sigma) -> list:
    """Pull the profiles back to (r, phi, t) with T = 0, evaluate the subspace
    system there and rescale each line to the profiles' homogeneity."""
    s = sp.Symbol("s", positive=True)  # s = -t
    sg = exact(sigma)
    sub = {Y: r / sp.sqrt(s), MU: phi + sg * sp.log(s), TAU: -sp.log(s)}
    U = u.subs(sub) / sp.sqrt(s)
    V = v.subs(sub) / sp.sqrt(s)
    Wt = w.subs(sub) / s
    P = p.subs(sub) / s
    # time derivative at fixed (r, phi): d/dt = -d/ds
    res = w2_printed(U, V, Wt, P, r, phi, t)
    res = [e.subs(t, 0) for e in res]  # no explicit t remains; keep expressions in s
    res[0] += -sp.diff(U, s)
    res[1] += -sp.diff(V, s)
    res[2] += -sp.diff(Wt, s)
    scale = [s ** sp.Rational(3, 2), s ** sp.Rational(3, 2), s ** 2, s]
    back = {r: Y * sp.sqrt(s), phi: MU - sg * sp.log(s)}
    out = []
    for e, k in zip(res, scale):
        e = (e * k).subs(back).subs(s, sp.exp(-TAU))
        out.append(e)
    return out


def twistor_residual(u, v, w, p, sigma: float, points, stationary: bool = False,
                     tolerance: float = 1e-8, form: str = "printed") -> PairedReport:
    """Profiles are expressions in (y, mu, tau) (tau absent when stationary);
    points are (y, mu, tau) triples."""
    prof = [sp.sympify(e) for e in (u, v, w, p)]
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] == 2:
        pts = np.column_stack([pts, np.zeros(len(pts))])
    printed = twistor_printed(*prof, sigma, stationary, form)
    oracle = twistor_oracle(*prof, sigma)
    args = (Y, MU, TAU)
    ev = lambda es: np.array([np.broadcast_to(  # noqa: E731
        np.asarray(sp.lambdify(args, e, "numpy")(*pts.T), dtype=float), (len(pts),)) for e in es])
    tag = ("twistor-stationary" if stationary else "twistor-rescaled") + f"[{form}]"
    return _paired(tag, ("u", "v", "w", "continuity"), ev(printed), ev(oracle), pts, tolerance,
                   "subspace system pulled back through the scaling")


# ---------------------------------------------------------------------------
# Homogeneous circle equilibria: U = A/r, V = B/r, W~ = C/r^2, P = D/r^2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CircleReport:
    full: ResidualReport  # the four-line system
    pressure_relation: ResidualReport  # D against its quadratic expression
    reduced: ResidualReport  # three-line system
    fifth_order: ResidualReport  # two-line system in A, B
    irrotational: ResidualReport | None
    elimination_gap: float  # reduced line 1 minus its combination of full lines
    oracle_gap: ResidualReport  # printed full system vs subspace oracle on the ansatz


def _on_grid(expr, grid):
    f = sp.lambdify(phi, sp.sympify(expr), "numpy")
    return np.broadcast_to(np.asarray(f(grid), dtype=float), grid.shape).copy()


def circle_system(A, B, C, D, M0: float = 0.0, n: int = 64,
                  tolerance: float = 1e-9) -> CircleReport:
    """Profiles: sympy expressions (or numbers) in phi, 2*pi periodic."""
    grid = 2 * np.pi * np.arange(n) / n
    a, b, c, dd = (_on_grid(e, grid) for e in (A, B, C, D))
    der = lambda f, k: spectral_derivative(f, k)  # noqa: E731
    a1, a2 = der(a, 1), der(a, 2)
    b1, b2, b3 = der(b, 1), der(b, 2), der(b, 3)
    c1, c2 = der(c, 1), der(c, 2)
    d1 = der(dd, 1)
    R1 = a2 - b * a1 - 2 * b1 + a ** 2 + b ** 2 + 2 * dd
    R2 = b2 - b * b1 + 2 * a1 - d1
    R3 = c2 - b * c1 + 4 * c + 2 * a * c - c ** 2
    R4 = b1 + c
    RD = dd - (2 * a - 0.5 * b ** 2 - c + M0)
    S1 = a2 - b * a1 + a ** 2 + 4 * a + 2 * M0
    F2 = b3 - b * b2 + b1 ** 2 + 2 * (a + 2) * b1
    pts = grid[:, None]
    full = report("circle:full", ("A-line", "B-line", "C-line", "continuity"),
                  [R1, R2, R3, R4], pts, tolerance, "spectral differentiation")
    prel = report("circle:pressure", ("D-relation",), [RD], pts, tolerance, "spectral differentiation")
    red = report("circle:reduced", ("A-line", "C-line", "continuity"), [S1, R3, R4], pts,
                 tolerance, "spectral differentiation")
    fifth = report("circle:fifth-order", ("A-line", "B-line"), [S1, F2], pts, tolerance,
                   "spectral differentiation")
    irr = None
    if np.max(np.abs(c)) == 0:
        irr = report("circle:irrotational", ("C", "A^2+B^2+2D"), [c, a ** 2 + b ** 2 + 2 * dd],
                     pts, tolerance, "direct substitution")
    gap = float(np.max(np.abs(S1 - (R1 - 2 * RD + 2 * R4))))
    # oracle: subspace system on the homogeneous ansatz, at r = 1 after scaling
    Ae, Be, Ce, De = (sp.sympify(e) for e in (A, B, C, D))
    sys = w2_printed(Ae / r, Be / r, Ce / r ** 2, De / r ** 2)
    scaled = [sys[0] * r ** 3, sys[1] * r ** 3, sys[2] * r ** 4, sys[3] * r ** 2]
    sign = [-1, -1, -1, 1]
    printed = [R1, R2, R3, R4]
    oracle_vals = [sg * _on_grid(e.subs(r, 1), grid) for sg, e in zip(sign, scaled)]
    ogap = report("circle:printed-vs-oracle", ("A-line", "B-line", "C-line", "continuity"),
                  [p - o for p, o in zip(printed, oracle_vals)], pts, tolerance,
                  "subspace system on the homogeneous ansatz")
    return CircleReport(full, prel, red, fifth, irr, gap, ogap)


# ---------------------------------------------------------------------------
# Spherical homogeneous system (degree -1 profiles on the sphere)
# ---------------------------------------------------------------------------

def spherical_homogeneous_printed(uh, vh, wh, ph, stray_r=1) -> list:
    d = sp.diff
    th, ps = theta, phi
    s, c = sp.sin(th), sp.cot(th)
    ang = lambda f: d(f, th, 2) + c * d(f, th) + d(f, ps, 2) / s ** 2  # noqa: E731
    return [
        -uh ** 2 + vh * d(uh, th) + wh * d(uh, ps) / s - vh ** 2 - wh ** 2
        - (2 * ph + ang(uh) - 2 * uh - 2 * d(vh, th) - 2 * c * vh - 2 * d(wh, ps) / s),
        vh * d(vh, th) + wh * d(vh, ps) / (stray_r * s) - c * wh ** 2
        - (-d(ph, th) + ang(vh) - vh / s ** 2 + 2 * d(uh, th) - 2 * c / s * d(wh, ps)),
        vh * d(wh, th) + c * vh * wh + wh * d(wh, ps) / s
        - (-d(ph, ps) / s + ang(wh) - wh / s ** 2 + 2 * d(uh, ps) / s + 2 * c / s * d(vh, ps)),
        uh + d(vh, th) + c * vh + d(wh, ps) / s,
    ]


def spherical_homogeneous(uh, vh, wh, ph, points, stray_r: float = 1.0,
                          tolerance: float = 1e-9) -> PairedReport:
    """Profiles are expressions in (theta, phi); points are (theta, phi) pairs.

    ``stray_r`` is the value given to the lone r that the printed second line
    carries; at r = 1 it is invisible.
    """
    prof = [sp.sympify(e) for e in (uh, vh, wh, ph)]
    comps = {"u": prof[0] / r, "v": prof[1] / r, "w": prof[2] / r, "p": prof[3] / r ** 2}
    spec = FieldSpec("homogeneous-profiles", "spherical", {}, comps)
    pts2 = np.atleast_2d(np.asarray(points, dtype=float))
    pts = np.column_stack([np.ones(len(pts2)), pts2[:, 0], pts2[:, 1]])
    _guard_points(spec, pts)
    full = nse_expressions(spec, 1, False)
    full = [e * r ** 3 for e in full[:3]] + [full[3] * r ** 2]
    oracle = _evaluate(spec, full, pts)
    printed = _evaluate(spec, spherical_homogeneous_printed(*prof, exact(stray_r)), pts)
    return _paired("spherical-homogeneous", ("radial", "polar", "azimuthal", "continuity"),
                   printed, oracle, pts, tolerance, "full spherical system on the ansatz")


# ---------------------------------------------------------------------------
# Axisymmetric swirl-free reduction (theta only)
# ---------------------------------------------------------------------------

def yaceev_reduced_expressions(uh, vh, ph) -> list:
    d = sp.diff
    c = sp.cot(theta)
    return [
        -uh ** 2 + vh * d(uh, theta) - vh ** 2
        - (2 * ph + d(uh, theta, 2) + c * d(uh, theta) - 2 * uh - 2 * d(vh, theta) - 2 * c * vh),
        vh * d(vh, theta)
        - (-d(ph, theta) + d(vh, theta, 2) + c * d(vh, theta) - vh / sp.sin(theta) ** 2
           + 2 * d(uh, theta)),
        uh + d(vh, theta) + c * vh,
    ]


def yaceev_reduced(profiles, points, tolerance: float = RESIDUAL_TOL) -> ResidualReport:
    """``profiles``: a FieldSpec carrying u_hat, v_hat, p_hat, or a dict of
    sympy expressions in theta.  ``points`` are theta values."""
    if isinstance(profiles, FieldSpec):
        spec = profiles
    else:
        spec = FieldSpec("angular-profiles", "spherical", {},
                         {k: sp.sympify(profiles[k]) for k in ("u_hat", "v_hat", "p_hat")})
    th = np.atleast_1d(np.asarray(points, dtype=float))
    if np.any((th < POLE_GUARD) | (th > math.pi - POLE_GUARD)):
        raise DomainError("theta inside the pole guard")
    pts = np.column_stack([np.ones_like(th), th, np.zeros_like(th)])
    ex = yaceev_reduced_expressions(*(spec.components[k] for k in ("u_hat", "v_hat", "p_hat")))
    vals = _evaluate(spec, ex, pts)
    return report(f"yaceev-reduced:{spec.family}", ("radial", "polar", "continuity"), vals,
                  th[:, None], tolerance, "reduced axisymmetric system")


def pressure_integral_spread(spec: FieldSpec, points) -> float:
    """Spread of p_hat - u_hat + v_hat^2/2 over the points; zero when the
    once-integrated polar equation holds with a single constant."""
    th = np.atleast_1d(np.asarray(points, dtype=float))
    pts = np.column_stack([np.ones_like(th), th, np.zeros_like(th)])
    c = spec.components
    vals = spec.compile(c["p_hat"] - c["u_hat"] + c["v_hat"] ** 2 / 2)(pts)
    return float(np.ptp(vals))


def squire_stream_residual(f0, f1, f2, f3, xi, c1) -> float:
    """(f')^2 + f f'' - 2 f' - [(1 - xi^2) f'']' + 2 c1."""
    return f1 ** 2 + f0 * f2 - 2 * f1 - ((1 - xi ** 2) * f3 - 2 * xi * f2) + 2 * c1


# ---------------------------------------------------------------------------
# Local rescaled (Leray) system
# ---------------------------------------------------------------------------

def rescaled_nse_local(U, P, points, tolerance: float = RESIDUAL_TOL) -> tuple[ResidualReport, ResidualReport]:
    """U: three expressions in Cartesian (x, y, z) standing for the rescaled
    variable; P: pressure.  Returns the system residual and the residual of
    the elliptic identity for Pi = |U|^2/2 + y.U/2 + P:
        -Lap Pi + (U + y/2).grad Pi + |curl U|^2."""
    U = [sp.sympify(e) for e in U]
    P = sp.sympify(P)
    F = Frame("cartesian")
    yv = [x, y, z]
    conv = F.convective(U)
    lap = F.vector_laplacian(U)
    gp = F.grad(P)
    drift = [sum(yv[j] * sp.diff(U[i], yv[j]) for j in range(3)) for i in range(3)]
    mom = [U[i] / 2 + drift[i] / 2 + conv[i] + gp[i] - lap[i] for i in range(3)]
    sys = mom + [F.div(U)]
    Pi = sum(u ** 2 for u in U) / 2 + sum(a * b for a, b in zip(yv, U)) / 2 + P
    gPi = F.grad(Pi)
    w = F.curl(U)
    ident = (-F.scalar_laplacian(Pi) + sum((U[i] + yv[i] / 2) * gPi[i] for i in range(3))
             + sum(c ** 2 for c in w))
    spec = FieldSpec("rescaled-local", "cartesian", {}, {"u": U[0], "v": U[1], "w": U[2], "p": P})
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    vals = _evaluate(spec, sys, pts)
    ivals = _evaluate(spec, [ident], pts)
    return (report("rescaled-nse-local", ("momentum-1", "momentum-2", "momentum-3", "continuity"),
                   vals, pts, tolerance, "Cartesian rescaled system"),
            report("rescaled-nse-local:pi-identity", ("elliptic-identity",), ivals, pts, tolerance,
                   "direct differentiation of Pi"))
