"""Scalar blow-up machinery: critical exponents, singular equilibria of
Emden-Fowler type and their shooting classification, Frank-Kamenetskii
spectra and inner profiles, the biharmonic reduction, Hardy constants,
rate formulas and the Hamilton-Jacobi profile ODE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import sympy as sp
from scipy.integrate import quad
from scipy.special import hyp1f1

from .numerics_core import (
    BracketError,
    IvpProblem,
    NonConvergenceError,
    ParameterError,
    find_root,
    integrate_fixed_rk8,
    integrate_ivp,
)

# Classification constants for the shooting labels.
BAND = 0.01  # relative band around an equilibrium, and per-cycle tolerance
PERIODIC_MIN_CYCLES = 10
SPIRAL_MIN_MAXIMA = 3
SAMPLES_PER_UNIT = 400

LABELS = ("stabilize+", "stabilize-", "periodic", "spiral", "finite-time-blow-up",
          "reaches-zero", "inconclusive")


def _frac(v):
    return Fraction(v) if isinstance(v, (int, Fraction)) else Fraction(str(v))


# ---------------------------------------------------------------------------
# Critical exponents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentQuery:
    N: int
    p: float | None = None
    m: int = 1
    sigma_q: Fraction | float = 0
    l: int = 1

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError("N must be a positive integer")
        if self.m < 1 or self.l < 1:
            raise ParameterError("orders must be at least 1")
        if self.p is not None and self.p <= 1:
            raise ParameterError("p must exceed 1")


@dataclass(frozen=True)
class ExponentEntry:
    name: str
    value: Fraction | float | None
    condition: str

    @property
    def present(self) -> bool:
        return self.value is not None


def _sqrt_exact(n: int):
    r = math.isqrt(n)
    return Fraction(r) if r * r == n else None


def critical_exponents(q: ExponentQuery) -> dict[str, ExponentEntry]:
    N, m, s = q.N, q.m, _frac(q.sigma_q)
    out = {}
    if N > 2 * m:
        out["p_S(2m)"] = ExponentEntry("p_S(2m)", Fraction(N + 2 * m, N - 2 * m), f"N > {2 * m}")
        out["p_S(2m,sigma)"] = ExponentEntry("p_S(2m,sigma)", (s + 1) * Fraction(N + 2 * m, N - 2 * m),
                                             f"N > {2 * m}")
    else:
        out["p_S(2m)"] = ExponentEntry("p_S(2m)", None, f"requires N > 2m = {2 * m}")
        out["p_S(2m,sigma)"] = ExponentEntry("p_S(2m,sigma)", None, f"requires N > 2m = {2 * m}")
    if N > 2 * (s + 2):
        out["p_S(4,sigma)"] = ExponentEntry(
            "p_S(4,sigma)", ((s + 1) * N + 2 * (s + 2)) / (N - 2 * (s + 2)), "N > 2(sigma+2)")
    else:
        out["p_S(4,sigma)"] = ExponentEntry("p_S(4,sigma)", None, "requires N > 2(sigma+2)")
    out["p_0"] = ExponentEntry("p_0", 1 + Fraction(2 * (4 * q.l - 1), N), "l >= 1")
    if N >= 11:
        root = _sqrt_exact(N - 1)
        den = (N - 4 - 2 * root) if root is not None else N - 4 - 2 * math.sqrt(N - 1)
        out["p_star"] = ExponentEntry("p_star", 1 + (Fraction(4) / den if root is not None else 4 / den),
                                      "N >= 11")
    else:
        out["p_star"] = ExponentEntry("p_star", None, "requires N >= 11")
    if N > 2:
        out["nse_absorption_upper"] = ExponentEntry("nse_absorption_upper", Fraction(N + 2, N - 2),
                                                    "global smoothness for p at most this")
    else:
        out["nse_absorption_upper"] = ExponentEntry("nse_absorption_upper", None, "requires N > 2")
    out["nse_absorption_lower"] = (ExponentEntry("nse_absorption_lower", Fraction(7, 2), "N = 3")
                                   if N == 3 else
                                   ExponentEntry("nse_absorption_lower", None, "stated for N = 3 only"))
    return out


# ---------------------------------------------------------------------------
# Singular stationary solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SssProfile:
    N: int
    p: float
    mu: Fraction | float
    amplitude: float | None
    exists: bool
    reason: str = ""
    coefficients: dict = field(default_factory=dict)  # biharmonic A, B, C, D
    residual: float | None = None  # relative residual at sample radii

    @property
    def amplitude_power(self):
        """C_*^{p-1}: the exact equilibrium constant."""
        return self.coefficients.get("D") if "D" in self.coefficients else self.coefficients.get("K")


def _relative(res, *terms):
    scale = sum(np.abs(t) for t in terms)
    return float(np.max(np.abs(res) / np.where(scale > 0, scale, 1.0)))


SAMPLE_RADII = np.geomspace(0.05, 5.0, 20)


def emden_fowler_sss(N: int, p, radii: Sequence[float] = SAMPLE_RADII) -> SssProfile:
    if N < 3 or p <= Fraction(N, N - 2):
        return SssProfile(N, p, None, None, False, "requires N >= 3 and p > N/(N-2)")
    pe = _frac(p)
    mu = 2 / (pe - 1)
    K = mu * (N - 2 - mu)
    C = float(K) ** (1 / float(pe - 1))
    r = np.asarray(radii, dtype=float)
    m = float(mu)
    u = C * r ** -m
    upp = C * m * (m + 1) * r ** (-m - 2)
    up = -C * m * r ** (-m - 1)
    res = upp + (N - 1) / r * up + np.abs(u) ** (float(pe) - 1) * u
    return SssProfile(N, p, mu, C, True, "", {"K": K},
                      _relative(res, upp, (N - 1) / r * up, np.abs(u) ** float(pe)))


def biharmonic_printed_coefficients(N, mu) -> dict:
    N, mu = sp.nsimplify(N), sp.nsimplify(mu)
    return {
        "A": 2 * (2 * mu + 4 - N),
        "B": 6 * mu ** 2 + 18 * mu + 11 + (N - 1) * (N - 9 - 6 * mu),
        "C": 2 * (2 * mu ** 3 + 9 * mu ** 2 + 11 * mu + 3
                  + (N - 1) * ((N - 3) * (mu + 1) - 3 * mu ** 2 - 6 * mu - 2)),
        "D": mu * (mu + 2) * ((mu + 1) * (mu + 3) + (N - 1) * (N - 5 - 2 * mu)),
    }


def biharmonic_derived_coefficients(N, mu) -> dict:
    """Coefficients of -phi'''' - A phi''' - B phi'' - C phi' - D phi obtained by
    substituting u = r^{-mu} phi(-ln r) into -Lap^2 u, times r^{mu+4}."""
    r, s = sp.symbols("r s", positive=True)
    f = sp.Function("f")
    u = r ** (-sp.nsimplify(mu)) * f(-sp.log(r))
    n = sp.nsimplify(N)
    lap = lambda g: sp.diff(g, r, 2) + (n - 1) / r * sp.diff(g, r)  # noqa: E731
    e = sp.expand(sp.simplify((-lap(lap(u)) * r ** (sp.nsimplify(mu) + 4)).subs(r, sp.exp(-s)).doit()))
    ders = {k: sp.Derivative(f(s), (s, k)) for k in range(1, 5)}
    out = {}
    for name, k in (("A", 3), ("B", 2), ("C", 1)):
        out[name] = sp.nsimplify(-e.coeff(ders[k]))
    out["D"] = sp.nsimplify(-e.subs({d: 0 for d in ders.values()}).coeff(f(s)))
    return out


def biharmonic_reduction(N: int, p, radii: Sequence[float] = SAMPLE_RADII) -> SssProfile:
    if p <= 1:
        raise ParameterError("p must exceed 1")
    pe = _frac(p)
    mu = 4 / (pe - 1)
    printed = biharmonic_printed_coefficients(N, mu)
    coeffs = {k: sp.Rational(v) if v.is_Rational else v for k, v in printed.items()}
    D = coeffs["D"]
    band = (N > 4 and pe > Fraction(N, N - 4)) or (N > 2 and pe < Fraction(N + 2, N - 2))
    if not D > 0:
        return SssProfile(N, p, mu, None, False, "D <= 0: no real positive amplitude",
                          coeffs)
    C = float(D) ** (1 / float(pe - 1))
    m = float(mu)
    r = np.asarray(radii, dtype=float)
    # Lap r^{-a} = -a (N-2-a) r^{-a-2}
    k1 = m * (N - 2 - m)
    k2 = (m + 2) * (N - 4 - m)
    bil = C * k1 * k2 * r ** (-m - 4)
    u = C * r ** -m
    res = -bil + np.abs(u) ** (float(pe) - 1) * u
    reason = "" if band else "D > 0 outside the printed existence range"
    return SssProfile(N, p, mu, C, True, reason, coeffs,
                      _relative(res, bil, np.abs(u) ** float(pe)))


# ---------------------------------------------------------------------------
# Oscillatory component shooting
# ---------------------------------------------------------------------------

def ef_coefficients(N, p) -> tuple[float, float, float]:
    mu = 2.0 / (p - 1)
    return mu, 2 * mu + 2 - N, mu * (mu + 2 - N)


def ef_rhs(N, p) -> Callable:
    _, damp, lin = ef_coefficients(N, p)

    def rhs(s, Y):
        f, g = Y
        return np.array([g, -damp * g - lin * f - abs(f) ** (p - 1) * f])
    return rhs


def hamiltonian(phi, dphi, p, linear):
    return 0.5 * dphi ** 2 + 0.5 * linear * phi ** 2 + np.abs(phi) ** (p + 1) / (p + 1)


@dataclass
class ShootOutcome:
    label: str
    s: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    maxima: np.ndarray
    zero_count: int
    amplitude: float | None
    integrator: str
    message: str = ""

    @property
    def cycles(self) -> int:
        return max(len(self.maxima) - 1, 0)

    def hamiltonian_drift(self, p: float, linear: float) -> float:
        """Relative drift of the conserved quantity for the given linear
        coefficient (only conserved when the damping vanishes)."""
        H = hamiltonian(self.phi, self.dphi, p, linear)
        return float(np.max(np.abs(H - H[0])) / max(abs(H[0]), 1e-300))


def classify(s, f, M, amplitude: float | None, failed: bool = False) -> str:
    """Label from the sampled trajectory f(s) and its successive maxima M."""
    if failed:
        return "finite-time-blow-up" if np.max(np.abs(f)) > 1e6 else "inconclusive"
    tail = f[s >= s[0] + 0.75 * (s[-1] - s[0])]
    if amplitude:
        for sign, name in ((1, "stabilize+"), (-1, "stabilize-")):
            if np.all(np.abs(tail - sign * amplitude) <= BAND * amplitude):
                return name
    zero_band = BAND * (amplitude if amplitude else max(np.max(np.abs(f)), 1e-300))
    if np.all(np.abs(tail) <= zero_band):
        return "reaches-zero"
    M = np.asarray(M)
    if len(M) >= PERIODIC_MIN_CYCLES + 1:
        ratios = M[1:] / M[:-1]
        if np.all(np.abs(ratios - 1) <= BAND):
            return "periodic"
    if len(M) >= SPIRAL_MIN_MAXIMA and np.all(M[1:] >= (1 + BAND) * M[:-1]) and np.all(M > 0):
        return "spiral"
    return "inconclusive"


def _hermite_max(s0, s1, f0, f1, g0, g1, n=64) -> float:
    t = np.linspace(0.0, 1.0, n)
    h = s1 - s0
    H = ((2 * t ** 3 - 3 * t ** 2 + 1) * f0 + (t ** 3 - 2 * t ** 2 + t) * h * g0
         + (-2 * t ** 3 + 3 * t ** 2) * f1 + (t ** 3 - t ** 2) * h * g1)
    return float(np.max(H))


def emden_fowler_shoot(N: int, p: float, phi0: float, dphi0: float, s_max: float,
                       integrator: str = "adaptive", steps_per_unit: int = 200,
                       rtol: float = 1e-11, atol: float = 1e-13) -> ShootOutcome:
    if not np.isfinite(s_max) or s_max <= 0:
        raise ParameterError("s_max must be finite and positive")
    if p <= 1:
        raise ParameterError("p must exceed 1")
    sss = emden_fowler_sss(N, p)
    amp = sss.amplitude if sss.exists else None

    def crest(t, Y):
        return Y[1]

    def node(t, Y):
        return Y[0]

    crest.direction = -1
    prob = IvpProblem(ef_rhs(N, p), [phi0, dphi0], (0.0, float(s_max)), rtol, atol, (crest, node))
    failed, msg = False, ""
    with np.errstate(over="ignore", invalid="ignore"):
        if integrator == "adaptive":
            tr = integrate_ivp(prob, raise_on_failure=False)
            if tr.status == "failed":
                failed, msg = True, tr.message
            grid = np.linspace(0.0, tr.t_end, int(math.ceil(tr.t_end * SAMPLES_PER_UNIT)) + 1)
            Y = tr(grid)
            crests = tr.t_events[0] if tr.t_events else np.array([])
            maxima = np.array([tr(c)[0] for c in crests])
            zc = len(tr.t_events[1]) if tr.t_events else 0
        elif integrator == "fixed":
            tr = integrate_fixed_rk8(prob, int(math.ceil(s_max * steps_per_unit)))
            if tr.status == "failed":
                failed, msg = True, tr.message
            grid, Y = tr.t, tr.y
            f, g = Y
            idx = np.nonzero((g[:-1] > 0) & (g[1:] <= 0))[0]
            maxima = np.array([_hermite_max(grid[i], grid[i + 1], f[i], f[i + 1], g[i], g[i + 1])
                               for i in idx])
            zc = int(np.count_nonzero(np.sign(f[1:]) * np.sign(f[:-1]) < 0))
        else:
            raise ParameterError("integrator must be 'adaptive' or 'fixed'")
    f, g = Y[0], Y[1]
    label = classify(grid, f, maxima, amp, failed)
    return ShootOutcome(label, grid, f, g, maxima, int(zc), amp, integrator, msg)


@dataclass(frozen=True)
class Preset:
    name: str
    N: int
    p: float
    phi0: float
    dphi0: float
    s_max: float
    expected: tuple
    steps_per_unit: int = 200


PRESETS = {
    "fig2a": Preset("fig2a", 3, 4.0, 0.0, 0.76, 80.0, ("stabilize+", "stabilize-")),
    "fig2b": Preset("fig2b", 3, 4.0, 0.0, -1.63, 80.0, ("stabilize+", "stabilize-")),
    "fig3": Preset("fig3", 3, 5.0, 0.0, 0.5, 0.0, ("periodic",)),
    "fig4a": Preset("fig4a", 3, 6.0, 0.0, 0.5, 30.0, ("spiral",)),
    "fig4b": Preset("fig4b", 17, 2.0, 0.0, 1.0e4, 1.0, ("spiral",), 20_000),
}


def run_preset(name: str, integrator: str = "adaptive") -> ShootOutcome:
    if name not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    pr = PRESETS[name]
    s_max = pr.s_max or periodic_span(pr.N, pr.p, pr.phi0, pr.dphi0, cycles=20)
    return emden_fowler_shoot(pr.N, pr.p, pr.phi0, pr.dphi0, s_max, integrator,
                              pr.steps_per_unit)


def periodic_span(N, p, phi0, dphi0, cycles: int = 20) -> float:
    """Span covering the requested number of cycles (plus one) for the
    conservative case, from the period of a short probe run."""
    def crest(t, Y):
        return Y[1]
    crest.direction = -1
    tr = integrate_ivp(IvpProblem(ef_rhs(N, p), [phi0, dphi0], (0.0, 60.0), 1e-11, 1e-13, (crest,)))
    c = tr.t_events[0]
    if len(c) < 2:
        raise NonConvergenceError("probe found fewer than two maxima")
    period = float(np.mean(np.diff(c)))
    return (cycles + 1.5) * period


@dataclass(frozen=True)
class AutonomousForm:
    N: int
    damping: Fraction
    linear_derived: Fraction
    linear_printed: Fraction
    discrepancy: bool
    drift_derived: float | None = None
    drift_printed: float | None = None

    @property
    def verdict(self) -> str:
        if self.drift_derived is None:
            return "unadjudicated"
        return "derived" if self.drift_derived < self.drift_printed else "printed"


def autonomous_form_coefficient(N: int, adjudicate: bool = False, phi0: float = 0.0,
                                dphi0: float = 0.5) -> AutonomousForm:
    if N < 3:
        raise ParameterError("N must be at least 3")
    mu = Fraction(N - 2, 2)  # 2/(p_S - 1)
    damping = 2 * mu + 2 - N
    lin = mu * (mu + 2 - N)
    printed = -Fraction((N - 2) ** 2, 8)
    dd = dp = None
    if adjudicate:
        pS = (N + 2) / (N - 2)
        out = emden_fowler_shoot(N, pS, phi0, dphi0, periodic_span(N, pS, phi0, dphi0))
        dd = out.hamiltonian_drift(pS, float(lin))
        dp = out.hamiltonian_drift(pS, float(printed))
    return AutonomousForm(N, damping, lin, printed, lin != printed, dd, dp)


# ---------------------------------------------------------------------------
# Regular radial profiles
# ---------------------------------------------------------------------------

@dataclass
class RegularShoot:
    amplitude: float
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    zero_count: int
    phi_data: tuple  # (phi(0), phi'(0)) of the same solution at r = 1

    @property
    def u_end(self) -> float:
        return float(self.u[-1])


def regular_profile_shoot(N: int, p: float, a: float, r_max: float = 1.0,
                          r0: float = 1e-4) -> RegularShoot:
    if a == 0:
        raise ParameterError("amplitude must be nonzero")

    def rhs(r, Y):
        u, v = Y
        return np.array([v, -(N - 1) / r * v - abs(u) ** (p - 1) * u])

    c = abs(a) ** (p - 1) * a / (2 * N)
    prob = IvpProblem(rhs, [a - c * r0 ** 2, -2 * c * r0], (r0, r_max), 1e-12, 1e-14)
    tr = integrate_ivp(prob)
    grid = np.linspace(r0, r_max, 4001)
    Y = tr(grid)
    u, du = Y[0], Y[1]
    zc = int(np.count_nonzero(np.sign(u[1:]) * np.sign(u[:-1]) < 0))
    mu = 2.0 / (p - 1)
    uend, duend = tr(r_max)
    phi = r_max ** mu * uend
    # phi(s) = r^mu u(r), s = -ln r  =>  phi' = -(mu r^mu u + r^{mu+1} u')
    dphi = -(mu * r_max ** mu * uend + r_max ** (mu + 1) * duend)
    return RegularShoot(a, grid, u, du, zc, (float(phi), float(dphi)))


def separating_amplitude(N: int, p: float, bracket: tuple[float, float],
                         r_max: float = 1.0) -> float:
    """Amplitude where the sign-change count on (0, r_max) increments, i.e.
    where u(r_max) = 0."""
    lo, hi = (regular_profile_shoot(N, p, a, r_max) for a in bracket)
    if lo.zero_count == hi.zero_count:
        raise BracketError("amplitudes do not straddle a zero-count increment")
    return find_root(lambda a: regular_profile_shoot(N, p, a, r_max).u_end, bracket, 1e-10)


# ---------------------------------------------------------------------------
# Frank-Kamenetskii
# ---------------------------------------------------------------------------

def fk_singular_equilibrium(N: int, radii: Sequence[float] = SAMPLE_RADII) -> dict:
    if N <= 2:
        raise ParameterError("the singular equilibrium needs N >= 3")
    y = np.asarray(radii, dtype=float)
    V = np.log(2 * (N - 2) / y ** 2)
    Vp = -2 / y
    Vpp = 2 / y ** 2
    terms = np.array([Vpp, (N - 1) / y * Vp, -0.5 * y * Vp, np.exp(V), -np.ones_like(y)])
    res = terms.sum(axis=0)
    # the terms grow like 1/y^2, so rounding alone leaves |res| ~ eps / y^2
    scale = np.maximum(np.abs(terms).max(axis=0), 1.0)
    return {"radii": y, "V": V, "residual": float(np.max(np.abs(res))),
            "scaled_residual": float(np.max(np.abs(res) / scale))}


@dataclass(frozen=True)
class FkExponents:
    N: int
    delta: float | None
    b: float | None
    oscillatory: bool
    hardy_lhs: int
    hardy_rhs: Fraction

    @property
    def hardy_admissible(self) -> bool:
        return self.hardy_lhs <= self.hardy_rhs

    @property
    def hardy_equality(self) -> bool:
        return self.hardy_lhs == self.hardy_rhs


def fk_exponents(N: int) -> FkExponents:
    if N < 3:
        raise ParameterError("N must be at least 3")
    delta = b = None
    if N >= 10:
        delta = (N - 2 - math.sqrt((N - 2) * (N - 10))) / 2
    if N <= 9:
        b = math.sqrt((N - 2) * (10 - N)) / 2
    return FkExponents(N, delta, b, N <= 9, 2 * (N - 2), Fraction(N - 2, 2) ** 2)


def _fk_P(q, N):
    return q * q + (N - 2) * q + 2 * (N - 2)


def fk_ladder(N: int, n: int) -> float:
    """Exact eigenvalue: the eigenfunction is y^{-delta} M(-n, N/2 - delta, y^2/4)."""
    d = fk_exponents(N).delta
    return d / 2 - n


def fk_ladder_eigenfunction(N: int, n: int, y):
    d = fk_exponents(N).delta
    return np.asarray(y, float) ** -d * hyp1f1(-n, N / 2 - d, np.asarray(y, float) ** 2 / 4)


@dataclass
class FkEigen:
    N: int
    k: int
    n: int
    found: bool
    eigenvalue: float | None
    ladder: float
    window: tuple
    zero_count: int | None = None
    small_y_slope: float | None = None
    roots: tuple = ()

    @property
    def asymptote_ratio(self) -> float | None:
        return None if self.eigenvalue is None else self.eigenvalue / (-self.k / 2)


Y_IN, Y_MID, Y_OUT = 1e-2, 1.0, 10.0


def _fk_rhs(N, lam):
    def rhs(y, Y):
        f, g = Y
        return np.array([g, -(N - 1) / y * g + 0.5 * y * g - (2 * (N - 2) / y ** 2 - lam) * f])
    return rhs


def _fk_inner(N, lam, d):
    s = -d
    a1 = ((s) / 2 + lam) / _fk_P(s + 2, N)
    a2 = a1 * ((s + 2) / 2 + lam) / _fk_P(s + 4, N)
    y = Y_IN
    # psi = y^s (1 + a1 y^2 + a2 y^4), stored divided by Y_IN^s
    f = 1 + a1 * y ** 2 + a2 * y ** 4
    g = (s + (s + 2) * a1 * y ** 2 + (s + 4) * a2 * y ** 4) / y
    return integrate_ivp(IvpProblem(_fk_rhs(N, lam), [f, g], (Y_IN, Y_MID), 1e-11, 1e-14))


OUTER_TERMS = 2


def _fk_outer(N, lam, terms=OUTER_TERMS):
    m = -2 * lam
    c = [1.0]
    for j in range(1, terms + 1):
        c.append(-c[-1] * _fk_P(m - 2 * j + 2, N) / j)
    y = Y_OUT
    f = sum(cj * y ** (-2 * j) for j, cj in enumerate(c))
    g = sum(cj * (m - 2 * j) * y ** (-2 * j) for j, cj in enumerate(c)) / y
    return integrate_ivp(IvpProblem(_fk_rhs(N, lam), [f, g], (Y_OUT, Y_MID), 1e-11, 1e-14))


@lru_cache(maxsize=4096)
def fk_mismatch(N: int, lam: float, outer_terms: int = OUTER_TERMS) -> float:
    """Normalised Wronskian at y = 1 of the y^-delta bundle (from 0) and the
    polynomial bundle (from infinity)."""
    d = fk_exponents(N).delta
    L = _fk_inner(N, lam, d).y_end
    R = _fk_outer(N, lam, outer_terms).y_end
    return float((L[0] * R[1] - L[1] * R[0]) / (np.hypot(*L) * np.hypot(*R)))


SCAN_STEP = 0.1


def fk_spectrum_shoot(N: int, k: int, window: tuple | None = None,
                      outer_terms: int = OUTER_TERMS) -> FkEigen:
    """The k-th eigenvalue (k = 2n, n the number of interior nodes) of the
    linearization about the singular equilibrium."""
    if N < 11:
        raise ParameterError("a discrete spectrum with the y^-delta bundle needs N >= 11")
    if k < 2 or k % 2:
        raise ParameterError("k must be even and at least 2")
    d = fk_exponents(N).delta
    n = k // 2
    lo, hi = window if window else (d / 2 - n - 1.0, d / 2 + 1.0)
    # scan on a lattice anchored at 0 so that repeated calls share cached values
    grid = SCAN_STEP * np.arange(math.floor(hi / SCAN_STEP), math.ceil(lo / SCAN_STEP) - 1, -1)
    grid = [round(float(g), 10) for g in grid]
    mis = lambda l: fk_mismatch(N, float(l), outer_terms)  # noqa: E731
    vals = [mis(l) for l in grid]
    roots = []
    for a_, b_, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0:
            roots.append(float(a_))
        elif fa * fb < 0:
            roots.append(find_root(mis, (b_, a_), 1e-10))
    roots = sorted(set(roots), reverse=True)
    if len(roots) <= n:
        return FkEigen(N, k, n, False, None, fk_ladder(N, n), (lo, hi), roots=tuple(roots))
    lam = roots[n]
    inner = _fk_inner(N, lam, d)
    outer = _fk_outer(N, lam, outer_terms)
    fi, fo = inner.y[0], outer.y[0]
    zc = int(np.count_nonzero(np.sign(fi[1:]) * np.sign(fi[:-1]) < 0)
             + np.count_nonzero(np.sign(fo[1:]) * np.sign(fo[:-1]) < 0))
    # the inner state is a constant multiple of psi, so its log-slope is psi's
    y1, y2 = Y_IN, 2 * Y_IN
    slope = (math.log(abs(inner(y2)[0])) - math.log(abs(inner(y1)[0]))) / math.log(y2 / y1)
    return FkEigen(N, k, n, True, lam, fk_ladder(N, n), (lo, hi), zc, slope, tuple(roots))


@dataclass
class InnerProfile:
    N: int
    xi: np.ndarray
    W: np.ndarray
    far_const: float  # ln(2(N-2))
    band_max: float  # max |W + 2 ln xi - far_const| on [1e2, 1e3]
    band_variation: float  # max - min of W + 2 ln xi on [1e2, 1e3]
    W0: float


def fk_inner_profile(N: int, xi_max: float = 1e3, integrator: str = "adaptive",
                     steps: int = 200_000) -> InnerProfile:
    if N < 3:
        raise ParameterError("N must be at least 3")
    x0 = 1e-4

    def rhs(x, Y):
        w, v = Y
        return np.array([v, -(N - 1) / x * v - math.exp(w)])

    y0 = [-x0 ** 2 / (2 * N), -x0 / N]
    prob = IvpProblem(rhs, y0, (x0, xi_max), 1e-11, 1e-13)
    if integrator == "adaptive":
        tr = integrate_ivp(prob)
        xi = np.concatenate([[0.0], np.geomspace(x0, xi_max, 4000)])
        W = np.concatenate([[0.0], tr(xi[1:])[0]])
    else:
        tr = integrate_fixed_rk8(prob, steps)
        xi = np.concatenate([[0.0], tr.t])
        W = np.concatenate([[0.0], tr.y[0]])
    mask = (xi >= 1e2) & (xi <= 1e3)
    q = W[mask] + 2 * np.log(xi[mask])
    c = math.log(2 * (N - 2))
    return InnerProfile(N, xi, W, c, float(np.max(np.abs(q - c))), float(np.ptp(q)), float(W[0]))


def region_two_exponents(alpha_k: float) -> dict:
    if alpha_k <= 1:
        raise ParameterError("alpha_k must exceed 1")
    return {"xi_scale": alpha_k / 2, "time_scale": 1 - alpha_k,
            "perturbation_coefficient": alpha_k / (alpha_k - 1)}


# ---------------------------------------------------------------------------
# Rates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateInputs:
    lam: float | None = None
    delta: float | None = None
    gamma: float | None = None
    beta_order: int | None = None


def blowup_rates(inp: RateInputs) -> dict:
    out = {}
    if inp.lam is not None and inp.delta is not None:
        if inp.delta <= 0:
            raise ParameterError("delta must be positive")
        a = 2 * abs(inp.lam) / inp.delta
        out["alpha_k"] = a
        out["linf_coefficient"] = 1 + a
    if inp.lam is not None and inp.gamma is not None:
        if inp.gamma <= 1:
            raise ParameterError("gamma_k must exceed 1")
        out["matched_exponential_rate"] = -inp.lam / (inp.gamma - 1)
        out["velocity_rate_exponent"] = -0.5 + inp.lam / (inp.gamma - 1)
    if inp.gamma is not None:
        if inp.gamma <= 1:
            raise ParameterError("gamma_k must exceed 1")
        out["log_correction_exponent"] = 1 / (inp.gamma - 1)
    if inp.beta_order is not None:
        b = inp.beta_order
        out["critical_sobolev_rate"] = Fraction(2 * b + 1, 4)
        if b > 0:
            out["standing_wave_exponent"] = Fraction(b - 2, 2 * b)
    return out


# ---------------------------------------------------------------------------
# Loewner-Nirenberg and Hardy constants
# ---------------------------------------------------------------------------

def loewner_nirenberg(N: int, radii: Sequence[float] | None = None) -> dict:
    if N < 3:
        raise ParameterError("N must be at least 3")
    rho = sp.Symbol("rho", nonnegative=True)
    K = N * (N - 2)
    u = (sp.Integer(K) / (K + rho ** 2)) ** sp.Rational(N - 2, 2)
    if N == 3:
        u = sp.sqrt(sp.Integer(3) / (3 + rho ** 2))
    pS = sp.Rational(N + 2, N - 2)
    up = sp.diff(u, rho)
    # the radial Laplacian has a removable singularity at rho = 0; use N u''(0) there
    lap = sp.diff(u, rho, 2) + (N - 1) * sp.cancel(up / rho)
    res = sp.lambdify(rho, lap + u ** pS, "numpy")
    lapf = sp.lambdify(rho, lap, "numpy")
    r = np.concatenate([[0.0], np.geomspace(0.1, 10.0, 20)]) if radii is None else np.asarray(radii, float)
    vals = np.broadcast_to(np.asarray(res(r), dtype=float), r.shape)
    return {"radii": r, "residual": float(np.max(np.abs(vals))),
            "laplacian_at_0": float(lapf(0.0)), "u": sp.lambdify(rho, u, "numpy")}


@dataclass(frozen=True)
class HardyReport:
    N: int
    c_H: Fraction
    axisymmetric_printed_formula: Fraction
    axisymmetric_printed_value: Fraction | None
    axisymmetric_repaired: Fraction
    quotients: dict  # name -> Rayleigh quotient or None (inadmissible)

    def holds(self, name: str) -> bool | None:
        q = self.quotients.get(name)
        return None if q is None else q >= float(self.c_H) * (1 - 1e-9)


def _bump(r):
    return np.where(r < 1, (1 - r * r) ** 3, 0.0), np.where(r < 1, -6 * r * (1 - r * r) ** 2, 0.0)


TRIAL_FUNCTIONS = {
    "gaussian": lambda r: (np.exp(-r * r), -2 * r * np.exp(-r * r)),
    "bump": _bump,
    "shifted-gaussian": lambda r: (r * np.exp(-r * r), (1 - 2 * r * r) * np.exp(-r * r)),
}


def rayleigh_quotient(N: int, trial: Callable, r_max: float = 12.0) -> float | None:
    num = quad(lambda r: float(trial(r)[1]) ** 2 * r ** (N - 1), 0, r_max, limit=200)
    den = quad(lambda r: float(trial(r)[0]) ** 2 * r ** (N - 3), 0, r_max, limit=200)
    if not (np.isfinite(num[0]) and np.isfinite(den[0])) or den[0] <= 0:
        return None
    if den[1] > 1e-6 * abs(den[0]) or num[1] > 1e-6 * abs(num[0]):
        return None
    return num[0] / den[0]


def hardy_constants(N: int, trials: dict | None = None) -> HardyReport:
    if N < 3:
        raise ParameterError("N must be at least 3")
    cH = Fraction(N - 2, 2) ** 2
    printed = cH * Fraction(N * N + 2 * N + 4, N * N + 2 * N - 4)
    repaired = cH * Fraction((N + 2) ** 2, N * N + 4 * N - 4)
    trials = TRIAL_FUNCTIONS if trials is None else trials
    q = {name: rayleigh_quotient(N, f) for name, f in trials.items()}
    return HardyReport(N, cH, printed, Fraction(25, 68) if N == 3 else None, repaired, q)


# ---------------------------------------------------------------------------
# Hamilton-Jacobi profile
# ---------------------------------------------------------------------------

@dataclass
class HjProfile:
    order: int
    f: float
    rho: Fraction
    endpoint: float | None
    h_at_end: float
    monotone: bool
    zeta: np.ndarray
    h: np.ndarray
    integrator: str
    reason: str = ""

    @property
    def compact(self) -> bool:
        return self.endpoint is not None


HJ_T_MAX = 90.0


def hamilton_jacobi_profile(order: int, f: float = 1.0, span_cap: float = 50.0,
                            integrator: str = "adaptive", steps: int = 20_000,
                            zeta0: float = 1e-3, t_max: float = HJ_T_MAX) -> HjProfile:
    """Profile of -(rho + 1/2) z h' - (m/z) h' - h + h^2 = 0, m' = z h,
    rho = (1 - |beta|)/|beta|, h ~ 1 - f z^|beta| at 0.

    The support edge is a 0/0 point (h and the drift (rho + 1/2) z + m/z vanish
    together), so the system is integrated along a parameter t with
        dz/dt = (rho + 1/2) z + m/z,  dm/dt = z h dz/dt,  dh/dt = -h (1 - h).
    The last equation is solved in closed form, h = 1/(1 + a e^t), which keeps
    1 - h exact near the start.  The support is compact exactly when z(t)
    converges, and its endpoint is the limit.
    """
    if order < 2 or int(order) != order:
        raise ParameterError("|beta| must be an integer >= 2")
    if f <= 0:
        raise ParameterError("f_j must be positive")
    rho = Fraction(1 - order, order)
    k = float(rho + Fraction(1, 2))
    g0 = f * zeta0 ** order  # 1 - h at the start
    a = g0 / (1 - g0)

    def h_of(t):
        return 1.0 / (1.0 + a * np.exp(t))

    def rhs(t, Y):
        z, m = Y
        dz = k * z + m / z
        return np.array([dz, z * h_of(t) * dz])

    def cap(t, Y):
        return Y[0] - span_cap

    cap.terminal = True
    y0 = [zeta0, zeta0 ** 2 / 2 - f * zeta0 ** (order + 2) / (order + 2)]
    prob = IvpProblem(rhs, y0, (0.0, t_max), 1e-12, 1e-15, (cap,))
    if integrator == "adaptive":
        tr = integrate_ivp(prob)
    elif integrator == "fixed":
        tr = integrate_fixed_rk8(prob, steps, stop=lambda t, Y: Y[0] >= span_cap)
    else:
        raise ParameterError("integrator must be 'adaptive' or 'fixed'")
    t = tr.t
    z, m = tr.y
    h = h_of(t)
    drift = k * z[-1] + m[-1] / z[-1]
    h_end = float(h[-1])
    mono = bool(np.all(np.diff(z) >= -1e-12 * z[1:]))  # h decreases in t by construction
    if z[-1] >= span_cap:
        end, reason = None, f"support exceeds the span cap {span_cap} (h = {h_end:.3e} there)"
    elif drift > 1e-8 * z[-1]:
        end, reason = None, (f"z still advancing at t = {t[-1]:.0f} (drift {drift:.3e}, "
                             f"z = {z[-1]:.6g}, h = {h_end:.3e}): no finite edge")
    else:
        end, reason = float(z[-1]), ""
    return HjProfile(order, f, rho, end, h_end, mono, z, h, integrator, reason)
