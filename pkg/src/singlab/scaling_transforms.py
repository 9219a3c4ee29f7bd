"""Similarity rescalings as invertible maps, Stokes mode dynamics and the
energy-type functionals.

A frame maps physical data (points x, time t, field values) to rescaled data
(y, tau, hat values).  Every frame is a pair of power laws: a length factor
``L`` with y = x / L and an amplitude factor with u = A * u_hat.  Value
columns carry a kind (velocity, pressure, axial) because pressure and the
axial twistor unknown scale differently from velocity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np
import sympy as sp

from .hermite_spectral import SolenoidalMode, hermite_mode, solenoidal_basis
from .numerics_core import (
    DomainError,
    ExactPolynomial3,
    MultiIndex,
    ParameterError,
    gaussian_moment_float,
    gaussian_weight_rule,
)

FRAME_KINDS = ("blowup-similarity", "global-similarity", "burnett", "twistor", "ck-rescale")
VALUE_KINDS = ("velocity", "pressure", "axial")
TRUNCATION_WIDTHS = 12.0
ROUND_TRIP_TOL = 1e-13
IDENTITY_TOL = 1e-8

# amplitude exponents e with  physical = s**e * rescaled,  s = T - t (or t)
_EXPONENTS = {
    "blowup-similarity": {"length": 0.5, "velocity": -0.5, "pressure": -1.0, "axial": -1.0},
    "global-similarity": {"length": 0.5, "velocity": -0.5, "pressure": -1.0, "axial": -1.0},
    "burnett": {"length": 0.25, "velocity": -0.75, "pressure": -1.5, "axial": -1.0},
    "twistor": {"length": 0.5, "velocity": -0.5, "pressure": -1.0, "axial": -1.0},
}


@dataclass(frozen=True)
class ScalingFrame:
    kind: str
    T: float = 1.0
    sigma: float = 0.0
    Ck: float = 1.0
    x_k: tuple = (0.0, 0.0, 0.0)
    t_k: float = 0.0

    def __post_init__(self):
        if self.kind not in FRAME_KINDS:
            raise ParameterError(f"unknown frame kind {self.kind!r}")
        if self.kind == "ck-rescale" and not (math.isfinite(self.Ck) and self.Ck >= 1):
            raise DomainError("C_k must be finite and at least 1")

    @property
    def a_k(self) -> float:
        return self.Ck ** (-2.0 / 3.0)

    @property
    def delta_k(self) -> float:
        return self.Ck ** (1.0 / 3.0)

    def translated(self, dt: float) -> "ScalingFrame":
        """Frame seen after shifting physical time by dt."""
        if self.kind == "ck-rescale":
            return replace(self, t_k=self.t_k + dt)
        if self.kind == "global-similarity":
            raise ParameterError("the global frame is anchored at t = 0")
        return replace(self, T=self.T + dt)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "T": self.T, "sigma": self.sigma, "Ck": self.Ck,
                "x_k": list(self.x_k), "t_k": self.t_k}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ScalingFrame":
        d = dict(d)
        if "x_k" in d:
            d["x_k"] = tuple(float(v) for v in d["x_k"])
        return cls(**d)

    # --- scalar pieces -------------------------------------------------
    def _s(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "global-similarity":
            if np.any(t <= 0):
                raise DomainError("global frames need t > 0")
            return t
        if np.any(t >= self.T):
            raise DomainError("blow-up frames need t < T")
        return self.T - t

    def log_time(self, t):
        s = self._s(t)
        return np.log(s) if self.kind == "global-similarity" else -np.log(s)

    def physical_time(self, tau):
        tau = np.asarray(tau, dtype=float)
        if self.kind == "global-similarity":
            return np.exp(tau)
        return self.T - np.exp(-tau)

    def factors(self, t, kinds: Sequence[str]):
        """Length factor and per-column amplitude factors at physical time t."""
        if self.kind == "ck-rescale":
            amp = {"velocity": self.Ck, "pressure": self.Ck ** 2, "axial": self.Ck / self.a_k}
            return self.a_k, np.array([amp[k] for k in kinds])
        s = self._s(t)
        ex = _EXPONENTS[self.kind]
        length = s ** ex["length"]
        amp = np.stack([s ** ex[k] for k in kinds], axis=-1)
        return length, amp


@dataclass(frozen=True)
class FrameSample:
    """Points with their times and field values.

    ``coords`` is (n, d); ``times`` is (n,); ``values`` is (n, m) with one
    kind per column.  For the twistor frame coords are (radius, angle).
    """
    coords: np.ndarray
    times: np.ndarray
    values: np.ndarray
    kinds: tuple = ("velocity", "velocity", "velocity")

    def __post_init__(self):
        for k in self.kinds:
            if k not in VALUE_KINDS:
                raise ParameterError(f"unknown value kind {k!r}")


def rescale(frame: ScalingFrame, sample, direction: str = "forward", t=None, tau=None):
    """Map a FrameSample, or a VectorField snapshot, through the frame.

    Samples: forward sends (x, t, u) to (y, tau, u_hat); inverse undoes it.
    Fields: forward takes the snapshot at physical time ``t`` and returns
    the rescaled snapshot; inverse takes the snapshot at ``tau``.
    """
    if direction not in ("forward", "inverse"):
        raise ParameterError("direction must be 'forward' or 'inverse'")
    if isinstance(sample, VectorField):
        return _rescale_field(frame, sample, direction, t, tau)
    coords = np.atleast_2d(np.asarray(sample.coords, dtype=float))
    times = np.asarray(sample.times, dtype=float).reshape(-1)
    values = np.atleast_2d(np.asarray(sample.values, dtype=float))
    kinds = tuple(sample.kinds)
    if values.shape[1] != len(kinds):
        raise ParameterError("one kind per value column")
    if frame.kind == "ck-rescale":
        a2 = frame.a_k ** 2
        length, amp = frame.factors(None, kinds)
        centre = np.asarray(frame.x_k[:coords.shape[1]], dtype=float)
        if direction == "forward":
            return FrameSample((coords - centre) / length, (times - frame.t_k) / a2,
                               values / amp, kinds)
        return FrameSample(coords * length + centre, times * a2 + frame.t_k, values * amp, kinds)

    if direction == "forward":
        t = times
        new_times = frame.log_time(t)
    else:
        t = frame.physical_time(times)
        new_times = t
        if frame.kind != "global-similarity" and np.any(~np.isfinite(t)):
            raise DomainError("log-time overflow")
    length, amp = frame.factors(t, kinds)
    length = np.asarray(length).reshape(-1, 1)
    out = coords.copy()
    if frame.kind == "twistor":
        if coords.shape[1] != 2:
            raise ParameterError("twistor samples are (radius, angle) pairs")
        logs = np.log(frame.T - t)
        if direction == "forward":
            out[:, 0] = coords[:, 0] / length[:, 0]
            out[:, 1] = coords[:, 1] + frame.sigma * logs        # mu = phi + sigma ln(T - t)
        else:
            out[:, 0] = coords[:, 0] * length[:, 0]
            out[:, 1] = coords[:, 1] - frame.sigma * logs        # phi = mu - sigma ln(T - t)
    else:
        out = coords / length if direction == "forward" else coords * length
    vals = values / amp if direction == "forward" else values * amp
    return FrameSample(out, new_times, vals, kinds)


def twistor_angle(mu: float, tau, sigma: float):
    """Physical angle at fixed rescaled angle: phi = mu + sigma * tau."""
    return mu + sigma * np.asarray(tau, dtype=float)


def round_trip_error(frame: ScalingFrame, sample: FrameSample) -> float:
    back = rescale(frame, rescale(frame, sample, "forward"), "inverse")
    err = 0.0
    for a, b in ((sample.coords, back.coords), (sample.times, back.times),
                 (sample.values, back.values)):
        a = np.asarray(a, dtype=float)
        err = max(err, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a)))))
    return err


# ---------------------------------------------------------------------------
# Closed-form vector fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VectorField:
    """Snapshot of a vector field on R^3.

    ``value`` maps (n, 3) points to (n, 3); ``gradient`` to (n, 3, 3) with
    entry [i, k] = d_k u_i.  ``width`` is the standard width of |u|^2, used
    to size the quadrature box.
    """
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    width: float = 1.0
    centre: tuple = (0.0, 0.0, 0.0)


def _rescale_field(frame, f: VectorField, direction, t, tau) -> VectorField:
    if frame.kind == "twistor":
        raise ParameterError("twistor fields live on the (r, phi) subspace; rescale samples instead")
    if frame.kind == "ck-rescale":
        L, A = frame.a_k, frame.Ck
        c = np.asarray(frame.x_k, dtype=float)
        new_centre = tuple((np.asarray(f.centre) - c) / L) if direction == "forward" \
            else tuple(np.asarray(f.centre) * L + c)
    else:
        if direction == "forward":
            if t is None:
                raise ParameterError("forward field rescaling needs t")
            tt = t
        else:
            if tau is None:
                raise ParameterError("inverse field rescaling needs tau")
            tt = float(frame.physical_time(tau))
        L, amp = frame.factors(tt, ("velocity",))
        L, A = float(L), float(np.asarray(amp).reshape(-1)[0])
        c = np.zeros(3)
        new_centre = tuple(np.asarray(f.centre) / L) if direction == "forward" \
            else tuple(np.asarray(f.centre) * L)
    if direction == "forward":
        return VectorField(lambda y: f.value(c + L * y) / A,
                           lambda y: f.gradient(c + L * y) * (L / A),
                           f.width / L, new_centre)
    return VectorField(lambda x: A * f.value((x - c) / L),
                       lambda x: f.gradient((x - c) / L) * (A / L),
                       f.width * L, new_centre)


def gaussian_bump(amplitude: float = 1.0, width: float = 1.0,
                  direction=(0.0, 0.0, 1.0), centre=(0.0, 0.0, 0.0)) -> VectorField:
    """amplitude * direction * exp(-|x - c|^2 / (2 width^2)), sup = amplitude |direction|."""
    d = np.asarray(direction, dtype=float)
    c = np.asarray(centre, dtype=float)

    def g(x):
        z = np.atleast_2d(x) - c
        return amplitude * np.exp(-np.sum(z * z, axis=1) / (2 * width ** 2)), z

    def val(x):
        e, _ = g(x)
        return e[:, None] * d[None, :]

    def grad(x):
        e, z = g(x)
        return -(e / width ** 2)[:, None, None] * d[None, :, None] * z[:, None, :]
    # |u|^2 ~ exp(-|z|^2 / w^2): standard width w / sqrt(2)
    return VectorField(val, grad, width / math.sqrt(2), tuple(c))


def mode_field(components: Sequence[ExactPolynomial3], amplitude: float = 1.0) -> VectorField:
    """Gaussian multiple p(y) exp(-|y|^2/4) of a polynomial triple."""
    polys = list(components)
    dpolys = [[p.diff(k) for k in range(3)] for p in polys]

    def val(y):
        y = np.atleast_2d(y)
        F = amplitude * np.exp(-np.sum(y * y, axis=1) / 4)
        return np.stack([F * np.broadcast_to(p(*y.T), F.shape) for p in polys], axis=1)

    def grad(y):
        y = np.atleast_2d(y)
        F = amplitude * np.exp(-np.sum(y * y, axis=1) / 4)
        out = np.empty((len(y), 3, 3))
        for i, p in enumerate(polys):
            pv = np.broadcast_to(p(*y.T), F.shape)
            for k in range(3):
                dv = np.broadcast_to(dpolys[i][k](*y.T), F.shape)
                out[:, i, k] = (dv - 0.5 * y[:, k] * pv) * F
        return out
    return VectorField(val, grad, 1.0)


def heat_stokes_field(a=(0.0, 0.0, 1.0), s: float = 1.0) -> VectorField:
    """curl(a G(., s)) for the heat kernel G at age s: an exact Stokes flow in s."""
    if s <= 0:
        raise DomainError("heat kernel age must be positive")
    a = np.asarray(a, dtype=float)
    norm = (4 * math.pi * s) ** -1.5

    def G(x):
        x = np.atleast_2d(x)
        return norm * np.exp(-np.sum(x * x, axis=1) / (4 * s)), x

    def val(x):
        g, x = G(x)
        dG = -(x / (2 * s)) * g[:, None]
        return np.cross(dG, a)

    def grad(x):
        g, x = G(x)
        hess = (x[:, :, None] * x[:, None, :] / (4 * s * s)
                - np.eye(3)[None] / (2 * s)) * g[:, None, None]
        # u_i = eps_{ilm} d_l G a_m  =>  d_k u_i = eps_{ilm} H_{lk} a_m
        eps = np.zeros((3, 3, 3))
        eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1
        eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1
        return np.einsum("ilm,nlk,m->nik", eps, hess, a)
    return VectorField(val, grad, math.sqrt(s))


def heat_stokes_blowup(a=(0.0, 0.0, 1.0), s0: float = 1.0, frame: ScalingFrame | None = None):
    """tau -> rescaled snapshot of the Stokes flow curl(a G(., t + s0)) in a blow-up frame."""
    frame = frame or ScalingFrame("blowup-similarity")

    def snapshot(tau: float) -> VectorField:
        t = float(frame.physical_time(tau))
        return rescale(frame, heat_stokes_field(a, t + s0), "forward", t=t)
    return snapshot


# ---------------------------------------------------------------------------
# ck rescaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CkRescaled:
    field: VectorField
    Ck: float
    a_k: float
    delta_k: float
    sup_before: float
    sup_after: float
    l2_before: float
    l2_after: float

    @property
    def l2_relative_change(self) -> float:
        return abs(self.l2_after - self.l2_before) / max(self.l2_before, 1e-300)


def field_sup(f: VectorField, order: int = 25) -> float:
    """Sup of |u| by a grid search refined with Nelder-Mead."""
    from scipy.optimize import minimize
    L = TRUNCATION_WIDTHS * f.width / 3
    x = np.linspace(-L, L, order)
    grid = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3) + np.asarray(f.centre)
    mag = np.linalg.norm(f.value(grid), axis=1)
    if not np.all(np.isfinite(mag)):
        raise DomainError("field is not finite on the search grid")
    start = grid[int(np.argmax(mag))]
    res = minimize(lambda z: -np.linalg.norm(f.value(z[None])[0]), start, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
    best = max(float(mag.max()), float(-res.fun))
    if not math.isfinite(best):
        raise DomainError("non-finite sup")
    return best


def ck_rescale(f: VectorField, Ck: float | None = None, x_k=None, order: int = 40) -> CkRescaled:
    sup = field_sup(f)
    Ck = sup if Ck is None else float(Ck)
    if not math.isfinite(Ck):
        raise DomainError("non-finite C_k")
    frame = ScalingFrame("ck-rescale", Ck=Ck, x_k=tuple(x_k) if x_k is not None else tuple(f.centre))
    g = rescale(frame, f, "forward")
    before = functionals(f, order=order)
    after = functionals(g, order=order)
    return CkRescaled(g, Ck, frame.a_k, frame.delta_k, sup, field_sup(g),
                      math.sqrt(2 * before.energy), math.sqrt(2 * after.energy))


# ---------------------------------------------------------------------------
# Functionals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Functionals:
    energy: float          # (1/2) ||u||^2
    dissipation: float     # ||D u||^2
    masses: tuple          # int u_i
    l2_growth: float | None
    tail_estimate: float
    tolerance: float

    @property
    def conclusive(self) -> bool:
        return self.tail_estimate <= self.tolerance

    @property
    def l2_sq(self) -> float:
        return 2 * self.energy


def _tail_estimate(f: VectorField, L: float, n: int = 9) -> float:
    """Face density of |u|^2 on the box times its area and one width."""
    x = np.linspace(-L, L, n)
    A, B = np.meshgrid(x, x, indexing="ij")
    A, B = A.reshape(-1), B.reshape(-1)
    c = np.asarray(f.centre)
    worst = 0.0
    for ax in range(3):
        for side in (-L, L):
            pts = np.empty((len(A), 3))
            others = [i for i in range(3) if i != ax]
            pts[:, ax], pts[:, others[0]], pts[:, others[1]] = side, A, B
            v = f.value(pts + c)
            worst = max(worst, float(np.max(np.sum(v * v, axis=1))))
    return worst * 6 * (2 * L) ** 2 * f.width


def functionals(f: VectorField, order: int = 40, tau: float | None = None,
                tolerance: float = 1e-12) -> Functionals:
    """Energy, dissipation and masses by tensor Gauss-Legendre on a box of
    12 widths.  With ``tau`` the ratio of the blow-up rescaled squared norm
    at that log-time to the physical one is reported (exactly e^{tau/2})."""
    L = TRUNCATION_WIDTHS * f.width
    rule = gaussian_weight_rule(order, f.width, truncation=TRUNCATION_WIDTHS)
    pts = rule.nodes + np.asarray(f.centre)
    u = f.value(pts)
    Du = f.gradient(pts)
    w = rule.weights
    l2 = float(w @ np.sum(u * u, axis=1))
    diss = float(w @ np.sum(Du * Du, axis=(1, 2)))
    masses = tuple(float(w @ u[:, i]) for i in range(3))
    growth = None
    if tau is not None:
        frame = ScalingFrame("blowup-similarity", T=float(np.exp(-tau)))
        g = rescale(frame, f, "forward", t=0.0)
        r2 = gaussian_weight_rule(order, g.width, truncation=TRUNCATION_WIDTHS)
        v = g.value(r2.nodes + np.asarray(g.centre))
        growth = float(r2.weights @ np.sum(v * v, axis=1)) / l2 if l2 > 0 else float("nan")
    return Functionals(0.5 * l2, diss, masses, growth, _tail_estimate(f, L), tolerance)


# ---------------------------------------------------------------------------
# Stokes mode states
# ---------------------------------------------------------------------------

def stokes_rate(order: int) -> float:
    """Decay rate of an order-k coefficient: lambda_beta - 1/2 = -(1 + k)/2."""
    return -(1 + order) / 2


_MODES: dict[str, SolenoidalMode] = {}


def solenoidal_mode(label: str) -> SolenoidalMode:
    if label not in _MODES:
        try:
            k = int(label[1:].split(".")[0])
        except (ValueError, IndexError):
            raise ParameterError(f"bad mode id {label!r}") from None
        for m in solenoidal_basis(k):
            _MODES[m.label] = m
        if label not in _MODES:
            raise ParameterError(f"unknown mode id {label!r}")
    return _MODES[label]


@dataclass(frozen=True)
class StokesModeState:
    coefficients: Mapping[str, float]
    tau: float = 0.0

    def __post_init__(self):
        for lab in self.coefficients:
            solenoidal_mode(lab)

    def support(self) -> dict[str, float]:
        return {k: v for k, v in self.coefficients.items() if v != 0}

    def polynomials(self) -> tuple[ExactPolynomial3, ExactPolynomial3, ExactPolynomial3]:
        out = [ExactPolynomial3(), ExactPolynomial3(), ExactPolynomial3()]
        for lab, c in self.support().items():
            m = solenoidal_mode(lab)
            for i in range(3):
                out[i] = out[i] + Fraction(c) * m.components[i]
        return tuple(out)

    def value(self, y) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return np.stack([np.broadcast_to(p(*y.T), (len(y),)) for p in self.polynomials()], axis=1)

    def physical_value(self, x, t: float, T: float = 1.0) -> np.ndarray:
        """Velocity in original variables through the inverse blow-up frame."""
        frame = ScalingFrame("blowup-similarity", T=T)
        tau = float(frame.log_time(t))
        evolved = stokes_mode_evolution(self, tau - self.tau)
        L, A = frame.factors(t, ("velocity",))
        return float(np.asarray(A).reshape(-1)[0]) * evolved.value(np.atleast_2d(x) / L)


def stokes_mode_evolution(state: StokesModeState, dtau: float) -> StokesModeState:
    new = {lab: c * math.exp(stokes_rate(solenoidal_mode(lab).degree) * dtau)
           for lab, c in state.coefficients.items()}
    return StokesModeState(new, state.tau + dtau)


def hermite_decompose(p: ExactPolynomial3) -> dict[MultiIndex, Fraction]:
    """Coefficients of p in the H_beta = D^beta F / F basis (exact)."""
    rest, out = p, {}
    while not rest.is_zero():
        d = rest.degree()
        for mono, c in list(rest.terms.items()):
            if sum(mono) == d:
                beta = MultiIndex(mono)
                coef = c * Fraction(-2) ** d      # H_beta has leading term (-y/2)^beta
                out[beta] = out.get(beta, Fraction(0)) + coef
                rest = rest - coef * hermite_mode(beta).polynomial
                break
    return out


def evolve_polynomial_field(components: Sequence[ExactPolynomial3], dtau: float):
    """Stokes semigroup on a polynomial triple, Hermite degree by degree."""
    out = []
    for p in components:
        q = ExactPolynomial3()
        for beta, c in hermite_decompose(p).items():
            q = q + Fraction(float(c) * math.exp(stokes_rate(beta.order) * dtau)) \
                * hermite_mode(beta).polynomial
        out.append(q)
    return tuple(out)


def _weighted_inner(u: Sequence[ExactPolynomial3], v: Sequence[ExactPolynomial3]) -> float:
    """Sum_i int u_i v_i F dy with int F dy = 1."""
    tot = sum((a * b for a, b in zip(u, v)), ExactPolynomial3())
    return gaussian_moment_float(tot, 0.25) / (8 * math.pi ** 1.5)


def project(components: Sequence[ExactPolynomial3], k_max: int) -> StokesModeState:
    """Weighted-L2 projection onto the solenoidal modes of orders 1..k_max."""
    coeffs = {}
    for k in range(1, k_max + 1):
        modes = solenoidal_basis(k)
        G = np.array([[_weighted_inner(a.components, b.components) for b in modes] for a in modes])
        rhs = np.array([_weighted_inner(m.components, components) for m in modes])
        for m, c in zip(modes, np.linalg.solve(G, rhs)):
            coeffs[m.label] = float(c)
    return StokesModeState(coeffs)


def weighted_norms(state: StokesModeState) -> tuple[float, float]:
    """(||u||^2, ||Du||^2) in the Gaussian weight F / int F."""
    comps = state.polynomials()
    grads = [p.diff(k) for p in comps for k in range(3)]
    return _weighted_inner(comps, comps), _weighted_inner(grads, grads)


# ---------------------------------------------------------------------------
# Energy identity
# ---------------------------------------------------------------------------

# half d/dtau ||u||^2 = -||Du||^2 + c ||u||^2
IDENTITY_FORMS = {"printed": 0.25, "weighted": -0.5, "global": -0.25}


@dataclass(frozen=True)
class EnergyIdentity:
    source: str
    form: str
    lhs: float
    rhs: float
    norm_sq: float
    tolerance: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def relative(self) -> float:
        return self.residual / max(self.norm_sq, 1e-300)

    @property
    def passed(self) -> bool:
        return self.relative <= self.tolerance


def energy_identity(source, tau: float = 0.0, h: float = 1e-4, form: str = "printed",
                    tolerance: float = IDENTITY_TOL, order: int = 60) -> EnergyIdentity:
    """Check half d/dtau ||u||^2 = -||Du||^2 + c ||u||^2 by a five-point
    difference in tau.

    ``source`` is a StokesModeState (norms in the Gaussian weight, since
    polynomial modes have no plain L2 norm) or a callable tau -> VectorField
    (plain L2 norms by quadrature).
    """
    if form not in IDENTITY_FORMS:
        raise ParameterError(f"unknown identity form {form!r}")
    if isinstance(source, StokesModeState):
        def norms(tt):
            return weighted_norms(stokes_mode_evolution(source, tt - source.tau))
        kind = "stokes-modes/weighted"
    else:
        def norms(tt):
            fn = functionals(source(tt), order=order)
            return fn.l2_sq, fn.dissipation
        kind = "l2-solution/plain"
    n = {k: norms(tau + k * h)[0] for k in (-2, -1, 1, 2)}
    d = (n[-2] - 8 * n[-1] + 8 * n[1] - n[2]) / (12 * h)
    l2, dl2 = norms(tau)
    return EnergyIdentity(kind, form, 0.5 * d, -dl2 + IDENTITY_FORMS[form] * l2, l2, tolerance)


# ---------------------------------------------------------------------------
# Slow swirl
# ---------------------------------------------------------------------------

T_SYM = sp.Symbol("t", negative=True)


def kappa_profile(kind: str, delta: float = 1.0, value: float = 1.0) -> sp.Expr:
    if kind == "constant":
        return sp.Float(value)
    if kind == "logtw":
        return -sp.log(-T_SYM)
    if kind == "double-log":
        L = sp.log(-T_SYM)
        return -L / sp.Abs(sp.log(sp.Abs(L))) ** sp.nsimplify(delta)
    raise ParameterError(f"unknown kappa profile {kind!r}")


@dataclass(frozen=True)
class SwirlCoefficient:
    t: float
    value: float


def slow_swirl(kappa, t, sigma: float = 1.0):
    """sigma (-t) kappa'(t), replacing the constant sigma of the log swirl."""
    kappa = sp.sympify(kappa)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts >= 0):
        raise DomainError("slow swirl needs t < 0")
    coef = sp.lambdify(T_SYM, -T_SYM * sp.diff(kappa, T_SYM), "math")
    vals = [SwirlCoefficient(float(tt), float(sigma * coef(tt))) for tt in ts]
    return vals[0] if np.ndim(t) == 0 else vals


def slow_swirl_decay(kappa, log_depths: Sequence[float] = (10, 20, 40, 80, 160),
                     sigma: float = 1.0) -> tuple[list[SwirlCoefficient], bool]:
    """Coefficient along t = -exp(-L); True if |value| decreases monotonically."""
    ts = [-math.exp(-L) for L in log_depths]
    vals = slow_swirl(kappa, ts, sigma)
    mags = [abs(v.value) for v in vals]
    return vals, all(b < a for a, b in zip(mags, mags[1:]))
