"""Command-line front end.

Every command writes CSV files (header, rows, then one ``#`` metadata line
with the package version, config hash and seed) and returns an exit code:
0 pass, 1 verification failure, 2 usage error, 3 numerically inconclusive.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import math
import multiprocessing
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np
import sympy as sp

from . import __version__
from .numerics_core import NonConvergenceError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
STATUSES = ("confirmed", "repaired", "refuted", "fail", "measured")
LEDGER_HEADER = ("family", "item", "status", "metric", "value", "tolerance", "note")


@dataclass(frozen=True)
class Row:
    family: str
    item: str
    status: str
    metric: str
    value: float | str
    tolerance: float | str = ""
    note: str = ""

    def cells(self) -> list[str]:
        return [self.family, self.item, self.status, self.metric, fmt(self.value),
                fmt(self.tolerance), self.note]


def fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12e}"
    if isinstance(v, Fraction):
        return str(v)
    return str(v)


def check(family, item, value, tol, metric="max residual", note="", fail_status="fail") -> Row:
    ok = value is not None and math.isfinite(value) and value <= tol
    return Row(family, item, "confirmed" if ok else fail_status, metric, value, tol, note)


def printed_vs_repaired(family, item, printed_err, repaired_err, tol, note) -> list[Row]:
    """Two rows: the printed form and its repair, judged by the same oracle."""
    if printed_err <= tol:
        return [Row(family, item, "confirmed", "printed deviation", printed_err, tol, note)]
    status = "repaired" if repaired_err <= tol else "refuted"
    return [Row(family, item, status, "printed deviation", printed_err, tol, note),
            Row(family, item + " (repaired)", "confirmed" if repaired_err <= tol else "fail",
                "repaired deviation", repaired_err, tol, note)]


# ---------------------------------------------------------------------------
# Sample points
# ---------------------------------------------------------------------------

def shell_points(rng, n, r_min=0.3, r_max=3.0):
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    return d * rng.uniform(r_min, r_max, n)[:, None]


def spherical_points(rng, n, r=(0.5, 2.0)):
    return np.column_stack([rng.uniform(*r, n), rng.uniform(0.3, 2.8, n), rng.uniform(0, 2 * np.pi, n)])


def cylinder_points(rng, n, t=(-2.0, 0.5)):
    return np.column_stack([rng.uniform(0.5, 2, n), rng.uniform(0, 2 * np.pi, n),
                            rng.uniform(-1, 1, n), rng.uniform(*t, n)])


def random_trig(rng, var, order=2, scale=1.0):
    terms = [rng.normal() * scale]
    for k in range(1, order + 1):
        a, b = rng.normal(size=2) * scale / k
        terms += [a * sp.cos(k * var), b * sp.sin(k * var)]
    return sp.Add(*[sp.Float(float(c)) if not isinstance(c, sp.Basic) else c for c in terms])


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

def fam_slezkin_landau(seed: int, tol: dict, c=None) -> list[Row]:
    from . import coordinate_residuals as cr
    from . import exact_solutions as es
    F = "slezkin-landau"
    cs = (1.5, 2.0, 5.0) if c is None else (float(c),)
    rng = np.random.default_rng(seed)
    rows = []
    for cc in cs:
        pts = shell_points(rng, 20)
        rep = cr.nse_residual(es.slezkin_landau_cartesian(cc), pts, tolerance=tol["residual"])
        rows.append(check(F, f"c={cc} canonical steady system", rep.max_residual, tol["residual"],
                          note="momentum and divergence at 20 points, 0.3<=r<=3"))
        sph = spherical_points(rng, 20)
        printed = cr.nse_residual(es.slezkin_landau_spherical(cc, "printed"), sph).max_residual
        canon = cr.nse_residual(es.slezkin_landau_spherical(cc, "canonical"), sph).max_residual
        rows += printed_vs_repaired(F, f"c={cc} printed spherical profiles", printed, canon,
                                    tol["residual"], "radial profile scaled by -2, polar sign flipped")
        fluxes = [es.sl_flux_coefficient(cc, R) for R in (0.5, 1.0, 2.0)]
        rows.append(check(F, f"c={cc} sphere mass flux", max(abs(f.mass_flux) for f in fluxes),
                          tol["flux"], "max |flux|"))
        vals = [f.value for f in fluxes]
        spread = (max(vals) - min(vals)) / abs(vals[1])
        rows.append(check(F, f"c={cc} flux coefficient radius independence", spread,
                          tol["radius"], "relative spread over r=0.5,1,2"))
        forms = fluxes[1].closed_forms
        rows += printed_vs_repaired(
            F, f"c={cc} printed closed-form flux coefficient",
            abs(forms["printed"] - vals[1]) / abs(vals[1]),
            abs(forms["repaired"] - vals[1]) / abs(vals[1]), tol["radius"],
            "linear term 6c should read 6c^2")
    big = 100.0
    v = es.sl_flux_coefficient(big).value
    forms = es.flux_closed_forms(big)
    pe = abs(forms["printed_expansion"] - v) / abs(v)
    de = abs(forms["derived_expansion"] - v) / abs(v)
    rows.append(Row(F, f"c={big} printed large-c expansion",
                    "repaired" if de < pe / 100 else "refuted", "relative deviation", pe,
                    "", f"derived expansion 16pi/c + 272pi/(15c^3) deviates by {de:.3e}"))
    lim = es.sl_large_c_limit([0.3, 0.4, 0.5])
    rows.append(Row(F, "large-c limit of the third component", "measured", "c*w - 2z^2/r^3 at c=1000",
                    abs(lim[-1].third_vs_derived), "", "decays like 1/c"))
    return rows


def fam_landau_riccati(seed: int, tol: dict) -> list[Row]:
    from . import exact_solutions as es
    F = "landau-riccati"
    rows = []
    for A in (2.0, 3.0, 5.0):
        _, dev = es.landau_from_riccati(A)
        rows.append(check(F, f"A={A} jet from the linear equation", dev, tol["profile"],
                          "max |f + 2(1-tau^2)/(A+tau)| on [-0.9, 0.9]"))
    p = es.RiccatiParams(1.0, 0.5, 0.2, 1.0)
    ident = es.slezkin_riccati(p, f0=0.3, form="identity")
    printed_lin = es.slezkin_riccati(p, f0=0.3, form="printed")
    rows.append(check(F, "integrated identity along its own linearization", ident.identity_residual,
                      tol["profile"], note="Q != 0"))
    one = 1 - ident.taus ** 2
    repaired = ident.fp - (0.5 * ident.f ** 2 - 2 * p.nu * ident.taus * ident.f
                           - p.Q(ident.taus)) / (p.nu * one)
    rows += printed_vs_repaired(F, "printed first-order Riccati equation (Q != 0)",
                                ident.riccati_residual, float(np.max(np.abs(repaired))), tol["profile"],
                                "the Q term enters with coefficient -1/nu")
    rows += printed_vs_repaired(F, "printed second-order linear equation (Q != 0)",
                                printed_lin.identity_residual, ident.identity_residual, tol["profile"],
                                "coefficient Q/(2 nu^2 (1-tau^2)^2)")
    return rows


def fam_euler_separable(seed: int, tol: dict) -> list[Row]:
    from . import coordinate_residuals as cr
    from . import exact_solutions as es
    F = "euler-separable"
    rng = np.random.default_rng(seed)
    eu = es.euler_separable(1.0)
    pts = cylinder_points(rng, 20)
    div = float(np.max(np.abs(cr.divergence(eu, pts))))
    rep = cr.euler_residual(eu, pts, tolerance=tol["residual"])
    return [check(F, "divergence", div, tol["divergence"]),
            check(F, "curl of the momentum equation", rep.max_residual, tol["residual"],
                  note="pressure-free vorticity form")]


def fam_oseen_moffatt(seed: int, tol: dict) -> list[Row]:
    from . import coordinate_residuals as cr
    from . import exact_solutions as es
    F = "oseen-moffatt"
    rng = np.random.default_rng(seed)
    om = es.oseen_moffatt_vortex(1.3, 1.0)
    pts = cylinder_points(rng, 20)
    vr = es.vortex_report(om, pts)
    inviscid = cr.euler_residual(om, pts).max_residual
    backward = cr.euler_residual(om, pts, nu=-1.0).max_residual
    return [check(F, "axial curl equals closed-form vorticity", vr.curl_mismatch, tol["residual"]),
            check(F, "backward heat equation for the vorticity", vr.heat_residual, tol["residual"]),
            Row(F, "inviscid Euler vorticity equation", "measured", "max residual", inviscid, "",
                "not an Euler solution"),
            check(F, "vorticity equation with viscosity -1", backward, tol["residual"])]


def fam_rigid_rotation(seed: int, tol: dict) -> list[Row]:
    from . import coordinate_residuals as cr
    from . import exact_solutions as es
    rng = np.random.default_rng(seed)
    pts = shell_points(rng, 10)
    return [check("rigid-rotation", "steady system", cr.nse_residual(es.rigid_rotation(1.0), pts)
                  .max_residual, tol["residual"]),
            check("rigid-rotation", "zero field", cr.nse_residual(es.zero_field(), pts).max_residual,
                  tol["residual"])]


def fam_von_karman(seed: int, tol: dict) -> list[Row]:
    from . import coordinate_residuals as cr
    from . import exact_solutions as es
    F = "von-karman"
    rng = np.random.default_rng(seed)
    sol = es.von_karman([0.1, 0.2, -0.3, 0.5, 0.1])
    pts = np.column_stack([rng.uniform(-1, 1, 10), rng.uniform(-1, 1, 10), rng.uniform(0.1, 0.9, 10)])
    printed = cr.nse_residual(sol.field("printed"), pts).max_residual
    repaired = cr.nse_residual(sol.field("repaired"), pts).max_residual
    return [check(F, "integrator agreement", sol.agreement(), tol["profile"]),
            check(F, "ODE residual by Chebyshev differentiation", sol.ode_residual(), 1e-6),
            *printed_vs_repaired(F, "printed second velocity component", printed, repaired,
                                 1e-6, "should read g x + f' y")]


def fam_yaceev(seed: int, tol: dict) -> list[Row]:
    from . import coordinate_residuals as cr
    from . import exact_solutions as es
    F = "yaceev"
    th = np.linspace(0.3, 2.8, 15)
    y = es.yaceev(-1, 2, 0, c1=0, c2=1)
    ex = cr.yaceev_reduced({"u_hat": -2 * sp.cos(cr.theta), "v_hat": sp.sin(cr.theta),
                            "p_hat": 0}, th)
    cont = ex.max_abs[list(ex.equations).index("continuity")] if "continuity" in ex.equations \
        else ex.max_abs[0]
    sl = es.sl_angular_profiles(3.0, "canonical")
    return [check(F, "reduced system, hypergeometric branch", cr.yaceev_reduced(y, th).max_residual,
                  tol["residual"]),
            check(F, "reduced system, canonical conical profiles",
                  cr.yaceev_reduced(sl, th).max_residual, tol["residual"]),
            check(F, "worked example continuity", cont, tol["residual"]),
            Row(F, "worked example momentum with zero pressure", "measured", "max residual",
                ex.max_residual, "", "the example fixes velocity only"),
            *printed_vs_repaired(F, "printed constant b (first branch, alpha+beta=1.6)",
                                 *(cr.yaceev_reduced(es.yaceev(0.2, 1.4, 0.9, 1, 0, form=f), th)
                                   .max_residual for f in es.YACEEV_FORMS), tol["residual"],
                                 "-(alpha+beta)/2 should read -(alpha+beta)^2/2"),
            *printed_vs_repaired(F, "printed second branch (alpha+beta=1)",
                                 *(cr.yaceev_reduced(es.yaceev(0.3, 0.7, 0.4, 0, 1, form=f), th)
                                   .max_residual for f in es.YACEEV_FORMS), tol["residual"],
                                 "needs the factor cos(theta/2)^(2-2gamma)")]


def fam_squire(seed: int, tol: dict) -> list[Row]:
    from . import exact_solutions as es
    pr = es.squire_residual(es.squire(0.3, 0.2, 2.5, "printed")).bernoulli_residual
    rp = es.squire_residual(es.squire(0.3, 0.2, 2.5, "repaired")).bernoulli_residual
    return printed_vs_repaired("squire", "printed linear factor", pr, rp, 1e-8,
                               "beta(1+xi) should read beta(1-xi)")


def fam_w2(seed: int, tol: dict) -> list[Row]:
    from . import coordinate_residuals as cr
    F = "w2"
    rng = np.random.default_rng(seed)
    r, phi, t = cr.r, cr.phi, cr.t
    s = -t
    pts = cylinder_points(rng, 10, t=(-2.0, -0.1))
    ex = cr.w2_consistency(r / (2 * s), 0, -1 / s, -3 * r ** 2 / (8 * s ** 2), pts)
    rows = [check(F, "exact blow-up u=y/2, w=-1", ex.printed.max_residual, tol["residual"]),
            check(F, "exact blow-up against the cylindrical oracle", ex.oracle.max_residual,
                  tol["residual"])]
    worst, flagged = 0.0, set()
    for _ in range(30):
        prof = [random_trig(rng, phi) * (1 + r ** 2) * sp.exp(sp.Float(float(rng.normal() * 0.3)) * t)
                for _ in range(4)]
        rep = cr.w2_consistency(*prof, cylinder_points(rng, 6), tolerance=tol["consistency"])
        worst = max(worst, rep.difference.max_residual)
        flagged |= set(rep.flagged)
    rows.append(check(F, "printed subspace system vs oracle, 30 random inputs", worst,
                      tol["consistency"], "max difference",
                      "flagged: " + (" ".join(sorted(flagged)) or "none")))
    return rows


def fam_twistor(seed: int, tol: dict) -> list[Row]:
    from . import coordinate_residuals as cr
    F = "twistor"
    rng = np.random.default_rng(seed)
    Y, MU, TAU = cr.Y, cr.MU, cr.TAU
    pts = np.column_stack([rng.uniform(.5, 2, 10), rng.uniform(0, 6, 10), rng.uniform(-1, 1, 10)])
    rows = []
    for stat in (False, True):
        tag = "stationary" if stat else "time-dependent"
        ex = cr.twistor_residual(Y / 2, 0, -1, -3 * Y ** 2 / 8, 0.0, pts, stationary=stat)
        rows.append(check(F, f"{tag}: exact blow-up profile", ex.printed.max_residual, tol["residual"]))
        gen = (Y * sp.sin(MU) + (0 if stat else TAU * Y ** 2), Y ** 2 * sp.cos(MU),
               Y * sp.sin(2 * MU), Y ** 3 * sp.cos(MU))
        pr = cr.twistor_residual(*gen, 0.7, pts, stationary=stat)
        dv = cr.twistor_residual(*gen, 0.7, pts, stationary=stat, form="derived")
        rows += printed_vs_repaired(F, f"{tag}: printed rescaled system", pr.difference.max_residual,
                                    dv.difference.max_residual, tol["consistency"],
                                    "advection -sigma d_mu; v^2/y; 2 v_mu/y^2; flagged "
                                    + " ".join(pr.flagged))
    return rows


def fam_circle(seed: int, tol: dict) -> list[Row]:
    from . import coordinate_residuals as cr
    F = "circle"
    c = cr.circle_system(-4, 0, 0, -8, 0.0)
    z = cr.circle_system(0, 0, 0, 0, 0.0)
    phi = cr.phi
    g = cr.circle_system(sp.cos(phi), sp.sin(phi) + sp.cos(2 * phi), -sp.cos(phi) + 2 * sp.sin(2 * phi),
                         sp.sin(3 * phi), 0.4)
    return [check(F, "(-4,0,0,-8,0) full system", c.full.max_residual, tol["residual"]),
            check(F, "(-4,0,0,-8,0) pressure relation", c.pressure_relation.max_residual, tol["residual"]),
            check(F, "(-4,0,0,-8,0) reduced system", c.reduced.max_residual, tol["residual"]),
            check(F, "(-4,0,0,-8,0) fifth-order pair", c.fifth_order.max_residual, tol["residual"]),
            check(F, "(-4,0,0,-8,0) irrotational identity", c.irrotational.max_residual, tol["residual"]),
            check(F, "zero solution", z.full.max_residual, tol["residual"]),
            check(F, "elimination identity on generic profiles", g.elimination_gap, tol["consistency"]),
            check(F, "printed system vs subspace oracle", g.oracle_gap.max_residual, tol["consistency"])]


def fam_spherical_homogeneous(seed: int, tol: dict) -> list[Row]:
    from . import coordinate_residuals as cr
    from . import exact_solutions as es
    F = "spherical-homogeneous"
    rng = np.random.default_rng(seed)
    theta, phi = cr.theta, cr.phi
    d = es.sl_angular_profiles(3.0, "canonical")
    ang = np.column_stack([np.linspace(.3, 2.8, 15), rng.uniform(0, 6, 15)])
    rep = cr.spherical_homogeneous(d["u_hat"], d["v_hat"], 0, d["p_hat"], ang)
    rows = [check(F, "canonical conical profiles", rep.printed.max_residual, tol["residual"])]
    worst, flagged, stray = 0.0, set(), 0.0
    for _ in range(30):
        prof = [random_trig(rng, theta, 1) + random_trig(rng, phi, 1) * sp.sin(theta) for _ in range(4)]
        pts = np.column_stack([rng.uniform(.3, 2.8, 6), rng.uniform(0, 6, 6)])
        rep = cr.spherical_homogeneous(*prof, pts, tolerance=tol["consistency"])
        worst = max(worst, rep.difference.max_residual)
        flagged |= set(rep.flagged)
        stray = max(stray, cr.spherical_homogeneous(*prof, pts, stray_r=2.0).difference.max_residual)
    rows.append(check(F, "printed reduction vs oracle at r=1, 30 random inputs", worst,
                      tol["consistency"], "max difference",
                      "flagged: " + (" ".join(sorted(flagged)) or "none")))
    rows.append(Row(F, "stray 1/r factor in the swirl coupling away from r=1", "repaired",
                    "difference at r=2", stray, tol["consistency"], "invisible at r = 1; drop the factor"))
    return rows


def fam_hermite_table(seed: int, tol: dict) -> list[Row]:
    from .hermite_spectral import adjudicate_hp1
    rows = []
    for v in adjudicate_hp1():
        rows.append(Row("hermite-table", v.label, v.status, "weighted divergence terms",
                        len(v.weighted_divergence.terms), 0, v.note))
    return rows


def fam_special_functions(seed: int, tol: dict) -> list[Row]:
    from .blowup_ode_lab import loewner_nirenberg
    from .numerics_core import kummer_F
    F = "special-functions"
    return [check(F, "F(1,1,2,1/2) = 2 ln 2", abs(kummer_F(1, 1, 2, 0.5) - 2 * math.log(2)), 1e-12),
            check(F, "F(2,3,3,1/2) = 4", abs(kummer_F(2, 3, 3, 0.5) - 4), 1e-12),
            *[check(F, f"Loewner-Nirenberg N={N}", loewner_nirenberg(N)["residual"], 1e-10)
              for N in (3, 4)]]


def fam_rescaled_leray(seed: int, tol: dict) -> list[Row]:
    from . import coordinate_residuals as cr
    from . import exact_solutions as es
    rng = np.random.default_rng(seed)
    sl = es.slezkin_landau_cartesian(3.0).components
    a, b = cr.rescaled_nse_local([sl["u"], sl["v"], sl["w"]], sl["p"], shell_points(rng, 15))
    return [check("rescaled-leray", "conical solution in the rescaled system", a.max_residual, 1e-10),
            check("rescaled-leray", "elliptic identity for the rescaled pressure", b.max_residual, 1e-10)]


def fam_ode_adjudications(seed: int, tol: dict) -> list[Row]:
    from . import blowup_ode_lab as bl
    F = "blowup-ode"
    rows = []
    af = bl.autonomous_form_coefficient(3, adjudicate=True)
    rows += printed_vs_repaired(F, "autonomous linear coefficient -(N-2)^2/8", af.drift_printed,
                                af.drift_derived, 1e-6, "should read -(N-2)^2/4; Hamiltonian drift")
    pc = bl.biharmonic_printed_coefficients(7, Fraction(4, 2))
    dc = bl.biharmonic_derived_coefficients(7, Fraction(4, 2))
    gap = max(abs(float(sp.nsimplify(pc[k]) - sp.nsimplify(dc[k]))) for k in pc)
    rows.append(check(F, "biharmonic reduction coefficients", gap, 0.0))
    h = bl.hardy_constants(3)
    rows.append(Row(F, "axisymmetric Hardy constant formula",
                    "repaired" if h.axisymmetric_repaired == h.axisymmetric_printed_value else "refuted",
                    "printed formula value", h.axisymmetric_printed_formula, h.axisymmetric_printed_value,
                    f"(N+2)^2/(N^2+4N-4) gives {h.axisymmetric_repaired}"))
    e = bl.fk_exponents(11)
    rows.append(check(F, "delta(11) = 3", abs(e.delta - 3), 0.0))
    rows.append(check(F, "b(3) = sqrt(7)/2", abs(bl.fk_exponents(3).b - math.sqrt(7) / 2), 1e-12))
    e10 = bl.fk_exponents(10)
    rows.append(Row(F, "N=10 Hardy equality", "confirmed" if e10.hardy_equality else "fail",
                    "lhs - rhs", float(e10.hardy_lhs - e10.hardy_rhs), 0))
    for N in (3, 11):
        rows.append(check(F, f"singular equilibrium V residual N={N}",
                          bl.fk_singular_equilibrium(N)["scaled_residual"], 1e-12,
                          "max residual relative to the largest term"))
    for k in (2, 4, 6, 8, 10):
        ev = bl.fk_spectrum_shoot(11, k)
        rows.append(Row(F, f"N=11 shooting eigenvalue k={k}", "measured", "eigenvalue",
                        ev.eigenvalue if ev.found else "none", "",
                        f"ladder {ev.ladder}; ratio to -k/2 {fmt(ev.asymptote_ratio)}"))
    for order in (2, 3, 4):
        a = bl.hamilton_jacobi_profile(order)
        f = bl.hamilton_jacobi_profile(order, integrator="fixed")
        if a.compact and f.compact:
            rel = abs(a.endpoint - f.endpoint) / abs(a.endpoint)
            rows.append(check(F, f"HJ profile |beta|={order} endpoint agreement", rel, 1e-6,
                              note=f"endpoint {a.endpoint:.10f}"))
        else:
            rows.append(Row(F, f"HJ profile |beta|={order}", "measured", "compact support", "none", "",
                            a.reason))
    return rows


def fam_figures(seed: int, tol: dict) -> list[Row]:
    from . import blowup_ode_lab as bl
    rows = []
    for name, pr in bl.PRESETS.items():
        a, f = bl.run_preset(name), bl.run_preset(name, "fixed")
        ok = a.label in pr.expected and a.label == f.label
        rows.append(Row("figures", name, "confirmed" if ok else "fail", "label", a.label, "",
                        f"fixed-step oracle: {f.label}"))
    return rows


def fam_scaling(seed: int, tol: dict) -> list[Row]:
    from . import scaling_transforms as st
    F = "scaling"
    rows = [check(F, f"{kind} round trip", rescale_round_trip(kind, seed), tol["round_trip"])
            for kind in st.FRAME_KINDS]
    mode = st.solenoidal_basis(1)[0].label
    mode2 = st.solenoidal_basis(2)[0].label
    state = st.StokesModeState({mode: 1.0, mode2: -0.5})
    w = st.energy_identity(state, 0.3, form="weighted")
    p = st.energy_identity(state, 0.3, form="printed")
    hs = st.energy_identity(st.heat_stokes_blowup((0.3, 0.0, 1.0), 1.0), 0.7, form="printed")
    rows.append(check(F, "energy identity on an L2 Stokes flow in blow-up variables", hs.relative,
                      tol["identity"], "relative residual"))
    rows.append(check(F, "weighted energy identity on Stokes mode states", w.relative, tol["identity"],
                      "relative residual", "coefficient -1/2 in the Gaussian weight"))
    rows.append(Row(F, "plain-L2 identity transplanted to polynomial modes", "measured",
                    "relative residual", p.relative, "", "modes have no plain L2 norm"))
    ck = st.ck_rescale(st.gaussian_bump(10.0, 0.7))
    rows.append(check(F, "C_k rescale L2 preservation", ck.l2_relative_change, tol["identity"]))
    rows.append(check(F, "C_k rescale sup", abs(ck.sup_after - 1), 1e-9))
    return rows


def rescale_round_trip(kind: str, seed: int, n: int = 100) -> float:
    from . import scaling_transforms as st
    rng = np.random.default_rng([seed, st.FRAME_KINDS.index(kind)])
    fr = st.ScalingFrame(kind, T=0.0 if kind == "twistor" else 1.0, sigma=2.0, Ck=8.0,
                         x_k=(0.1, 0.2, 0.3), t_k=0.1)
    if kind == "twistor":
        s = st.FrameSample(np.column_stack([rng.uniform(0.1, 3, n), rng.uniform(0, 6, n)]),
                           -rng.uniform(0.01, 2, n), rng.normal(size=(n, 4)),
                           ("velocity", "velocity", "axial", "pressure"))
    else:
        s = st.FrameSample(rng.normal(size=(n, 3)), rng.uniform(0.01, 0.99, n), rng.normal(size=(n, 4)),
                           ("velocity",) * 3 + ("pressure",))
    return st.round_trip_error(fr, s)


FAMILIES: dict[str, Callable] = {
    "slezkin-landau": fam_slezkin_landau,
    "landau-riccati": fam_landau_riccati,
    "euler-separable": fam_euler_separable,
    "oseen-moffatt": fam_oseen_moffatt,
    "rigid-rotation": fam_rigid_rotation,
    "von-karman": fam_von_karman,
    "yaceev": fam_yaceev,
    "squire": fam_squire,
    "w2": fam_w2,
    "twistor": fam_twistor,
    "circle": fam_circle,
    "spherical-homogeneous": fam_spherical_homogeneous,
    "hermite-table": fam_hermite_table,
    "special-functions": fam_special_functions,
    "rescaled-leray": fam_rescaled_leray,
}
LEDGER_EXTRA: dict[str, Callable] = {
    "blowup-ode": fam_ode_adjudications,
    "figures": fam_figures,
    "scaling": fam_scaling,
}
ALL_FAMILIES = {**FAMILIES, **LEDGER_EXTRA}

DEFAULT_TOLERANCES = {
    "residual": 1e-6, "flux": 1e-8, "radius": 1e-6, "profile": 1e-8, "divergence": 1e-12,
    "consistency": 1e-9, "round_trip": 1e-13, "identity": 1e-8,
}


# ---------------------------------------------------------------------------
# Parallel execution
# ---------------------------------------------------------------------------

def _run_family(args):
    name, seed, tol, kwargs = args
    return ALL_FAMILIES[name](seed, tol, **kwargs)


def run_families(names, seed, tol, threads, kwargs=None) -> list[Row]:
    kwargs = kwargs or {}
    jobs = [(n, seed, tol, kwargs.get(n, {})) for n in names]
    if threads <= 1 or len(jobs) <= 1:
        results = [_run_family(j) for j in jobs]
    else:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs)), mp_context=ctx) as ex:
            results = list(ex.map(_run_family, jobs))
    return [row for rows in results for row in rows]


def ledger_exit(rows) -> int:
    return EXIT_FAIL if any(r.status in ("refuted", "fail") for r in rows) else EXIT_OK


# ---------------------------------------------------------------------------
# Configuration and output
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    params: dict
    out: Path
    tolerances: dict
    threads: int
    seed: int

    def digest(self) -> str:
        # parallelism and output location do not change results
        blob = json.dumps({"command": self.command, "params": self.params,
                           "tolerances": self.tolerances, "seed": self.seed},
                          sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def write_csv(cfg: RunConfig, name: str, header, rows) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r.cells() if isinstance(r, Row) else [fmt(c) for c in r])
    buf.write(f"# singlab {__version__} config={cfg.digest()} seed={cfg.seed}\n")
    path = cfg.out / name
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def write_svg(path: Path, xs, ys, title: str = "") -> None:
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    ok = np.isfinite(xs) & np.isfinite(ys)
    xs, ys = xs[ok], ys[ok]
    W, H, m = 640, 400, 40
    x0, x1 = float(xs.min()), float(xs.max()) or 1.0
    y0, y1 = float(ys.min()), float(ys.max())
    if y1 == y0:
        y1 = y0 + 1
    px = m + (xs - x0) / (x1 - x0 or 1) * (W - 2 * m)
    py = H - m - (ys - y0) / (y1 - y0) * (H - 2 * m)
    step = max(1, len(px) // 4000)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px[::step], py[::step]))
    path.write_text(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">'
        f'<rect width="{W}" height="{H}" fill="white"/>'
        f'<text x="{m}" y="20" font-size="14">{title}</text>'
        f'<polyline fill="none" stroke="black" stroke-width="1" points="{pts}"/></svg>\n',
        encoding="utf-8")


def _parse_tolerances(items, base) -> dict:
    tol = dict(base)
    for item in items or []:
        if "=" not in item:
            raise ValueError(f"tolerance override {item!r} is not NAME=VALUE")
        k, v = item.split("=", 1)
        k = k.strip()
        if k not in tol:
            raise ValueError(f"unknown tolerance {k!r}; known: {', '.join(sorted(tol))}")
        val = float(v)
        if not val > 0:
            raise ValueError(f"tolerance {k} must be positive")
        tol[k] = val
    return tol


def _load_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    if path:
        if not Path(path).is_file():
            raise ValueError(f"config file {path} not found")
        cp.read(path, encoding="utf-8")
    return cp


def _coerce(v: str):
    for conv in (int, float):
        try:
            return conv(v)
        except ValueError:
            pass
    if v.lower() in ("true", "false"):
        return v.lower() == "true"
    return v


def resolve(args, parser) -> RunConfig:
    """Defaults < config file < environment < flags."""
    cp = _load_config(args.config)
    general = cp["run"] if cp.has_section("run") else {}
    section = cp[args.command] if cp.has_section(args.command) else {}
    for key, raw in section.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, _coerce(raw))
    seed = args.seed if args.seed is not None else int(general.get("seed", 0))
    threads = args.threads or int(os.environ.get("SINGLAB_THREADS", general.get("threads", 1)))
    out = Path(args.out or os.environ.get("SINGLAB_OUT", general.get("out", "singlab-out")))
    file_tols = [f"{k[4:]}={v}" for k, v in general.items() if k.startswith("tol.")]
    tol = _parse_tolerances(file_tols + list(args.tol or []), DEFAULT_TOLERANCES)
    if threads < 1:
        raise ValueError("parallelism must be at least 1")
    skip = {"config", "seed", "threads", "out", "tol", "command", "func"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return RunConfig(args.command, params, out, tol, threads, seed)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_verify_exact(cfg: RunConfig) -> int:
    fam = cfg.params["family"]
    kwargs = {}
    if fam == "slezkin-landau" and cfg.params.get("c") is not None:
        kwargs[fam] = {"c": cfg.params["c"]}
    rows = run_families([fam], cfg.seed, cfg.tolerances, cfg.threads, kwargs)
    path = write_csv(cfg, f"verify-{fam}.csv", LEDGER_HEADER, rows)
    for r in rows:
        print(f"{r.status:9s} {r.item}: {fmt(r.value)}")
    print(f"wrote {path}")
    return ledger_exit(rows)


def _spectra_basis(k: int) -> list[tuple]:
    from .hermite_spectral import basis_rows, solenoidal_basis
    dim = len(solenoidal_basis(k))
    return [(k, dim, k * (k + 2), *row[1:]) for row in basis_rows(k) if row[0] == k]


def _spectra_gram(k_max: int) -> list[tuple]:
    from .hermite_spectral import gram_matrix
    rows = []
    for e in gram_matrix(k_max):
        dev = e.deviation_from_one
        rows.append((str(e.beta), str(e.gamma), str(e.value),
                     "true" if e.beta != e.gamma and e.is_exact_zero else
                     ("diagonal" if e.beta == e.gamma else "false"),
                     "" if dev is None else str(dev)))
    return rows


def cmd_spectra(cfg: RunConfig) -> int:
    k_max = cfg.params["k_max"]
    ks = list(range(1, k_max + 1))
    if cfg.threads > 1 and len(ks) > 1:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=min(cfg.threads, len(ks)), mp_context=ctx) as ex:
            parts = list(ex.map(_spectra_basis, ks))
    else:
        parts = [_spectra_basis(k) for k in ks]
    basis = [row for part in parts for row in part]
    p1 = write_csv(cfg, "spectra-basis.csv",
                   ("k", "dimension", "expected_dimension", "mode", "component", "monomial",
                    "numerator", "denominator"), basis)
    gram = _spectra_gram(min(k_max, cfg.params.get("gram_max") or k_max))
    p2 = write_csv(cfg, "spectra-gram.csv",
                   ("beta", "gamma", "value", "off_diagonal_exact_zero", "deviation_from_one"), gram)
    dims = sorted({(r[0], r[1], r[2]) for r in basis})
    for k, d, e in dims:
        print(f"k={k} dimension {d} (expected {e})")
    print(f"wrote {p1} and {p2}")
    bad = any(d != e for _, d, e in dims) or any(r[3] == "false" for r in gram)
    return EXIT_FAIL if bad else EXIT_OK


SHOOT_TAGS = ("emden", "regular-profile", "fk-spectrum", "fk-inner", "hj-profile")


def cmd_shoot(cfg: RunConfig) -> int:
    from . import blowup_ode_lab as bl
    P = cfg.params
    tag = P.get("tag") or ("emden" if P.get("preset") else None)
    if tag is None:
        raise ValueError("give a problem tag or --preset")
    extra = ""
    inconclusive = False
    if tag == "emden":
        if P.get("preset"):
            pr = bl.PRESETS[P["preset"]]
            N, p = pr.N, pr.p
            out = bl.run_preset(P["preset"], P.get("integrator") or "adaptive")
        else:
            N, p = P.get("N") or 3, P.get("p") or 4.0
            out = bl.emden_fowler_shoot(int(N), float(p), P.get("phi0") or 0.0, P.get("dphi0") or 0.0,
                                        P.get("s_max") or 80.0, P.get("integrator") or "adaptive")
        label = out.label
        if label.startswith("stabilize"):
            extra = f" C_* = {bl.emden_fowler_sss(int(N), p).amplitude:.12g}"
        if label == "periodic":
            extra = f" cycles = {out.cycles}"
        if label == "spiral":
            extra = f" maxima = {len(out.maxima)}"
        extra += f" (N={N}, p={p})"
        inconclusive = label == "inconclusive"
        header, rows = ("s", "phi", "dphi"), list(zip(out.s, out.phi, out.dphi))
        plot = (out.s, out.phi)
    elif tag == "regular-profile":
        rs = bl.regular_profile_shoot(int(P.get("N") or 3), float(P.get("p") or 4.0),
                                      float(P.get("a") or 1.0), float(P.get("r_max") or 1.0))
        label = f"zeros={rs.zero_count}"
        extra = f" phi(0)={rs.phi_data[0]:.10g} phi'(0)={rs.phi_data[1]:.10g}"
        header, rows = ("r", "u", "du"), list(zip(rs.r, rs.u, rs.du))
        plot = (rs.r, rs.u)
    elif tag == "fk-spectrum":
        ev = bl.fk_spectrum_shoot(int(P.get("N") or 11), int(P.get("k") or 2))
        inconclusive = not ev.found
        label = "eigenvalue" if ev.found else "inconclusive"
        extra = f" lambda={fmt(ev.eigenvalue)} ladder={ev.ladder} zeros={ev.zero_count}"
        header, rows = ("N", "k", "eigenvalue", "ladder", "zero_count", "small_y_slope"), \
            [(ev.N, ev.k, ev.eigenvalue, ev.ladder, ev.zero_count, ev.small_y_slope)]
        plot = None
    elif tag == "fk-inner":
        ip = bl.fk_inner_profile(int(P.get("N") or 3))
        label = "logarithmic-decay" if ip.band_max <= 1 else "inconclusive"
        inconclusive = label == "inconclusive"
        extra = f" band max={ip.band_max:.6g} const={ip.far_const:.10g}"
        header, rows = ("xi", "W"), list(zip(ip.xi, ip.W))
        plot = (np.log(ip.xi), ip.W)
    elif tag == "hj-profile":
        hj = bl.hamilton_jacobi_profile(int(P.get("order") or 3), float(P.get("f") or 1.0),
                                        integrator=P.get("integrator") or "adaptive")
        label = "compact" if hj.compact else "inconclusive"
        inconclusive = not hj.compact
        extra = f" endpoint={fmt(hj.endpoint)}" + ("" if hj.compact else f" ({hj.reason})")
        header, rows = ("zeta", "h"), list(zip(hj.zeta, hj.h))
        plot = (hj.zeta, hj.h)
    else:
        raise ValueError(f"unknown shoot tag {tag!r}")
    name = f"shoot-{P.get('preset') or tag}.csv"
    path = write_csv(cfg, name, header, rows)
    if P.get("plot") and plot is not None:
        write_svg(path.with_suffix(".svg"), *plot, title=f"{tag} {label}")
    print(f"classification: {label}{extra}")
    return EXIT_INCONCLUSIVE if inconclusive else EXIT_OK


def cmd_exponents(cfg: RunConfig) -> int:
    from . import blowup_ode_lab as bl
    from .hermite_spectral import spectral_ladder
    P = cfg.params
    N = P.get("N") or 3
    rows = []
    if P.get("hardy"):
        h = bl.hardy_constants(N)
        rows += [("c_H", h.c_H, "Hardy constant (N-2)^2/4"),
                 ("c_H_axisymmetric", h.axisymmetric_repaired, "(N+2)^2/(N^2+4N-4)"),
                 ("c_H_axisymmetric_printed_formula", h.axisymmetric_printed_formula,
                  "printed formula, disagrees with the printed value"),
                 ("c_H_axisymmetric_printed_value", h.axisymmetric_printed_value or "", "printed value")]
    elif P.get("fk"):
        e = bl.fk_exponents(N)
        rows += [("delta", e.delta if e.delta is not None else "", "singular exponent for N >= 10"),
                 ("b", e.b if e.b is not None else "", "oscillation frequency for N < 10"),
                 ("hardy_lhs", e.hardy_lhs, "2(N-2)"), ("hardy_rhs", e.hardy_rhs, "(N-2)^2/4")]
        if e.delta is not None:
            rows += [(f"lambda_{n}", bl.fk_ladder(N, n), "delta/2 - n") for n in range(4)]
    elif P.get("ladder"):
        for k in range(P.get("order") or 4):
            lam, mult = spectral_ladder(P["ladder"], k)
            rows.append((f"lambda_{k}", lam, f"multiplicity {mult}"))
    elif P.get("rates"):
        inp = bl.RateInputs(P.get("lam"), P.get("delta"), P.get("gamma"), P.get("beta_order"))
        rows += [(k, v, "rate formula") for k, v in bl.blowup_rates(inp).items()]
    else:
        q = bl.ExponentQuery(N, P.get("p"), P.get("m") or 1, Fraction(str(P.get("sigma") or 0)),
                             P.get("l") or 1)
        for e in bl.critical_exponents(q).values():
            rows.append((e.name.replace("p_S(2m)", f"p_S({2 * q.m})"),
                         e.value if e.value is not None else "", e.condition))
    for name, val, anchor in rows:
        shown = f"{val} = {float(val):.10g}" if isinstance(val, Fraction) else fmt(val)
        print(f"{name:34s} {shown:28s} {anchor}")
    write_csv(cfg, "exponents.csv", ("name", "value", "anchor"), rows)
    return EXIT_OK


def cmd_rescale(cfg: RunConfig) -> int:
    from . import scaling_transforms as st
    kinds = st.FRAME_KINDS if cfg.params.get("frame") in (None, "all") else (cfg.params["frame"],)
    n = cfg.params.get("samples") or 100
    rows = []
    for kind in kinds:
        err = rescale_round_trip(kind, cfg.seed, n)
        rows.append((kind, n, err, cfg.tolerances["round_trip"],
                     "pass" if err <= cfg.tolerances["round_trip"] else "fail"))
        print(f"{kind:18s} round trip {err:.3e}")
    write_csv(cfg, "rescale.csv", ("frame", "samples", "max_error", "tolerance", "verdict"), rows)
    return EXIT_FAIL if any(r[-1] == "fail" for r in rows) else EXIT_OK


def cmd_functionals(cfg: RunConfig) -> int:
    from . import scaling_transforms as st
    P = cfg.params
    kind = P.get("field") or "heat-stokes"
    if kind == "bump":
        f = st.gaussian_bump(P.get("amplitude") or 1.0, P.get("width") or 1.0)
    elif kind == "heat-stokes":
        f = st.heat_stokes_field((0.0, 0.0, 1.0), P.get("age") or 1.0)
    elif kind == "mode":
        f = st.mode_field(st.solenoidal_mode(P.get("mode") or "S1.1").components)
    else:
        raise ValueError(f"unknown field {kind!r}")
    tau = P.get("tau")
    fn = st.functionals(f, tau=tau)
    rows = [("energy", fn.energy), ("dissipation", fn.dissipation),
            *[(f"mass_{i + 1}", m) for i, m in enumerate(fn.masses)],
            ("l2_growth", fn.l2_growth if fn.l2_growth is not None else ""),
            ("tail_estimate", fn.tail_estimate)]
    if P.get("identity"):
        hs = st.energy_identity(st.heat_stokes_blowup((0.0, 0.0, 1.0), P.get("age") or 1.0), tau or 0.0)
        rows.append(("energy_identity_relative_residual", hs.relative))
    for name, v in rows:
        print(f"{name:36s} {fmt(v)}")
    write_csv(cfg, f"functionals-{kind}.csv", ("functional", "value"), rows)
    if not fn.conclusive:
        print(f"inconclusive: truncation tail {fn.tail_estimate:.3e} exceeds {fn.tolerance:.1e}")
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_ledger(cfg: RunConfig) -> int:
    names = cfg.params.get("families")
    names = [n.strip() for n in names.split(",")] if names else list(ALL_FAMILIES)
    unknown = [n for n in names if n not in ALL_FAMILIES]
    if unknown:
        raise ValueError(f"unknown families: {', '.join(unknown)}")
    rows = run_families(names, cfg.seed, cfg.tolerances, cfg.threads)
    path = write_csv(cfg, "ledger.csv", LEDGER_HEADER, rows)
    counts = {s: sum(r.status == s for r in rows) for s in STATUSES}
    print(" ".join(f"{k}={v}" for k, v in counts.items()))
    print(f"wrote {path}")
    return ledger_exit(rows)


COMMANDS = {
    "verify-exact": cmd_verify_exact, "spectra": cmd_spectra, "shoot": cmd_shoot,
    "exponents": cmd_exponents, "rescale": cmd_rescale, "functionals": cmd_functionals,
    "ledger": cmd_ledger,
}


def build_parser() -> argparse.ArgumentParser:
    from .blowup_ode_lab import PRESETS
    from .scaling_transforms import FRAME_KINDS
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="sectioned key=value file; flags override it")
    common.add_argument("--out", help="output directory (default $SINGLAB_OUT or ./singlab-out)")
    common.add_argument("--seed", type=int, help="seed for randomized sample points")
    common.add_argument("--threads", type=int, help="parallelism (default $SINGLAB_THREADS or 1)")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE", help="tolerance override")

    p = argparse.ArgumentParser(prog="singlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify-exact", parents=[common], help="residual ledger for one family")
    s.add_argument("--family", required=True, choices=sorted(FAMILIES))
    s.add_argument("--c", type=float)

    s = sub.add_parser("spectra", parents=[common], help="solenoidal bases and Gram pairings")
    s.add_argument("--k-max", type=int, default=None)
    s.add_argument("--gram-max", type=int, default=None)

    s = sub.add_parser("shoot", parents=[common], help="shooting problems and figure presets")
    s.add_argument("tag", nargs="?", choices=SHOOT_TAGS)
    s.add_argument("--preset", choices=sorted(PRESETS))
    s.add_argument("--N", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--phi0", type=float)
    s.add_argument("--dphi0", type=float)
    s.add_argument("--s-max", type=float)
    s.add_argument("--a", type=float)
    s.add_argument("--r-max", type=float)
    s.add_argument("--k", type=int)
    s.add_argument("--order", type=int)
    s.add_argument("--f", type=float)
    s.add_argument("--integrator", choices=("adaptive", "fixed"))
    s.add_argument("--plot", action="store_true", default=None)

    s = sub.add_parser("exponents", parents=[common], help="critical exponents and rates")
    s.add_argument("--N", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--m", type=int)
    s.add_argument("--sigma", type=float)
    s.add_argument("--l", type=int)
    s.add_argument("--fk", action="store_true", default=None)
    s.add_argument("--hardy", action="store_true", default=None)
    s.add_argument("--ladder")
    s.add_argument("--order", type=int)
    s.add_argument("--rates", action="store_true", default=None)
    s.add_argument("--lam", type=float)
    s.add_argument("--delta", type=float)
    s.add_argument("--gamma", type=float)
    s.add_argument("--beta-order", type=int)

    s = sub.add_parser("rescale", parents=[common], help="round-trip check of the scaling frames")
    s.add_argument("--frame", choices=("all", *FRAME_KINDS))
    s.add_argument("--samples", type=int)

    s = sub.add_parser("functionals", parents=[common], help="energy, dissipation and masses")
    s.add_argument("--field", choices=("heat-stokes", "bump", "mode"))
    s.add_argument("--amplitude", type=float)
    s.add_argument("--width", type=float)
    s.add_argument("--age", type=float)
    s.add_argument("--mode")
    s.add_argument("--tau", type=float)
    s.add_argument("--identity", action="store_true", default=None)

    s = sub.add_parser("ledger", parents=[common], help="adjudication ledger over all oracles")
    s.add_argument("--families", help="comma-separated subset")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)   # argparse exits with 2 on usage errors
    try:
        cfg = resolve(args, parser)
        if args.command == "spectra":
            k = cfg.params.get("k_max")
            k = 4 if k is None else k
            if not 1 <= k <= 6:
                raise ValueError("k-max must lie in 1..6")
            cfg.params["k_max"] = k
        return COMMANDS[args.command](cfg)
    except NonConvergenceError as e:
        print(f"singlab {args.command}: inconclusive: {e}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except ValueError as e:   # includes ParameterError and DomainError
        print(f"singlab {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
