"""Verification batteries behind ``qcburk verify``.

Each battery returns a list of report objects with ``record()``. Everything
is driven by :class:`RunConfig`; a fixed seed gives identical reports.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from . import functionals as fn
from .beltrami import BeltramiCoefficient, GridSpec, solve_principal
from .errors import InvalidInput
from .inequalities import (
    area_check,
    check_burkholder_energy,
    check_expint,
    check_llogl,
    check_loginv,
    check_lp_mean,
    check_main_inequality,
)
from .interpolation import AnalyticFamily, check_interpolation_bound, counterexample_demo, p_interp, support_line
from .packing import load_packing, random_packing
from .radial import Aa1Warning, RadialCoefficient, RadialProfile, rho_from_alpha
from .reports import QuadratureReport, jsonable

__all__ = ["RunConfig", "SUITES", "run_suite", "parse_mu", "Row"]


@dataclass
class RunConfig:
    """Parameters shared by every command; ``None`` means the battery default."""

    command: str = "verify"
    N: int = 512
    L: float = 4.0
    tol: float = 1e-10
    seed: int = 7
    mu: Optional[str] = None
    packing: Optional[str] = None
    p: Optional[List[float]] = None
    K: Optional[float] = None
    out: Optional[str] = None
    format: str = "json"
    family: Optional[str] = None
    probes: int = 2000
    k_cap: float = 0.9

    def spec(self) -> GridSpec:
        return GridSpec(int(self.N), float(self.L))

    def record(self) -> Dict[str, Any]:
        d = asdict(self)
        d.pop("out")
        return jsonable(d)


def Row(check: str, value: float, bound: float, est: float = 0.0, params=None, verdict: str = "",
        notes: str = "", grid=None) -> QuadratureReport:
    """Generic report row (same schema as the quadrature checks)."""
    return QuadratureReport(check, value, bound, est, grid or {}, params or {}, notes, verdict)


def _le(value: float, tol: float) -> str:
    return "pass" if value <= tol else "fail"


# ---------------------------------------------------------------- mu specs

def _params(s: str) -> Dict[str, str]:
    out = {}
    for part in filter(None, s.split(",")):
        if "=" not in part:
            raise InvalidInput(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_mu(text: str, spec: GridSpec, rng: np.random.Generator, k_cap: float = 0.9) -> BeltramiCoefficient:
    """``zero | const:k=..[,phase=angle] | radial:k=.. | radial:alpha=linear | random:k=..[,degree=..] | file:PATH``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind == "file":
        from .fieldio import read_field

        f = read_field(rest)
        if f.spec.N != spec.N or f.spec.L != spec.L:
            raise InvalidInput(f"field grid (N={f.spec.N}, L={f.spec.L}) differs from --grid/--box")
        mu = BeltramiCoefficient(f, label=f"file:{rest}")
    else:
        prm = _params(rest)
        if kind == "zero":
            mu = BeltramiCoefficient.zero(spec)
        elif kind == "const":
            mu = BeltramiCoefficient.constant(spec, float(prm.get("k", 0.3)), np.exp(1j * float(prm.get("phase", 0.0))))
        elif kind == "radial":
            if prm.get("alpha", "const") == "linear":
                coef = RadialCoefficient.linear()
            else:
                coef = RadialCoefficient.constant(float(prm.get("k", 1 / 3)))
            mu = BeltramiCoefficient.radial(spec, coef)
        elif kind == "random":
            mu = BeltramiCoefficient.random(spec, float(prm.get("k", 0.3)), rng, degree=int(prm.get("degree", 3)))
        else:
            raise InvalidInput(f"unknown mu kind {kind!r}")
    if mu.k > k_cap:
        raise InvalidInput(f"k = {mu.k:.4g} exceeds the configured cap {k_cap}")
    return mu


# ---------------------------------------------------------------- batteries

TRICHOTOMY_PS = (-2.0, -1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0)


def _expected_shape(p: float) -> str:
    if p in (0.0, 2.0):
        return "affine"
    return "concave" if (p >= 2 or p <= 0) else "convex"


def _random_A(rng, positive: bool):
    while True:
        A = rng.standard_normal((2, 2))
        if not positive or np.linalg.det(A) > 0.05:
            return A


def trichotomy_rows(rng: np.random.Generator, n_probes: int, ps=TRICHOTOMY_PS, tol: float = 1e-8) -> List:
    rows = []
    per = max(1, -(-n_probes // len(ps)))
    for p in ps:
        E = fn.burkholder(p)
        shape = _expected_shape(p)
        A = np.stack([_random_A(rng, E.positive_det or p < 1) for _ in range(per)])
        X = np.stack([fn.random_rank_one(rng) for _ in range(per)])
        r = fn.rank_one_probes(E, A, X, samples=5)
        q = r.second_diff / r.scale
        worst = float({"concave": np.max(q), "convex": -np.min(q), "affine": np.max(np.abs(q))}[shape])
        rows.append(Row("trichotomy", max(worst, 0.0), tol, 0.0, {"p": p, "shape": shape, "probes": per},
                        _le(worst, tol)))
    return rows


def suite_core(cfg: RunConfig) -> List:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for p in (-2, 0, 1, 2, 3, 4, 10):
        v = float(fn.burkholder_p(fn.PlanarDeriv(1.0, 0.0), p))
        rows.append(Row("normalization", v, 1.0, 0.0, {"p": p}, "equality" if v == 1.0 else "fail"))
    rows += trichotomy_rows(rng, cfg.probes)
    worst = 0.0
    for _ in range(200):
        A = _random_A(rng, True)
        for p in (-3.0, -1.0, 0.5, 1.5, 3.0, 5.0):
            a = float(fn.inverse_functional(fn.burkholder(p), A))
            E = fn.burkholder(2 - p)
            worst = max(worst, abs(a - float(E(A))) / float(E.size(A)))
    rows.append(Row("hat-duality", worst, 1e-12, 0.0, {"samples": 200}, _le(worst, 1e-12),
                    "relative to the functional magnitude"))
    worst = -math.inf
    for _ in range(500):
        d = fn.PlanarDeriv(complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2)))
        for p in (2.0, 3.0, 4.0):
            lb = fn.burkholder_lower_bound(d, p)
            worst = max(worst, float(lb.lhs - lb.rhs) / max(abs(float(lb.rhs)), 1.0))
    rows.append(Row("burkholder-lower-bound", worst, 1e-12, 0.0, {"samples": 500, "p": [2, 3, 4]},
                    _le(worst, 1e-12)))
    return rows


def suite_radial(cfg: RunConfig) -> List:
    rng = np.random.default_rng(cfg.seed)
    K = cfg.K or 2.0
    ps = cfg.p or [3.0]
    P = RadialProfile.power(K)
    rows = []
    for p in sorted({2.5, *ps}):
        if p <= 2 * K / (K - 1):
            rows.append(check_burkholder_energy(P, p))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", Aa1Warning)
        rows.append(check_burkholder_energy(RadialProfile.monomial(2.0), -2.0))
    for i in range(3):
        pk = random_packing(rng)
        for p in (2.5, 3.0):
            r = check_burkholder_energy(pk, p, N=cfg.N)
            r.params["packing"] = i
            rows.append(r)
    if cfg.packing:
        pk = load_packing(cfg.packing)
        for p in ps:
            rows.append(check_burkholder_energy(pk, p, N=cfg.N))
    # rho_from_alpha round trip against the power profile
    prof = rho_from_alpha(RadialCoefficient.constant((K - 1) / (K + 1)))
    t = np.linspace(0.05, 1.0, 40)
    err = float(np.max(np.abs(prof.rho(t) - P.rho(t))))
    rows.append(Row("rho-from-alpha", err, 1e-8, 0.0, {"K": K}, _le(err, 1e-8)))
    return rows


def _solver_oracle_rows(cfg: RunConfig) -> List:
    spec = cfg.spec()
    k = 0.3
    mu = BeltramiCoefficient.constant(spec, k)
    sol = solve_principal(mu, cfg.tol)
    Z = spec.z
    inner = np.abs(Z) <= 0.8
    err = float(np.max(np.abs(sol.fz[inner] - 1)) + np.max(np.abs(sol.fzbar[inner] - k)))
    tol_df = 10.0 / spec.N
    rows = [Row("solver-oracle-Df", err, tol_df, 0.0, {"mu": "const", "k": k, "N": spec.N}, _le(err, tol_df),
                "tolerance 10/N (1% at N = 1024)")]
    a = area_check(sol)
    rows.append(Row("area-const", a.value, math.pi * (1 - k * k), a.est_error + 1e-3 * math.pi * (1 - k * k),
                    {"k": k}, grid=a.grid))
    rows.append(Row("b1-const", abs(sol.b1 - k), 5.0 / spec.N, 0.0, {"k": k, "b1": sol.b1},
                    _le(abs(sol.b1 - k), 5.0 / spec.N)))
    hist = np.asarray(sol.history)
    n = np.arange(len(hist))
    env = k**n * mu.field.l2_norm() / (1 - k) + 1e-12
    worst = float(np.max(hist - env))
    rows.append(Row("residual-decay", worst, 0.0, 0.0, {"k": k, "iterations": sol.iterations},
                    "pass" if worst <= 0 else "fail"))
    return rows


def suite_solver(cfg: RunConfig) -> List:
    rng = np.random.default_rng(cfg.seed)
    rows = _solver_oracle_rows(cfg)
    spec = cfg.spec()
    mus = [parse_mu(cfg.mu, spec, rng, cfg.k_cap)] if cfg.mu else \
        [BeltramiCoefficient.random(spec, float(k), rng) for k in (0.2, 0.35, 0.5)]
    for mu in mus:
        sol = solve_principal(mu, cfg.tol)
        r = area_check(sol)
        rows.append(r)
    return rows


def suite_inequalities(cfg: RunConfig) -> List:
    rng = np.random.default_rng(cfg.seed)
    K = cfg.K or 2.0
    ps = cfg.p or [3.0]
    P = RadialProfile.power(K)
    k = (K - 1) / (K + 1)
    rows = []
    for p in sorted({2.0, 2.5, 3.0, 1 + 1 / k, *ps}):
        if 2 <= p <= 1 + 1 / k + 1e-12:
            rows.append(check_main_inequality(P, p))
    for p in ps:
        if 2 <= p < 2 * K / (K - 1):
            rows.append(check_lp_mean(P, K, p))
    rows.append(check_llogl(P))
    rows.append(check_llogl(RadialProfile.identity()))
    rows.append(check_loginv(RadialProfile.monomial(K)))
    for coef in (RadialCoefficient.constant(0.5), RadialCoefficient.linear()):
        rows.append(check_expint(coef))
        rows.append(check_expint(coef, path="spectral", N=min(cfg.N, 512)))
    spec = cfg.spec()
    mus = [parse_mu(cfg.mu, spec, rng, cfg.k_cap)] if cfg.mu else [BeltramiCoefficient.random(spec, 0.3, rng)]
    for mu in mus:
        sol = solve_principal(mu, cfg.tol)
        for p in ps:
            if 2 <= p <= 1 + 1 / max(mu.k, 1e-12):
                rows.append(check_main_inequality(sol, p))
        rows.append(check_llogl(sol))
    rows.append(check_expint(BeltramiCoefficient.random(GridSpec(min(cfg.N, 512), cfg.L), 0.9, rng)))
    if cfg.packing:
        pk = load_packing(cfg.packing)
        for p in ps:
            rows.append(check_burkholder_energy(pk, p, N=cfg.N))
    return rows


def _counterexample_row() -> QuadratureReport:
    cx = counterexample_demo()
    ok = cx.growth >= 10 and cx.bound == 0 and cx.regularized["M_theta"] <= cx.regularized["bound"]
    return Row("counterexample", cx.growth, 10.0, 0.0,
               {"theta": cx.theta, "p_theta": cx.p_theta, "truncations": cx.truncations, "M_theta": cx.M_theta,
                "regularized": cx.regularized},
               "pass" if ok else "fail",
               "demonstration: growth of truncated M_theta for a vanishing family (value = growth factor)")


def suite_interpolation(cfg: RunConfig) -> List:
    rng = np.random.default_rng(cfg.seed)
    if cfg.family == "counterexample":
        return [_counterexample_row()]
    rows = []
    c = AnalyticFamily.constant(1.7 - 0.4j)
    rows.append(check_interpolation_bound(c, math.inf, 2.0, "disk", (0.1, 0.25, 0.5)))
    rows.append(check_interpolation_bound(AnalyticFamily.constant(0.8, domain="halfplane"), 1.0, 4.0))
    h = rng.standard_normal(64)
    e = AnalyticFamily.exponential(h, np.full(64, 1 / 64))
    rows.append(check_interpolation_bound(e, 3.0, 1.5))
    worst = 0.0
    for r in np.linspace(0, 1, 21):
        a = p_interp(2.0, 6.0, float(r), "disk")
        b = p_interp(6.0, 2.0, float((1 - r) / (1 + r)), "halfplane")
        worst = max(worst, abs(a - b) / a)
    rows.append(Row("moebius-consistency", worst, 1e-10, 0.0, {"p0": 2.0, "p1": 6.0}, _le(worst, 1e-10)))
    for fam, th, p0, p1 in ((e, 0.4, 3.0, 1.5), (AnalyticFamily.two_point(), 0.5, 2.0, 4.0)):
        d = support_line(fam, th, p0, p1)
        rows.append(Row("envelope-equality", d.equality_gap, 1e-9, 0.0,
                        {"family": fam.label, "theta": th, "envelope_margin": d.envelope_margin,
                         "harnack_margin": d.harnack_margin, "density_mass": d.density_mass},
                        "pass" if d.ok else "fail"))
    Nb = min(cfg.N, 128)
    mu = BeltramiCoefficient.random(GridSpec(Nb, cfg.L), 0.3, rng)
    p = 3.0
    fam = AnalyticFamily.beltrami(mu, p, tol=min(cfg.tol, 1e-9))
    rows.append(check_interpolation_bound(fam, math.inf, 2.0, "disk", (0.1, 0.25, 0.5, 1 / (p - 1)),
                                          {"radii": (0.25, 0.5, 0.75, 0.9), "max_points": 128}))
    rows.append(_counterexample_row())
    return rows


SUITES = {
    "core": suite_core,
    "radial": suite_radial,
    "solver": suite_solver,
    "inequalities": suite_inequalities,
    "interpolation": suite_interpolation,
}


def run_suite(name: str, cfg: RunConfig) -> List:
    if name == "all":
        out = []
        for k in SUITES:
            out += run_suite(k, cfg)
        return out
    if name not in SUITES:
        raise InvalidInput(f"unknown suite {name!r}")
    rows = SUITES[name](cfg)
    for r in rows:
        if hasattr(r, "params"):
            r.params.setdefault("suite", name)
    return rows
