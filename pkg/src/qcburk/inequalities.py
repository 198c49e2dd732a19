"""Quadrature checks of the sharp integral inequalities.

Sources are radial profiles (polar quadrature on ``B(0, R)``), packing maps
(cell quadrature with analytic singular cores) or principal solutions (cell
quadrature on the solver grid). Every check returns a
:class:`~qcburk.reports.QuadratureReport`.

Error budgets. Polar quadrature reports the adaptive integrator's error.
Grid sources are re-evaluated at half resolution and the budget is
``2 |Q_N - Q_{N/2}|`` (covering convergence orders down to about ``1/2``).
Spectral Beurling transforms of non-radial data add a periodization term.

Solver maps enter the identity-boundary checks (Burkholder energy, L^p mean,
LlogL) as periodic perturbations of the identity on the whole box:
``f_z = 1 + S omega`` and ``f_zbar = omega - mean(omega)``.
"""
from __future__ import annotations

import math
from typing import Callable, Dict, Optional, Union

import numpy as np

from .beltrami import BeltramiCoefficient, GridSpec, PrincipalSolution, beurling, disk_integral
from .errors import ClassError, DomainError, InvalidInput
from .packing import PiecewiseRadialMap
from .radial import RadialCoefficient, RadialProfile, classify_profile, radial_integral
from .reports import QuadratureReport

__all__ = [
    "check_main_inequality",
    "check_burkholder_energy",
    "check_llogl",
    "check_expint",
    "check_lp_mean",
    "check_loginv",
    "area_check",
    "weight_range",
    "integrands",
]

RICHARDSON_SAFETY = 2.0
# lattice sum sum' |omega|^-4 over Z[i] \ {0}
_G4_SQUARE = 3.1512120021539


class integrands:
    """Rotation-invariant integrands ``G(|f_z|, |f_zbar|)``."""

    @staticmethod
    def burkholder(p: float) -> Callable:
        p = float(p)
        if p >= 1:
            return lambda a, b: (a - (p - 1) * b) * (a + b) ** (p - 1)

        def low(a, b):
            n = a + b
            J = a * a - b * b
            with np.errstate(invalid="ignore", divide="ignore"):
                out = ((p / 2) * n * n + (1 - p / 2) * J) * n ** (-p) * J ** (p - 1)
            return np.where(J > 0, out, np.nan)

        return low

    @staticmethod
    def lp(p: float) -> Callable:
        return lambda a, b: (a + b) ** p

    @staticmethod
    def jacobian(a, b):
        return a * a - b * b

    @staticmethod
    def llogl_lhs(a, b):
        return (1 + 2 * np.log(a + b)) * (a * a - b * b)

    @staticmethod
    def dirichlet(a, b):
        return (a + b) ** 2


def _k_of(source) -> float:
    if isinstance(source, RadialProfile):
        c = classify_profile(source, 2.0, 1.0)
        if c.expanding:
            return (1 - c.q_min) / (1 + c.q_min)
        return (c.q_max - 1) / (c.q_max + 1)
    if isinstance(source, PiecewiseRadialMap):
        return source.k
    if isinstance(source, PrincipalSolution):
        return source.mu.k
    raise InvalidInput(f"unsupported source {type(source).__name__}")


def _K_of(source) -> float:
    k = _k_of(source)
    return (1 + k) / (1 - k) if k < 1 else math.inf


def _solver_values(sol: PrincipalSolution, G: Dict[str, Callable], region: str):
    a = np.abs(sol.fz)
    if region == "disk":
        b = np.abs(sol.fzbar)
        return {k: disk_integral(g(a, b), sol.spec) for k, g in G.items()}
    b = np.abs(sol.fzbar - sol.omega.mean())
    return {k: float(np.sum(g(a, b)) * sol.spec.cell_area) for k, g in G.items()}


def _integrate(source, G: Dict[str, Callable], N: Optional[int], region: str = "disk"):
    """Integrals of each ``G`` over the source's natural domain.

    Returns ``(values, errors, grid, area)``.
    """
    if isinstance(source, RadialProfile):
        vals, errs = {}, {}
        for k, g in G.items():
            v, e = radial_integral(source, lambda a, b, g=g: g(np.asarray(a), np.asarray(b)))
            vals[k] = v
            errs[k] = e + 1e-13 * abs(v)
        return vals, errs, {"kind": "polar", "R": source.R}, math.pi * source.R**2
    if isinstance(source, PiecewiseRadialMap):
        N = 1024 if N is None else int(N)
        fine = source.grid_integrate(G, N)
        coarse = source.grid_integrate(G, N // 2)
        errs = {k: RICHARDSON_SAFETY * abs(fine[k] - coarse[k]) + fine.meta["core_quad_error"] + 1e-12 * abs(fine[k])
                for k in G}
        grid = {"kind": "cells", "N": N, "domain": source.domain.to_dict()}
        return dict(fine), errs, grid, source.domain.area
    if isinstance(source, PrincipalSolution):
        vals = _solver_values(source, G, region)
        cvals = _solver_values(source.coarse(), G, region)
        errs = {k: RICHARDSON_SAFETY * abs(vals[k] - cvals[k]) + 1e-12 * abs(vals[k]) for k in G}
        grid = {"kind": "spectral", "N": source.spec.N, "L": source.spec.L, "region": region,
                "compare_N": source.coarse().spec.N}
        area = math.pi if region == "disk" else (2 * source.spec.L) ** 2
        return vals, errs, grid, area
    raise InvalidInput(f"unsupported source {type(source).__name__}")


def _identity_boundary(source):
    if isinstance(source, RadialProfile):
        if abs(float(source.rho(source.R)) - source.R) > 1e-12 * source.R:
            raise ClassError("radial source must satisfy rho(R) = R")
    elif isinstance(source, PiecewiseRadialMap):
        if not source.tags["identity_boundary"]:
            raise ClassError("packing source must have identity boundary values")


def weight_range(p: float, k: float):
    """Range ``[1 - p k / (1 + k), 1]`` of the weight ``1 - p |mu| / (1 + |mu|)``."""
    return 1 - p * k / (1 + k), 1.0


def _power_closed_main(prof: RadialProfile, p: float):
    """Weighted integral for ``rho = R (t/R)^a`` with ``r = 0``.

    ``w = 1 - p (1-a)/2`` times ``int |Dg|^p = 2 pi R^2 / (2 - p (1-a))``;
    the product is ``pi R^2`` whenever finite, and at the critical exponent
    ``p = 2 / (1-a)`` (``w = 0``, divergent integral) the same value is the
    limit from below.
    """
    a = prof.params["a"]
    R = prof.R
    w = 1 - p * (1 - a) / 2
    if abs(w) <= 1e-14:
        return math.pi * R**2, "critical exponent: value is the limit p -> 2/(1-a) from below"
    return w * 2 * math.pi * R**2 / (2 - p * (1 - a)), "closed form"


def check_main_inequality(source, p: float, N: Optional[int] = None) -> QuadratureReport:
    """``int (1 - p|mu|/(1+|mu|)) |Df|^p <= |Omega|`` (``pi`` for maps conformal off the disk).

    The integrand equals ``B_p(Df)`` pointwise for ``p >= 1``. Requires
    ``2 <= p <= 1 + 1/k``.
    """
    p = float(p)
    k = _k_of(source)
    upper = 1 + 1 / k if k > 0 else math.inf
    if not (2 - 1e-12 <= p <= upper * (1 + 1e-12)):
        raise DomainError(f"p = {p} outside [2, 1 + 1/k] = [2, {upper:.6g}]")
    params = {"p": p, "k": k}
    if isinstance(source, RadialProfile) and source.kind in ("power", "monomial", "identity") and source.r == 0:
        value, note = _power_closed_main(source, p)
        return QuadratureReport("main", value, math.pi * source.R**2, 1e-13 * value,
                                {"kind": "closed-form", "R": source.R}, params, note)
    vals, errs, grid, area = _integrate(source, {"main": integrands.burkholder(p)}, N, region="disk")
    return QuadratureReport("main", vals["main"], area, errs["main"], grid, params)


def check_burkholder_energy(source, p: float, N: Optional[int] = None) -> QuadratureReport:
    """``int_Omega B_p(Df) <= |Omega|`` for identity boundary values.

    Expanding sources with ``2 <= p <= 2K/(K-1)``, or compressing sources with
    ``-2/(K-1) <= p <= 0``. Solver sources are checked on the periodic box.
    """
    p = float(p)
    _identity_boundary(source)
    K = _K_of(source)
    if p >= 2:
        if K > 1 and p > 2 * K / (K - 1) * (1 + 1e-12):
            raise ClassError(f"p = {p} exceeds 2K/(K-1) for K = {K:.6g}")
        if isinstance(source, (RadialProfile, PiecewiseRadialMap)):
            exp = classify_profile(source, 2.0, 1.0).expanding if isinstance(source, RadialProfile) \
                else source.tags["expanding"]
            if not exp:
                raise ClassError("p >= 2 needs an expanding source")
    elif p <= 0:
        if K > 1 and p < -2 / (K - 1) * (1 + 1e-12):
            raise ClassError(f"p = {p} below -2/(K-1) for K = {K:.6g}")
        if isinstance(source, (RadialProfile, PiecewiseRadialMap)):
            comp = classify_profile(source, 2.0, 1.0).compressing if isinstance(source, RadialProfile) \
                else source.tags["compressing"]
            if not comp:
                raise ClassError("p <= 0 needs a compressing source")
    else:
        raise DomainError("energy bound is stated for p >= 2 or p <= 0")
    vals, errs, grid, area = _integrate(source, {"B": integrands.burkholder(p)}, N, region="box")
    return QuadratureReport("burkholder", vals["B"], area, errs["B"], grid, {"p": p, "K": K})


def check_llogl(source, N: Optional[int] = None) -> QuadratureReport:
    """``int (1 + log|Df|^2) J <= int |Df|^2`` for identity boundary values."""
    _identity_boundary(source)
    G = {"lhs": integrands.llogl_lhs, "rhs": integrands.dirichlet}
    vals, errs, grid, _ = _integrate(source, G, N, region="box")
    return QuadratureReport("llogl", vals["lhs"], vals["rhs"], errs["lhs"] + errs["rhs"], grid, {})


def check_lp_mean(source, K: float, p: float, N: Optional[int] = None) -> QuadratureReport:
    """``|Omega|^-1 int |Df|^p <= 2K / (2K - p (K-1))`` for ``2 <= p < 2K/(K-1)``."""
    K = float(K)
    p = float(p)
    upper = 2 * K / (K - 1) if K > 1 else math.inf
    if not (2 <= p < upper):
        raise DomainError(f"p = {p} outside [2, 2K/(K-1)) for K = {K}")
    _identity_boundary(source)
    Ks = _K_of(source)
    if Ks > K * (1 + 1e-9):
        raise ClassError(f"source distortion {Ks:.6g} exceeds K = {K}")
    vals, errs, grid, area = _integrate(source, {"lp": integrands.lp(p)}, N, region="box")
    bound = 2 * K / (2 * K - p * (K - 1))
    return QuadratureReport("lp-mean", vals["lp"] / area, bound, errs["lp"] / area, grid, {"K": K, "p": p})


def _periodization_budget(mu: BeltramiCoefficient) -> float:
    # leading image term of the torus kernel for data supported in D (|u| <= 2)
    L = mu.spec.L
    l1 = float(np.sum(np.abs(mu.values)) * mu.spec.cell_area)
    return 12 * _G4_SQUARE / (math.pi * (2 * L) ** 4) * l1


def _expint_grid(mu: BeltramiCoefficient, scheme: str):
    s = beurling(mu.field, scheme=scheme).values
    a = np.abs(mu.values)
    return disk_integral((1 - a) * np.exp(a + s.real), mu.spec)


def check_expint(coef: Union[RadialCoefficient, BeltramiCoefficient], path: str = "auto", N: int = 512,
                 L: float = 4.0, scheme: str = "cell") -> QuadratureReport:
    """``int_D (1 - |mu|) e^|mu| |exp(S mu)| <= pi`` for ``|mu| <= chi_D``.

    Radial coefficients use the closed form
    ``S mu = 2 int_|z|^1 alpha(t) dt/t - alpha(|z|)`` unless
    ``path="spectral"``; grid coefficients always use the spectral transform.
    """
    if isinstance(coef, RadialCoefficient) and path in ("auto", "closed"):
        t_probe = np.geomspace(1e-9, 1 - 1e-12, 2001)
        al = coef.values(t_probe)
        if np.any(np.abs(al) > 1):
            raise DomainError("|mu| > 1")

        def f(t):
            a = float(coef.values(np.array([t]))[0])
            s = float(coef.s_transform(np.array([t]))[0])
            return (1 - a) * math.exp(a + s)

        from .quadrature import radial_quad

        v, e = radial_quad(f, 0.0, 1.0, points=coef.breakpoints)
        return QuadratureReport("expint", v, math.pi, e + 1e-12 * v, {"kind": "polar", "path": "closed"},
                                {"alpha": coef.name, **coef.params})
    if isinstance(coef, RadialCoefficient):
        mu = BeltramiCoefficient.radial(GridSpec(N, L), coef)
        label = {"alpha": coef.name, **coef.params}
    elif isinstance(coef, BeltramiCoefficient):
        mu = coef
        label = {"mu": coef.label, "k": coef.k}
    else:
        raise InvalidInput("expected a RadialCoefficient or BeltramiCoefficient")
    if mu.k > 1:
        raise DomainError("|mu| > 1")
    value = _expint_grid(mu, scheme)
    coarse = _expint_grid(mu.resample(mu.spec.coarser() if mu.spec.N >= 128 else mu.spec.finer()), scheme)
    per = _periodization_budget(mu)
    est = RICHARDSON_SAFETY * abs(value - coarse) + value * math.expm1(per) + 1e-12 * value
    grid = {"kind": "spectral", "N": mu.spec.N, "L": mu.spec.L, "path": "spectral", "periodization": per}
    return QuadratureReport("expint", value, math.pi, est, grid, label)


def check_loginv(profile: RadialProfile, K_field: Optional[Callable] = None) -> QuadratureReport:
    """``2 int (log|Dh| - log J) <= int (K(z,h) - J)`` for compressing radial ``h``.

    The left side is read with the logarithms grouped under one integral.
    ``K_field(a, b)`` may override the distortion ``|Dh|^2 / J``.
    """
    if not isinstance(profile, RadialProfile):
        raise InvalidInput("loginv is checked on radial profiles only")
    if not classify_profile(profile, 2.0, 1.0).compressing:
        raise ClassError("loginv needs a compressing profile")
    Kf = K_field or (lambda a, b: (a + b) ** 2 / (a * a - b * b))
    G = {
        "lhs": lambda a, b: 2 * (np.log(a + b) - np.log(a * a - b * b)),
        "rhs": lambda a, b: Kf(a, b) - (a * a - b * b),
    }
    vals, errs, grid, _ = _integrate(profile, G, None)
    return QuadratureReport("loginv", vals["lhs"], vals["rhs"], errs["lhs"] + errs["rhs"], grid,
                            {"profile": profile.kind, **{k: v for k, v in profile.params.items() if k != "knots"}})


def area_check(sol: PrincipalSolution) -> QuadratureReport:
    """``int_D J(z, f) <= pi`` for a principal solution."""
    from .beltrami import area_integral

    v = area_integral(sol)
    c = area_integral(sol.coarse())
    est = RICHARDSON_SAFETY * abs(v - c) + 1e-12
    return QuadratureReport("area", v, math.pi, est, {"kind": "spectral", "N": sol.spec.N, "L": sol.spec.L},
                            {"mu": sol.mu.label, "k": sol.mu.k})
