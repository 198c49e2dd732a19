"""Radial profiles ``g(z) = rho(|z|) z / |z|`` and their derivative data.

A profile lives on ``[0, R]`` and is linear on the core ``[0, r]``. On the
outer part it is one of a few closed forms, a piecewise linear table, or a
user supplied pair of callables. Writing ``q(t) = t rho'(t) / rho(t)``:

* expanding means ``0 <= q <= 1`` (``|Dg| = rho / t``),
* compressing means ``q >= 1`` (``|Dg| = rho'``),
* the Beltrami coefficient is ``-(z / zbar) (1 - q) / (1 + q)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ClassError, DomainError, InvalidInput
from .functionals import PlanarDeriv
from .quadrature import radial_quad

__all__ = [
    "RadialProfile",
    "ProfileClassification",
    "RadialCoefficient",
    "Aa1Warning",
    "radial_deriv",
    "classify_profile",
    "closed_form_energy",
    "annulus_energy",
    "rho_from_alpha",
    "radial_integral",
]

_TOL = 1e-12


class Aa1Warning(UserWarning):
    """The origin term of the closed-form energy does not vanish."""


# Gauss-Legendre nodes used for all log-space integrals below.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


class _LogIntegral:
    """``I(t) = int_t^1 f(s) ds / s`` on ``[t_min, 1]``, vectorized in ``t``.

    The integral is accumulated in ``u = log s`` over segments whose ends
    include every declared kink, with 16-point Gauss-Legendre per segment, so
    smooth pieces are integrated to round-off.
    """

    def __init__(self, f, t_min=1e-12, segments=600, breakpoints=()):
        self.f = f
        self.u_min = math.log(t_min)
        nodes = np.linspace(self.u_min, 0.0, segments + 1)
        kinks = [math.log(b) for b in breakpoints if t_min < b < 1.0]
        self.nodes = np.unique(np.concatenate([nodes, kinks]))
        seg = self._segment(self.nodes[:-1], self.nodes[1:])
        # cum[i] = int_{nodes[i]}^0
        self.cum = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        self.f_min = float(f(np.array([t_min]))[0])

    def _segment(self, a, b):
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        u = mid[..., None] + half[..., None] * _GL_X
        vals = self.f(np.exp(u))
        return half * np.sum(vals * _GL_W, axis=-1)

    def __call__(self, t):
        t = np.asarray(t, float)
        u = np.log(np.maximum(t, 1e-300))
        uc = np.clip(u, self.u_min, 0.0)
        i = np.clip(np.searchsorted(self.nodes, uc, side="right") - 1, 0, len(self.nodes) - 2)
        out = self.cum[i + 1] + self._segment(uc, self.nodes[i + 1])
        # constant extrapolation of f below t_min
        return out + np.where(u < self.u_min, (self.u_min - u) * self.f_min, 0.0)


class RadialProfile:
    """Increasing profile ``rho`` on ``[0, R]`` with ``rho(0) = 0``.

    Use the constructors (:meth:`identity`, :meth:`power`, :meth:`monomial`,
    :meth:`blend`, :meth:`table`, :meth:`custom`) rather than ``__init__``.
    """

    def __init__(self, kind, R, r, outer, *, params=None, origin=None, breakpoints=(), normalization=None):
        R = float(R)
        r = float(r)
        if not (R > 0 and 0 <= r < R):
            raise InvalidInput(f"need 0 <= r < R, got r={r}, R={R}")
        self.kind = kind
        self.R = R
        self.r = r
        self.params = dict(params or {})
        self._outer = outer
        self.breakpoints = tuple(sorted(b for b in breakpoints if r < b < R))
        raw_R = float(outer(np.array([R]))[0][0])
        norm = R if normalization is None else float(normalization)
        if norm <= 0 or raw_R <= 0:
            raise InvalidInput("profile must be positive at R")
        self.normalization = norm
        self._scale = norm / raw_R
        # origin = (exponent e, prefactor c) with rho ~ c t^e at 0, unscaled
        if r > 0:
            rr = self._outer_at(r)[0]
            self._origin = (1.0, rr / r)
        else:
            self._origin = origin

    # raw outer data
    def _outer_at(self, t):
        rho, rdot = self._outer(np.atleast_1d(np.asarray(t, float)))
        return float(rho[0]), float(rdot[0])

    # --- constructors -------------------------------------------------
    @classmethod
    def identity(cls, R=1.0):
        return cls.monomial(1.0, R=R, r=0.0, kind="identity")

    @classmethod
    def power(cls, K, R=1.0, r=0.0, normalization=None):
        """``rho(t) = R (t/R)^(1/K)``: the radial stretch of distortion ``K``."""
        K = float(K)
        if K < 1:
            raise InvalidInput("distortion K must be >= 1")
        prof = cls.monomial(1.0 / K, R=R, r=r, normalization=normalization, kind="power")
        prof.params["K"] = K
        return prof

    @classmethod
    def monomial(cls, a, R=1.0, r=0.0, normalization=None, kind="monomial"):
        """``rho(t) = R (t/R)^a`` outside the core; ``a > 1`` compresses."""
        a = float(a)
        R = float(R)
        if a <= 0:
            raise InvalidInput("monomial exponent must be positive")

        def outer(t):
            s = t / R
            return R * s**a, a * s ** (a - 1)

        return cls(kind, R, r, outer, params={"a": a}, origin=(a, R ** (1 - a)), normalization=normalization)

    @classmethod
    def blend(cls, a, m=2.0, R=1.0, r=0.0, normalization=None):
        """Smooth profile with ``q(t) = a + (1 - a)(t/R)^m``.

        ``q`` moves from ``a`` at the origin to ``1`` at ``R``; expanding for
        ``a < 1``, compressing for ``a > 1``.
        """
        a = float(a)
        m = float(m)
        R = float(R)
        if a <= 0 or m <= 0:
            raise InvalidInput("blend needs a > 0 and m > 0")

        def outer(t):
            s = t / R
            rho = R * s**a * np.exp(-(1 - a) * (1 - s**m) / m)
            q = a + (1 - a) * s**m
            with np.errstate(divide="ignore", invalid="ignore"):
                rdot = np.where(t > 0, q * rho / np.where(t > 0, t, 1), np.inf if a < 1 else 0.0)
            return rho, rdot

        pref = R ** (1 - a) * math.exp(-(1 - a) / m)
        return cls("blend", R, r, outer, params={"a": a, "m": m}, origin=(a, pref), normalization=normalization)

    @classmethod
    def table(cls, knots: Sequence, normalization=None):
        """Piecewise linear ``rho`` through ``(0, 0)`` and ``knots = [(t_i, rho_i)]``.

        The first segment is the linear core, so ``r = t_1`` and ``R = t_n``.
        Derivatives at knots are right derivatives.
        """
        pts = np.asarray(knots, float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise InvalidInput("table needs at least two (t, rho) knots")
        ts = np.concatenate([[0.0], pts[:, 0]])
        rs = np.concatenate([[0.0], pts[:, 1]])
        if np.any(np.diff(ts) <= 0) or np.any(np.diff(rs) <= 0):
            raise InvalidInput("table knots must be strictly increasing in t and rho")
        slopes = np.diff(rs) / np.diff(ts)

        def outer(t):
            i = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(slopes) - 1)
            return rs[i] + slopes[i] * (t - ts[i]), slopes[i]

        return cls("table", ts[-1], ts[1], outer, params={"knots": pts.tolist()},
                   breakpoints=ts[2:-1], normalization=normalization)

    @classmethod
    def custom(cls, rho: Callable, rho_dot: Callable, R=1.0, r=0.0, origin_exponent=None,
               origin_prefactor=None, breakpoints=(), normalization=None):
        """Profile from vectorized callables ``rho(t)`` and ``rho_dot(t)``."""

        def outer(t):
            return np.asarray(rho(t), float), np.asarray(rho_dot(t), float)

        origin = None
        if origin_exponent is not None:
            origin = (float(origin_exponent), None if origin_prefactor is None else float(origin_prefactor))
        return cls("custom", R, r, outer, origin=origin, breakpoints=breakpoints, normalization=normalization)

    # --- evaluation ---------------------------------------------------
    def _check_t(self, t):
        t = np.asarray(t, float)
        if np.any(t < 0) or np.any(t > self.R * (1 + 1e-12)):
            raise DomainError(f"radius outside [0, {self.R}]")
        return np.minimum(t, self.R)

    def rho(self, t):
        t = self._check_t(t)
        tt = np.maximum(t, self.r)
        out, _ = self._outer(np.atleast_1d(tt))
        out = np.reshape(out, np.shape(tt))
        if self.r > 0:
            out = np.where(t < self.r, out * t / self.r, out)
        return self._scale * out

    def rho_dot(self, t):
        """Right derivative of ``rho``."""
        t = self._check_t(t)
        tt = np.maximum(t, self.r)
        rho, rdot = self._outer(np.atleast_1d(tt))
        rho = np.reshape(rho, np.shape(tt))
        rdot = np.reshape(rdot, np.shape(tt))
        if self.r > 0:
            rdot = np.where(t < self.r, rho / self.r, rdot)
        return self._scale * rdot

    def ratio(self, t):
        """``q(t) = t rho'(t) / rho(t)`` for ``t > 0``."""
        t = np.asarray(t, float)
        return t * self.rho_dot(t) / self.rho(t)

    @property
    def origin_exponent(self) -> Optional[float]:
        return None if self._origin is None else self._origin[0]

    def origin_limit(self, p: float) -> Optional[float]:
        """``lim_{t -> 0} rho(t)^p t^(2-p)``; ``None`` when it cannot be decided."""
        if self._origin is None:
            return None
        e, c = self._origin
        gamma = p * (e - 1) + 2
        if abs(gamma) <= 1e-12:
            if c is None:
                return None
            return float((self._scale * c) ** p)
        return 0.0 if gamma > 0 else math.inf

    def sample_radii(self, n=2001, t_min=1e-8):
        """Log-spaced radii over the outer part plus both sides of every kink."""
        lo = max(self.r, self.R * t_min)
        t = np.geomspace(lo, self.R, n)
        extra = [b * (1 - 1e-9) for b in self.breakpoints] + list(self.breakpoints)
        if self.r > 0:
            extra += [self.r]
        return np.unique(np.concatenate([t, extra]))

    def __repr__(self):
        return f"RadialProfile(kind={self.kind!r}, R={self.R}, r={self.r}, params={self.params})"


def radial_deriv(profile: RadialProfile, z, core: bool = False) -> PlanarDeriv:
    """``(g_z, g_zbar)`` of ``g(z) = rho(|z|) z / |z|``.

    ``g_z = (rho' + rho/t) / 2`` and ``g_zbar = (rho' - rho/t) z / (2 zbar)``.
    With ``core=True`` the point ``z = 0`` is allowed when ``r > 0`` and gets
    the core's conformal derivative ``(rho(r)/r, 0)``.
    """
    z = np.asarray(z, complex)
    t = np.abs(z)
    zero = t == 0
    if np.any(zero) and not (core and profile.r > 0):
        raise DomainError("radial derivative undefined at z = 0")
    ts = np.where(zero, profile.r * 0.5 if profile.r > 0 else 1.0, t)
    rho = profile.rho(ts)
    rdot = profile.rho_dot(ts)
    stretch = rho / ts
    phase = np.where(zero, 1.0, z / np.where(zero, 1.0, np.conj(z)))
    return PlanarDeriv(0.5 * (rdot + stretch), 0.5 * (rdot - stretch) * phase)


@dataclass(frozen=True)
class ProfileClassification:
    expanding: bool
    compressing: bool
    rho4: bool
    rho3: bool
    aa1: Optional[bool]
    nonexpanding_limit: Optional[bool]
    q_min: float
    q_max: float
    # rho(t) = o(1/log(1/t)) at 0, the p -> 2 form of aa1 used for L log L equality
    llogl_origin: Optional[bool] = None


def _q_range(profile: RadialProfile):
    if profile.kind in ("identity", "power", "monomial"):
        a = profile.params["a"]
        lo, hi = a, a
    elif profile.kind == "blend":
        a = profile.params["a"]
        lo, hi = min(a, 1.0), max(a, 1.0)
    else:
        q = profile.ratio(profile.sample_radii())
        lo, hi = float(np.min(q)), float(np.max(q))
    if profile.r > 0:
        # the linear core has q = 1
        lo, hi = min(lo, 1.0), max(hi, 1.0)
    return lo, hi


def _aa1(profile: RadialProfile, p: float) -> Optional[bool]:
    """``rho(t) = o(t^(1 - 2/p))`` at the origin (automatic when r > 0)."""
    if profile.r > 0:
        return True
    e = profile.origin_exponent
    if e is not None:
        return bool(e > 1 - 2 / p + 1e-12) if p > 0 else bool(e < 1 - 2 / p - 1e-12)
    # sampled ratio decay
    t = profile.R * np.logspace(-2, -10, 9)
    ratio = profile.rho(t) / t ** (1 - 2 / p)
    if np.all(np.diff(ratio) < 0) and ratio[-1] < 1e-3 * ratio[0]:
        return True
    return None


def classify_profile(profile: RadialProfile, p: float, K: float) -> ProfileClassification:
    """Report which of the profile conditions hold for exponent ``p`` and distortion ``K``.

    ``rho4``: ``1 - 2/p <= q <= 1``. ``rho3``: ``1/K <= q <= 1`` and
    ``K < p / (p - 2)``. ``aa1``: ``rho(t) = o(t^(1-2/p))`` at 0.
    ``nonexpanding_limit``: ``rho(t) / t^(1-2/p) -> inf`` (relevant for
    ``p < 0``, ``r = 0``); ``None`` when undecidable from the profile kind.
    """
    p = float(p)
    K = float(K)
    lo, hi = _q_range(profile)
    expanding = lo >= -_TOL and hi <= 1 + _TOL
    compressing = lo >= 1 - _TOL
    rho4 = expanding and (p <= 0 or lo >= 1 - 2 / p - _TOL)
    k_ok = p <= 2 or K < p / (p - 2) - _TOL
    rho3 = expanding and lo >= 1 / K - _TOL and k_ok
    aa1 = _aa1(profile, p) if p != 0 else True
    if profile.r > 0:
        nonexp = False
    elif profile.kind in ("identity", "power", "monomial", "blend") and p < 0:
        nonexp = bool(profile.origin_exponent < 1 - 2 / p - 1e-12)
    elif p < 0:
        nonexp = None
    else:
        nonexp = False
    if profile.r > 0:
        llogl = True
    elif profile.kind in ("identity", "power", "monomial", "blend"):
        llogl = bool(profile.origin_exponent > 0)
    else:
        llogl = None
    return ProfileClassification(expanding, compressing, rho4, rho3, aa1, nonexp, lo, hi, llogl)


def annulus_energy(profile: RadialProfile, p: float, t0: float, t1: float) -> float:
    """``int B_p(Dg)`` over ``t0 < |z| < t1`` for ``0 < t0``.

    Equals ``pi (rho^p t^(2-p))|_{t0}^{t1}`` for expanding profiles with
    ``p >= 1`` and compressing ones with ``p <= 1``; both sides of the core
    radius are handled since the core is linear.
    """
    if t0 <= 0:
        raise DomainError("use closed_form_energy for annuli touching the origin")

    def term(t):
        return float(profile.rho(t)) ** p * t ** (2 - p)

    return math.pi * (term(t1) - term(t0))


def _check_energy_class(profile: RadialProfile, p: float):
    lo, hi = _q_range(profile)
    expanding = lo >= -_TOL and hi <= 1 + _TOL
    compressing = lo >= 1 - _TOL
    if p >= 1 and not expanding:
        raise ClassError("closed-form energy for p >= 1 needs an expanding profile")
    if p <= 1 and not compressing and not (p == 1):
        raise ClassError("closed-form energy for p <= 1 needs a compressing profile")


def closed_form_energy(profile: RadialProfile, p: float) -> float:
    """Burkholder energy of ``g`` over ``B(0, R)``.

    ``pi (rho(R)^p R^(2-p) - lim_{t->0} rho(t)^p t^(2-p))``. A non-vanishing
    origin term (the profile fails ``rho = o(t^(1 - 2/p))``) triggers an
    :class:`Aa1Warning`; the returned value still includes it.
    """
    p = float(p)
    _check_energy_class(profile, p)
    R = profile.R
    top = float(profile.rho(R)) ** p * R ** (2 - p)
    lim = profile.origin_limit(p)
    if lim is None:
        t = R * 1e-14
        lim = float(profile.rho(t)) ** p * t ** (2 - p)
        if lim > 1e-10 * top:
            warnings.warn("origin term estimated from samples", Aa1Warning, stacklevel=2)
    if lim != 0.0:
        warnings.warn(f"origin limit {lim:g} does not vanish; energy below |B(0,R)|", Aa1Warning, stacklevel=2)
    if math.isinf(lim):
        return -math.inf
    return math.pi * (top - lim)


def radial_integral(profile: RadialProfile, integrand: Callable, t0: float = 0.0, t1: Optional[float] = None):
    """``int G(|g_z|, |g_zbar|) dz`` over ``t0 < |z| < t1`` by adaptive polar quadrature.

    ``integrand(a, b)`` receives the moduli of ``g_z`` and ``g_zbar`` at
    radius ``t``. Returns ``(value, abserr)``.
    """
    t1 = profile.R if t1 is None else t1

    def f(t):
        d = radial_deriv(profile, complex(t))
        return float(integrand(abs(complex(d.dz)), abs(complex(d.dzbar))))

    pts = list(profile.breakpoints) + ([profile.r] if profile.r > 0 else [])
    return radial_quad(f, t0, t1, points=pts)


class RadialCoefficient:
    """Radial Beltrami data ``mu(z) = -(z / zbar) alpha(|z|)`` on the unit disk.

    ``alpha`` must be vectorized on ``(0, 1]``. ``divergent`` records whether
    ``int_0^1 (1 - alpha(t)) dt / t = inf`` when that is known.
    """

    def __init__(self, alpha: Callable, name="custom", divergent: Optional[bool] = None, breakpoints=(),
                 params=None):
        self.alpha = alpha
        self.name = name
        self.divergent = divergent
        self.breakpoints = tuple(breakpoints)
        self.params = dict(params or {})
        self._s_int = None

    @classmethod
    def constant(cls, k):
        k = float(k)
        if not 0 <= k < 1:
            raise DomainError("need 0 <= k < 1")
        return cls(lambda t: np.full(np.shape(t), k), name="const", divergent=True, params={"k": k})

    @classmethod
    def linear(cls):
        """``alpha(t) = t``."""
        return cls(lambda t: np.asarray(t, float), name="linear", divergent=True)

    @classmethod
    def from_profile(cls, profile: RadialProfile):
        """``alpha = (1 - q) / (1 + q)`` of an expanding profile with ``R = 1``."""
        if profile.R != 1.0:
            raise InvalidInput("coefficient profiles live on the unit disk")
        if not classify_profile(profile, 2.0, 1.0).expanding:
            raise ClassError("profile is not expanding")

        def alpha(t):
            q = profile.ratio(np.clip(t, 1e-300, 1.0))
            a = (1 - q) / (1 + q)
            # q = 1 on linear pieces up to round-off
            return np.where(np.abs(a) < 1e-13, 0.0, a)

        bps = list(profile.breakpoints) + ([profile.r] if profile.r > 0 else [])
        return cls(alpha, name="profile", breakpoints=bps)

    def values(self, t):
        t = np.asarray(t, float)
        a = np.asarray(self.alpha(t), float)
        if np.any(~np.isfinite(a)):
            raise DomainError("alpha is not finite")
        return a

    def mu(self, z):
        """Pointwise coefficient on the plane (zero outside the unit disk)."""
        z = np.asarray(z, complex)
        t = np.abs(z)
        inside = (t < 1) & (t > 0)
        ts = np.where(inside, t, 0.5)
        phase = np.where(inside, z / np.where(inside, np.conj(z), 1), 0)
        return np.where(inside, -phase * self.values(ts), 0)

    def s_transform(self, t):
        """Closed-form Beurling transform ``2 int_t^1 alpha(s) ds / s - alpha(t)`` for ``0 < t < 1``."""
        if self._s_int is None:
            self._s_int = _LogIntegral(self.values, breakpoints=self.breakpoints)
        t = np.asarray(t, float)
        return 2 * self._s_int(t) - self.values(t)


def rho_from_alpha(alpha: RadialCoefficient, t_min: float = 1e-12) -> RadialProfile:
    """Profile on the unit disk whose radial map has coefficient ``-(z/zbar) alpha``.

    Integrates ``d log rho / d log t = (1 - alpha) / (1 + alpha)`` from
    ``rho(1) = 1`` downward.
    """
    # t = 1 itself is a null set; alpha(t) = t is admissible
    probe = alpha.values(np.geomspace(t_min, 1.0 - 1e-9, 4001))
    if np.any(probe < 0) or np.any(probe >= 1):
        raise DomainError("alpha must take values in [0, 1)")

    def q(t):
        a = alpha.values(t)
        if np.any(a < 0) or np.any(a > 1):
            raise DomainError("alpha must take values in [0, 1)")
        return (1 - a) / (1 + a)

    log_int = _LogIntegral(q, t_min=t_min, breakpoints=alpha.breakpoints)

    def rho(t):
        t = np.asarray(t, float)
        with np.errstate(divide="ignore"):
            return np.where(t > 0, np.exp(-log_int(np.where(t > 0, t, 1.0))), 0.0)

    def rho_dot(t):
        t = np.asarray(t, float)
        ts = np.where(t > 0, t, t_min)
        return q(ts) * rho(ts) / ts

    e0 = float(q(np.array([t_min]))[0])
    pref = float(rho(np.array([t_min]))[0]) / t_min**e0
    prof = RadialProfile.custom(rho, rho_dot, R=1.0, origin_exponent=e0, origin_prefactor=pref,
                                breakpoints=alpha.breakpoints)
    prof.params["alpha"] = alpha.name
    return prof
