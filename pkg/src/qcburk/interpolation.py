"""Interpolation of L^p norms along analytic non-vanishing families.

Two equivalent forms are supported. In the half-plane form the exponent
``p1`` is attained at the single point ``lambda = 1`` and ``p0`` is
controlled on all of the right half-plane (with growth ``e^{a Re lambda}``).
In the disk form ``p0`` sits at the center and ``p1`` is controlled on the
whole disk. The substitution ``lambda = (1 - w) / (1 + w)`` carries one form
into the other with the two exponents swapped.

Suprema over the parameter domain are sampled; the sampling is recorded in
every report.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .beltrami import BeltramiCoefficient, GridField, phi_field
from .errors import DomainError, InvalidFamily, InvalidInput
from .reports import InterpolationReport

__all__ = [
    "AnalyticFamily",
    "p_interp",
    "interp_weight",
    "family_norms",
    "check_interpolation_bound",
    "SupportLineDiag",
    "support_line",
    "restrict",
    "counterexample_demo",
    "CounterexampleReport",
]

INF = math.inf


# ---------------------------------------------------------------- exponents

def _is_exact(x) -> bool:
    return isinstance(x, (int, Rational)) and not isinstance(x, bool)


def _recip(p):
    if p == INF:
        return Fraction(0)
    if not p > 0:
        raise DomainError(f"exponent must be positive or inf, got {p}")
    return Fraction(1) / Fraction(p)


def interp_weight(t, form: str):
    """Weight ``s`` carried by ``1/p1``: ``theta`` (half-plane) or ``2r/(1+r)`` (disk)."""
    if not 0 <= t <= 1:
        raise DomainError(f"t = {t} outside [0, 1]")
    t = Fraction(t)
    if form == "halfplane":
        return t
    if form == "disk":
        return 2 * t / (1 + t)
    raise InvalidInput(f"unknown form {form!r}")


def p_interp(p0, p1, t, form: str = "halfplane"):
    """Harmonic interpolation of exponents.

    ``1/p_t = (1 - s)/p0 + s/p1`` with ``s = theta`` (half-plane) or
    ``s = 2r/(1+r)`` (disk), and ``1/inf = 0``. Returns a ``Fraction`` when
    every input is an integer or ``Fraction``, ``inf`` when ``1/p_t = 0``.

    >>> p_interp(math.inf, 2, Fraction(1, 2))
    Fraction(4, 1)
    """
    s = interp_weight(t, form)
    inv = (1 - s) * _recip(p0) + s * _recip(p1)
    if inv == 0:
        return INF
    out = 1 / inv
    exact = all(_is_exact(x) or x == INF for x in (p0, p1)) and _is_exact(t)
    return out if exact else float(out)


def _pf(p) -> float:
    return INF if p == INF else float(p)


# ------------------------------------------------------------------ families

@dataclass
class AnalyticFamily:
    """Family ``lambda -> Phi_lambda`` sampled on weighted points.

    ``evaluator(lam)`` returns complex values at all sample points. The
    nonvanishing flag is checked on every evaluation.
    """

    evaluator: Callable[[complex], np.ndarray]
    weights: np.ndarray
    domain: str = "halfplane"
    nonvanishing: bool = True
    growth: float = 0.0
    label: str = ""
    points: Optional[np.ndarray] = None
    tolerance: float = 1e-8
    meta: Dict = field(default_factory=dict)
    _cache: Dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, float).ravel()
        if self.domain not in ("halfplane", "disk"):
            raise InvalidInput(f"unknown domain {self.domain!r}")
        if np.any(self.weights < 0) or not np.all(np.isfinite(self.weights)):
            raise InvalidInput("weights must be finite and non-negative")
        if self.growth < 0:
            raise InvalidInput("growth a must be >= 0")

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def in_domain(self, lam: complex) -> bool:
        lam = complex(lam)
        return lam.real >= 0 if self.domain == "halfplane" else abs(lam) < 1

    def __call__(self, lam: complex) -> np.ndarray:
        lam = complex(lam)
        if lam in self._cache:
            return self._cache[lam]
        if not self.in_domain(lam):
            raise DomainError(f"lambda = {lam} outside the {self.domain}")
        v = np.asarray(self.evaluator(lam), complex).ravel()
        if v.shape != self.weights.shape:
            raise InvalidFamily("evaluator returned the wrong number of samples")
        if not np.all(np.isfinite(v)):
            raise InvalidFamily(f"non-finite values at lambda = {lam}")
        if self.nonvanishing and np.any((v == 0) & (self.weights > 0)):
            raise InvalidFamily(f"family flagged non-vanishing vanishes at lambda = {lam}")
        self._cache[lam] = v
        return v

    def log_norm(self, lam: complex, p) -> float:
        """``log ||Phi_lambda||_p``; ``-inf`` for the zero function."""
        v = np.abs(self(lam))
        live = self.weights > 0
        v, w = v[live], self.weights[live]
        if p == INF:
            m = v.max(initial=0.0)
            return math.log(m) if m > 0 else -INF
        p = float(p)
        if p <= 0:
            raise DomainError("p must be > 0")
        with np.errstate(divide="ignore"):
            lv = np.log(v)
        return float(logsumexp(p * lv + np.log(w))) / p

    def norm(self, lam: complex, p) -> float:
        return math.exp(self.log_norm(lam, p))

    # constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, c: complex, n: int = 16, domain: str = "disk", weights=None) -> "AnalyticFamily":
        """``Phi = c`` on ``n`` points of a probability space."""
        w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, float)
        vals = np.full(w.size, complex(c))
        return cls(lambda lam: vals, w, domain, c != 0, 0.0, f"const({c})")

    @classmethod
    def exponential(cls, h: np.ndarray, weights: np.ndarray, domain: str = "halfplane",
                    growth: Optional[float] = None) -> "AnalyticFamily":
        """``Phi_lambda = exp(lambda h)``; growth defaults to ``max Re h`` (clipped at 0)."""
        h = np.asarray(h, complex).ravel()
        a = max(float(h.real.max()), 0.0) if growth is None else growth
        return cls(lambda lam: np.exp(lam * h), weights, domain, True, a, "exp(lam h)", points=h)

    @classmethod
    def two_point(cls) -> "AnalyticFamily":
        """``(e^lambda, e^-lambda)`` on two atoms of mass 1/2."""
        return cls.exponential(np.array([1.0, -1.0]), np.array([0.5, 0.5]), growth=1.0)

    @classmethod
    def from_field(cls, f: GridField, domain: str = "halfplane", region: str = "disk") -> "AnalyticFamily":
        """``exp(lambda h)`` for ``h`` read from a grid field, normalized area measure."""
        spec = f.spec
        w = spec.disk_weights.ravel() if region == "disk" else np.ones(spec.N * spec.N)
        live = w > 0
        w = w[live] / w[live].sum()
        fam = cls.exponential(f.values.ravel()[live], w, domain)
        fam.label = f"exp(lam h) from field N={spec.N}"
        return fam

    @classmethod
    def beltrami(cls, mu: BeltramiCoefficient, p: float, tol: float = 1e-9, scheme: str = "cell",
                 grid_tolerance: bool = True) -> "AnalyticFamily":
        """Disk family ``Phi_lambda = F^lambda_z (1 + tau_lambda)`` on the unit disk.

        The measure is ``(1/pi)(1 - p|mu|/(1+|mu|)) dz``. With
        ``grid_tolerance`` the tolerance is twice the change of
        ``||Phi_lambda0||_p`` and ``||Phi_lambda0||_2`` under grid halving
        (plus ``1e-9``).
        """
        spec = mu.spec
        a = np.abs(mu.values)
        dw = spec.disk_weights
        live = (dw > 0).ravel()
        w = ((1 - p * a / (1 + a)) * dw).ravel()[live] * spec.cell_area / math.pi
        if np.any(w < -1e-15):
            raise DomainError("negative weight: p exceeds 1 + 1/k")
        w = np.clip(w, 0, None)

        def ev(lam, mu=mu):
            return phi_field(mu, p, lam, tol, scheme).values.ravel()[live]

        fam = cls(ev, w, "disk", True, 0.0, f"beltrami({mu.label}, p={p})",
                  meta={"N": spec.N, "L": spec.L, "p": p, "k": mu.k, "scheme": scheme})
        if grid_tolerance:
            lam0 = 1.0 / (p - 1)
            coarse = cls.beltrami(mu.resample(spec.coarser()), p, tol, scheme, grid_tolerance=False)
            d = max(abs(fam.norm(lam0, q) - coarse.norm(lam0, q)) for q in (p, 2.0))
            fam.tolerance = 2 * d + 1e-9
            fam.meta["grid_tolerance"] = fam.tolerance
        return fam

    def to_halfplane(self) -> "AnalyticFamily":
        """Disk family recast on the half-plane by ``w = (1 - lambda)/(1 + lambda)``."""
        if self.domain == "halfplane":
            return self
        base = self

        def ev(lam):
            w = (1 - lam) / (1 + lam)
            if abs(w) >= 1:
                w = w / abs(w) * (1 - 1e-12)
            return base(w)

        return AnalyticFamily(ev, self.weights, "halfplane", self.nonvanishing, 0.0, f"{self.label}|halfplane",
                              self.points, self.tolerance, dict(self.meta))


def family_norms(fam: AnalyticFamily, p, lambdas: Sequence[complex], weights: Optional[np.ndarray] = None) -> np.ndarray:
    """``||Phi_lambda||_p`` for each ``lambda``; ``weights`` overrides the family measure."""
    if weights is not None:
        fam = AnalyticFamily(fam, weights, fam.domain, fam.nonvanishing, fam.growth, fam.label)
    return np.array([fam.norm(lam, p) for lam in lambdas])


def restrict(fam: AnalyticFamily, lo: float, hi: float, lambdas: Sequence[complex]) -> AnalyticFamily:
    """Restriction to the points where ``lo <= |Phi_lambda| <= hi`` for every sampled ``lambda``."""
    keep = np.ones(fam.weights.size, bool)
    for lam in lambdas:
        v = np.abs(fam(lam))
        keep &= (v >= lo) & (v <= hi)
    if not keep.any():
        raise DomainError("restriction is empty")
    idx = np.flatnonzero(keep)
    return AnalyticFamily(lambda lam: fam(lam)[idx], fam.weights[idx], fam.domain, fam.nonvanishing, fam.growth,
                          f"{fam.label}|[{lo:g},{hi:g}]", None, fam.tolerance,
                          {**fam.meta, "restricted_mass": float(fam.weights[idx].sum())})


# ------------------------------------------------------------------ sup sampling

def _circle(r: float, n: int) -> np.ndarray:
    return r * np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)


def _sampled_sup(fn: Callable[[complex], float], make: Callable[[int], np.ndarray], n0: int = 64,
                 n_max: int = 256, rel: float = 0.01):
    """Sup of ``fn`` over ``make(n)``, doubling ``n`` until it moves less than ``rel``."""
    n = n0
    lams = make(n)
    vals = np.array([fn(l) for l in lams])
    best = vals.max()
    hist = [(n, float(best))]
    while n < n_max:
        n *= 2
        new = make(n)
        extra = np.array([fn(l) for l in new])
        nb = max(best, extra.max())
        hist.append((n, float(nb)))
        done = abs(nb - best) <= rel * abs(best)
        best = nb
        if done:
            break
    return float(best), hist


def check_interpolation_bound(fam: AnalyticFamily, p0, p1, form: Optional[str] = None,
                              t_grid: Sequence[float] = (0.1, 0.25, 0.5, 0.75, 0.9),
                              lambda_sampling: Optional[dict] = None,
                              tolerance: Optional[float] = None) -> InterpolationReport:
    """Compare ``M_t`` with ``M0^(1-s) M1^s`` on ``t_grid``.

    ``lambda_sampling`` keys: ``points`` (per circle or segment, default 64),
    ``radii`` (disk, default ``(0.25, 0.5, 0.75, 0.95)``), ``re`` and
    ``im_max`` (half-plane abscissae and segment half-length), ``max_points``
    (refinement cap, default 256).
    """
    form = form or fam.domain
    if form != fam.domain:
        raise InvalidInput(f"{form} form needs a {form} family")
    ls = {"points": 64, "max_points": 256, "radii": (0.25, 0.5, 0.75, 0.95), "re": (0.0, 0.5, 1.0, 2.0),
          "im_max": 8.0}
    ls.update(lambda_sampling or {})
    n0, nmax = int(ls["points"]), int(ls["max_points"])
    tol = fam.tolerance if tolerance is None else tolerance
    sampling = {"form": form, "points": n0, "max_points": nmax}

    if form == "disk":
        M0 = fam.norm(0.0, p0)
        sups = []
        hist = {}
        for r in ls["radii"]:
            v, h = _sampled_sup(lambda l: fam.norm(l, p1), lambda n, r=r: _circle(r, n), n0, nmax)
            sups.append(v)
            hist[str(r)] = h
        M1 = max(sups)
        sampling.update({"radii": list(ls["radii"]), "M1_refinement": hist})
        Mt, pt, bounds = [], [], []
        for r in t_grid:
            pr = p_interp(p0, p1, r, "disk")
            if r == 0:
                m = M0 if pr == p0 else fam.norm(0.0, pr)
            else:
                m, _ = _sampled_sup(lambda l: fam.norm(l, pr), lambda n, r=r: _circle(r, n), n0, nmax)
            s = float(interp_weight(r, "disk"))
            Mt.append(m)
            pt.append(_pf(pr))
            bounds.append(M0 ** (1 - s) * M1**s)
    else:
        a = fam.growth
        M1 = fam.norm(1.0, p1)
        Y = float(ls["im_max"])
        sups, hist = [], {}
        for x in ls["re"]:
            def seg(n, x=x):
                return x + 1j * np.linspace(-Y, Y, n)

            v, h = _sampled_sup(lambda l: math.exp(-a * l.real) * fam.norm(l, p0), seg, n0, nmax)
            sups.append(v)
            hist[str(x)] = h
        M0 = max(sups)
        sampling.update({"re": list(ls["re"]), "im_max": Y, "M0_refinement": hist,
                         "note": "M0 sampled on a bounded rectangle of the half-plane"})
        Mt, pt, bounds = [], [], []
        for th in t_grid:
            pth = p_interp(p0, p1, th, "halfplane")
            Mt.append(fam.norm(float(th), pth))
            pt.append(_pf(pth))
            bounds.append(M0 ** (1 - float(th)) * M1 ** float(th))
    return InterpolationReport(form, [float(t) for t in t_grid], pt, Mt, bounds, M0, M1, tol, sampling,
                               params={"family": fam.label, "p0": _pf(p0), "p1": _pf(p1), "growth": fam.growth,
                                       **{k: v for k, v in fam.meta.items() if k != "grid_tolerance"}})


# ------------------------------------------------------------ support lines

@dataclass
class SupportLineDiag:
    """Support line of ``1/p -> log ||Phi_theta||_p`` at ``1/p_theta`` and its harmonic extension."""

    theta: float
    p_theta: float
    density: np.ndarray
    density_mass: float
    I: float
    lambdas: List[complex]
    u_inf: List[float]
    ps: List[float]
    envelope_margin: float
    equality_gap: float
    harnack_applicable: bool
    harnack_margin: float
    M0: float
    chain: Dict[str, float]

    def u(self, p, i: int) -> float:
        """``u_p(lambda_i) = I / p + u_inf(lambda_i)``."""
        return (0.0 if p == INF else self.I / p) + self.u_inf[i]

    @property
    def ok(self) -> bool:
        return (abs(self.density_mass - 1) <= 1e-10 and self.envelope_margin >= -1e-10
                and self.equality_gap <= 1e-9 and (not self.harnack_applicable or self.harnack_margin >= -1e-10))

    def record(self) -> dict:
        from .reports import jsonable

        return jsonable({
            "check": "support-line", "theta": self.theta, "p_theta": self.p_theta,
            "density_mass": self.density_mass, "I": self.I, "envelope_margin": self.envelope_margin,
            "equality_gap": self.equality_gap, "harnack_applicable": self.harnack_applicable,
            "harnack_margin": self.harnack_margin, "M0": self.M0, "chain": self.chain,
            "verdict": "pass" if self.ok else "fail",
        })


def support_line(fam: AnalyticFamily, theta: float, p0, p1, lambdas: Optional[Sequence[complex]] = None,
                 ps: Optional[Sequence[float]] = None, bound: float = 1e12) -> SupportLineDiag:
    """Density, slope and intercepts of the proof's support lines (half-plane form).

    The family is normalized to ``e^{-a lambda} Phi_lambda / M0`` with ``M0``
    sampled on ``lambdas``. Disk families are moved to the half-plane first,
    so ``p0`` and ``p1`` refer to half-plane roles.
    """
    if not 0 < theta < 1:
        raise DomainError("theta must lie in (0, 1)")
    h = fam.to_halfplane()
    if lambdas is None:
        xs = (0.0, 0.25, 0.5, 1.0, 2.0)
        lambdas = [x + 1j * y for x in xs for y in np.linspace(-4, 4, 17)] + [theta, 1.0]
    lambdas = [complex(l) for l in lambdas]
    if complex(theta) not in lambdas:
        lambdas.append(complex(theta))
    if 1 + 0j not in lambdas:
        lambdas.append(1 + 0j)
    pth = _pf(p_interp(p0, p1, theta, "halfplane"))
    if pth == INF:
        raise DomainError("p_theta is infinite")
    a = h.growth
    live = h.weights > 0
    w = h.weights[live]
    sig = w.sum()

    def vals(lam):
        v = np.abs(h(lam)[live]) * math.exp(-a * lam.real)
        if np.any(v <= 0) or np.any(v > bound) or np.any(v < 1 / bound):
            raise DomainError(f"family not bounded away from 0 and inf at lambda = {lam}")
        return v

    def lognorm(lam, p, scale=0.0):
        lv = np.log(vals(lam)) - scale
        if p == INF:
            return float(lv.max())
        return float(logsumexp(p * lv + np.log(w))) / p

    logM0 = max(lognorm(l, _pf(p0)) for l in lambdas)
    M0 = math.exp(logM0)

    def lv(lam):
        return np.log(vals(lam)) - logM0

    th = complex(theta)
    phi_t = pth * lv(th)
    logZ = float(logsumexp(phi_t + np.log(w)))
    dens = np.exp(phi_t - logZ)
    mass = float(np.sum(dens * w))
    I = float(np.sum(w * dens * -np.log(dens)))
    u_inf = [float(np.sum(w * dens * lv(l))) for l in lambdas]
    if ps is None:
        ps = sorted({0.5, 1.0, 2.0, pth, 4.0, 8.0, INF} | ({_pf(p0)} if _pf(p0) != INF else set())
                    | ({_pf(p1)} if _pf(p1) != INF else set()))
    env = INF
    for i, l in enumerate(lambdas):
        for p in ps:
            up = (0.0 if p == INF else I / p) + u_inf[i]
            ln = float(lv(l).max()) if p == INF else float(logsumexp(p * lv(l) + np.log(w))) / p
            env = min(env, ln - up)
    it = lambdas.index(th)
    i1 = lambdas.index(1 + 0j)
    eq_gap = abs((I / pth + u_inf[it]) - float(logsumexp(pth * lv(th) + np.log(w))) / pth)
    p0f = _pf(p0)
    u0 = [(0.0 if p0f == INF else I / p0f) + u for u in u_inf]
    applicable = max(u0) <= 1e-12
    harnack = theta * u0[i1] - u0[it]
    p1f = _pf(p1)
    u_p1_1 = (0.0 if p1f == INF else I / p1f) + u_inf[i1]
    logM1 = lognorm(1 + 0j, p1f, logM0)
    chain = {"log_M_theta": float(logsumexp(pth * lv(th) + np.log(w))) / pth, "theta_u_p1_at_1": theta * u_p1_1,
             "theta_log_M1": theta * logM1, "sigma": float(sig)}
    return SupportLineDiag(float(theta), pth, dens, mass, I, lambdas, u_inf, list(ps), env, eq_gap, applicable,
                           float(harnack), M0, chain)


# ------------------------------------------------------------ counterexample

@dataclass
class CounterexampleReport:
    theta: float
    p_theta: float
    truncations: List[float]
    M_theta: List[float]
    M0: float
    M1: float
    bound: float
    growth: float
    regularized: Dict[str, float]
    eps_variant: List[Dict[str, float]]

    def record(self) -> dict:
        from .reports import jsonable

        return jsonable({"check": "counterexample", **{k: getattr(self, k) for k in self.__dataclass_fields__}})


def _default_log_g(s):
    # log g(e^{-s}) for the default g, safe far past the float range of x
    return s - 2.0 * math.log(s)


def _trunc_norm(log_g, p: float, delta: float, upper: float = 0.5) -> float:
    # (int_delta^upper |g|^p dx)^(1/p) with x = e^{-s}, integrand kept in log form;
    # delta = 0 runs to s = inf
    s0, s1 = -math.log(upper), (-math.log(delta) if delta > 0 else math.inf)
    val, _ = integrate.quad(lambda s: math.exp(p * log_g(s) - s), s0, s1, limit=400,
                            epsabs=0, epsrel=1e-10)
    return val ** (1 / p)


def counterexample_demo(g: Optional[Callable] = None, theta: float = 0.5, p0=1, p1=INF,
                        truncations: Sequence[float] = (1e-2, 1e-4, 1e-6, 1e-8),
                        eps: Sequence[float] = (1e-1, 1e-2)) -> CounterexampleReport:
    """Vanishing family ``((1 - lambda)/(1 + lambda)) g`` on ``(0, 1/2)``.

    ``M1 = ||f_1||_inf = 0`` while ``M_theta`` grows without bound as the
    truncation ``(delta, 1/2)`` shrinks. For comparison the non-vanishing
    family ``g^((1 - lambda)/(1 + lambda))`` obeys the bound, and the shifted
    family ``((1-lambda)/(1+lambda)) g + eps`` (which still vanishes somewhere
    on the half-plane when ``g > eps``) does not.
    """
    if g is None:
        lg = _default_log_g
    else:
        lg = lambda s, g=g: math.log(abs(g(math.exp(-s))))  # noqa: E731
    pth = _pf(p_interp(p0, p1, theta, "halfplane"))
    c = abs((1 - theta) / (1 + theta))
    M0 = _trunc_norm(lg, float(p0), 0.0) if p0 != INF else INF
    Mt = [c * _trunc_norm(lg, pth, d) for d in truncations]
    M1 = 0.0
    bound = M0 ** (1 - theta) * M1**theta
    w = (1 - theta) / (1 + theta)
    # g^w: M1 = ||1||_inf = 1, M0 = sup_{Re w' in (-1,1)} ||g^w'||_1 = ||g||_1 when g >= 1
    reg_Mt = _trunc_norm(lambda s: w * lg(s), pth, 0.0)
    reg = {"M_theta": reg_Mt, "M0": M0, "M1": 1.0, "bound": M0 ** (1 - theta)}
    epsrows = []
    for e in eps:
        mt = _trunc_norm(lambda s, e=e: float(np.logaddexp(math.log(c) + lg(s), math.log(e))), pth,
                         truncations[-1])
        m1 = e
        m0 = M0 + e * 0.5
        epsrows.append({"eps": e, "M_theta_truncated": mt, "bound": m0 ** (1 - theta) * m1**theta})
    return CounterexampleReport(float(theta), pth, list(truncations), Mt, M0, M1, bound, Mt[-1] / Mt[0], reg, epsrows)
