"""Spectral Beltrami solver on a periodized square.

Grids are cell centered on ``[-L, L]^2`` with ``values[iy, ix]`` at
``x = -L + (ix + 1/2) h``. With the complex frequency ``zeta = k_x + i k_y``
the operators are Fourier multipliers:

* ``dbar``  ->  ``(i/2) zeta``
* Beurling ``S`` -> ``conj(zeta) / zeta`` (0 at ``zeta = 0``)
* Cauchy ``dbar^-1`` -> ``-2i / zeta`` (0 at ``zeta = 0``)

The sign is fixed by ``S chi_D = -1/z^2`` outside the disk.

Two discretizations of ``S`` are offered. ``"point"`` applies the multiplier
to point samples and is an exact isometry modulo the mean. ``"cell"`` treats
grid values as cell averages of a piecewise constant function and applies
the alias-summed symbol ``sum_m m(xi_m) sinc^2``; it is the solver default
because it keeps first-order accuracy near the ``t^(-1/2)``-type
singularities of radial coefficients, where point sampling loses half an order.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import fft

from .errors import DistortionBound, DomainError, InvalidInput, NonConvergence
from .functionals import PlanarDeriv
from .quadrature import disk_cell_fraction

__all__ = [
    "GridSpec",
    "GridField",
    "BeltramiCoefficient",
    "PrincipalSolution",
    "FamilyParams",
    "JacobianWarning",
    "beurling",
    "cauchy",
    "dbar",
    "dz",
    "solve_principal",
    "deform_family",
    "phi_field",
    "area_integral",
    "disk_integral",
]


class JacobianWarning(UserWarning):
    """Non-positive Jacobian at some grid cells."""


@dataclass(frozen=True)
class GridSpec:
    """``N x N`` cells on ``[-L, L]^2``; ``N`` a power of two, ``L >= 2``."""

    N: int
    L: float = 4.0

    def __post_init__(self):
        N = int(self.N)
        if N < 64 or N & (N - 1):
            raise InvalidInput(f"N must be a power of two >= 64, got {self.N}")
        if not self.L - 1 >= 1:
            raise InvalidInput("need L - 1 >= 1 so the unit disk has a margin")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return 2 * self.L / self.N

    @property
    def cell_area(self) -> float:
        return self.h**2

    @cached_property
    def x(self) -> np.ndarray:
        return -self.L + (np.arange(self.N) + 0.5) * self.h

    @cached_property
    def z(self) -> np.ndarray:
        X, Y = np.meshgrid(self.x, self.x)
        return X + 1j * Y

    @cached_property
    def zeta(self) -> np.ndarray:
        k = 2 * np.pi * fft.fftfreq(self.N, d=self.h)
        KX, KY = np.meshgrid(k, k)
        return KX + 1j * KY

    @cached_property
    def disk_weights(self) -> np.ndarray:
        """Exact fraction of each cell inside the unit disk."""
        X, Y = np.meshgrid(self.x, self.x)
        return disk_cell_fraction(X, Y, self.h)

    def coarser(self) -> "GridSpec":
        return GridSpec(self.N // 2, self.L)

    def finer(self) -> "GridSpec":
        return GridSpec(self.N * 2, self.L)


@dataclass(frozen=True, eq=False)
class GridField:
    """Complex cell values on a :class:`GridSpec`."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, complex)
        if v.shape != (self.spec.N, self.spec.N):
            raise InvalidInput(f"field shape {v.shape} does not match N={self.spec.N}")
        if not np.all(np.isfinite(v)):
            raise InvalidInput("non-finite field values")
        object.__setattr__(self, "values", v)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.spec.cell_area))

    def mean(self) -> complex:
        return complex(np.mean(self.values))

    def integral(self) -> complex:
        return complex(np.sum(self.values) * self.spec.cell_area)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def _like(self, v):
        return GridField(self.spec, v)

    def __add__(self, other):
        return self._like(self.values + np.asarray(other))

    def __sub__(self, other):
        return self._like(self.values - np.asarray(other))

    def __mul__(self, other):
        return self._like(self.values * np.asarray(other))

    __rmul__ = __mul__

    def coarsen(self) -> "GridField":
        """2x2 block averages (exact for cell averages)."""
        v = self.values
        n = v.shape[0] // 2
        return GridField(self.spec.coarser(), v.reshape(n, 2, n, 2).mean(axis=(1, 3)))

    def refine(self) -> "GridField":
        """Piecewise constant refinement by 2."""
        return GridField(self.spec.finer(), np.repeat(np.repeat(self.values, 2, axis=0), 2, axis=1))


def _as_field(w) -> GridField:
    if not isinstance(w, GridField):
        raise InvalidInput("expected a GridField")
    return w


def _point_symbol(spec: GridSpec) -> np.ndarray:
    zeta = spec.zeta
    with np.errstate(invalid="ignore", divide="ignore"):
        m = np.conj(zeta) / zeta
    m[0, 0] = 0
    return m


@lru_cache(maxsize=8)
def _cell_symbol(N: int, L: float, M: int) -> np.ndarray:
    spec = GridSpec(N, L)
    h = spec.h
    k = 2 * np.pi * fft.fftfreq(N, d=h)
    out = np.zeros((N, N), complex)
    for mx in range(-M, M + 1):
        kx = k + 2 * np.pi * mx / h
        sx = np.sinc(kx * h / (2 * np.pi)) ** 2
        for my in range(-M, M + 1):
            ky = k + 2 * np.pi * my / h
            sy = np.sinc(ky * h / (2 * np.pi)) ** 2
            zeta = kx[None, :] + 1j * ky[:, None]
            with np.errstate(invalid="ignore", divide="ignore"):
                m = np.conj(zeta) / zeta
            m[zeta == 0] = 0
            out += m * (sy[:, None] * sx[None, :])
    out.flags.writeable = False
    return out


def _symbol(spec: GridSpec, scheme: str, M: int = 1) -> np.ndarray:
    if scheme == "point":
        return _point_symbol(spec)
    if scheme == "cell":
        return _cell_symbol(spec.N, spec.L, M)
    raise InvalidInput(f"unknown scheme {scheme!r}")


def beurling(w: GridField, scheme: str = "point", M: int = 1) -> GridField:
    """Discrete Beurling transform.

    The default ``"point"`` scheme satisfies
    ``|Sw|^2 = |w|^2 - |mean w|^2 (2L)^2`` to round-off. ``"cell"`` uses the
    cell-averaged symbol with ``|m| <= M`` aliases; its modulus is at most 1.
    """
    w = _as_field(w)
    sym = _symbol(w.spec, scheme, M)
    return GridField(w.spec, fft.ifft2(sym * fft.fft2(w.values)))


def cauchy(w: GridField) -> GridField:
    """Mean-zero periodic solution ``h`` of ``dbar h = w - mean(w)``."""
    w = _as_field(w)
    zeta = w.spec.zeta
    with np.errstate(invalid="ignore", divide="ignore"):
        m = -2j / zeta
    m[0, 0] = 0
    return GridField(w.spec, fft.ifft2(m * fft.fft2(w.values)))


def _deriv(w: GridField, conj: bool) -> GridField:
    zeta = w.spec.zeta
    m = 0.5j * (np.conj(zeta) if conj else zeta)
    return GridField(w.spec, fft.ifft2(m * fft.fft2(w.values)))


def dbar(w: GridField) -> GridField:
    """Spectral ``d/dzbar``."""
    return _deriv(_as_field(w), conj=False)


def dz(w: GridField) -> GridField:
    """Spectral ``d/dz``."""
    return _deriv(_as_field(w), conj=True)


def _cell_average(spec: GridSpec, func: Callable, support_radius: float, sub: int) -> np.ndarray:
    """Cell averages of ``func * chi_{B(0, support_radius)}``.

    Only cells meeting the support are evaluated; cells cut by the circle use
    the exact overlap area times the mean over interior sub-points.
    """
    h = spec.h
    X, Y = np.meshgrid(spec.x, spec.x)
    frac = disk_cell_fraction(X, Y, h, support_radius)
    out = np.zeros((spec.N, spec.N), complex)
    idx = np.nonzero(frac > 0)
    zc = X[idx] + 1j * Y[idx]
    offs = (np.arange(sub) + 0.5) / sub - 0.5
    ox, oy = np.meshgrid(offs * h, offs * h)
    acc = np.zeros(zc.shape, complex)
    cnt = np.zeros(zc.shape)
    for d in (ox + 1j * oy).ravel():
        zs = zc + d
        inside = np.abs(zs) < support_radius
        vals = np.zeros(zs.shape, complex)
        if np.any(inside):
            vals[inside] = np.asarray(func(zs[inside]), complex)
        acc += vals
        cnt += inside
    with np.errstate(invalid="ignore"):
        mean_in = np.where(cnt > 0, acc / np.maximum(cnt, 1), 0)
    out[idx] = mean_in * frac[idx]
    return out


@dataclass(frozen=True, eq=False)
class BeltramiCoefficient:
    """Cell-averaged coefficient ``mu`` supported in ``B(0, support_radius)``.

    ``source`` (optional) is the pointwise function the field was sampled
    from, used to resample on other grids; ``k`` is ``max |mu|``.
    """

    field: GridField
    support_radius: float = 1.0
    source: Optional[Callable] = None
    label: str = "field"
    sub: int = 6
    k: float = field(init=False)

    def __post_init__(self):
        v = self.field.values
        k = float(np.max(np.abs(v))) if v.size else 0.0
        if k >= 1:
            raise DistortionBound(f"|mu| reaches {k:.6g} >= 1")
        if self.support_radius > 1 + 1e-12 or self.support_radius <= 0:
            raise InvalidInput("support radius must lie in (0, 1]")
        spec = self.field.spec
        X, Y = np.meshgrid(spec.x, spec.x)
        outside = disk_cell_fraction(X, Y, spec.h, self.support_radius) == 0
        if np.any(np.abs(v[outside]) > 1e-14):
            raise InvalidInput("mu does not vanish outside its support disk")
        object.__setattr__(self, "k", k)

    @property
    def spec(self) -> GridSpec:
        return self.field.spec

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    @property
    def K(self) -> float:
        return (1 + self.k) / (1 - self.k)

    # --- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, spec: GridSpec):
        return cls(GridField(spec, np.zeros((spec.N, spec.N))), source=lambda z: np.zeros(np.shape(z)),
                   label="zero")

    @classmethod
    def from_function(cls, spec: GridSpec, func: Callable, support_radius: float = 1.0, sub: int = 6,
                      label: str = "function"):
        """Cell averages of ``func`` restricted to the support disk."""
        vals = _cell_average(spec, func, support_radius, sub)
        return cls(GridField(spec, vals), support_radius, func, label, sub)

    @classmethod
    def constant(cls, spec: GridSpec, k: float, phase: complex = 1.0):
        """``mu = k * phase * chi_D``."""
        c = complex(k * phase)
        return cls.from_function(spec, lambda z: np.full(np.shape(z), c), label=f"const:k={k}")

    @classmethod
    def radial(cls, spec: GridSpec, alpha, sub: int = 6):
        """``mu(z) = -(z/zbar) alpha(|z|)`` from a :class:`~qcburk.radial.RadialCoefficient`."""
        return cls.from_function(spec, alpha.mu, sub=sub, label=f"radial:{alpha.name}")

    @classmethod
    def random(cls, spec: GridSpec, k: float, rng: np.random.Generator, degree: int = 3, sub: int = 4):
        """Smooth random coefficient on ``D`` with ``max |mu| = k`` exactly (before averaging).

        A random complex trigonometric polynomial of the given degree,
        normalized by its maximum over a fine sample of the disk.
        """
        if not 0 <= k < 1:
            raise DistortionBound("need 0 <= k < 1")
        n = 2 * degree + 1
        coef = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / (1 + np.add.outer(
            np.abs(np.arange(-degree, degree + 1)), np.abs(np.arange(-degree, degree + 1))))
        freqs = np.pi * np.arange(-degree, degree + 1) / 2

        def raw(z):
            z = np.asarray(z, complex)
            ex = np.exp(1j * np.multiply.outer(z.real, freqs))
            ey = np.exp(1j * np.multiply.outer(z.imag, freqs))
            return np.einsum("...i,...j,ji->...", ex, ey, coef)

        r = np.sqrt(np.linspace(0, 1, 400))[:, None]
        th = np.linspace(0, 2 * np.pi, 400, endpoint=False)[None, :]
        peak = float(np.max(np.abs(raw(r * np.exp(1j * th)))))
        scale = k / peak

        def func(z):
            return _clip(raw(z) * scale, k)

        return cls.from_function(spec, func, sub=sub, label=f"random:k={k}")

    def resample(self, spec: GridSpec) -> "BeltramiCoefficient":
        """Same coefficient on another grid (re-averaged from ``source`` if known)."""
        if spec == self.spec:
            return self
        if self.source is not None:
            return BeltramiCoefficient.from_function(spec, self.source, self.support_radius, self.sub, self.label)
        if spec.L == self.spec.L and spec.N * 2 == self.spec.N:
            return BeltramiCoefficient(self.field.coarsen(), self.support_radius, None, self.label, self.sub)
        if spec.L == self.spec.L and spec.N == self.spec.N * 2:
            return BeltramiCoefficient(self.field.refine(), self.support_radius, None, self.label, self.sub)
        raise InvalidInput("cannot resample a coefficient without a source function")

    def mollify(self, cells: float = 4.0) -> "BeltramiCoefficient":
        """Convolution with a C-infinity bump of radius ``cells * h``.

        The field is first cut to ``B(0, 1 - cells h)`` so the support stays in
        the unit disk; ``|mu|`` does not increase.
        """
        spec = self.spec
        eps = cells * spec.h
        cut = self.values * (np.abs(spec.z) < self.support_radius - eps)
        # kernel on signed index offsets, so the convolution is centered
        d = (np.arange(spec.N) + spec.N // 2) % spec.N - spec.N // 2
        D = np.hypot(*np.meshgrid(d, d)) * spec.h
        s = (D / eps) ** 2
        with np.errstate(divide="ignore", over="ignore"):
            bump = np.where(s < 1, np.exp(-1 / np.maximum(1 - s, 1e-300)), 0.0)
        bump /= bump.sum()
        vals = fft.ifft2(fft.fft2(cut) * fft.fft2(bump))
        vals[np.abs(vals) < 1e-15] = 0
        X, Y = np.meshgrid(spec.x, spec.x)
        vals[disk_cell_fraction(X, Y, spec.h, self.support_radius) == 0] = 0
        return BeltramiCoefficient(GridField(spec, vals), self.support_radius, None, self.label + "+mollified",
                                   self.sub)


def _clip(v, k):
    a = np.abs(v)
    return np.where(a > k, v * (k / np.maximum(a, 1e-300)), v)


@dataclass(frozen=True, eq=False)
class PrincipalSolution:
    """Converged state of the Neumann iteration for ``omega = mu S omega + mu``.

    ``f_zbar = omega`` and ``f_z = 1 + S omega``; ``b[n-1]`` is the ``n``-th
    Laurent coefficient ``(1/pi) int zeta^(n-1) omega``.
    """

    mu: BeltramiCoefficient
    omega: GridField
    s_omega: GridField
    residual: float
    iterations: int
    b: tuple
    history: tuple
    scheme: str
    tol: float
    M: int = 1
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def spec(self) -> GridSpec:
        return self.omega.spec

    @property
    def fz(self) -> np.ndarray:
        return 1 + self.s_omega.values

    @property
    def fzbar(self) -> np.ndarray:
        return self.omega.values

    def deriv(self) -> PlanarDeriv:
        return PlanarDeriv(self.fz, self.fzbar)

    def jacobian(self) -> np.ndarray:
        return np.abs(self.fz) ** 2 - np.abs(self.fzbar) ** 2

    def bad_cells(self) -> np.ndarray:
        """Indices ``(iy, ix)`` of cells inside the support with ``J <= 0``."""
        inside = self.spec.disk_weights > 0
        return np.argwhere(inside & (self.jacobian() <= 0))

    def map_values(self) -> GridField:
        """``f(z) = z + C omega`` in the mean-zero gauge of the periodic Cauchy transform."""
        return GridField(self.spec, self.spec.z + cauchy(self.omega).values)

    @property
    def b1(self) -> complex:
        return self.b[0]

    def coarse(self) -> "PrincipalSolution":
        """Solution of the same coefficient on the grid with half (or, at N = 64, double) the resolution."""
        if "coarse" not in self._cache:
            spec = self.spec.coarser() if self.spec.N >= 128 else self.spec.finer()
            mu2 = self.mu.resample(spec)
            self._cache["coarse"] = solve_principal(mu2, self.tol, scheme=self.scheme, M=self.M)
        return self._cache["coarse"]


def _moments(omega: GridField, count: int) -> tuple:
    z = omega.spec.z
    w = omega.values * omega.spec.cell_area / np.pi
    out = []
    zp = np.ones_like(z)
    for _ in range(count):
        out.append(complex(np.sum(zp * w)))
        zp = zp * z
    return tuple(out)


def solve_principal(mu: BeltramiCoefficient, tol: float = 1e-10, max_iter: Optional[int] = None,
                    scheme: str = "cell", M: int = 1, n_moments: int = 3, margin: int = 25) -> PrincipalSolution:
    """Principal solution by Neumann iteration from ``omega_0 = mu``.

    Stops when ``|omega - mu S omega - mu|_2 <= tol``. The default cap is the
    contraction estimate ``ceil(log(tol (1-k) / |mu|_2) / log k) + margin``;
    exceeding it raises :class:`NonConvergence` with the residual history.
    Non-positive Jacobians inside the support raise a :class:`JacobianWarning`.
    """
    if not isinstance(mu, BeltramiCoefficient):
        raise InvalidInput("mu must be a BeltramiCoefficient")
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    k = mu.k
    if k >= 1:
        raise DistortionBound("k >= 1")
    spec = mu.spec
    mvals = mu.values
    norm_mu = mu.field.l2_norm()
    if norm_mu == 0:
        zero = GridField(spec, np.zeros((spec.N, spec.N)))
        return PrincipalSolution(mu, zero, zero, 0.0, 0, (0j,) * n_moments, (0.0,), scheme, tol, M)
    if max_iter is None:
        if k == 0 or tol * (1 - k) >= norm_mu:
            max_iter = margin
        else:
            max_iter = int(math.ceil(math.log(tol * (1 - k) / norm_mu) / math.log(k))) + margin
    sym = _symbol(spec, scheme, M)
    dA = spec.cell_area
    omega = mvals.copy()
    history = []
    it = 0
    while True:
        s = fft.ifft2(sym * fft.fft2(omega))
        nxt = mvals * s + mvals
        res = float(np.sqrt(np.sum(np.abs(omega - nxt) ** 2) * dA))
        history.append(res)
        if res <= tol:
            break
        if it >= max_iter:
            raise NonConvergence(f"residual {res:.3e} after {it} iterations (tol {tol:.1e})", history)
        omega = nxt
        it += 1
    om = GridField(spec, omega)
    sol = PrincipalSolution(mu, om, GridField(spec, s), res, it, _moments(om, n_moments), tuple(history),
                            scheme, tol, M)
    bad = sol.bad_cells()
    if len(bad):
        warnings.warn(f"J <= 0 at {len(bad)} cells, e.g. {bad[:3].tolist()}", JacobianWarning, stacklevel=2)
    return sol


@dataclass(frozen=True)
class FamilyParams:
    """Deformation data: ``p``, ``lambda`` and ``lambda_naught = 1 / (p - 1)``."""

    p: float
    lam: complex

    @property
    def lambda_naught(self) -> float:
        return 1.0 / (self.p - 1)

    def check(self, k: float):
        if not 2 - 1e-12 <= self.p <= (1 + 1 / k if k > 0 else math.inf) + 1e-12:
            raise DomainError(f"p = {self.p} outside [2, 1 + 1/k] for k = {k}")
        if abs(self.lam) >= 1:
            raise DomainError("|lambda| must be < 1")


def _tau_ratio(a, p, lam):
    # tau / (1 + tau) = p a/(1+a) * lam/(1+lam); returns (numerator, denominator) of mu_lambda / phase
    return p * lam * a, (1 + lam) * (1 + a) - p * lam * a


def deform_family(mu: BeltramiCoefficient, p: float, lam: complex) -> BeltramiCoefficient:
    """``mu_lambda = p lam mu / ((1 + lam)(1 + |mu|) - p lam |mu|)``.

    Satisfies ``|mu_lambda| <= |lam|``, vanishes at ``lam = 0`` and equals
    ``mu`` at ``lam = 1/(p-1)``.
    """
    FamilyParams(float(p), complex(lam)).check(mu.k)
    m = mu.values
    a = np.abs(m)
    num, den = _tau_ratio(a, p, complex(lam))
    vals = np.where(a > 0, num / den * np.where(a > 0, m / np.where(a > 0, a, 1), 0), 0)
    src = None
    if mu.source is not None:
        base = mu.source

        def src(z, base=base):
            mz = np.asarray(base(z), complex)
            az = np.abs(mz)
            n, d = _tau_ratio(az, p, complex(lam))
            return np.where(az > 0, n / d * np.where(az > 0, mz / np.where(az > 0, az, 1), 0), 0)

    return BeltramiCoefficient(GridField(mu.spec, vals), mu.support_radius, src, f"{mu.label}|lam={lam}", mu.sub)


def phi_field(mu: BeltramiCoefficient, p: float, lam: complex, tol: float = 1e-10, scheme: str = "cell",
              return_solution: bool = False):
    """Non-vanishing family ``Phi_lambda = F^lambda_z (1 + tau_lambda)``.

    ``1 + tau = (1 + lam)(1 + |mu|) / ((1 + lam)(1 + |mu|) - p lam |mu|)``.
    """
    lam = complex(lam)
    mul = deform_family(mu, p, lam)
    sol = solve_principal(mul, tol, scheme=scheme)
    a = np.abs(mu.values)
    one_tau = (1 + lam) * (1 + a) / ((1 + lam) * (1 + a) - p * lam * a)
    phi = GridField(mu.spec, sol.fz * one_tau)
    return (phi, sol) if return_solution else phi


def disk_integral(values: np.ndarray, spec: GridSpec) -> float:
    """Cell quadrature over the unit disk with exact boundary weights."""
    return float(np.real(np.sum(values * spec.disk_weights)) * spec.cell_area)


def area_integral(sol: PrincipalSolution) -> float:
    """``int_D J(z, f) dz``; at most ``pi`` (up to grid error) for principal maps."""
    return disk_integral(sol.jacobian(), sol.spec)
