"""Pointwise Burkholder-type functionals and rank-one line probes.

All functionals act on derivative data in one of two forms:

* a :class:`PlanarDeriv` holding the complex pair ``(f_z, f_zbar)``, or
* real matrices of shape ``(..., n, n)``; for ``n == 2`` the row layout is
  ``[[u_x, u_y], [v_x, v_y]]`` for ``f = u + i v``.

``|A|`` always means the operator norm (largest singular value), never the
Frobenius norm.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DomainError, InvalidInput

__all__ = [
    "PlanarDeriv",
    "Functional",
    "ProbeReport",
    "operator_norm",
    "burkholder_p",
    "burkholder",
    "burkholder_nd",
    "burkholder_nd_functional",
    "determinant",
    "inverse_functional",
    "inverse",
    "rank_one_probe",
    "random_rank_one",
    "burkholder_constant",
    "burkholder_lower_bound",
    "derived_functionals",
]


@dataclass(frozen=True)
class PlanarDeriv:
    """Complex derivative pair ``(f_z, f_zbar)``; scalars or equally shaped arrays."""

    dz: np.ndarray
    dzbar: np.ndarray

    def __post_init__(self):
        dz = np.asarray(self.dz, dtype=complex)
        dzbar = np.asarray(self.dzbar, dtype=complex)
        if not (np.all(np.isfinite(dz)) and np.all(np.isfinite(dzbar))):
            raise InvalidInput("non-finite derivative data")
        dz, dzbar = np.broadcast_arrays(dz, dzbar)
        object.__setattr__(self, "dz", dz)
        object.__setattr__(self, "dzbar", dzbar)

    @property
    def opnorm(self):
        return np.abs(self.dz) + np.abs(self.dzbar)

    @property
    def jac(self):
        return np.abs(self.dz) ** 2 - np.abs(self.dzbar) ** 2

    @property
    def distortion(self):
        """``|Df|^2 / J``; ``nan`` where the Jacobian is not positive."""
        jac = self.jac
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(jac > 0, self.opnorm**2 / np.where(jac > 0, jac, 1.0), np.nan)

    @property
    def mu(self):
        """Beltrami coefficient ``f_zbar / f_z`` (0 where ``f_z = 0``)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.dz != 0, self.dzbar / np.where(self.dz != 0, self.dz, 1), 0)

    def __mul__(self, t):
        return PlanarDeriv(self.dz * t, self.dzbar * t)

    __rmul__ = __mul__

    @classmethod
    def from_matrix(cls, A) -> "PlanarDeriv":
        A = _as_matrix(A)
        if A.shape[-1] != 2:
            raise InvalidInput("complex form needs 2x2 matrices")
        fx = A[..., 0, 0] + 1j * A[..., 1, 0]
        fy = A[..., 0, 1] + 1j * A[..., 1, 1]
        return cls(0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy))

    def to_matrix(self) -> np.ndarray:
        fx = self.dz + self.dzbar
        fy = 1j * (self.dz - self.dzbar)
        A = np.empty(self.dz.shape + (2, 2))
        A[..., 0, 0] = fx.real
        A[..., 1, 0] = fx.imag
        A[..., 0, 1] = fy.real
        A[..., 1, 1] = fy.imag
        return A


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise InvalidInput(f"expected square matrices, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInput("non-finite matrix entries")
    return A


def _as_deriv(d) -> PlanarDeriv:
    if isinstance(d, PlanarDeriv):
        return d
    return PlanarDeriv.from_matrix(d)


def operator_norm(A) -> np.ndarray:
    """Largest singular value ``max_{|xi|=1} |A xi|`` of each matrix in ``A``.

    Computed from the top eigenvalue of the symmetric matrix ``A^T A``.
    """
    A = _as_matrix(A)
    gram = np.swapaxes(A, -1, -2) @ A
    top = np.linalg.eigvalsh(gram)[..., -1]
    return np.sqrt(np.clip(top, 0.0, None))


def burkholder_p(d, p: float):
    r"""Burkholder functional ``B_p`` for any real exponent.

    For ``p >= 1``

    .. math:: B_p = (|f_z| - (p-1)|f_{\bar z}|)(|f_z| + |f_{\bar z}|)^{p-1},

    and for ``p <= 1`` (only where ``J > 0``)

    .. math:: B_p = (|f_z| + (p-1)|f_{\bar z}|)(|f_z| - |f_{\bar z}|)^{p-1}.

    The two branches agree at ``p = 1``. ``B_p(Id) = 1`` and ``B_p`` is
    homogeneous of degree ``p``.

    Parameters
    ----------
    d : PlanarDeriv or array_like (..., 2, 2)
        Derivative data.
    p : float
        Exponent.

    Returns
    -------
    ndarray or float

    Raises
    ------
    DomainError
        ``p < 1`` with a non-positive Jacobian, or ``p <= 0`` at ``d = 0``.
    """
    d = _as_deriv(d)
    p = float(p)
    if not np.isfinite(p):
        raise InvalidInput("exponent must be finite")
    a = np.abs(d.dz)
    b = np.abs(d.dzbar)
    zero = (a == 0) & (b == 0)
    if p <= 0 and np.any(zero):
        raise DomainError("B_p undefined at the zero matrix for p <= 0")
    if p >= 1:
        out = (a - (p - 1) * b) * (a + b) ** (p - 1)
    else:
        if np.any(~zero & (a <= b)):
            raise DomainError("B_p for p < 1 is defined only where det A > 0")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (a + (p - 1) * b) * (a - b) ** (p - 1)
        out = np.where(zero, 0.0, out)
    return out[()] if out.ndim == 0 else out


def _burkholder_magnitude(d: PlanarDeriv, p: float):
    a = np.abs(d.dz)
    b = np.abs(d.dzbar)
    if p >= 1:
        return (a + abs(p - 1) * b) * (a + b) ** (p - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (a + abs(p - 1) * b) * np.abs(a - b) ** (p - 1)


@dataclass(frozen=True)
class Functional:
    """A matrix functional ``E`` acting on ``(..., n, n)`` arrays.

    ``positive_det`` marks functionals defined only on ``det A > 0``;
    ``magnitude`` returns a term-wise absolute size used to scale
    round-off tolerances.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    positive_det: bool = False
    magnitude: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, A):
        return self.fn(_as_matrix(A))

    def size(self, A):
        A = _as_matrix(A)
        if self.magnitude is None:
            return np.abs(self.fn(A))
        return self.magnitude(A)


def burkholder(p: float) -> Functional:
    """``B_p`` as a matrix functional (``2 x 2``)."""
    p = float(p)
    return Functional(
        name=f"B_{p:g}",
        fn=lambda A: burkholder_p(PlanarDeriv.from_matrix(A), p),
        positive_det=p < 1,
        magnitude=lambda A: _burkholder_magnitude(PlanarDeriv.from_matrix(A), p),
    )


def burkholder_nd(A, p: float):
    """n-dimensional Burkholder functional ``((p/n) det A + (1 - p/n)|A|^n) |A|^(p-n)``, ``p >= n``."""
    A = _as_matrix(A)
    n = A.shape[-1]
    if n < 2:
        raise InvalidInput("dimension must be at least 2")
    if p < n:
        raise DomainError(f"B_p^n needs p >= n (got p={p}, n={n})")
    norm = operator_norm(A)
    det = np.linalg.det(A)
    out = ((p / n) * det + (1 - p / n) * norm**n) * norm ** (p - n)
    return out[()] if np.ndim(out) == 0 else out


def burkholder_nd_functional(p: float, n: int) -> Functional:
    def magnitude(A):
        norm = operator_norm(A)
        return ((p / n) * np.abs(np.linalg.det(A)) + abs(1 - p / n) * norm**n) * norm ** (p - n)

    if p < n:
        raise DomainError(f"B_p^n needs p >= n (got p={p}, n={n})")
    return Functional(f"B_{p:g}^{n}", lambda A: burkholder_nd(A, p), False, magnitude)


def determinant() -> Functional:
    def magnitude(A):
        if A.shape[-1] == 2:
            return np.abs(A[..., 0, 0] * A[..., 1, 1]) + np.abs(A[..., 0, 1] * A[..., 1, 0])
        return np.prod(np.linalg.svd(A, compute_uv=False), axis=-1)

    return Functional("det", np.linalg.det, False, magnitude)


def _inv(A: np.ndarray, det) -> np.ndarray:
    # planar case via the adjugate: exact up to the final division
    if A.shape[-1] != 2:
        return np.linalg.inv(A)
    adj = np.empty_like(A)
    adj[..., 0, 0], adj[..., 1, 1] = A[..., 1, 1], A[..., 0, 0]
    adj[..., 0, 1], adj[..., 1, 0] = -A[..., 0, 1], -A[..., 1, 0]
    return adj / np.asarray(det)[..., None, None]


def inverse_functional(E: Functional, A):
    """``E(A^-1) det A`` for ``det A > 0``.

    For the Burkholder family this realizes ``B_p -> B_{2-p}``.
    """
    A = _as_matrix(A)
    det = np.linalg.det(A)
    if np.any(det <= 0):
        raise DomainError("inverse functional needs det A > 0")
    out = E(_inv(A, det)) * det
    return out[()] if np.ndim(out) == 0 else out


def inverse(E: Functional) -> Functional:
    """Wrap :func:`inverse_functional` as a :class:`Functional` on ``det > 0``."""

    def magnitude(A):
        det = np.linalg.det(A)
        return E.size(_inv(A, det)) * np.abs(det)

    return Functional(f"inv({E.name})", lambda A: inverse_functional(E, A), True, magnitude)


class ProbeReport(NamedTuple):
    t: np.ndarray
    second_diff: np.ndarray
    scale: np.ndarray
    step: float
    clipped: Optional[tuple]  # or an (m, 2) array for batched probes

    @property
    def max_second_difference(self) -> float:
        return float(np.max(self.second_diff))

    @property
    def min_second_difference(self) -> float:
        return float(np.min(self.second_diff))

    def sign_profile(self, tol: float = 1e-8) -> np.ndarray:
        """-1/0/+1 per sample, zero meaning within ``tol * scale``."""
        s = np.sign(self.second_diff)
        return np.where(np.abs(self.second_diff) <= tol * self.scale, 0, s).astype(int)

    def concave(self, tol: float = 1e-8) -> bool:
        return bool(np.all(self.second_diff <= tol * self.scale))

    def convex(self, tol: float = 1e-8) -> bool:
        return bool(np.all(self.second_diff >= -tol * self.scale))

    def affine(self, tol: float = 1e-8) -> bool:
        return bool(np.all(np.abs(self.second_diff) <= tol * self.scale))


def _check_rank_one(X: np.ndarray) -> None:
    scale = np.sum(X**2, axis=(-2, -1))
    minors = np.einsum("...ij,...kl->...ikjl", X, X) - np.einsum("...il,...kj->...ikjl", X, X)
    worst = np.max(np.abs(minors).reshape(X.shape[:-2] + (-1,)), axis=-1)
    if np.any(scale == 0) or np.any(worst > 1e-12 * scale):
        raise InvalidInput("probe direction is not a rank-one matrix")


def rank_one_probe(E: Functional, A, X, radius: float = 1.0, samples: int = 21) -> ProbeReport:
    """Centered second differences of ``t -> E(A + tX)`` along a rank-one line.

    The step is ``h = 1e-2 (1 + |A|) / |X|``, so the round-off floor
    ``~eps |E| / h^2`` sits far below ``1e-8`` of the natural curvature scale
    ``|E| |X|^2 / (1 + |A + tX|)^2`` reported in ``scale``. Second differences
    of a concave function are non-positive exactly, whatever ``h`` is, so the
    step only trades locality for round-off.

    For functionals restricted to ``det > 0`` the sample interval is clipped to
    the component of ``{t : det(A + tX) > 0}`` containing ``t = 0`` (the step
    shrinks if that component is short); the clipped interval is returned in
    ``clipped``.
    """
    A = _as_matrix(A)
    X = _as_matrix(X)
    if A.ndim != 2 or X.shape != A.shape:
        raise InvalidInput("A and X must be single matrices of equal shape")
    r = rank_one_probes(E, A[None], X[None], radius, samples)
    clipped = None if r.clipped is None else tuple(float(c) for c in r.clipped[0])
    return ProbeReport(r.t[0], r.second_diff[0], r.scale[0], float(r.step[0]), clipped)


def rank_one_probes(E: Functional, A, X, radius: float = 1.0, samples: int = 21) -> ProbeReport:
    """Batched :func:`rank_one_probe` over stacks ``A, X`` of shape ``(m, n, n)``.

    Every field of the returned report gains a leading axis of length ``m``.
    """
    A = _as_matrix(A)
    X = _as_matrix(X)
    if A.ndim != 3 or X.shape != A.shape:
        raise InvalidInput("A and X must be stacks (m, n, n) of equal shape")
    _check_rank_one(X)
    xnorm = operator_norm(X)
    h = 1e-2 * (1.0 + operator_norm(A)) / xnorm
    lo = np.full(len(A), -float(radius))
    hi = np.full(len(A), float(radius))
    clipped = None
    if E.positive_det:
        det0 = np.linalg.det(A)
        if np.any(det0 <= 0):
            raise DomainError("restricted functional probed at det A <= 0")
        # det(A + tX) is affine in t for rank-one X
        slope = np.einsum("mii->m", np.linalg.inv(A) @ X) * det0
        live = slope != 0
        edge = np.where(live, -det0 / np.where(live, slope, 1.0), np.inf)
        h = np.where(live, np.minimum(h, np.abs(edge) / 8.0), h)
        lo = np.where(live & (slope > 0), np.maximum(lo, edge + 2 * h), lo)
        hi = np.where(live & (slope < 0), np.minimum(hi, edge - 2 * h), hi)
        clipped = np.stack([lo, hi], axis=1)
    t = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, samples)[None, :]
    off = t[:, :, None] + h[:, None, None] * np.array([-1.0, 0.0, 1.0])
    stencil = A[:, None, None] + off[..., None, None] * X[:, None, None]
    vals = E(stencil)
    second = (vals[..., 2] - 2 * vals[..., 1] + vals[..., 0]) / h[:, None] ** 2
    size = np.max(E.size(stencil), axis=-1)
    scale = size * xnorm[:, None] ** 2 / (1.0 + operator_norm(A[:, None] + t[..., None, None] * X[:, None])) ** 2
    return ProbeReport(t, second, scale, h, clipped)


def random_rank_one(rng: np.random.Generator, n: int = 2, size: float = 1.0) -> np.ndarray:
    """``s u (x) v`` with ``u, v`` uniform on the unit sphere and ``s ~ size * |N(0,1)|``."""
    u = rng.standard_normal(n)
    v = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    return size * abs(rng.standard_normal()) * np.outer(u, v)


def burkholder_constant(p: float) -> float:
    """Constant ``C_p = p^-1 (1 - 1/p)^(1-p)`` in ``C_p(|f_z|^p - (p-1)^p |f_zbar|^p) <= B_p``.

    ``C_2 = 1``, where the inequality is the identity ``J = J``.
    """
    if p < 2:
        raise DomainError("lower bound is stated for p >= 2")
    return (1.0 - 1.0 / p) ** (1.0 - p) / p


class LowerBound(NamedTuple):
    lhs: np.ndarray
    rhs: np.ndarray


def burkholder_lower_bound(d, p: float) -> LowerBound:
    """Both sides of ``C_p (|f_z|^p - (p-1)^p |f_zbar|^p) <= B_p(Df)``."""
    d = _as_deriv(d)
    c = burkholder_constant(p)
    lhs = c * (np.abs(d.dz) ** p - (p - 1) ** p * np.abs(d.dzbar) ** p)
    return LowerBound(lhs, burkholder_p(d, p))


class Derived(NamedTuple):
    F: np.ndarray
    H: np.ndarray


def derived_functionals(d) -> Derived:
    """``F = d/dp B_p |_{p=2}`` and the log-Jacobian functional ``H``.

    ``F = ((1 + log|Df|^2) J - |Df|^2) / 2`` and
    ``H = |Df|^2 / (2 J) + log J - log |Df|``.
    """
    d = _as_deriv(d)
    norm = d.opnorm
    jac = d.jac
    if np.any(norm == 0):
        raise DomainError("F has a logarithmic singularity at Df = 0")
    if np.any(jac <= 0):
        raise DomainError("H needs J > 0")
    F = 0.5 * ((1 + np.log(norm**2)) * jac - norm**2)
    H = 0.5 * norm**2 / jac + np.log(jac) - np.log(norm)
    if np.ndim(F) == 0:
        return Derived(float(F), float(H))
    return Derived(F, H)
