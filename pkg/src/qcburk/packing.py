"""Piecewise radial maps built by annular packing.

Starting from an affine map ``a z + b`` on a domain, a node replaces the map
on a disk ``B(z0, R)`` by ``a g(z - z0) + (a z0 + b)`` with ``g`` radial and
``rho(R) = R``, so the map is unchanged on the circle. Inside the core
``B(z0, r)`` the new map is affine again, with slope ``a rho(r) / r``, and
child nodes may be placed there. Siblings live in the parent's linearity
region and must be disjoint.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import ndimage

from .errors import ClassError, DomainError, InvalidInput, InvalidSpec
from .functionals import PlanarDeriv
from .quadrature import disk_cell_fraction, radial_quad
from .radial import RadialProfile, classify_profile, radial_deriv

__all__ = [
    "Domain",
    "PackingNode",
    "PiecewiseRadialMap",
    "GridIntegral",
    "build_packing",
    "load_packing",
    "profile_from_record",
    "fill_power_packing",
    "random_packing",
]


@dataclass(frozen=True)
class Domain:
    """A disk ``B(center, radius)`` or an axis-parallel rectangle."""

    kind: str
    center: complex = 0j
    radius: float = 1.0
    bounds: tuple = (-1.0, 1.0, -1.0, 1.0)

    @classmethod
    def disk(cls, center=0j, radius=1.0):
        if radius <= 0:
            raise InvalidSpec("disk radius must be positive")
        return cls("disk", complex(center), float(radius))

    @classmethod
    def rect(cls, x0=-1.0, x1=1.0, y0=-1.0, y1=1.0):
        if not (x1 > x0 and y1 > y0):
            raise InvalidSpec("empty rectangle")
        return cls("rect", bounds=(float(x0), float(x1), float(y0), float(y1)))

    @property
    def area(self) -> float:
        if self.kind == "disk":
            return math.pi * self.radius**2
        x0, x1, y0, y1 = self.bounds
        return (x1 - x0) * (y1 - y0)

    @property
    def bbox(self):
        if self.kind == "disk":
            c, r = self.center, self.radius
            return c.real - r, c.real + r, c.imag - r, c.imag + r
        return self.bounds

    def contains(self, z):
        z = np.asarray(z, complex)
        if self.kind == "disk":
            return np.abs(z - self.center) < self.radius
        x0, x1, y0, y1 = self.bounds
        return (z.real > x0) & (z.real < x1) & (z.imag > y0) & (z.imag < y1)

    def holds_disk(self, c, R, slack=1e-12) -> bool:
        if self.kind == "disk":
            return abs(c - self.center) + R <= self.radius * (1 + slack)
        x0, x1, y0, y1 = self.bounds
        e = slack * max(x1 - x0, y1 - y0)
        return c.real - R >= x0 - e and c.real + R <= x1 + e and c.imag - R >= y0 - e and c.imag + R <= y1 + e

    def boundary_distance(self, c):
        if self.kind == "disk":
            return self.radius - abs(c - self.center)
        x0, x1, y0, y1 = self.bounds
        return min(c.real - x0, x1 - c.real, c.imag - y0, y1 - c.imag)

    def cell_fraction(self, x, y, h):
        if self.kind == "disk":
            return disk_cell_fraction(x, y, h, self.radius, self.center)
        x0, x1, y0, y1 = self.bounds
        fx = np.clip((np.minimum(x + h / 2, x1) - np.maximum(x - h / 2, x0)) / h, 0, 1)
        fy = np.clip((np.minimum(y + h / 2, y1) - np.maximum(y - h / 2, y0)) / h, 0, 1)
        return fx * fy

    def to_dict(self):
        if self.kind == "disk":
            return {"kind": "disk", "center": [self.center.real, self.center.imag], "radius": self.radius}
        return {"kind": "rect", "bounds": list(self.bounds)}


@dataclass
class PackingNode:
    """One radial insertion; ``a, b`` is the affine map it replaces."""

    center: complex
    profile: RadialProfile
    children: List["PackingNode"] = field(default_factory=list)
    a: complex = 1.0
    b: complex = 0j

    @property
    def R(self) -> float:
        return self.profile.R

    @property
    def r(self) -> float:
        return self.profile.r

    @property
    def core_slope(self) -> float:
        return float(self.profile.rho(self.r)) / self.r if self.r > 0 else math.nan

    @property
    def singular(self) -> bool:
        """``r = 0`` and not conformal at the center."""
        return self.r == 0 and self.profile.origin_exponent != 1.0

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


class GridIntegral(dict):
    """Integral values keyed by integrand name, plus quadrature metadata in ``meta``."""

    def __init__(self, values, meta):
        super().__init__(values)
        self.meta = meta


class PiecewiseRadialMap:
    """Evaluable packing map on a domain with affine boundary data ``a z + b``."""

    def __init__(self, domain: Domain, roots: Sequence[PackingNode], a=1.0, b=0j):
        self.domain = domain
        self.roots = list(roots)
        self.a = complex(a)
        self.b = complex(b)
        self._propagate()
        self.tags = self._tags()

    def _propagate(self):
        def rec(nodes, a, b):
            for n in nodes:
                n.a, n.b = a, b
                if n.children:
                    s = n.core_slope
                    rec(n.children, a * s, a * n.center + b - a * s * n.center)

        rec(self.roots, self.a, self.b)

    def nodes(self):
        for n in self.roots:
            yield from n.walk()

    def _tags(self):
        cls = [classify_profile(n.profile, 2.0, 1.0) for n in self.nodes()]
        q_lo = min([c.q_min for c in cls], default=1.0)
        q_hi = max([c.q_max for c in cls], default=1.0)
        return {
            "expanding": all(c.expanding for c in cls),
            "compressing": all(c.compressing for c in cls),
            "identity_boundary": self.a == 1 and self.b == 0,
            "q_range": (q_lo, q_hi),
            "K": max(1.0 / q_lo if q_lo > 0 else math.inf, q_hi),
        }

    @property
    def K(self) -> float:
        """Maximal distortion over all nodes."""
        return self.tags["K"]

    @property
    def k(self) -> float:
        K = self.K
        return (K - 1) / (K + 1)

    def in_class_Ap(self, p: float) -> bool:
        """Expanding nodes satisfying the lower slope bound and the origin condition for ``p``."""
        for n in self.nodes():
            c = classify_profile(n.profile, p, 1.0)
            if not (c.expanding and c.rho4 and c.aa1):
                return False
        return True

    def in_class_ApK(self, p: float, K: float) -> bool:
        upper = 2 * K / (K - 1) if K > 1 else math.inf
        if not 2 <= p < upper:
            return False
        return all(n.profile.kind == "power" and abs(n.profile.params["K"] - K) < 1e-12 for n in self.nodes()) and \
            self.in_class_Ap(p)

    # --- evaluation -----------------------------------------------------
    def _descend(self, z, want_value=True):
        z = np.asarray(z, complex)
        shape = z.shape
        zf = z.ravel()
        dz = np.empty(zf.shape, complex)
        dzbar = np.zeros(zf.shape, complex)
        val = np.empty(zf.shape, complex) if want_value else None

        def rec(nodes, idx, a, b):
            dz[idx] = a
            dzbar[idx] = 0
            if want_value:
                val[idx] = a * zf[idx] + b
            rest = idx
            for n in nodes:
                if rest.size == 0:
                    break
                w = zf[rest] - n.center
                t = np.abs(w)
                inside = t < n.R
                sel = rest[inside]
                rest = rest[~inside]
                if sel.size == 0:
                    continue
                w, t = w[inside], t[inside]
                ann = t >= n.r if n.r > 0 else t > 0
                ia = sel[ann]
                if ia.size:
                    d = radial_deriv(n.profile, w[ann])
                    dz[ia] = a * d.dz
                    dzbar[ia] = a * d.dzbar
                    if want_value:
                        ta = t[ann]
                        val[ia] = a * n.profile.rho(ta) * w[ann] / ta + a * n.center + b
                core = sel[~ann]
                if core.size:
                    if n.r > 0:
                        s = n.core_slope
                        rec(n.children, core, a * s, a * n.center + b - a * s * n.center)
                    else:
                        # exact center of a singular node
                        dz[core] = np.nan
                        dzbar[core] = np.nan
                        if want_value:
                            val[core] = a * n.center + b

        try:
            rec(self.roots, np.arange(zf.size), self.a, self.b)
        finally:
            del rec  # the recursive closure is a cycle that would pin the grid arrays until gc runs
        return (None if val is None else val.reshape(shape)), dz.reshape(shape), dzbar.reshape(shape)

    def __call__(self, z):
        return self._descend(z)[0]

    def deriv(self, z) -> PlanarDeriv:
        _, dz, dzbar = self._descend(z, want_value=False)
        if not (np.all(np.isfinite(dz)) and np.all(np.isfinite(dzbar))):
            raise DomainError("derivative undefined at the center of a singular node")
        return PlanarDeriv(dz, dzbar)

    def mu(self, z):
        return self.deriv(z).mu

    # --- energies -------------------------------------------------------
    def energy_closed_form(self, p: float) -> float:
        """Node-by-node Burkholder energy.

        Each node contributes ``|a|^p`` times its radial energy; linear regions
        contribute ``|slope|^p`` times their area. With ``rho(R) = R`` and
        vanishing origin terms the total is ``|a|^p |Omega|``.
        """

        def node_energy(n, a):
            ap = abs(a) ** p
            R = n.R
            top = math.pi * float(n.profile.rho(R)) ** p * R ** (2 - p)
            if n.r == 0:
                lim = n.profile.origin_limit(p)
                if lim is None:
                    raise DomainError("origin term undecidable for this profile kind")
                return ap * (top - math.pi * lim)
            s = n.core_slope
            inner = math.pi * float(n.profile.rho(n.r)) ** p * n.r ** (2 - p)
            core_area = math.pi * n.r**2 - sum(math.pi * c.R**2 for c in n.children)
            kids = sum(node_energy(c, a * s) for c in n.children)
            return ap * (top - inner) + abs(a * s) ** p * core_area + kids

        free = self.domain.area - sum(math.pi * n.R**2 for n in self.roots)
        return abs(self.a) ** p * free + sum(node_energy(n, self.a) for n in self.roots)

    def uncovered_fraction(self) -> float:
        """Fraction of the domain where the map stays affine (linear regions)."""
        lin = self.domain.area - sum(math.pi * n.R**2 for n in self.roots)
        for n in self.nodes():
            if n.r > 0:
                lin += math.pi * n.r**2 - sum(math.pi * c.R**2 for c in n.children)
        return lin / self.domain.area

    def grid_integrate(self, integrands: Dict[str, Callable], N: int, sub: int = 8,
                       core_cells: float = 4.0) -> GridIntegral:
        """Cell quadrature of ``G(|f_z|, |f_zbar|)`` over the domain.

        Cells cut by an interface circle, by the domain boundary or by a
        singular core are supersampled ``sub x sub``; domain and core overlaps
        use exact circular areas. The disk of radius ``core_cells * h`` around
        each singular node is integrated in polar coordinates.
        """
        if N < 8:
            raise InvalidInput("grid too coarse")
        x0, x1, y0, y1 = self.domain.bbox
        h = max(x1 - x0, y1 - y0) / N
        nx = int(math.ceil((x1 - x0) / h - 1e-9))
        ny = int(math.ceil((y1 - y0) / h - 1e-9))
        xs = x0 + (np.arange(nx) + 0.5) * h
        ys = y0 + (np.arange(ny) + 0.5) * h
        X, Y = np.meshgrid(xs, ys)
        weight = self.domain.cell_fraction(X, Y, h)
        cut = np.zeros(X.shape, bool)
        if self.domain.kind == "disk":
            cut |= (weight > 0) & (weight < 1)
        reach = h / math.sqrt(2) * (1 + 1e-9)
        rc = core_cells * h
        cores = []

        def box(c, rad):
            i0 = max(int((c.imag - rad - y0) / h) - 1, 0)
            i1 = min(int((c.imag + rad - y0) / h) + 2, ny)
            j0 = max(int((c.real - rad - x0) / h) - 1, 0)
            j1 = min(int((c.real + rad - x0) / h) + 2, nx)
            return slice(i0, i1), slice(j0, j1)

        def mark(c, rad):
            sl = box(c, rad + reach)
            d = np.abs(X[sl] + 1j * Y[sl] - c)
            cut[sl] |= np.abs(d - rad) <= reach

        for n in self.nodes():
            mark(n.center, n.R)
            if n.r > 0:
                mark(n.center, n.r)
            if n.singular:
                # small disks get a proportionally smaller polar core
                rad = min(rc, 0.5 * n.R)
                cores.append((n, rad))
                sl = box(n.center, rad)
                weight[sl] *= 1 - disk_cell_fraction(X[sl], Y[sl], h, rad, n.center)
                mark(n.center, rad)

        totals = {k: 0.0 for k in integrands}
        plain = (~cut) & (weight > 0)
        z = (X + 1j * Y)[plain]
        _, dz, dzbar = self._descend(z, want_value=False)
        a, b = np.abs(dz), np.abs(dzbar)
        wts = weight[plain] * h * h
        for k, G in integrands.items():
            totals[k] += float(np.sum(G(a, b) * wts))
        del z, dz, dzbar, a, b

        ci = np.nonzero(cut & (weight > 0))
        if ci[0].size:
            offs = (np.arange(sub) + 0.5) / sub - 0.5
            ox, oy = np.meshgrid(offs * h, offs * h)
            zc = X[ci] + 1j * Y[ci]
            zs = zc[:, None] + (ox + 1j * oy).ravel()[None, :]
            keep = self.domain.contains(zs) if self.domain.kind == "disk" else np.ones(zs.shape, bool)
            for n, rad in cores:
                keep &= np.abs(zs - n.center) >= rad
            _, dz, dzbar = self._descend(zs[keep], want_value=False)
            a, b = np.abs(dz), np.abs(dzbar)
            cnt = keep.sum(axis=1)
            cw = weight[ci] * h * h
            rows = np.nonzero(keep)[0]
            for k, G in integrands.items():
                s = np.bincount(rows, weights=G(a, b), minlength=zc.size)
                with np.errstate(invalid="ignore", divide="ignore"):
                    m = np.where(cnt > 0, s / np.maximum(cnt, 1), 0.0)
                totals[k] += float(np.sum(m * cw))

        core_err = 0.0
        for n, rad in cores:
            sc = abs(n.a)
            for k, G in integrands.items():
                def f(t, G=G, n=n, sc=sc):
                    d = radial_deriv(n.profile, complex(t))
                    return float(G(np.array([sc * abs(complex(d.dz))]), np.array([sc * abs(complex(d.dzbar))]))[0])

                v, e = radial_quad(f, 0.0, rad)
                totals[k] += v
                core_err += e
        meta = {"N": N, "h": h, "cut_cells": int(ci[0].size), "singular_cores": len(cores),
                "core_radius": rc, "core_quad_error": core_err}
        return GridIntegral(totals, meta)

    def sample(self, z, what="mu"):
        """Sample ``mu``, ``f``, ``dz`` or ``dzbar`` at points (nan at singular centers)."""
        val, dz, dzbar = self._descend(z, want_value=(what == "f"))
        if what == "f":
            return val
        if what == "dz":
            return dz
        if what == "dzbar":
            return dzbar
        if what == "mu":
            with np.errstate(invalid="ignore", divide="ignore"):
                return np.where(dz != 0, dzbar / np.where(dz != 0, dz, 1), 0)
        raise InvalidInput(f"unknown field {what!r}")

    def to_dict(self):
        def node(n):
            d = {"center": [n.center.real, n.center.imag], **_profile_record(n.profile)}
            if n.children:
                d["children"] = [node(c) for c in n.children]
            return d

        return {"domain": self.domain.to_dict(), "affine": {"a": [self.a.real, self.a.imag],
                                                            "b": [self.b.real, self.b.imag]},
                "nodes": [node(n) for n in self.roots]}


def _profile_record(prof: RadialProfile):
    rec = {"R": prof.R, "r": prof.r, "kind": prof.kind}
    if prof.kind == "power":
        rec["K"] = prof.params["K"]
    elif prof.kind in ("monomial", "blend"):
        rec["a"] = prof.params["a"]
        if prof.kind == "blend":
            rec["m"] = prof.params["m"]
    elif prof.kind == "table":
        rec["knots"] = prof.params["knots"]
    elif prof.kind != "identity":
        raise InvalidSpec("custom profiles cannot be serialized")
    return rec


def profile_from_record(rec: dict) -> RadialProfile:
    """Profile from a ``{R, r, kind, ...}`` record."""
    kind = rec.get("kind", "power")
    R = float(rec.get("R", 1.0))
    r = float(rec.get("r", 0.0))
    try:
        if kind == "identity":
            if r != 0:
                return RadialProfile.monomial(1.0, R=R, r=r, kind="identity")
            return RadialProfile.identity(R)
        if kind == "power":
            return RadialProfile.power(float(rec["K"]), R=R, r=r)
        if kind == "monomial":
            return RadialProfile.monomial(float(rec["a"]), R=R, r=r)
        if kind == "blend":
            return RadialProfile.blend(float(rec["a"]), float(rec.get("m", 2.0)), R=R, r=r)
        if kind == "table":
            return RadialProfile.table(rec["knots"])
    except KeyError as e:
        raise InvalidSpec(f"profile record missing {e.args[0]!r}") from None
    except InvalidInput as e:
        raise InvalidSpec(str(e)) from None
    raise InvalidSpec(f"unknown profile kind {kind!r}")


def _check_disjoint(nodes, where):
    for i, u in enumerate(nodes):
        for v in nodes[i + 1:]:
            if abs(u.center - v.center) < (u.R + v.R) * (1 - 1e-12):
                raise InvalidSpec(f"overlapping disks in {where}")


def _validate(domain, roots):
    _check_disjoint(roots, "domain")
    for n in roots:
        if not domain.holds_disk(n.center, n.R):
            raise InvalidSpec("root disk not contained in the domain")

    def rec(n):
        if abs(float(n.profile.rho(n.R)) - n.R) > 1e-9 * n.R:
            raise InvalidSpec("profile must satisfy rho(R) = R to glue continuously")
        if n.children and n.r == 0:
            raise InvalidSpec("children need a linear core (r > 0)")
        _check_disjoint(n.children, "core")
        for c in n.children:
            if abs(c.center - n.center) + c.R > n.r * (1 + 1e-12):
                raise InvalidSpec("child disk not inside the parent's linear core")
            rec(c)

    for n in roots:
        rec(n)


def _node_from_record(rec) -> PackingNode:
    try:
        c = rec["center"]
    except KeyError:
        raise InvalidSpec("node record missing 'center'") from None
    center = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
    kids = [_node_from_record(k) for k in rec.get("children", [])]
    return PackingNode(center, profile_from_record(rec), kids)


def _domain_from_record(rec) -> Domain:
    if rec is None:
        return Domain.disk()
    kind = rec.get("kind")
    if kind == "disk":
        c = rec.get("center", [0, 0])
        return Domain.disk(complex(c[0], c[1]), rec.get("radius", 1.0))
    if kind == "rect":
        return Domain.rect(*rec["bounds"])
    raise InvalidSpec(f"unknown domain kind {kind!r}")


def build_packing(spec, target: Optional[str] = None, p: Optional[float] = None,
                  K: Optional[float] = None) -> PiecewiseRadialMap:
    """Validate a packing description and return the evaluable map.

    ``spec`` is either a dict ``{domain, affine, nodes}`` (as in the JSON
    files) or a tuple ``(Domain, [PackingNode, ...])``. ``target`` may be
    ``"Ap"`` (needs ``p``), ``"ApK"`` (needs ``p`` and ``K``) or
    ``"compressing"``; a mismatch raises :class:`ClassError`.
    """
    if isinstance(spec, tuple):
        domain, roots = spec[0], list(spec[1])
        a, b = (spec[2], spec[3]) if len(spec) > 2 else (1.0, 0j)
    elif isinstance(spec, dict):
        domain = _domain_from_record(spec.get("domain"))
        roots = [_node_from_record(r) for r in spec.get("nodes", [])]
        aff = spec.get("affine", {})
        a = complex(*aff.get("a", [1.0, 0.0]))
        b = complex(*aff.get("b", [0.0, 0.0]))
    else:
        raise InvalidSpec("packing spec must be a dict or (domain, nodes)")
    if a == 0:
        raise InvalidSpec("root affine map must be invertible")
    _validate(domain, roots)
    fmap = PiecewiseRadialMap(domain, roots, a, b)
    if target is None:
        return fmap
    if target == "Ap":
        if p is None or not fmap.in_class_Ap(p):
            raise ClassError(f"packing is not in A^p for p={p}")
    elif target == "ApK":
        if p is None or K is None or not fmap.in_class_ApK(p, K):
            raise ClassError(f"packing is not in A^p_K for p={p}, K={K}")
    elif target == "compressing":
        if not fmap.tags["compressing"]:
            raise ClassError("packing has non-compressing nodes")
    else:
        raise InvalidSpec(f"unknown target class {target!r}")
    return fmap


def load_packing(path, **kwargs) -> PiecewiseRadialMap:
    try:
        spec = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidSpec(f"cannot read packing file: {e}") from None
    return build_packing(spec, **kwargs)


def fill_power_packing(domain: Domain, K: float, eps: float = 1e-3, max_disks: int = 400,
                       resolution: int = 1024, min_radius: Optional[float] = None) -> PiecewiseRadialMap:
    """Greedy fill of the domain by disjoint ``r = 0`` power-``K`` disks.

    Each round places the largest empty disks found by a distance transform of
    the uncovered raster, with radii computed exactly against existing disks
    and the boundary. Stops at uncovered fraction ``<= eps``, at ``max_disks``
    or when disks drop below ``min_radius`` (default two raster cells); the
    achieved fraction is :meth:`PiecewiseRadialMap.uncovered_fraction`.
    """
    x0, x1, y0, y1 = domain.bbox
    px = max(x1 - x0, y1 - y0) / resolution
    min_radius = 2 * px if min_radius is None else min_radius
    xs = x0 + (np.arange(resolution) + 0.5) * px
    X, Y = np.meshgrid(xs, xs[: int(math.ceil((y1 - y0) / px))] - x0 + y0)
    Z = X + 1j * Y
    free = domain.contains(Z)
    placed: List[tuple] = []
    covered = 0.0
    while len(placed) < max_disks and 1 - covered / domain.area > eps:
        # pad so the domain edge counts as covered
        dist = ndimage.distance_transform_edt(np.pad(free, 1))[1:-1, 1:-1] * px
        order = np.argsort(dist, axis=None)[::-1]
        if dist.flat[order[0]] < min_radius:
            break
        batch = 0
        for idx in order[: 4096]:
            if dist.flat[idx] < min_radius or len(placed) >= max_disks:
                break
            c = complex(Z.flat[idx])
            R = domain.boundary_distance(c)
            for (cc, rr) in placed:
                R = min(R, abs(c - cc) - rr)
            R *= 1 - 1e-9
            if R < min_radius or R < 0.5 * dist.flat[idx]:
                continue
            placed.append((c, R))
            covered += math.pi * R * R
            free &= np.abs(Z - c) >= R
            batch += 1
            if batch >= 64:
                break
        if batch == 0:
            break
    roots = [PackingNode(c, RadialProfile.power(K, R=R)) for c, R in placed]
    return build_packing((domain, roots))


def _random_profile(rng, R, r, q_min):
    kind = rng.choice(["power", "blend", "table"]) if r > 0 else rng.choice(["power", "blend"])
    a = rng.uniform(max(q_min, 0.0) + 0.05, 0.95)
    if kind == "power":
        return RadialProfile.power(1 / a, R=R, r=r)
    if kind == "blend":
        return RadialProfile.blend(a, m=rng.uniform(0.5, 3.0), R=R, r=r)
    # concave piecewise linear: decreasing slopes keep q <= 1
    while True:
        ts = np.sort(rng.uniform(r, R, 3))
        ts = np.concatenate([[r], ts, [R]])
        slopes = np.sort(rng.uniform(0.3, 1.5, len(ts)))[::-1]
        rho = np.concatenate([[0], np.cumsum(np.diff(np.concatenate([[0], ts])) * slopes)])[1:]
        rho *= R / rho[-1]
        prof = RadialProfile.table(np.column_stack([ts, rho]))
        c = classify_profile(prof, 2.0, 1.0)
        if c.expanding and c.q_min >= q_min:
            return prof


def _random_disks(rng, inside, count, r_range, tries=200):
    out = []
    for _ in range(tries):
        if len(out) >= count:
            break
        R = rng.uniform(*r_range)
        c = inside(R)
        if c is None:
            continue
        if all(abs(c - d) >= R + s for d, s in out):
            out.append((c, R))
    return out


def random_packing(rng: np.random.Generator, domain: Optional[Domain] = None, depth: int = 3,
                   q_min: float = 1 / 3, max_children: int = 3) -> PiecewiseRadialMap:
    """Random expanding packing whose slopes satisfy ``q >= q_min``.

    Profiles mix power, smooth blend and piecewise linear kinds; singular
    (``r = 0``) nodes use exponents above ``q_min`` so origin terms vanish.
    """
    domain = Domain.rect() if domain is None else domain
    x0, x1, y0, y1 = domain.bbox

    def root_spot(R):
        c = complex(rng.uniform(x0 + R, x1 - R), rng.uniform(y0 + R, y1 - R)) if x1 - x0 > 2 * R else None
        return c if c is not None and domain.holds_disk(c, R) else None

    def make(c, R, level):
        has_core = level < depth and rng.random() < 0.75
        r = rng.uniform(0.4, 0.8) * R if has_core else (0.0 if rng.random() < 0.5 else rng.uniform(0.3, 0.7) * R)
        prof = _random_profile(rng, R, r, q_min)
        kids = []
        if r > 0 and level < depth:
            def spot(Rc):
                rad = r - Rc
                if rad <= 0:
                    return None
                u = rng.uniform(0, 1) ** 0.5 * rad
                return c + u * np.exp(2j * np.pi * rng.uniform())

            for cc, RR in _random_disks(rng, spot, rng.integers(1, max_children + 1), (0.15 * r, 0.6 * r)):
                kids.append(make(cc, RR, level + 1))
        return PackingNode(c, prof, kids)

    span = min(x1 - x0, y1 - y0)
    disks = _random_disks(rng, root_spot, rng.integers(1, max_children + 2), (0.12 * span, 0.35 * span))
    roots = [make(c, R, 1) for c, R in disks]
    return build_packing((domain, roots))
