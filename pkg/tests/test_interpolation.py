import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcburk.beltrami import BeltramiCoefficient, GridSpec
from qcburk.errors import DomainError, InvalidFamily
from qcburk.interpolation import (
    AnalyticFamily,
    check_interpolation_bound,
    counterexample_demo,
    family_norms,
    p_interp,
    restrict,
    support_line,
)

INF = math.inf
expo = st.one_of(st.floats(0.2, 20), st.just(INF))


def test_p_interp_examples():
    assert p_interp(INF, 2, Fraction(1, 2)) == 4
    assert isinstance(p_interp(INF, 2, Fraction(1, 2)), Fraction)
    r = 0.3
    assert p_interp(INF, 2.0, r, "disk") == pytest.approx((1 + r) / r)
    assert p_interp(3, 5, 0) == 3 and p_interp(3, 5, 1) == 5
    assert p_interp(INF, INF, 0.5) == INF
    with pytest.raises(DomainError):
        p_interp(2, 3, 1.5)


@settings(max_examples=200)
@given(expo, expo, st.floats(0, 1))
def test_moebius_consistency(p0, p1, r):
    a = p_interp(p0, p1, r, "disk")
    b = p_interp(p1, p0, (1 - r) / (1 + r), "halfplane")
    # compare 1/p: finite exponents near 1/0 are rounding artifacts of (1-r)/(1+r)
    assert 1 / a == pytest.approx(1 / b, rel=1e-10, abs=1e-12)


def test_constant_family_norms_and_equality():
    fam = AnalyticFamily.constant(2.0 - 1.0j)
    for p in (0.5, 1.0, 3.0, INF):
        assert family_norms(fam, p, [0.0, 0.5j]) == pytest.approx(abs(2 - 1j), rel=1e-12)
    rep = check_interpolation_bound(fam, INF, 2.0, "disk", (0.1, 0.5, 0.9))
    assert rep.verdict == "equality" and max(abs(m) for m in rep.margins) < 1e-12


def test_exponential_norms_closed_form():
    h = np.linspace(-1, 1, 201)
    w = np.full(h.size, 1 / h.size)
    fam = AnalyticFamily.exponential(h, w)
    for lam in (0.3, 1.0 + 2.0j):
        for p in (1.0, 2.5):
            ref = np.mean(np.exp(p * lam.real * h)) ** (1 / p)
            assert fam.norm(lam, p) == pytest.approx(ref, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.5, 6), st.floats(0.5, 6))
def test_halfplane_bound_exponential(seed, p0, p1):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(32)
    fam = AnalyticFamily.exponential(h, rng.dirichlet(np.ones(32)))
    rep = check_interpolation_bound(fam, p0, p1, t_grid=(0.2, 0.5, 0.8), lambda_sampling={"max_points": 64})
    assert rep.ok


@settings(max_examples=50)
@given(st.integers(0, 10**6))
def test_norm_monotone_in_p(seed):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    fam = AnalyticFamily(lambda lam: vals, rng.dirichlet(np.ones(20)), "disk")
    norms = family_norms(fam, 1.0, [0.0]).tolist() + [fam.norm(0.0, p) for p in (2.0, 4.0, 8.0, INF)]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


def test_vanishing_detected():
    fam = AnalyticFamily(lambda lam: np.array([1.0, lam]), [0.5, 0.5], "disk")
    with pytest.raises(InvalidFamily):
        fam(0.0)
    bad = AnalyticFamily(lambda lam: np.array([np.inf, 1.0]), [0.5, 0.5], "disk")
    with pytest.raises(InvalidFamily):
        bad(0.1)


def test_support_line_constant():
    d = support_line(AnalyticFamily.constant(1.0, domain="halfplane"), 0.5, 2.0, 4.0)
    assert d.ok and d.I == pytest.approx(0.0, abs=1e-14)
    assert np.allclose(d.density, 1.0)


def test_support_line_two_point_closed_form():
    fam = AnalyticFamily.two_point()
    th, p0, p1 = 0.5, 2.0, 4.0
    d = support_line(fam, th, p0, p1)
    assert d.ok
    pth = 1 / ((1 - th) / p0 + th / p1)
    # after removing e^{lam}: values (1, e^{-2 lam}), so at real theta the norms are closed form
    ref = math.log((0.5 * (1 + math.exp(-2 * pth * th))) ** (1 / pth))
    assert d.chain["log_M_theta"] == pytest.approx(ref, rel=1e-12)
    assert d.equality_gap <= 1e-9 and d.envelope_margin >= -1e-10 and d.harnack_margin >= -1e-10


def test_support_line_needs_bounded_family():
    fam = AnalyticFamily(lambda lam: np.array([np.exp(-50 * lam), 1.0]), [0.5, 0.5], "halfplane")
    with pytest.raises(DomainError):
        support_line(fam, 0.5, 2.0, 4.0, bound=1e6)


@pytest.fixture(scope="module")
def beltrami_family():
    mu = BeltramiCoefficient.random(GridSpec(128), 0.3, np.random.default_rng(21))
    return AnalyticFamily.beltrami(mu, 3.0)


def test_beltrami_family_basics(beltrami_family):
    fam = beltrami_family
    mu = fam.meta
    assert mu["p"] == 3.0 and 0 < fam.mass < 1
    assert fam.norm(0.0, INF) == pytest.approx(1.0, abs=1e-12)
    assert fam.norm(0.0, 2.0) ** 2 == pytest.approx(fam.mass, rel=1e-12)


def test_beltrami_disk_bound(beltrami_family):
    rep = check_interpolation_bound(beltrami_family, INF, 2.0, "disk", (0.25, 0.5),
                                    {"radii": (0.5, 0.9), "max_points": 64})
    assert rep.ok, rep.margins
    assert rep.M0 == pytest.approx(1.0, abs=1e-12)


def test_beltrami_support_line_restricted(beltrami_family):
    lams = [0.0, 0.5, -0.5, 0.5j, -0.5j]
    sub = restrict(beltrami_family, 0.2, 5.0, lams)
    h = sub.to_halfplane()
    lam_h = [0.5, 1.0, 2.0, 1.0 + 0.5j, 1.0 - 0.5j, 0.3 + 0.2j]
    d = support_line(h, 0.5, 2.0, INF, lambdas=lam_h)
    assert d.density_mass == pytest.approx(1.0, abs=1e-10)
    assert d.equality_gap <= 1e-9 and d.envelope_margin >= -1e-10


def test_counterexample_growth():
    cx = counterexample_demo()
    assert cx.p_theta == 2.0 and cx.M1 == 0.0 and cx.bound == 0.0
    assert cx.M0 == pytest.approx(1 / math.log(2), rel=1e-9)
    assert cx.growth >= 10
    assert all(b > a for a, b in zip(cx.M_theta, cx.M_theta[1:]))
    assert cx.regularized["M_theta"] <= cx.regularized["bound"]
    assert all(row["M_theta_truncated"] > row["bound"] for row in cx.eps_variant)
