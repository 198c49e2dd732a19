import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcburk.beltrami import BeltramiCoefficient, GridSpec, solve_principal
from qcburk.errors import ClassError, DomainError
from qcburk.inequalities import (
    area_check,
    check_burkholder_energy,
    check_expint,
    check_llogl,
    check_loginv,
    check_lp_mean,
    check_main_inequality,
    weight_range,
)
from qcburk.packing import random_packing
from qcburk.radial import Aa1Warning, RadialCoefficient, RadialProfile
from qcburk.reports import QuadratureReport, to_csv, to_json, verdict_for

P2 = RadialProfile.power(2.0)


def test_verdict_rules():
    assert verdict_for(1.0, 1.0, 0.0) == "equality"
    assert verdict_for(0.5, 1.0, 0.1) == "pass"
    assert verdict_for(1.2, 1.0, 0.1) == "fail"
    assert verdict_for(1.05, 1.0, 0.1) == "equality"
    assert verdict_for(float("nan"), 1.0, 0.1) == "fail"


@pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 4.0])
def test_main_power_map_equality(p):
    r = check_main_inequality(P2, p)
    assert r.value == pytest.approx(math.pi, rel=1e-10)
    assert r.verdict == "equality"


def test_main_range_enforced():
    with pytest.raises(DomainError):
        check_main_inequality(P2, 4.5)
    with pytest.raises(DomainError):
        check_main_inequality(P2, 1.5)


def test_main_polar_matches_closed_form_below_critical():
    prof = RadialProfile.blend(0.5, 2.0)
    r = check_main_inequality(prof, 3.0)
    assert r.ok and r.value == pytest.approx(math.pi, rel=1e-9)


@pytest.mark.parametrize("p,bound", [(2.0, 2.0), (2.5, 8 / 3), (3.0, 4.0), (3.5, 8.0)])
def test_lp_mean_table(p, bound):
    r = check_lp_mean(P2, 2.0, p)
    assert r.bound == pytest.approx(bound)
    assert r.value == pytest.approx(bound, rel=1e-10)


def test_lp_mean_rejects_endpoint():
    with pytest.raises(DomainError):
        check_lp_mean(P2, 2.0, 4.0)


def test_llogl_cases():
    r = check_llogl(RadialProfile.identity())
    assert r.verdict == "equality" and r.value == pytest.approx(math.pi)
    r = check_llogl(P2)
    assert r.value == pytest.approx(2 * math.pi, rel=1e-10) and r.bound == pytest.approx(2 * math.pi, rel=1e-10)


@pytest.mark.parametrize("K", [2.0, 3.0])
def test_loginv_power(K):
    r = check_loginv(RadialProfile.monomial(K))
    assert r.value == pytest.approx(math.pi * (K - 1), rel=1e-9)
    assert r.bound == pytest.approx(math.pi * (K - 1), rel=1e-9)


def test_loginv_needs_compressing():
    with pytest.raises(ClassError):
        check_loginv(P2)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 0.95))
def test_expint_constant_alpha_closed(a):
    r = check_expint(RadialCoefficient.constant(a))
    assert r.value == pytest.approx(math.pi, rel=1e-9)


def test_expint_spectral_within_budget():
    r = check_expint(RadialCoefficient.constant(0.5), path="spectral", N=512)
    assert abs(r.value - math.pi) <= r.est_error
    assert r.grid["periodization"] > 0


def test_compressing_dual():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", Aa1Warning)
        r = check_burkholder_energy(RadialProfile.monomial(2.0), -2.0)
    assert r.ok and r.value == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(ClassError):
        check_burkholder_energy(RadialProfile.monomial(2.0), 3.0)


def test_energy_range():
    with pytest.raises(ClassError):
        check_burkholder_energy(P2, 4.5)
    with pytest.raises(DomainError):
        check_burkholder_energy(P2, 1.0)


def test_packing_energy_grid():
    pk = random_packing(np.random.default_rng(3))
    r = check_burkholder_energy(pk, 3.0, N=512)
    assert r.value == pytest.approx(pk.domain.area, rel=3e-3)
    assert r.ok


@pytest.fixture(scope="module")
def random_solution():
    return solve_principal(BeltramiCoefficient.random(GridSpec(256), 0.3, np.random.default_rng(9)))


def test_solver_sources(random_solution):
    sol = random_solution
    for r in (check_main_inequality(sol, 3.0), check_llogl(sol), area_check(sol)):
        assert isinstance(r, QuadratureReport)
        assert r.ok and r.slack > 0
    r = check_lp_mean(sol, 2.0, 3.0)
    assert r.ok


def test_weight_range():
    lo, hi = weight_range(4.0, 1 / 3)
    assert lo == pytest.approx(0.0) and hi == 1.0


def test_report_serialization(random_solution):
    rows = [check_main_inequality(P2, 3.0), area_check(random_solution)]
    js = to_json(rows)
    assert js == to_json(rows)
    assert '"verdict": "equality"' in js
    csv = to_csv(rows).splitlines()
    assert csv[0] == "check,params,value,bound,slack,est_error,verdict" and len(csv) == 3
