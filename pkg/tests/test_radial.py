import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcburk.errors import ClassError, DomainError
from qcburk.quadrature import disk_cell_fraction, disk_rect_area, radial_quad
from qcburk.radial import (
    Aa1Warning,
    RadialCoefficient,
    RadialProfile,
    annulus_energy,
    classify_profile,
    closed_form_energy,
    radial_deriv,
    radial_integral,
    rho_from_alpha,
)


# ------------------------------------------------------------ quadrature

@settings(max_examples=100)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_disk_rect_area_monte_carlo(x0, y0, w, hgt):
    x1, y1 = x0 + w, y0 + hgt
    rng = np.random.default_rng(0)
    pts = rng.uniform([x0, y0], [x1, y1], size=(40000, 2))
    mc = np.mean(np.hypot(pts[:, 0], pts[:, 1]) < 1) * w * hgt
    assert float(disk_rect_area(x0, x1, y0, y1)) == pytest.approx(mc, abs=0.02 * w * hgt + 1e-12)


@pytest.mark.parametrize("N", [16, 64, 257])
def test_cell_fractions_sum_to_disk_area(N):
    h = 3.0 / N
    x = -1.5 + h * (np.arange(N) + 0.5)
    X, Y = np.meshgrid(x, x)
    frac = disk_cell_fraction(X, Y, h, 0.9, 0.1 + 0.05j)
    assert float(np.sum(frac)) * h * h == pytest.approx(math.pi * 0.81, rel=1e-12)


def test_radial_quad_area():
    v, err = radial_quad(lambda t: 1.0, 0.0, 2.0)
    assert v == pytest.approx(4 * math.pi, rel=1e-12) and err < 1e-9


# ------------------------------------------------------------ profiles

def test_power_profile_derivative_values():
    d = radial_deriv(RadialProfile.power(2.0), 0.25)
    assert abs(d.dz) == pytest.approx(1.5) and abs(d.dzbar) == pytest.approx(0.5)
    assert d.jac == pytest.approx(2.0)


def test_origin_needs_core():
    with pytest.raises(DomainError):
        radial_deriv(RadialProfile.power(2.0), 0.0)
    d = radial_deriv(RadialProfile.power(2.0, r=0.5), 0.0, core=True)
    assert abs(d.dzbar) == 0


@settings(max_examples=60, deadline=None)
@given(st.floats(1.05, 6.0))
def test_power_classification(K):
    c = classify_profile(RadialProfile.power(K), 2.0, K)
    assert c.expanding and not c.compressing
    assert c.q_min == pytest.approx(1 / K)


@pytest.mark.parametrize("p", [2.0, 2.5, 3.0])
def test_closed_energy_power(p):
    assert closed_form_energy(RadialProfile.power(2.0), p) == pytest.approx(math.pi, rel=1e-10)


def test_closed_energy_aa1_warning():
    with pytest.warns(Aa1Warning):
        v = closed_form_energy(RadialProfile.monomial(1 / 3), 3.0)
    assert v == pytest.approx(0.0, abs=1e-12)


def test_compressing_energy_class():
    with pytest.raises(ClassError):
        closed_form_energy(RadialProfile.monomial(2.0), 3.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", Aa1Warning)
        assert closed_form_energy(RadialProfile.monomial(2.0), -2.0) == pytest.approx(0.0, abs=1e-12)


def test_lp_energy_power_map():
    v, _ = radial_integral(RadialProfile.power(2.0), lambda a, b: (a + b) ** 3)
    assert v == pytest.approx(4 * math.pi, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 0.95), st.floats(1.0, 4.0), st.floats(2.0, 3.0))
def test_blend_energy_null_lagrangian(a, m, p):
    prof = RadialProfile.blend(a, m)
    c = classify_profile(prof, p, 1 / a)
    if not c.rho4:
        return
    assert closed_form_energy(prof, p) == pytest.approx(math.pi, rel=1e-8)


def test_annulus_energies_add_up():
    prof = RadialProfile.blend(0.5, 2.0)
    total = annulus_energy(prof, 2.5, 0.2, 0.4) + annulus_energy(prof, 2.5, 0.4, 1.0)
    assert total == pytest.approx(annulus_energy(prof, 2.5, 0.2, 1.0), rel=1e-9)
    boundary = math.pi * (1.0 - float(prof.rho(0.2)) ** 2.5 * 0.2 ** (2 - 2.5))
    assert total == pytest.approx(boundary, rel=1e-8)


def test_table_profile():
    prof = RadialProfile.table([(0.2, 0.1), (0.6, 0.5), (1.0, 1.0)])
    assert float(prof.rho(1.0)) == pytest.approx(1.0)
    assert float(prof.rho_dot(0.1)) == pytest.approx(0.5)


# ------------------------------------------------------------ coefficients

@pytest.mark.parametrize("coef", [RadialCoefficient.constant(0.5), RadialCoefficient.linear(),
                                  RadialCoefficient.constant(0.0)])
def test_rho_from_alpha_round_trip(coef):
    prof = rho_from_alpha(coef)
    back = RadialCoefficient.from_profile(prof)
    t = np.linspace(0.05, 0.95, 19)
    assert np.allclose(back.values(t), coef.values(t), atol=1e-9)


def test_rho_from_alpha_power_oracle():
    prof = rho_from_alpha(RadialCoefficient.constant(1 / 3))
    t = np.linspace(0.01, 1, 50)
    assert np.allclose(prof.rho(t), t**0.5, rtol=1e-9)


def test_s_transform_constant():
    coef = RadialCoefficient.constant(0.5)
    t = np.array([0.1, 0.5, 0.9])
    assert np.allclose(coef.s_transform(t), 2 * 0.5 * np.log(1 / t) - 0.5)


def test_mu_vanishes_outside_disk():
    coef = RadialCoefficient.constant(0.4)
    assert coef.mu(np.array([1.2 + 0j]))[0] == 0
    assert abs(coef.mu(np.array([0.5j]))[0]) == pytest.approx(0.4)


def test_rho_from_alpha_rejects_large_alpha():
    with pytest.raises(DomainError):
        rho_from_alpha(RadialCoefficient.constant(1.2))


def test_llogl_origin_flag():
    from qcburk.radial import classify_profile

    assert classify_profile(RadialProfile.power(2.0), 3.0, 2.0).llogl_origin is True
    assert classify_profile(RadialProfile.power(2.0, r=0.3), 3.0, 2.0).llogl_origin is True
