import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcburk.beltrami import (
    BeltramiCoefficient,
    FamilyParams,
    GridField,
    GridSpec,
    area_integral,
    beurling,
    cauchy,
    dbar,
    deform_family,
    phi_field,
    solve_principal,
)
from qcburk.errors import DistortionBound, DomainError, InvalidInput, NonConvergence
from qcburk.fieldio import field_from_bytes, field_to_bytes, read_field, write_field
from qcburk.radial import RadialCoefficient


@pytest.fixture(scope="module")
def spec():
    return GridSpec(256)


def test_gridspec_validation():
    with pytest.raises(InvalidInput):
        GridSpec(100)
    with pytest.raises(InvalidInput):
        GridSpec(64, 1.5)


@pytest.mark.parametrize("scheme", ["point", "cell"])
def test_beurling_isometry_on_mean_zero(spec, scheme):
    rng = np.random.default_rng(0)
    w = rng.standard_normal((spec.N, spec.N)) + 1j * rng.standard_normal((spec.N, spec.N))
    w -= w.mean()
    f = GridField(spec, w)
    if scheme == "point":
        assert beurling(f, scheme).l2_norm() == pytest.approx(f.l2_norm(), rel=1e-12)
    else:
        assert beurling(f, scheme).l2_norm() <= f.l2_norm() * (1 + 1e-12)


def test_beurling_indicator_exterior(spec):
    mu = BeltramiCoefficient.constant(spec, 0.5)
    s = beurling(GridField(spec, mu.values / 0.5), "cell").values
    Z = spec.z
    ring = (np.abs(Z) > 1.3) & (np.abs(Z) < 2.0)
    assert np.max(np.abs(s[ring] + 1 / Z[ring] ** 2)) < 0.02


def test_cauchy_inverts_dbar(spec):
    Z = spec.z
    g = np.exp(-8 * np.abs(Z) ** 2).astype(complex)
    back = dbar(cauchy(GridField(spec, g))).values
    # the zero mode is gauge and is dropped
    assert np.max(np.abs(back - (g - g.mean()))) < 1e-8


def test_zero_mu_is_identity(spec):
    sol = solve_principal(BeltramiCoefficient.zero(spec))
    assert sol.iterations == 0 and sol.residual == 0
    assert area_integral(sol) == pytest.approx(math.pi, rel=1e-12)


def test_distortion_bound(spec):
    with pytest.raises(DistortionBound):
        BeltramiCoefficient.constant(spec, 1.0)


def test_constant_mu_oracle():
    spec = GridSpec(512)
    k = 0.3
    sol = solve_principal(BeltramiCoefficient.constant(spec, k))
    inner = np.abs(spec.z) <= 0.8
    assert np.max(np.abs(sol.fz[inner] - 1)) < 0.02
    assert np.max(np.abs(sol.fzbar[inner] - k)) < 0.02
    assert sol.b1 == pytest.approx(k, abs=0.01)
    assert area_integral(sol) == pytest.approx(math.pi * (1 - k * k), rel=5e-3)


def test_residual_contraction(spec):
    mu = BeltramiCoefficient.constant(spec, 0.3)
    sol = solve_principal(mu)
    hist = np.asarray(sol.history)
    n = np.arange(hist.size)
    assert np.all(hist <= 0.3**n * mu.field.l2_norm() / 0.7 + 1e-12)
    assert sol.residual <= 1e-10


def test_nonconvergence_carries_history(spec):
    with pytest.raises(NonConvergence) as e:
        solve_principal(BeltramiCoefficient.constant(spec, 0.5), tol=1e-30)
    assert len(e.value.history) > 5


@settings(max_examples=10, deadline=None)
@given(st.floats(0.05, 0.6), st.integers(0, 1000))
def test_area_inequality_random(k, seed):
    spec = GridSpec(128)
    sol = solve_principal(BeltramiCoefficient.random(spec, k, np.random.default_rng(seed)))
    assert area_integral(sol) <= math.pi * (1 + 2e-3)


def test_deform_family_endpoints(spec):
    mu = BeltramiCoefficient.random(spec, 0.3, np.random.default_rng(4))
    p = 3.0
    assert np.allclose(deform_family(mu, p, 0.0).values, 0)
    assert np.allclose(deform_family(mu, p, 1 / (p - 1)).values, mu.values, atol=1e-14)
    for lam in (0.9, -0.9, 0.9j, 0.5 - 0.5j):
        assert np.all(np.abs(deform_family(mu, p, lam).values) <= abs(lam) + 1e-14)
    with pytest.raises(DomainError):
        FamilyParams(5.0, 0.1).check(0.3)


def test_phi_field_at_origin_is_one(spec):
    mu = BeltramiCoefficient.random(spec, 0.3, np.random.default_rng(4))
    assert np.allclose(phi_field(mu, 3.0, 0.0).values, 1.0)


def test_phi_at_lambda_naught_is_df(spec):
    mu = BeltramiCoefficient.random(spec, 0.3, np.random.default_rng(4))
    phi, sol = phi_field(mu, 3.0, 0.5, return_solution=True)
    ref = solve_principal(mu)
    dw = spec.disk_weights > 0
    assert np.allclose(np.abs(phi.values[dw]), (np.abs(ref.fz) + np.abs(ref.fzbar))[dw], rtol=1e-8)


def test_radial_mu_against_profile_oracle():
    spec = GridSpec(512)
    coef = RadialCoefficient.constant(1 / 3)
    sol = solve_principal(BeltramiCoefficient.radial(spec, coef))
    r = np.abs(spec.z)
    band = (r >= 0.1) & (r <= 0.9)
    # oracle z |z|^{-1/2}: |f_z| + |f_zbar| = rho/t = t^{-1/2}
    df = (np.abs(sol.fz) + np.abs(sol.fzbar))[band]
    oracle = r[band] ** -0.5
    assert np.max(np.abs(df - oracle) / oracle) < 0.03


def test_field_round_trip(tmp_path, spec):
    rng = np.random.default_rng(2)
    f = GridField(spec, rng.standard_normal((spec.N, spec.N)) + 1j * rng.standard_normal((spec.N, spec.N)))
    p = write_field(tmp_path / "f.qcgf", f)
    g = read_field(p)
    assert g.spec.N == spec.N and g.spec.L == spec.L
    assert np.array_equal(g.values, f.values)
    raw = field_to_bytes(f)
    assert raw[:4] == b"QCGF" and len(raw) == 20 + 16 * spec.N**2
    with pytest.raises(InvalidInput):
        field_from_bytes(b"XXXX" + raw[4:])
    with pytest.raises(InvalidInput):
        field_from_bytes(raw[:-16])
