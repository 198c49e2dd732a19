import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcburk import functionals as fn
from qcburk.errors import DomainError, InvalidInput

finite = st.floats(-3, 3, allow_nan=False)
cplx = st.builds(complex, finite, finite)


@pytest.mark.parametrize("p", [-2, 0, 1, 2, 3, 4, 10])
def test_identity_normalization(p):
    assert fn.burkholder_p(fn.PlanarDeriv(1.0, 0.0), p) == 1.0


def test_identity_normalization_matrix_form():
    for p in (-2.0, 0.5, 3.0):
        assert fn.burkholder(p)(np.eye(2)) == pytest.approx(1.0, abs=1e-15)


@given(cplx, cplx)
def test_matrix_round_trip(a, b):
    d = fn.PlanarDeriv(a, b)
    e = fn.PlanarDeriv.from_matrix(d.to_matrix())
    assert abs(e.dz - a) < 1e-12 and abs(e.dzbar - b) < 1e-12


@given(cplx, cplx)
def test_opnorm_and_jacobian(a, b):
    d = fn.PlanarDeriv(a, b)
    M = d.to_matrix()
    assert d.opnorm == pytest.approx(np.linalg.norm(M, 2), rel=1e-10, abs=1e-12)
    assert d.jac == pytest.approx(np.linalg.det(M), rel=1e-10, abs=1e-10)


@settings(max_examples=200)
@given(cplx, cplx, st.floats(2, 8))
def test_burkholder_p_ge_1_closed_form(a, b, p):
    A, B = abs(a), abs(b)
    d = fn.PlanarDeriv(a, b)
    ref = (A - (p - 1) * B) * (A + B) ** (p - 1)
    assert fn.burkholder_p(d, p) == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_extended_branch_needs_positive_det():
    with pytest.raises(DomainError):
        fn.burkholder_p(fn.PlanarDeriv(0.5, 1.0), 0.5)


@settings(max_examples=200)
@given(st.floats(-3, 5), st.integers(0, 10**6))
def test_hat_duality(p, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((2, 2))
    if np.linalg.det(A) < 0:
        A[0] *= -1
    if abs(np.linalg.det(A)) < 1e-3:
        return
    lhs = fn.inverse_functional(fn.burkholder(p), A)
    rhs = fn.burkholder(2 - p)(A)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("p,shape", [(-1.0, "concave"), (0.0, "affine"), (0.5, "convex"), (1.5, "convex"),
                                     (2.0, "affine"), (3.0, "concave")])
def test_trichotomy_probes(p, shape):
    rng = np.random.default_rng(11)
    E = fn.burkholder(p)
    for _ in range(150):
        while True:
            A = rng.standard_normal((2, 2))
            if np.linalg.det(A) > 0.05:
                break
        r = fn.rank_one_probe(E, A, fn.random_rank_one(rng))
        assert getattr(r, shape)(1e-8), (p, r.max_second_difference, r.min_second_difference)


def test_probe_rejects_rank_two():
    with pytest.raises(InvalidInput):
        fn.rank_one_probe(fn.burkholder(3), np.eye(2), np.eye(2))


def test_probe_clips_to_positive_det():
    A = np.eye(2)
    X = np.outer([1.0, 0.0], [1.0, 0.0])
    r = fn.rank_one_probe(fn.burkholder(0.5), A, -3 * X, radius=2.0)
    lo, hi = r.clipped
    assert hi < 1 / 3 and lo == -2.0


def test_burkholder_constant_value_and_domain():
    assert fn.burkholder_constant(2) == pytest.approx(1.0)
    assert fn.burkholder_constant(3) == pytest.approx((1 / 3) * (2 / 3) ** -2)
    with pytest.raises(DomainError):
        fn.burkholder_constant(1.5)


@settings(max_examples=300)
@given(cplx, cplx, st.floats(2, 6))
def test_burkholder_lower_bound(a, b, p):
    lb = fn.burkholder_lower_bound(fn.PlanarDeriv(a, b), p)
    assert lb.lhs <= lb.rhs + 1e-9 * max(1.0, abs(lb.rhs))


def test_nd_reduces_to_planar():
    rng = np.random.default_rng(2)
    for _ in range(20):
        A = rng.standard_normal((2, 2))
        for p in (2.0, 3.0):
            assert fn.burkholder_nd(A, p) == pytest.approx(float(fn.burkholder(p)(A)), rel=1e-10, abs=1e-12)


def test_derived_functionals_identity():
    F, H = fn.derived_functionals(fn.PlanarDeriv(1.0, 0.0))
    assert F == 0.0 and H == 0.5


def test_derived_F_is_p_derivative_at_2():
    d = fn.PlanarDeriv(1.3 + 0.2j, 0.4 - 0.1j)
    h = 1e-5
    num = (fn.burkholder_p(d, 2 + h) - fn.burkholder_p(d, 2 - h)) / (2 * h)
    assert fn.derived_functionals(d).F == pytest.approx(num, rel=1e-8)


@pytest.mark.parametrize("p", [0.5, 3.0])
def test_batched_probe_matches_single(p):
    rng = np.random.default_rng(17)
    E = fn.burkholder(p)
    A = np.stack([np.eye(2) + 0.2 * rng.standard_normal((2, 2)) for _ in range(6)])
    X = np.stack([fn.random_rank_one(rng) for _ in range(6)])
    batch = fn.rank_one_probes(E, A, X, samples=7)
    for i in range(6):
        one = fn.rank_one_probe(E, A[i], X[i], samples=7)
        assert np.allclose(one.second_diff, batch.second_diff[i], rtol=1e-12, atol=1e-12)
        assert np.allclose(one.scale, batch.scale[i], rtol=1e-12)


@pytest.mark.parametrize("p", [2.0, 3.0, 5.0])
def test_lower_bound_brute_force(p):
    rng = np.random.default_rng(int(p))
    z = rng.standard_normal((4, 100_000))
    d = fn.PlanarDeriv(z[0] + 1j * z[1], z[2] + 1j * z[3])
    lb = fn.burkholder_lower_bound(d, p)
    scale = (np.abs(d.dz) + np.abs(d.dzbar)) ** p
    assert np.all(lb.lhs <= lb.rhs + 1e-10 * scale)
    # the printed constant p (1 - 1/p)^(1-p) is larger by p^2 and breaks at the identity
    printed = p * (1 - 1 / p) ** (1 - p)
    assert printed * 1.0 > float(fn.burkholder_p(fn.PlanarDeriv(1.0, 0.0), p))
