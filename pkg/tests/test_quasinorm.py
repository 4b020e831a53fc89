import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hardydil.dilations import check_admissible, dilate_coords, random_admissible
from hardydil.errors import NotNormalized
from hardydil.lie import abelian, bch_coords, heisenberg
from hardydil.quasinorm import (
    Ball,
    QuasiNormHandle,
    ball_membership,
    estimate_eta_constants,
    estimate_quasi_triangle_C,
    euclid_quasi_triangle,
    explicit_quasi_norm,
    quasi_norm,
)
from oracles import diagonal_quasi_norm


@pytest.fixture(scope="module")
def hh():
    H = heisenberg()
    return QuasiNormHandle(check_admissible(np.diag([1.0, 1.0, 2.0]), H), H)


@pytest.fixture(scope="module")
def h12():
    R2 = abelian(2)
    return QuasiNormHandle(check_admissible(np.diag([1.0, 2.0]), R2), R2)


def test_identity_gives_euclidean_norm(rng):
    R2 = abelian(2)
    h = QuasiNormHandle(check_admissible(np.eye(2), R2), R2)
    x = rng.normal(size=(100, 2))
    assert np.allclose(quasi_norm(h, x), np.linalg.norm(x, axis=1), rtol=1e-13)


def test_diagonal_closed_form(h12):
    assert quasi_norm(h12, [0.0, 4.0]) == pytest.approx(2.0, rel=1e-14)
    assert quasi_norm(h12, [0.0, 0.0]) == 0.0


def test_against_bracketing_oracle(h12, rng):
    x = rng.normal(size=(200, 2)) * 3
    ours = quasi_norm(h12, x)
    ref = np.array([diagonal_quasi_norm([1, 2], p) for p in x])
    assert np.allclose(ours, ref, rtol=1e-12)


@settings(max_examples=80, deadline=None)
@given(arrays(np.float64, 3, elements=st.floats(-5, 5)), st.floats(0.05, 20))
def test_homogeneity_property(x, r):
    H = heisenberg()
    A = check_admissible(np.diag([1.0, 1.0, 2.0]), H)
    h = QuasiNormHandle(A, H)
    assert quasi_norm(h, dilate_coords(A, r, x)) == pytest.approx(r * quasi_norm(h, x), rel=1e-10, abs=1e-300)


def test_symmetry_is_exact_for_twisted_matrices(rng):
    H = heisenberg()
    h = QuasiNormHandle(random_admissible(H, rng), H)
    x = rng.normal(size=(500, 3))
    assert np.array_equal(quasi_norm(h, x), quasi_norm(h, -x))


def test_explicit_gauge_is_homogeneous(hh, rng):
    x = rng.normal(size=(50, 3))
    r = 2.7
    lhs = explicit_quasi_norm(hh, dilate_coords(hh.dilation, r, x))
    assert np.allclose(lhs, r * explicit_quasi_norm(hh, x), rtol=1e-12)


def test_ball_membership_basics(hh):
    assert ball_membership(Ball(np.zeros(3), 0.5, handle=hh), np.zeros(3))
    R1 = abelian(1)
    b = Ball(np.zeros(1), 1.0, handle=QuasiNormHandle(check_admissible([[1.0]], R1), R1))
    assert not ball_membership(b, [2.0])


def test_translated_ball_is_translate_of_centered_ball(hh, rng):
    x0 = np.array([0.4, -0.2, 0.7])
    r = 0.8
    pts = rng.uniform(-2, 2, size=(10_000, 3))
    direct = ball_membership(Ball(x0, r, handle=hh), pts)
    # y in x0 B(e,r)  <=>  x0^{-1} y in B(e,r), computed with the matrix-free inverse
    pulled = bch_coords(-x0, pts, hh.algebra)
    assert np.array_equal(direct, quasi_norm(hh, pulled) < r)
    assert direct.sum() > 100


def test_triangle_constant_abelian_identity():
    R2 = abelian(2)
    h = QuasiNormHandle(check_admissible(np.eye(2), R2), R2)
    assert estimate_quasi_triangle_C(h, 5000)["C"] <= 1.0 + 1e-12


def test_triangle_constant_is_monotone_in_samples(hh):
    a = estimate_quasi_triangle_C(hh, 2000, seed=3)["C"]
    b = estimate_quasi_triangle_C(hh, 4000, seed=3)["C"]
    assert b >= a and np.isfinite(b)


def test_product_with_identity_keeps_norm(hh, rng):
    x = rng.normal(size=(20, 3))
    xe = bch_coords(x, np.zeros_like(x), hh.algebra)
    assert np.array_equal(quasi_norm(hh, xe), quasi_norm(hh, x))


def test_eta_constants_identity():
    R2 = abelian(2)
    h = QuasiNormHandle(check_admissible(np.eye(2), R2), R2)
    c = estimate_eta_constants(h, 1.0, 2000)
    assert c["gamma"] == 1.0 and c["c1"] == pytest.approx(1.0) and c["c2"] == pytest.approx(1.0)


def test_eta_constants_hold_on_fresh_points(h12):
    c = estimate_eta_constants(h12, 1.0, 10_000, seed=1)
    assert c["gamma"] == 0.5
    x = h12.sample_ball(1.0, 100_000, np.random.default_rng(99))
    n = np.linalg.norm(x, axis=1)
    rho = quasi_norm(h12, x)
    assert np.all(c["c1"] * n <= rho * (1 + 1e-12))
    assert np.all(rho <= c["c2"] * n ** c["gamma"] * (1 + 1e-12))


def test_eta_constants_need_normalized_matrix():
    R2 = abelian(2)
    h = QuasiNormHandle(check_admissible(np.diag([2.0, 3.0]), R2), R2)
    with pytest.raises(NotNormalized):
        estimate_eta_constants(h, 1.0, 100)


def test_euclid_triangle_abelian(rng):
    R2 = abelian(2)
    h = QuasiNormHandle(check_admissible(np.eye(2), R2), R2)
    x, y = rng.normal(size=(2, 1000, 2))
    c, inside = euclid_quasi_triangle(h, 10.0, x, y)
    assert np.all(c <= 1 + 1e-12) and inside.all()
