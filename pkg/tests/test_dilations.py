import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hardydil.dilations import (
    GeneralDilation,
    check_admissible,
    commute_identity_check,
    dilate_coords,
    dilate_function,
    dilate_point,
    random_admissible,
)
from hardydil.errors import (
    ConfigInvalid,
    DimensionMismatch,
    GridCoverage,
    NonpositiveEigenvalue,
    NonpositiveScale,
    NotDerivation,
    NotDiagonalizable,
)
from hardydil.grid import Bump, GridFunction, GridSpec, lp_quasinorm
from hardydil.lie import abelian, bch_coords, engel, heisenberg


def test_identity_is_admissible(R2):
    D = check_admissible(np.eye(2), R2)
    assert np.allclose(D.eigenvalues, [1, 1]) and D.is_normalized


def test_heisenberg_weights_are_a_derivation(H):
    assert np.allclose(check_admissible(np.diag([1, 1, 2]), H).eigenvalues, [1, 1, 2])


def test_wrong_weights_name_the_pair(H):
    with pytest.raises(NotDerivation) as err:
        check_admissible(np.diag([1, 2, 2]), H)
    assert err.value.pair in {(0, 1), (1, 0)}


def test_rejections(R2):
    with pytest.raises(NonpositiveEigenvalue):
        check_admissible(np.diag([1.0, -1.0]), R2)
    with pytest.raises(NotDiagonalizable):
        check_admissible([[1.0, 1.0], [0.0, 1.0]], R2)
    with pytest.raises(DimensionMismatch):
        check_admissible(np.eye(3), R2)


def test_dilation_of_heisenberg_point(H):
    A = check_admissible(np.diag([1, 1, 2]), H)
    assert np.allclose(dilate_point(A, 2.0, [1, 1, 1]).coords, [2, 2, 4])
    assert np.allclose(dilate_point(A, 1.0, [0.3, -1, 2]).coords, [0.3, -1, 2])
    with pytest.raises(NonpositiveScale):
        dilate_point(A, 0.0, [1, 1, 1])


@pytest.mark.parametrize("algebra", [heisenberg(), engel()], ids=["heisenberg", "engel"])
def test_random_admissible_dilations_are_automorphisms(algebra, rng):
    for _ in range(10):
        A = random_admissible(algebra, rng)
        x, y = rng.normal(size=(2, algebra.dim))
        r = float(rng.uniform(0.2, 3))
        lhs = dilate_coords(A, r, bch_coords(x, y, algebra))
        rhs = bch_coords(dilate_coords(A, r, x), dilate_coords(A, r, y), algebra)
        assert np.allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(lhs).max()))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.1, 5))
def test_one_parameter_group_law(r, s):
    A = check_admissible(np.diag([1, 1, 2]), heisenberg())
    x = np.array([0.3, -0.7, 1.1])
    assert np.allclose(dilate_coords(A, r, dilate_coords(A, s, x)), dilate_coords(A, r * s, x), rtol=1e-12, atol=1e-12)


def test_commute_identity(rng):
    G = GeneralDilation(rng.normal(size=(3, 3)))
    assert commute_identity_check(G, 2.0, 3.0, rng.normal(size=3)) <= 1e-12
    assert commute_identity_check(G, 1.0, 1.0, [1, 2, 3]) == 0.0


def test_dilate_function_indicator_on_line():
    g = GridSpec(2.0, 401, 1)
    f = GridFunction.from_callable(g, lambda x: ((x[:, 0] >= 0) & (x[:, 0] <= 1)).astype(float))
    A = check_admissible([[1.0]], abelian(1))
    out = dilate_function(A, 2.0, 1.0, f, method="nearest")
    expect = 2.0 * ((g.nodes()[:, 0] >= 0) & (g.nodes()[:, 0] <= 0.5))
    assert np.array_equal(out.flat, expect)
    assert np.array_equal(dilate_function(A, 1.0, 1.0, f).flat, f.flat)


def test_transport_preserves_lp(R2):
    A = check_admissible(np.diag([1.0, 2.0]), R2)
    g = GridSpec(1.0, 41, 2)
    f = GridFunction.from_callable(g, lambda x: np.exp(-10 * np.sum(x**2, axis=1)))
    for t in (0.5, 3.0):
        moved = dilate_function(A, t, 0.5, f, method="transport")
        assert lp_quasinorm(moved, 0.5) == pytest.approx(lp_quasinorm(f, 0.5), rel=1e-12)


def test_resampled_lp_within_quadrature(R2):
    A = check_admissible(np.diag([1.0, 2.0]), R2)
    g = GridSpec(3.0, 301, 2)
    f = GridFunction.from_callable(g, Bump(2, outer=1.0))
    out = dilate_function(A, 1.5, 1.0, f)
    assert lp_quasinorm(out, 1.0) == pytest.approx(lp_quasinorm(f, 1.0), rel=0.01)


def test_grid_spec_validation():
    with pytest.raises(ConfigInvalid):
        GridSpec(1.0, 4, 2)
    with pytest.raises(ConfigInvalid):
        GridSpec(-1.0, 5, 2)
    g = GridSpec(1.0, 5, 2)
    assert g.size == 25 and g.h == 0.5
    assert GridSpec.from_json(g.to_json()).same_as(g)


def test_sampling_outside_a_nonvanishing_grid_raises():
    g = GridSpec(1.0, 5, 1)
    f = GridFunction(g, np.ones(5))
    with pytest.raises(GridCoverage):
        f.sample([[3.0]])
    z = GridFunction(g, [0, 1, 1, 1, 0])
    assert z.sample([[3.0]])[0] == 0.0


def test_lp_of_unit_box():
    g = GridSpec(1.0, 201, 1)
    f = GridFunction.from_callable(g, lambda x: ((x[:, 0] >= 0) & (x[:, 0] <= 1)).astype(float))
    assert lp_quasinorm(f, 1.0) == pytest.approx(1.0, abs=1.5 * g.h)
    assert lp_quasinorm(GridFunction.zeros(g), 0.5) == 0.0


@pytest.mark.parametrize("n,inner", [(1, 0.0), (2, 0.3), (3, 0.5)])
def test_bump_is_normalized(n, inner):
    b = Bump(n, outer=1.0, inner=inner)
    if n == 1:
        total, _ = integrate.quad(lambda x: b(np.array([x])), -1, 1, epsabs=1e-13)
    else:
        g = GridSpec(1.0, 161 if n == 2 else 61, n)
        total = GridFunction.from_callable(g, b).integral()
    assert total == pytest.approx(1.0, rel=1e-3 if n > 1 else 1e-10)
