import numpy as np
import pytest

from hardydil.dilations import check_admissible
from hardydil.errors import GridMismatch, LadderEmpty
from hardydil.grid import Bump, GridFunction, GridSpec
from hardydil.lie import abelian, bch_coords, heisenberg
from hardydil.maximal import (
    Ladder,
    dilated_kernel,
    grand_maximal_proxy,
    group_convolve,
    radial_maximal,
    scaling_invariance_check,
)
from oracles import triangle

R1 = abelian(1)


@pytest.fixture(scope="module")
def line():
    g = GridSpec(3.0, 301, 1)
    A = check_admissible([[1.0]], R1)
    f = GridFunction.from_callable(g, Bump(1, outer=1.0))
    return g, A, f


def test_indicator_convolution_is_triangle():
    g = GridSpec(2.0, 401, 1)
    ind = GridFunction.from_callable(g, lambda x: ((x[:, 0] >= 0) & (x[:, 0] <= 1)).astype(float))
    out = group_convolve(ind, ind, R1)
    # node sums of a discontinuous kernel are first-order accurate
    assert np.abs(out.flat - triangle(g.nodes()[:, 0])).max() <= 2 * g.h
    one = np.argmin(np.abs(g.nodes()[:, 0] - 1.0))
    assert out.flat[one] == pytest.approx(1.0, abs=2 * g.h)


def test_discrete_delta_reproduces_function():
    g = GridSpec(1.0, 41, 2)
    f = GridFunction.from_callable(g, Bump(2, outer=0.8))
    delta = np.zeros(g.size)
    delta[g.size // 2] = 1.0 / g.weight
    out = group_convolve(f, GridFunction(g, delta), abelian(2))
    assert np.allclose(out.flat, f.flat, atol=1e-12)


def test_convolution_of_zero_and_grid_mismatch():
    g = GridSpec(1.0, 11, 1)
    z = GridFunction.zeros(g)
    assert not group_convolve(z, z, R1).flat.any()
    with pytest.raises(GridMismatch):
        group_convolve(z, GridFunction.zeros(GridSpec(1.0, 13, 1)), R1)


def test_heisenberg_convolution_matches_pointwise_sum():
    H = heisenberg()
    g = GridSpec(1.0, 9, 3)
    rng = np.random.default_rng(0)
    f = GridFunction(g, rng.normal(size=g.size) * (np.linalg.norm(g.nodes(), axis=1) < 0.6))
    phi = Bump(3, outer=0.7)
    out = group_convolve(f, GridFunction.from_callable(g, phi), H)
    x = g.nodes()[100]
    y, v = f.support()
    rel = bch_coords(-y, np.broadcast_to(x, y.shape), H)
    ref = np.sum(v * GridFunction.from_callable(g, phi).sample(rel)) * g.weight
    assert out.flat[100] == pytest.approx(ref, abs=1e-12)


def test_zero_function_has_zero_maximal(line):
    g, A, _ = line
    res = radial_maximal(GridFunction.zeros(g), Bump(1), A, Ladder.symmetric(4, 4), R1)
    assert not res.values.any()


def test_maximal_dominates_unit_scale(line):
    g, A, f = line
    phi = Bump(1, outer=0.5)
    res = radial_maximal(f, phi, A, Ladder.symmetric(4, 8), R1)
    unit = group_convolve(f, GridFunction.from_callable(g, dilated_kernel(phi, A, 0.0)), R1)
    assert np.all(res.values >= np.abs(unit.flat) - 1e-12)


def test_dense_ladder_agrees(line):
    _, A, f = line
    phi = Bump(1, outer=0.5)
    coarse = Ladder.span(8, -16, 16)
    fine = coarse.refined(10)
    pts = np.linspace(-2.5, 2.5, 41)[:, None]
    a = radial_maximal(f, phi, A, coarse, R1, points=pts).values
    b = radial_maximal(f, phi, A, fine, R1, points=pts).values
    assert np.all(b >= a - 1e-12)
    assert np.max((b - a) / b) <= 0.02


def test_empty_ladder(line):
    g, A, f = line
    with pytest.raises(LadderEmpty):
        radial_maximal(f, Bump(1), A, Ladder(8, ()), R1)


@pytest.mark.parametrize("c", [1.0, 2.0, 1 / 3])
def test_matched_scaling_invariance(c):
    H = heisenberg()
    A = check_admissible(np.diag([1.0, 1.0, 2.0]), H)
    g = GridSpec(1.0, 9, 3)
    f = GridFunction.from_callable(g, Bump(3, outer=0.8))
    res = scaling_invariance_check(f, Bump(3, outer=0.5), A, c, Ladder.symmetric(4, 4), H)
    assert res <= 1e-12
    if c == 1.0:
        assert res == 0.0


def test_unmatched_ladder_differs(line):
    _, A, f = line
    pts = np.linspace(-2, 2, 9)[:, None]
    res = scaling_invariance_check(f, Bump(1, outer=0.5), A, 2.0, Ladder.symmetric(4, 4), R1,
                                   matched=False, points=pts)
    assert res > 0


def test_grand_maximal_proxy(line):
    _, A, f = line
    pts = np.linspace(-2, 2, 9)[:, None]
    lad = Ladder.symmetric(4, 4)
    p1, p2 = Bump(1, outer=0.5), Bump(1, outer=1.5, inner=0.5)
    single = radial_maximal(f, p1, A, lad, R1, points=pts).values
    assert np.array_equal(grand_maximal_proxy(f, [p1], A, lad, R1, points=pts), single)
    both = grand_maximal_proxy(f, [p1, p2], A, lad, R1, points=pts)
    other = radial_maximal(f, p2, A, lad, R1, points=pts).values
    assert np.array_equal(both, np.maximum(single, other))
