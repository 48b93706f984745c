import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hsfm.hgroup import (GroupFunction, GroupGrid, GroupPoint, group_inv, group_mul, inner,
                         left_translate, lp_norm, symplectic)

coord = st.floats(-50, 50, allow_nan=False)


@st.composite
def points(draw, n=1):
    z = [complex(draw(coord), draw(coord)) for _ in range(n)]
    return GroupPoint(np.array(z), draw(coord))


def test_identity_and_substitution():
    e = GroupPoint.identity(1)
    w = GroupPoint(np.array([2 - 1j]), 0.3)
    assert group_mul(e, w) == w
    p = group_mul(GroupPoint(np.array([1.0]), 0.0), GroupPoint(np.array([1j]), 0.0))
    assert p.z[0] == 1 + 1j
    assert p.t == -0.5


def test_inverse_examples():
    assert group_inv(GroupPoint.identity(2)) == GroupPoint.identity(2)
    p = GroupPoint(np.array([1 + 2j, -3j]), 4.0)
    q = group_inv(p)
    assert np.array_equal(q.z, -p.z) and q.t == -4.0
    assert group_inv(q) == p


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        group_mul(GroupPoint.identity(1), GroupPoint.identity(2))


@settings(max_examples=200, deadline=None)
@given(points(), points(), points())
def test_associativity(p, q, r):
    a = group_mul(group_mul(p, q), r)
    b = group_mul(p, group_mul(q, r))
    assert np.allclose(a.z, b.z, atol=1e-12, rtol=0)
    assert abs(a.t - b.t) <= 1e-12 * max(1.0, abs(a.t))


@given(points(2))
def test_inverse_law(p):
    e = group_mul(p, group_inv(p))
    assert np.all(e.z == 0) and e.t == 0
    assert symplectic(p.z, p.z) == 0


def test_grid_validation():
    with pytest.raises(ValueError):
        GroupGrid(1, 1.0, 5, 1.0, 8)
    with pytest.raises(ValueError):
        GroupGrid(1, -1.0, 4, 1.0, 8)
    with pytest.raises(ValueError):
        GroupGrid(3, 1.0, 64, 1.0, 64)


def test_sample_order_x1_fastest():
    g = GroupGrid(1, 2.0, 4, 1.0, 4)
    assert g.z[1, 0] - g.z[0, 0] == g.h
    assert g.z[g.Nz, 0] - g.z[0, 0] == 1j * g.h
    assert g.z[g.origin_index, 0] == 0
    assert g.locate(np.array([1 - 1j])) == g.flat_index([3, 1])


def test_translate_identity_and_central_shift(small, rng):
    grid, _ = small
    f = GroupFunction(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))
    assert np.array_equal(left_translate(f, GroupPoint.identity(1)).values, f.values)
    g = left_translate(f, GroupPoint(np.zeros(1), grid.dt))
    assert np.array_equal(g.values, np.roll(f.values, 1, axis=0))


def test_translate_composition():
    grid = GroupGrid(1, 4.0, 8, 2.0, 8)
    assert grid.heisenberg_periodic
    rng = np.random.default_rng(0)
    f = GroupFunction(grid, rng.normal(size=grid.shape))
    for _ in range(10):
        u = GroupPoint(np.array([complex(*rng.integers(-3, 4, 2))]), 0.5 * float(rng.integers(-4, 5)))
        v = GroupPoint(np.array([complex(*rng.integers(-3, 4, 2))]), 0.5 * float(rng.integers(-4, 5)))
        lhs = left_translate(left_translate(f, v), u)
        rhs = left_translate(f, group_mul(u, v))
        assert np.array_equal(lhs.values, rhs.values)


def test_translate_rejects_misaligned(small):
    grid, _ = small
    f = GroupFunction.zeros(grid)
    with pytest.raises(ValueError):
        left_translate(f, GroupPoint(np.array([0.3]), 0.0))
    with pytest.raises(ValueError):
        left_translate(f, GroupPoint(np.zeros(1), 0.1))


@settings(max_examples=30, deadline=None)
@given(st.integers(-6, 6), st.integers(-6, 6), st.integers(-12, 12), st.sampled_from([1.0, 1.5, 2.0, 3.0, math.inf]))
def test_translate_is_isometry(a, b, s, p):
    grid = GroupGrid(1, 6.0, 12, 3.0, 24)
    f = GroupFunction(grid, np.random.default_rng(abs(a + 7 * b)).normal(size=grid.shape))
    g = left_translate(f, GroupPoint(np.array([complex(a, b)]), s * grid.dt))
    assert lp_norm(g, p) == pytest.approx(lp_norm(f, p), rel=1e-14)


def test_lp_norm_examples():
    grid = GroupGrid(1, 3.0, 12, 2.0, 8)
    assert lp_norm(GroupFunction.zeros(grid), 3) == 0
    v = np.zeros(grid.shape)
    v[2, 5] = 7.0
    f = GroupFunction(grid, v)
    for p in (1.0, 2.0, 3.5):
        assert lp_norm(f, p) == pytest.approx(7.0 * (grid.dV * grid.dt) ** (1 / p), rel=1e-14)
    assert lp_norm(f, math.inf) == 7.0
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


def test_lp_norm_gaussian_integral():
    grid = GroupGrid(1, 10.0, 64, 10.0, 64)
    f = GroupFunction.from_callable(grid, lambda z, t: np.exp(-(np.abs(z[..., 0]) ** 2 + t**2) / 2))
    for p in (1.0, 2.0, 4.0):
        exact = ((2 * math.pi / p) ** 1.5) ** (1 / p)
        assert lp_norm(f, p) == pytest.approx(exact, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.1, 10), st.sampled_from([1.0, 2.0, 3.0, 7.5]))
def test_lp_norm_homogeneous_and_subadditive(seed, c, p):
    grid = GroupGrid(1, 2.0, 4, 2.0, 4)
    r = np.random.default_rng(seed)
    f = GroupFunction(grid, r.normal(size=grid.shape) + 1j * r.normal(size=grid.shape))
    g = GroupFunction(grid, r.normal(size=grid.shape))
    assert lp_norm(f * c, p) == pytest.approx(c * lp_norm(f, p), rel=1e-12)
    assert lp_norm(f + g, p) <= (lp_norm(f, p) + lp_norm(g, p)) * (1 + 1e-12)


def test_inner_matches_norm(small, rng):
    grid, _ = small
    f = GroupFunction(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))
    assert inner(f, f).real == pytest.approx(lp_norm(f, 2) ** 2, rel=1e-12)


def test_group_function_immutable(small):
    grid, _ = small
    f = GroupFunction.zeros(grid)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1
    with pytest.raises(AttributeError):
        f.grid = None
    with pytest.raises(ValueError):
        GroupFunction(grid, np.full(grid.shape, np.nan))
