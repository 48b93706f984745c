import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hsfm.fan import build_fan, constant_symbol, power_symbol, table_symbol
from hsfm.hgroup import GroupFunction, GroupGrid, lp_norm
from hsfm.pde import (DivergenceError, MaxIterError, PDEProblem, TimeGrid, _Picard, contraction_bound,
                      contraction_factors, heat_semigroup, heat_symbol, solve, t_star, trapezoid_weights)
from hsfm.sft import forward, project
from hsfm.specfun import laguerre_fn
from hsfm.verify import gaussian


@pytest.fixture(scope="module")
def tiny():
    grid = GroupGrid(1, 3.0, 8, 2.0, 8)
    return grid, build_fan(grid, 3)


def real_bump(grid, norm=0.1):
    g = gaussian(grid, 0.7, 0.7)
    return g * (norm / lp_norm(g, 2))


def test_timegrid():
    tg = TimeGrid(0.5, 4)
    assert tg.dtau == 0.125
    np.testing.assert_allclose(tg.nodes, [0, 0.125, 0.25, 0.375, 0.5])
    with pytest.raises(ValueError):
        TimeGrid(0.5, 1)
    with pytest.raises(ValueError):
        TimeGrid(-1.0, 4)


def test_trapezoid_weights():
    assert trapezoid_weights(0, 0.1).tolist() == [0.0]
    w = trapezoid_weights(4, 0.25)
    assert w.sum() == pytest.approx(1.0)
    assert w[0] == w[-1] == 0.125


def test_t_star():
    assert t_star(2, 2, 1, 1) == pytest.approx(1 / 8)
    with pytest.raises(ValueError):
        t_star(1.0, 2, 1, 1)
    assert contraction_bound(2, 2, 1, 1 / 8, 1) == pytest.approx(1.0)
    assert contraction_bound(2, 2, 1, 1 / 16, 1) == pytest.approx(0.5)


@given(st.floats(1.01, 10), st.floats(1.1, 4), st.floats(0.01, 10), st.floats(0.01, 10), st.floats(1.01, 3))
def test_t_star_monotone(delta, p, C, u, f):
    assert t_star(delta, p, C * f, u) <= t_star(delta, p, C, u)
    assert t_star(delta, p, C, u * f) <= t_star(delta, p, C, u)
    assert contraction_bound(delta, p, C, t_star(delta, p, C, u), u) <= 1 + 1e-12


def test_problem_validation(tiny):
    grid, fan = tiny
    u0 = real_bump(grid)
    m = power_symbol(1, 2, 1)
    with pytest.raises(ValueError):
        PDEProblem("heat3", m, 2, u0, fan)
    with pytest.raises(ValueError):
        PDEProblem("heat1", m, 1.0, u0, fan)
    with pytest.raises(ValueError):
        PDEProblem("wave1", m, 2, u0, fan)
    with pytest.raises(ValueError):
        PDEProblem("wave1", m, 2, u0, fan, b=([0, 1], [1, -1]))
    pb = PDEProblem("wave1", m, 2, u0, fan, b=([0, 1], [1, 3]))
    assert pb.b_at(0.5) == 2.0
    with pytest.raises(ValueError):
        solve(pb, TimeGrid(0.1, 2), tol=0)


@pytest.mark.parametrize("kind", ["heat1", "heat2", "wave1", "wave2"])
def test_zero_data(tiny, kind):
    grid, fan = tiny
    pb = PDEProblem(kind, power_symbol(1, 2, 1), 2.0, GroupFunction.zeros(grid), fan, d=1.0, b=([0.0], [1.0]))
    traj = solve(pb, TimeGrid(0.1, 4))
    assert traj.iterations == 1
    assert traj.residual == 0
    assert not np.any(traj.as_array())


def test_zero_symbol_returns_data(tiny):
    grid, fan = tiny
    u0 = real_bump(grid)
    u1 = gaussian(grid, 1.0, 1.0) * 0.05
    zero = constant_symbol(0.0, fan)
    tg = TimeGrid(0.2, 4)
    traj = solve(PDEProblem("heat1", zero, 2, u0, fan), tg)
    for u in traj.states:
        np.testing.assert_array_equal(u.values, u0.values)
    traj = solve(PDEProblem("wave1", zero, 2, u0, fan, b=([0.0], [2.0]), u1=u1), tg)
    for tau, u in zip(tg.nodes, traj.states):
        np.testing.assert_allclose(u.values, (u0 + u1 * tau).values, atol=1e-15)
    traj = solve(PDEProblem("wave2", zero, 2, u0, fan, u1=u1), tg)
    for tau, u in zip(tg.nodes, traj.states):
        np.testing.assert_allclose(u.values, (u0 + u1 * (1 - math.exp(-tau))).values, atol=1e-15)


def test_heat2_without_source_is_semigroup(tiny):
    grid, fan = tiny
    u0 = real_bump(grid)
    tg = TimeGrid(0.3, 3)
    traj = solve(PDEProblem("heat2", constant_symbol(0.0, fan), 2, u0, fan, d=0.0), tg)
    for tau, u in zip(tg.nodes, traj.states):
        ref = heat_semigroup(u0, tau, 0.0, fan)
        assert lp_norm(u - ref, 2) <= 1e-12 * lp_norm(u0, 2)


def test_heat_semigroup(small):
    grid, fan = small
    f = gaussian(grid, 0.5, 0.5, omega=1.0)
    np.testing.assert_allclose(heat_semigroup(f, 0.0, 0.0, fan).values, project(f, fan).values, atol=1e-12)
    with pytest.raises(ValueError):
        heat_semigroup(f, -1.0, 0.0, fan)
    with pytest.raises(ValueError):
        heat_symbol(fan, -0.1)
    tau, d = 0.3, 0.5
    out = heat_semigroup(f, tau, d, fan)
    assert lp_norm(out, 2) <= math.exp(-d * tau) * lp_norm(project(f, fan), 2) * (1 + 1e-12)


def test_heat_semigroup_single_mode():
    grid = GroupGrid(1, 8.0, 48, 4.0, 16)
    fan = build_fan(grid, 3)
    i0 = fan.node_index(-2 * fan.dlambda)
    lam0 = fan.lambdas[i0]
    f = GroupFunction.from_callable(grid, lambda z, t: np.exp(1j * lam0 * t) * laguerre_fn(1, 1, lam0, z))
    tau, d = 0.2, 1.0
    F = forward(f, fan)
    G = forward(heat_semigroup(f, tau, d, fan), fan)
    factor = math.exp(-tau * (3 * abs(lam0) + d))
    np.testing.assert_allclose(G.values[1, i0], factor * F.values[1, i0], rtol=1e-6, atol=1e-8)


def test_heat1_nonnegativity(tiny):
    grid, fan = tiny
    u0 = real_bump(grid, 0.5)
    pb = PDEProblem("heat1", power_symbol(1, 1, 1), 2.0, u0, fan)
    pic = _Picard(pb, TimeGrid(0.5, 4))
    u = pic.data.copy()
    for _ in range(4):
        u = pic.apply(u)
        assert np.all(u.real >= u0.values.real[None] - 1e-15)


def test_heat2_converges_geometrically(tiny):
    grid, fan = tiny
    pb = PDEProblem("heat2", constant_symbol(1.0, fan), 2.0, real_bump(grid, 1.0), fan, d=1.0)
    traj = solve(pb, TimeGrid(0.5, 8), tol=1e-10)
    assert traj.residual <= 5e-10
    r = contraction_factors(traj)
    assert r.size > 0 and np.all(r < 1)
    assert all(a > b for a, b in zip(traj.increments[1:], traj.increments[2:]))


def test_divergence_carries_history(tiny):
    grid, fan = tiny
    pb = PDEProblem("heat1", constant_symbol(1.0, fan), 2.0, real_bump(grid, 50.0), fan)
    with pytest.raises(DivergenceError) as exc:
        solve(pb, TimeGrid(5.0, 8))
    assert len(exc.value.increments) >= 1


def test_maxiter(tiny):
    grid, fan = tiny
    pb = PDEProblem("heat2", constant_symbol(1.0, fan), 2.0, real_bump(grid, 1.0), fan, d=1.0)
    with pytest.raises(MaxIterError) as exc:
        solve(pb, TimeGrid(0.5, 8), tol=1e-10, maxiter=3)
    assert len(exc.value.increments) == 3


def test_wave_kinds_converge(tiny):
    grid, fan = tiny
    u0, u1 = real_bump(grid, 0.2), real_bump(grid, 0.1)
    m = power_symbol(1, 2, 1)
    for pb in (PDEProblem("wave1", m, 2.0, u0, fan, b=([0.0, 1.0], [1.0, 0.5]), u1=u1),
               PDEProblem("wave2", m, 3.0, u0, fan, u1=u1)):
        traj = solve(pb, TimeGrid(0.2, 4), tol=1e-10)
        assert traj.residual <= 5e-10


def test_table_symbol_in_problem(tiny):
    grid, fan = tiny
    bad = table_symbol(np.ones(fan.shape), build_fan(GroupGrid(1, 3.0, 8, 4.0, 8), 3))
    with pytest.raises(ValueError):
        PDEProblem("heat1", bad, 2.0, real_bump(grid), fan)
