"""Packaged sample data for the command line and the demos."""

from __future__ import annotations

from .fan import FanGrid, constant_symbol, power_symbol
from .hgroup import GroupFunction, GroupGrid, lp_norm
from .pde import PDEProblem, TimeGrid
from .verify import gaussian

#: Central modulation of the sample; keeps its lambda content away from 0.
SAMPLE_OMEGA = 2.0


def sample_gaussian(grid: GroupGrid) -> GroupFunction:
    """exp(-|z|^2/2 - t^2/2 + 2it), a smooth sample resolved by the default grid."""
    return gaussian(grid, 0.5, 0.5, omega=SAMPLE_OMEGA)


def small_heat_data(grid: GroupGrid, norm: float = 0.1) -> GroupFunction:
    """Real Gaussian initial datum scaled to the given L2 norm."""
    g = gaussian(grid, 0.5, 0.5)
    return g * (norm / lp_norm(g, 2))


def sample_problem(name: str, grid: GroupGrid, fan: FanGrid):
    """(problem, timegrid, tol, maxiter) for a packaged example.

    ``zero``         heat2 with zero data
    ``heat2-small``  heat2, p = 2, d = 1, |u0|_2 = 0.1, T = 0.05, 16 steps
    ``diverge``      heat1, p = 2, m = 1, |u0|_2 = 50, T = 5
    """
    m = power_symbol(1.0, 2.0, grid.n)
    if name == "zero":
        pb = PDEProblem("heat2", m, 2.0, GroupFunction.zeros(grid), fan, d=1.0)
        return pb, TimeGrid(0.05, 4), 1e-8, 10
    if name == "heat2-small":
        pb = PDEProblem("heat2", m, 2.0, small_heat_data(grid), fan, d=1.0)
        return pb, TimeGrid(0.05, 16), 1e-8, 50
    if name == "diverge":
        pb = PDEProblem("heat1", constant_symbol(1.0, fan), 2.0, small_heat_data(grid, 50.0), fan)
        return pb, TimeGrid(5.0, 8), 1e-8, 50
    raise KeyError(name)
