"""Nonlinear heat equation u_t + L u + u = |T_m u|^2 by Picard iteration.

The heat semigroup acts on each fan point as exp(-tau((2k+n)|lambda| + d)),
and the Duhamel integral uses the trapezoid rule.  Small data converge in a
couple of iterations; a larger time step count barely moves the answer.
"""

import numpy as np

from hsfm.fan import build_fan, power_symbol
from hsfm.hgroup import GroupGrid, lp_norm
from hsfm.pde import PDEProblem, TimeGrid, solve
from hsfm.samples import small_heat_data

grid = GroupGrid(1, 6.0, 24, 8.0, 48)
fan = build_fan(grid, 12)
u0 = small_heat_data(grid, 0.1)
problem = PDEProblem("heat2", power_symbol(1, 2, 1), 2.0, u0, fan, d=1.0)

runs = {}
for Ntau in (8, 16):
    traj = solve(problem, TimeGrid(0.05, Ntau), tol=1e-10)
    runs[Ntau] = traj
    print(f"Ntau={Ntau:2d}  iterations {traj.iterations}  increments "
          + " ".join(f"{x:.2e}" for x in traj.increments) + f"  residual {traj.residual:.1e}")

final = runs[16].states[-1]
print(f"||u(0)||_2 = {lp_norm(u0, 2):.4f}   ||u(T)||_2 = {lp_norm(final, 2):.4f}")
print(f"Ntau 8 vs 16 at T: {np.linalg.norm(runs[8].states[-1].values - final.values):.2e}")
