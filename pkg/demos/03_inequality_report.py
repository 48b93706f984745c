"""Inequality ratios on a random corpus, and the multiplier functional of a power symbol.

Each ratio is LHS / RHS with the unknown constant left out, so bounded ratios
across the corpus are what the inequalities predict.  The functional of
m = ((2k+n)|lambda|)^(-beta/gamma) is finite only when its series converges;
refining the fan separates the two cases.
"""

from hsfm.fan import FanGrid, build_fan, hormander_functional, power_symbol
from hsfm.hgroup import GroupGrid
from hsfm.verify import run_report

grid = GroupGrid(1, 6.0, 24, 8.0, 48)
fan = build_fan(grid, 12)
report = run_report({"count": 8}, grid, fan, seed=0)
for key, agg in sorted(report.aggregates().items()):
    print(f"{key:60s} max {agg['max']:.4f}")
print("hard failures:", report.failures or "none")

coarse = FanGrid(3, 16, 8.0, 48)
fine = coarse.refined(2)
for beta in (0.5, 0.2):
    m = power_symbol(beta, 1, 3)
    a, b = hormander_functional(m, 2, 4, coarse), hormander_functional(m, 2, 4, fine)
    print(f"n=3 power(beta={beta}, gamma=1): {a:.6g} -> {b:.6g} ({100 * (b - a) / a:+.2f}%)")
