"""Fourier multipliers on the fan and their convolution kernels.

A symbol m acts diagonally on the transform, F(T_m f)(a, w) = m(a) F f(a, w),
and T_m f is recovered by the inversion formula.  Equivalently T_m f = f * K
with the kernel

    K(z, t) = (2 pi)^{-n-1} sum_j dlambda sum_k |lam_j|^n m(k, lam_j)
              phi_{k,lam_j}(z) exp(i lam_j t),

which is a finite trigonometric sum in t.  :func:`convolve_with_kernel` uses
that form directly and shares no code with the transform, so the two routes
check each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fan import FanGrid, Symbol, as_fan_array, build_fan
from .hgroup import GroupFunction, GroupGrid, symplectic
from .sft import SpectralFunction, forward_array, inverse_array
from .specfun import laguerre_fn_r2

#: Largest Ns**2 * (Nt - 1) * (Kmax + 1) accepted by :func:`convolve_with_kernel`.
KERNEL_BUDGET = 200_000_000


def _symbol_values(m, fan: FanGrid) -> np.ndarray:
    vals = as_fan_array(m, fan)
    if not np.all(np.isfinite(vals)):
        raise ValueError("symbol must be finite on the fan")
    return vals


def _resolve_fan(m, grid: GroupGrid, fan: FanGrid | None) -> FanGrid:
    if fan is not None:
        return fan
    if isinstance(m, Symbol) and m.fan is not None:
        return m.fan
    raise ValueError("a fan is required for closed-form symbols")


def apply_multiplier(m, f: GroupFunction, fan: FanGrid | None = None, threads=None) -> GroupFunction:
    """T_m f = inverse(m * forward(f))."""
    return apply_multiplier_many(m, [f], fan, threads)[0]


def apply_multiplier_many(m, fs, fan: FanGrid | None = None, threads=None) -> list[GroupFunction]:
    """:func:`apply_multiplier` for several functions on one grid, batched."""
    fs = list(fs)
    if not fs:
        return []
    grid = fs[0].grid
    fan = _resolve_fan(m, grid, fan)
    mv = _symbol_values(m, fan)
    vals = np.stack([f.values for f in fs])
    spec = forward_array(vals, grid, fan, threads)
    spec *= mv[None, :, :, None]
    out = inverse_array(spec, grid, fan, threads)
    return [GroupFunction(grid, v) for v in out]


def apply_spectral(m, F: SpectralFunction) -> SpectralFunction:
    return F.multiply(_symbol_values(m, F.fan))


@dataclass(frozen=True, eq=False)
class Kernel:
    """Convolution kernel of a multiplier, gridded in z and symbolic in t.

    ``coefficients[k, j, z] = |lam_j|^n m(k, lam_j) phi_{k,lam_j}(z)``.
    """

    symbol: object
    grid: GroupGrid
    fan: FanGrid
    coefficients: np.ndarray

    @property
    def prefactor(self) -> float:
        return (2 * np.pi) ** (-self.fan.n - 1) * self.fan.dlambda

    @property
    def Lt(self) -> float:
        return self.fan.Lt

    @property
    def dlambda(self) -> float:
        return self.fan.dlambda


def kernel_coefficients(m, grid: GroupGrid, fan: FanGrid | None = None) -> Kernel:
    fan = _resolve_fan(m, grid, fan) if fan is None else fan
    if fan.n != grid.n:
        raise ValueError("fan and grid have different n")
    mv = _symbol_values(m, fan)
    r2 = np.sum(np.abs(grid.z) ** 2, axis=-1)
    coef = np.zeros(fan.shape + (grid.n_spatial,), dtype=complex)
    for j, lam in enumerate(fan.lambdas):
        for k in range(fan.Kmax + 1):
            if mv[k, j] != 0:
                coef[k, j] = abs(lam) ** fan.n * mv[k, j] * laguerre_fn_r2(k, fan.n, lam, r2)
    coef.flags.writeable = False
    return Kernel(m, grid, fan, coef)


def kernel_eval(K: Kernel, z, t: float) -> complex:
    """K(z, t) for a grid point z and any real t."""
    idx = K.grid.locate(z)
    per_node = np.sum(K.coefficients[:, :, idx], axis=0)
    return complex(K.prefactor * np.sum(per_node * np.exp(1j * K.fan.lambdas * t)))


def convolve_with_kernel(f: GroupFunction, K: Kernel, budget: int = KERNEL_BUDGET) -> GroupFunction:
    """Group convolution (f * K)(z, t) = int f(u, s) K((u, s)^{-1}(z, t)) du ds.

    The central argument t - s - Im(u . conj(z))/2 is generally off the t-grid;
    since K is a trigonometric sum in t it is evaluated exactly, with the
    s-integral done first as an explicit DFT of f at the lambda nodes.
    """
    grid, fan = f.grid, K.fan
    if K.grid != grid:
        raise ValueError("kernel and function live on different grids")
    ns = grid.n_spatial
    cost = ns * ns * (fan.Nt - 1) * (fan.Kmax + 1)
    if cost > budget:
        raise ValueError(f"kernel convolution needs {cost} operations, above the budget {budget}")

    lam = fan.lambdas
    s = grid.t_axis
    dft = grid.dt * np.exp(-1j * lam[:, None] * s[None, :]) @ f.values  # (J, Ns)

    z = grid.z
    diff = z[:, None, :] - z[None, :, :]
    period = 2 * grid.Lz
    re = (diff.real + grid.Lz) % period - grid.Lz
    im = (diff.imag + grid.Lz) % period - grid.Lz
    r2 = np.sum(re * re + im * im, axis=-1)  # |z - u|^2, wrapped
    sym = symplectic(z[None, :, :], z[:, None, :])  # [z, u] -> Im(u . conj(z))

    coeff_t = np.zeros((fan.Nt - 1, ns), dtype=complex)
    mv = _symbol_values(K.symbol, fan)
    for j, lj in enumerate(lam):
        acc = np.zeros((ns, ns), dtype=complex)
        for k in range(fan.Kmax + 1):
            if mv[k, j] != 0:
                acc = acc + abs(lj) ** fan.n * mv[k, j] * laguerre_fn_r2(k, fan.n, lj, r2)
        mat = acc * np.exp(-0.5j * lj * sym)
        coeff_t[j] = grid.dV * (mat @ dft[j])

    t = grid.t_axis
    out = K.prefactor * np.exp(1j * t[:, None] * lam[None, :]) @ coeff_t
    return GroupFunction(grid, out)


def default_kernel_grid() -> tuple[GroupGrid, FanGrid]:
    """The 12 x 12 x 16 grid (Kmax = 8) used for kernel equivalence checks.

    The spatial box is kept small so the step matches the default grid; a
    coarser step cannot hold the Landau levels the fan asks for.
    """
    grid = GroupGrid(1, 3.0, 12, 4.0, 16)
    return grid, build_fan(grid, 8)
