"""Heisenberg group geometry, uniform sample grids and group-side functions.

The group is C^n x R with product

    (z, t)(w, s) = (z + w, t + s + Im(z . conj(w)) / 2).

Functions are sampled on a centred uniform grid over [-Lz, Lz)^{2n} x [-Lt, Lt)
with periodic wraparound in every axis.  Samples are stored as a complex array
of shape ``(Nt, Nz**(2n))``; within a spatial row the real axes are ordered
x1 (fastest), y1, x2, y2, ..., so the flattened C-order buffer has x1 fastest
and t slowest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

#: Upper bound on Nz**(2n) * Nt accepted by :class:`GroupGrid`.
MAX_SAMPLES = 1 << 24

_ALIGN_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GroupPoint:
    """A point (z, t) of the Heisenberg group H^n."""

    z: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.z, dtype=complex)).copy()
        if z.ndim != 1 or z.size < 1:
            raise ValueError("z must be a non-empty vector of complex numbers")
        if not (np.all(np.isfinite(z)) and np.isfinite(self.t)):
            raise ValueError("group point coordinates must be finite")
        z.flags.writeable = False
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.z.size

    @classmethod
    def identity(cls, n: int) -> "GroupPoint":
        return cls(np.zeros(n, dtype=complex), 0.0)

    def __eq__(self, other):
        if not isinstance(other, GroupPoint):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.z, other.z) and self.t == other.t

    def __repr__(self):
        return f"GroupPoint(z={self.z.tolist()!r}, t={self.t!r})"


def symplectic(z, w):
    """Im(z . conj(w)) summed over the complex coordinates (last axis)."""
    z, w = np.asarray(z), np.asarray(w)
    # real form keeps the antisymmetry exact in floating point
    return np.sum(z.imag * w.real - z.real * w.imag, axis=-1)


def group_mul(p: GroupPoint, q: GroupPoint) -> GroupPoint:
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: n={p.n} and n={q.n}")
    return GroupPoint(p.z + q.z, p.t + q.t + 0.5 * float(symplectic(p.z, q.z)))


def group_inv(p: GroupPoint) -> GroupPoint:
    return GroupPoint(-p.z, -p.t)


@dataclass(frozen=True)
class GroupGrid:
    """Uniform centred grid on C^n x R.

    Each of the 2n real spatial axes holds ``Nz`` samples on ``[-Lz, Lz)``;
    the central axis holds ``Nt`` samples on ``[-Lt, Lt)``.
    """

    n: int
    Lz: float
    Nz: int
    Lt: float
    Nt: int
    max_samples: int = field(default=MAX_SAMPLES, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        for name in ("Nz", "Nt"):
            v = getattr(self, name)
            if int(v) != v or v < 4 or v % 2:
                raise ValueError(f"{name} must be an even integer >= 4, got {v!r}")
        for name in ("Lz", "Lt"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "Nz", int(self.Nz))
        object.__setattr__(self, "Nt", int(self.Nt))
        object.__setattr__(self, "Lz", float(self.Lz))
        object.__setattr__(self, "Lt", float(self.Lt))
        if self.size > self.max_samples:
            raise ValueError(
                f"grid has {self.size} samples, above the budget of {self.max_samples}"
            )

    # -- sizes and steps -------------------------------------------------
    @property
    def h(self) -> float:
        """Spatial step along every real axis."""
        return 2.0 * self.Lz / self.Nz

    @property
    def dt(self) -> float:
        return 2.0 * self.Lt / self.Nt

    @property
    def dV(self) -> float:
        """Spatial cell volume (2Lz/Nz)^{2n}."""
        return self.h ** (2 * self.n)

    @property
    def n_spatial(self) -> int:
        return self.Nz ** (2 * self.n)

    @property
    def size(self) -> int:
        return self.n_spatial * self.Nt

    @property
    def shape(self) -> tuple[int, int]:
        return (self.Nt, self.n_spatial)

    @property
    def spatial(self) -> tuple:
        """Hashable key of the spatial part, shared by grids with equal (n, Lz, Nz)."""
        return (self.n, self.Lz, self.Nz)

    # -- coordinates -----------------------------------------------------
    @cached_property
    def axis(self) -> np.ndarray:
        return -self.Lz + self.h * np.arange(self.Nz)

    @cached_property
    def t_axis(self) -> np.ndarray:
        return -self.Lt + self.dt * np.arange(self.Nt)

    @cached_property
    def digits(self) -> np.ndarray:
        """Integer axis indices, shape (Ns, 2n), columns ordered x1, y1, x2, y2, ..."""
        idx = np.arange(self.n_spatial)
        cols = [(idx // self.Nz**a) % self.Nz for a in range(2 * self.n)]
        out = np.stack(cols, axis=1)
        out.flags.writeable = False
        return out

    @cached_property
    def z(self) -> np.ndarray:
        """Complex coordinates of the spatial samples, shape (Ns, n)."""
        real = self.axis[self.digits]
        out = real[:, 0::2] + 1j * real[:, 1::2]
        out.flags.writeable = False
        return out

    @property
    def origin_index(self) -> int:
        """Flat spatial index of z = 0."""
        return self.flat_index(np.full(2 * self.n, self.Nz // 2))

    def flat_index(self, digits) -> np.ndarray:
        digits = np.asarray(digits) % self.Nz
        weights = self.Nz ** np.arange(2 * self.n)
        return digits @ weights

    def locate(self, z, atol: float = _ALIGN_TOL) -> int:
        """Flat spatial index of a grid point z (periodically wrapped)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if z.shape != (self.n,):
            raise ValueError(f"expected a length-{self.n} complex vector")
        real = np.empty(2 * self.n)
        real[0::2], real[1::2] = z.real, z.imag
        steps = (real + self.Lz) / self.h
        k = np.rint(steps)
        if np.any(np.abs(steps - k) > atol * max(1.0, np.max(np.abs(steps)))):
            raise ValueError(f"point {z.tolist()} is not on the spatial grid")
        return int(self.flat_index(k.astype(int)))

    @property
    def heisenberg_periodic(self) -> bool:
        """Whether periodic wraparound is compatible with the group law.

        True when Lz**2 / (Nz * Lt) is an integer and h**2 / 2 is a multiple of
        dt.  On such grids the sample lattice modulo the periods is a finite
        Heisenberg group, so translations compose exactly and the transform's
        translation covariance holds to roundoff.
        """
        r1 = self.Lz**2 / (self.Nz * self.Lt)
        r2 = 0.5 * self.h**2 / self.dt
        return bool(abs(r1 - round(r1)) < 1e-9 and abs(r2 - round(r2)) < 1e-9)

    def __repr__(self):
        return (f"GroupGrid(n={self.n}, Lz={self.Lz:g}, Nz={self.Nz}, "
                f"Lt={self.Lt:g}, Nt={self.Nt})")


class GroupFunction:
    """Immutable complex samples of a function on a :class:`GroupGrid`."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: GroupGrid, values):
        values = np.array(values, dtype=complex)
        if values.shape != grid.shape:
            if values.size == grid.size:
                values = values.reshape(grid.shape)
            else:
                raise ValueError(f"values of shape {values.shape} do not match {grid!r}")
        if not np.all(np.isfinite(values)):
            raise ValueError("GroupFunction samples must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("GroupFunction is immutable")

    @classmethod
    def from_callable(cls, grid: GroupGrid, func: Callable) -> "GroupFunction":
        """Sample ``func(z, t)``; ``z`` has shape (1, Ns, n) and ``t`` shape (Nt, 1)."""
        vals = func(grid.z[None, :, :], grid.t_axis[:, None])
        return cls(grid, np.broadcast_to(vals, grid.shape))

    @classmethod
    def zeros(cls, grid: GroupGrid) -> "GroupFunction":
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    @classmethod
    def delta(cls, grid: GroupGrid) -> "GroupFunction":
        """Grid delta of unit mass at the identity (value 1/(dV dt))."""
        v = np.zeros(grid.shape, dtype=complex)
        v[grid.Nt // 2, grid.origin_index] = 1.0 / (grid.dV * grid.dt)
        return cls(grid, v)

    def _check(self, other: "GroupFunction"):
        if other.grid != self.grid:
            raise ValueError("functions live on different grids")

    def __add__(self, other):
        self._check(other)
        return GroupFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return GroupFunction(self.grid, self.values - other.values)

    def __mul__(self, c):
        return GroupFunction(self.grid, self.values * complex(c))

    __rmul__ = __mul__

    def __neg__(self):
        return GroupFunction(self.grid, -self.values)

    def conj(self) -> "GroupFunction":
        return GroupFunction(self.grid, np.conj(self.values))

    def __repr__(self):
        return f"GroupFunction({self.grid!r})"


def _shift_steps(value: float, step: float, what: str) -> int:
    k = value / step
    r = round(k)
    if abs(k - r) > _ALIGN_TOL * max(1.0, abs(k)):
        raise ValueError(f"{what} = {value!r} is not a multiple of the grid step {step!r}")
    return int(r)


def left_translate(f: GroupFunction, u: GroupPoint) -> GroupFunction:
    """Left translation (tau_u f)(z, t) = f(u^{-1}(z, t)), periodic in every axis.

    ``u`` must be grid aligned and every induced central shift
    ``u.t + Im(u.z . conj(z)) / 2`` must be a multiple of ``dt``.
    """
    grid = f.grid
    if u.n != grid.n:
        raise ValueError(f"dimension mismatch: n={u.n} and grid n={grid.n}")
    steps = np.empty(2 * grid.n, dtype=int)
    for j in range(grid.n):
        steps[2 * j] = _shift_steps(u.z[j].real, grid.h, f"Re u_{j + 1}")
        steps[2 * j + 1] = _shift_steps(u.z[j].imag, grid.h, f"Im u_{j + 1}")
    _shift_steps(u.t, grid.dt, "u.t")

    shift = (u.t + 0.5 * symplectic(u.z[None, :], grid.z)) / grid.dt
    m = np.rint(shift)
    bad = np.abs(shift - m) > _ALIGN_TOL * np.maximum(1.0, np.abs(shift))
    if np.any(bad):
        z_bad = grid.z[np.argmax(bad)]
        raise ValueError(
            f"central shift t - s - Im(u.conj(z))/2 leaves the t-grid at z={z_bad.tolist()}; "
            f"Im(u.conj(z))/2 must be a multiple of dt={grid.dt!r}"
        )
    src_space = grid.flat_index(grid.digits - steps)
    it = np.arange(grid.Nt)[:, None]
    src_t = (it - m.astype(int)[None, :]) % grid.Nt
    return GroupFunction(grid, f.values[src_t, src_space[None, :]])


def lp_norm(f: GroupFunction, p: float) -> float:
    """Riemann-sum L^p norm, (sum |f|^p dV dt)^{1/p}; ``p = inf`` gives max |f|."""
    if np.isnan(p) or p < 1:
        raise ValueError(f"p must satisfy p >= 1, got {p!r}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max())
    cell = f.grid.dV * f.grid.dt
    if p == 2:
        return float(np.sqrt(np.sum(a * a) * cell))
    top = a.max()
    if top == 0:
        return 0.0
    # scaled to keep |f|^p in range for large p
    return float(top * (np.sum((a / top) ** p) * cell) ** (1.0 / p))


def inner(f: GroupFunction, g: GroupFunction) -> complex:
    """Group-side L^2 inner product sum f conj(g) dV dt."""
    f._check(g)
    return complex(np.sum(f.values * np.conj(g.values)) * f.grid.dV * f.grid.dt)
