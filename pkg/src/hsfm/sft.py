"""Normalized Strichartz Fourier transform on a sampled Heisenberg group.

For a = (lambda, (2k+n)|lambda|) on the ray R_k the transform is

    F f(a, w) = c_{n,k} int f(z, t) e_a((z,t)^{-1}(w,0)) dz dt,

and since (z,t)^{-1}(w,0) = (w - z, -t - Im(z.conj(w))/2) it factors into a
Fourier transform in t followed by a twisted convolution in z:

    F_lam(z)   = int f(z, t) exp(-i lam t) dt
    F f(a, .)  = c_{n,k} * (phi_{k,lam} *_lam F_lam)

with (f1 *_lam f2)(z) = int f1(z - w) f2(w) exp(i lam Im(z.conj(w))/2) dw.
The t-transform is exact on the grid (the lambda nodes are DFT frequencies);
the z-integrals are Riemann sums with periodic wraparound of z - w.  The
inverse uses the same twisted convolution:

    f(z, t) = sum_a c_{n,k} nu2(a) exp(i lam t) (phi_{k,lam} *_lam F f(a, .))(z).

Work is split over |lambda|: the kernel matrix for -lambda is the complex
conjugate of the one for +lambda, so each pair shares one matrix.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np

from .fan import FanGrid, MeasureKind, Symbol, as_fan_array
from .hgroup import GroupFunction, GroupGrid
from .specfun import c_norm_float, laguerre_fn_grid

THREADS_ENV = "HSFM_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


class _SpatialPlan:
    """Index and phase matrices for twisted convolution on one spatial grid.

    ``diff[a, b]``  flat index of the wrapped difference z_a - z_b
    ``q[a, b]``     |z_a - z_b|^2 / h^2 (integer, wrapped)
    ``sym[a, b]``   Im(z_a . conj(z_b)) with raw (unwrapped) coordinates
    """

    def __init__(self, n: int, Lz: float, Nz: int):
        grid = GroupGrid(n, Lz, Nz, 1.0, 4)
        dig = grid.digits
        half = Nz // 2
        d = (dig[:, None, :] - dig[None, :, :] + half) % Nz - half
        self.diff = grid.flat_index(d + half).astype(np.int32)
        self.q = np.sum(d * d, axis=-1).astype(np.int32)
        z = grid.z
        self.sym = np.sum(np.imag(z[:, None, :] * np.conj(z[None, :, :])), axis=-1)
        self.qmax = 2 * n * half * half
        self.h2 = grid.h ** 2
        self.dV = grid.dV
        for a in (self.diff, self.q, self.sym):
            a.flags.writeable = False


@lru_cache(maxsize=4)
def spatial_plan(n: int, Lz: float, Nz: int) -> _SpatialPlan:
    return _SpatialPlan(n, Lz, Nz)


def _plan(grid: GroupGrid) -> _SpatialPlan:
    return spatial_plan(*grid.spatial)


def _check_pair(grid: GroupGrid, fan: FanGrid):
    if fan.n != grid.n or fan.Nt != grid.Nt or fan.Lt != grid.Lt:
        raise ValueError(f"{fan!r} was not built from {grid!r}")


def _lambda_groups(fan: FanGrid):
    """(|lambda|, index of +lambda or None, index of -lambda or None)."""
    half = fan.Nt // 2
    groups = []
    for j in range(1, half + 1):
        pos = half - 1 + j if j < half else None
        neg = half - j
        groups.append((j * fan.dlambda, pos, neg))
    return groups


def _run(tasks, threads):
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1:
        for t in tasks:
            t()
        return
    with ThreadPoolExecutor(max_workers=threads) as ex:
        for fut in [ex.submit(t) for t in tasks]:
            fut.result()


def chirp(plan: _SpatialPlan, lam: float) -> np.ndarray:
    """Phase matrix exp(i lam Im(z_a.conj(z_b)) / 2)."""
    return np.exp((0.5j * lam) * plan.sym)


def twisted_matrix(plan: _SpatialPlan, phi_row: np.ndarray, phase: np.ndarray) -> np.ndarray:
    """Matrix T[a, b] = phi(|z_a - z_b|^2) * phase[a, b] for a radial phi."""
    out = np.take(phi_row, plan.q).astype(complex)
    out *= phase
    return out


def twisted_convolve(f1, f2, lam: float, grid: GroupGrid) -> np.ndarray:
    """Riemann sum of (f1 *_lam f2)(z) = int f1(z-w) f2(w) e^{i lam Im(z.conj(w))/2} dw.

    ``f1`` and ``f2`` are spatial sample vectors of length ``grid.n_spatial``;
    ``f2`` may carry extra trailing columns.
    """
    f1 = np.asarray(f1, dtype=complex)
    f2 = np.asarray(f2, dtype=complex)
    ns = grid.n_spatial
    if f1.shape != (ns,) or f2.shape[0] != ns:
        raise ValueError("arguments do not match the spatial grid")
    plan = _plan(grid)
    mat = np.take(f1, plan.diff) * np.exp((0.5j * lam) * plan.sym)
    return plan.dV * (mat @ f2)


# ---------------------------------------------------------------------------
# central-axis transforms

def t_transform(values: np.ndarray, grid: GroupGrid, fan: FanGrid) -> np.ndarray:
    """dt * sum_t f(., t, z) exp(-i lam_j t); values (..., Nt, Ns) -> (..., J, Ns)."""
    spec = np.fft.fft(values, axis=-2)
    j = fan.j
    sign = np.where(j % 2, -1.0, 1.0)
    return grid.dt * sign[:, None] * spec[..., j % grid.Nt, :]


def t_synthesis(coeffs: np.ndarray, grid: GroupGrid, fan: FanGrid) -> np.ndarray:
    """sum_j H_j(z) exp(i lam_j t) on the t-grid; (..., J, Ns) -> (..., Nt, Ns)."""
    j = fan.j
    sign = np.where(j % 2, -1.0, 1.0)
    full = np.zeros(coeffs.shape[:-2] + (grid.Nt, coeffs.shape[-1]), dtype=complex)
    full[..., j % grid.Nt, :] = sign[:, None] * coeffs
    return grid.Nt * np.fft.ifft(full, axis=-2)


# ---------------------------------------------------------------------------
# spectral functions

class SpectralFunction:
    """Normalized transform values indexed [k, lambda node, w]."""

    __slots__ = ("fan", "grid", "values")
    normalization = "c_nk"

    def __init__(self, fan: FanGrid, grid: GroupGrid, values):
        _check_pair(grid, fan)
        values = np.array(values, dtype=complex)
        shape = fan.shape + (grid.n_spatial,)
        if values.shape != shape:
            if values.size != np.prod(shape):
                raise ValueError(f"values of shape {values.shape} do not match {shape}")
            values = values.reshape(shape)
        if not np.all(np.isfinite(values)):
            raise ValueError("SpectralFunction entries must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "fan", fan)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("SpectralFunction is immutable")

    def _check(self, other):
        if other.fan != self.fan or other.grid != self.grid:
            raise ValueError("spectral functions live on different fans or grids")

    def __add__(self, other):
        self._check(other)
        return SpectralFunction(self.fan, self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return SpectralFunction(self.fan, self.grid, self.values - other.values)

    def __mul__(self, c):
        return SpectralFunction(self.fan, self.grid, self.values * complex(c))

    __rmul__ = __mul__

    def multiply(self, m) -> "SpectralFunction":
        """Pointwise product with a symbol (or fan array), slice by slice."""
        vals = as_fan_array(m, self.fan)
        return SpectralFunction(self.fan, self.grid, self.values * vals[:, :, None])

    @classmethod
    def zeros(cls, fan: FanGrid, grid: GroupGrid) -> "SpectralFunction":
        return cls(fan, grid, np.zeros(fan.shape + (grid.n_spatial,), dtype=complex))

    def __repr__(self):
        return f"SpectralFunction({self.fan!r}, {self.grid!r})"


# ---------------------------------------------------------------------------
# forward and inverse

def forward_array(values: np.ndarray, grid: GroupGrid, fan: FanGrid, threads=None) -> np.ndarray:
    """Batched forward transform; values (B, Nt, Ns) -> (B, K+1, J, Ns)."""
    _check_pair(grid, fan)
    values = np.asarray(values, dtype=complex)
    nb = values.shape[0]
    plan = _plan(grid)
    ft = t_transform(values, grid, fan)
    out = np.empty((nb,) + fan.shape + (grid.n_spatial,), dtype=complex)
    scale = grid.dV * c_norm_float(fan.n, fan.k)

    def work(abs_lam, pos, neg):
        def task():
            phi = laguerre_fn_grid(fan.Kmax, fan.n, abs_lam, plan.h2, plan.qmax)
            phase = chirp(plan, abs_lam)
            cols = []
            if pos is not None:
                cols.append(ft[:, pos, :].T)
            if neg is not None:
                cols.append(np.conj(ft[:, neg, :]).T)
            rhs = np.concatenate(cols, axis=1)
            for k in range(fan.Kmax + 1):
                y = twisted_matrix(plan, phi[k], phase) @ rhs
                y *= scale[k]
                c = 0
                if pos is not None:
                    out[:, k, pos, :] = y[:, :nb].T
                    c = nb
                if neg is not None:
                    out[:, k, neg, :] = np.conj(y[:, c:c + nb]).T
        return task

    _run([work(*g) for g in _lambda_groups(fan)], threads)
    return out


def inverse_array(values: np.ndarray, grid: GroupGrid, fan: FanGrid, threads=None) -> np.ndarray:
    """Batched inverse transform; values (B, K+1, J, Ns) -> (B, Nt, Ns)."""
    _check_pair(grid, fan)
    values = np.asarray(values, dtype=complex)
    nb = values.shape[0]
    plan = _plan(grid)
    wts = fan.weights(MeasureKind.NU2) * c_norm_float(fan.n, fan.k)[:, None] * grid.dV
    coeffs = np.empty((nb, fan.Nt - 1, grid.n_spatial), dtype=complex)

    def work(abs_lam, pos, neg):
        def task():
            phi = laguerre_fn_grid(fan.Kmax, fan.n, abs_lam, plan.h2, plan.qmax)
            phase = chirp(plan, abs_lam)
            acc = None
            for k in range(fan.Kmax + 1):
                cols = []
                if pos is not None:
                    cols.append(wts[k, pos] * values[:, k, pos, :].T)
                if neg is not None:
                    cols.append(wts[k, neg] * np.conj(values[:, k, neg, :]).T)
                rhs = np.concatenate(cols, axis=1)
                y = twisted_matrix(plan, phi[k], phase) @ rhs
                acc = y if acc is None else acc + y
            c = 0
            if pos is not None:
                coeffs[:, pos, :] = acc[:, :nb].T
                c = nb
            if neg is not None:
                coeffs[:, neg, :] = np.conj(acc[:, c:c + nb]).T
        return task

    _run([work(*g) for g in _lambda_groups(fan)], threads)
    return t_synthesis(coeffs, grid, fan)


def forward(f: GroupFunction, fan: FanGrid, threads=None) -> SpectralFunction:
    """Normalized Strichartz transform of ``f`` on the points of ``fan``."""
    vals = forward_array(f.values[None], f.grid, fan, threads)[0]
    return SpectralFunction(fan, f.grid, vals)


def forward_many(fs, fan: FanGrid, threads=None) -> list[SpectralFunction]:
    fs = list(fs)
    if not fs:
        return []
    grid = fs[0].grid
    for f in fs:
        f._check(fs[0])
    vals = forward_array(np.stack([f.values for f in fs]), grid, fan, threads)
    return [SpectralFunction(fan, grid, v) for v in vals]


def inverse(F: SpectralFunction, threads=None) -> GroupFunction:
    vals = inverse_array(F.values[None], F.grid, F.fan, threads)[0]
    return GroupFunction(F.grid, vals)


def inverse_many(Fs, threads=None) -> list[GroupFunction]:
    Fs = list(Fs)
    if not Fs:
        return []
    for F in Fs:
        F._check(Fs[0])
    vals = inverse_array(np.stack([F.values for F in Fs]), Fs[0].grid, Fs[0].fan, threads)
    return [GroupFunction(Fs[0].grid, v) for v in vals]


def project(f: GroupFunction, fan: FanGrid, threads=None) -> GroupFunction:
    """P f = inverse(forward(f)), the discrete band-limiting projection."""
    return inverse(forward(f, fan, threads), threads)


# ---------------------------------------------------------------------------
# norms and diagnostics

def _slice_l2sq(F: SpectralFunction) -> np.ndarray:
    a = np.abs(F.values)
    return np.sum(a * a, axis=-1) * F.grid.dV


def plancherel_norm(F: SpectralFunction) -> float:
    """(sum_a nu2(a) int |F(a, w)|^2 dw)^{1/2}."""
    tot = np.sum((F.fan.weights(MeasureKind.NU2) * _slice_l2sq(F)).ravel())
    return float(np.sqrt(tot))


def spectral_inner(F: SpectralFunction, G: SpectralFunction) -> complex:
    """sum_a nu2(a) int F(a, w) conj(G(a, w)) dw."""
    F._check(G)
    per = np.sum(F.values * np.conj(G.values), axis=-1) * F.grid.dV
    return complex(np.sum((F.fan.weights(MeasureKind.NU2) * per).ravel()))


def _weight_array(weight, fan: FanGrid) -> np.ndarray:
    if weight is None:
        w = np.ones(fan.shape)
    elif isinstance(weight, Symbol):
        w = np.asarray(weight.on(fan))
    elif callable(weight):
        k, lam = fan.mesh()
        w = np.broadcast_to(weight(k, lam), fan.shape)
    else:
        w = np.broadcast_to(np.asarray(weight), fan.shape)
    if np.iscomplexobj(w):
        if np.any(w.imag != 0):
            raise ValueError("weight must be real")
        w = w.real
    w = np.asarray(w, dtype=float)
    if np.any(w < 0) or np.any(np.isnan(w)):
        raise ValueError("weight must be nonnegative")
    return w


def mixed_norm(F: SpectralFunction, p_in: float, p_out: float, kind=MeasureKind.NU2,
               weight=None) -> float:
    """Mixed norm (sum_a kind(a) w(a) (int |F(a,w)|^{p_in} dw)^{p_out/p_in})^{1/p_out}.

    ``weight`` is None (w = 1), a :class:`Symbol`, a fan array, or a callable
    ``w(k, lam)``.  Infinite exponents take the essential supremum on their level.
    """
    for p in (p_in, p_out):
        if np.isnan(p) or p < 1:
            raise ValueError(f"exponent must be >= 1, got {p!r}")
    w = _weight_array(weight, F.fan) * F.fan.weights(kind)
    a = np.abs(F.values)
    if np.isinf(p_in):
        inner_norm = a.max(axis=-1)
    else:
        top = a.max()
        if top == 0:
            return 0.0
        inner_norm = top * (np.sum((a / top) ** p_in, axis=-1) * F.grid.dV) ** (1.0 / p_in)
    if np.isinf(p_out):
        sel = inner_norm[w > 0]
        return float(sel.max()) if sel.size else 0.0
    top = inner_norm.max()
    if top == 0:
        return 0.0
    return float(top * np.sum((w * (inner_norm / top) ** p_out).ravel()) ** (1.0 / p_out))


def projection_residual(F: SpectralFunction, rel_floor: float = 1e-8, threads=None) -> float:
    """Largest relative defect of the reproducing identity over the fan.

    For each fan point computes
    ||(2 pi)^{-n} |lam|^n phi_{k,lam} *_lam F(a,.) - F(a,.)||_2 / ||F(a,.)||_2
    and returns the maximum over points whose slice norm is at least
    ``rel_floor`` times the largest slice norm (smaller slices are roundoff).
    """
    fan, grid = F.fan, F.grid
    plan = _plan(grid)
    norms = np.sqrt(_slice_l2sq(F))
    top = norms.max()
    if top == 0:
        return 0.0
    active = norms >= rel_floor * top
    res = np.zeros(fan.shape)
    n = fan.n

    def work(abs_lam, pos, neg):
        def task():
            phi = laguerre_fn_grid(fan.Kmax, n, abs_lam, plan.h2, plan.qmax)
            phase = chirp(plan, abs_lam)
            scale = (2 * np.pi) ** (-n) * abs_lam**n * grid.dV
            for k in range(fan.Kmax + 1):
                idx = [i for i in (pos, neg) if i is not None and active[k, i]]
                if not idx:
                    continue
                mat = twisted_matrix(plan, phi[k], phase)
                for i in idx:
                    v = F.values[k, i]
                    y = scale * (mat @ v if i == pos else np.conj(mat @ np.conj(v)))
                    res[k, i] = np.linalg.norm(y - v) / np.linalg.norm(v)
        return task

    _run([work(*g) for g in _lambda_groups(fan)], threads)
    return float(res.max())
