"""Laguerre polynomials, Laguerre functions on C^n and related constants."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

#: Largest Laguerre degree accepted anywhere in the package.
KMAX_LIMIT = 64


def _check_lambda(lam):
    if np.any(np.asarray(lam) == 0):
        raise ValueError("lambda must be nonzero")


def laguerre_poly(k: int, delta: float, t):
    """Generalized Laguerre polynomial L^delta_k(t) by the three-term recurrence.

    Vectorized over ``t``.  Requires ``t >= 0`` and ``delta > -1``.
    """
    if int(k) != k or k < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {k!r}")
    if not delta > -1:
        raise ValueError(f"type delta must exceed -1, got {delta!r}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise ValueError("Laguerre polynomials are evaluated on t >= 0")
    prev = np.ones_like(t)
    if k == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + delta - t
    for j in range(1, int(k)):
        prev, cur = cur, ((2 * j + 1 + delta - t) * cur - (j + delta) * prev) / (j + 1)
    return cur if cur.ndim else float(cur)


def laguerre_table(kmax: int, delta: float, t) -> np.ndarray:
    """All of L^delta_0(t), ..., L^delta_kmax(t); shape ``(kmax + 1,) + t.shape``."""
    t = np.asarray(t, dtype=float)
    out = np.empty((kmax + 1,) + t.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 1.0 + delta - t
    for j in range(1, kmax):
        out[j + 1] = ((2 * j + 1 + delta - t) * out[j] - (j + delta) * out[j - 1]) / (j + 1)
    return out


def laguerre_fn_r2(k: int, n: int, lam: float, r2):
    """phi^{n-1}_{k,lambda} as a function of |z|^2."""
    _check_lambda(lam)
    x = abs(lam) * np.asarray(r2, dtype=float)
    return laguerre_poly(k, n - 1, 0.5 * x) * np.exp(-0.25 * x)


def laguerre_fn(k: int, n: int, lam: float, z):
    """Laguerre function L^{n-1}_k(|lam||z|^2/2) exp(-|lam||z|^2/4).

    ``z`` is a complex array whose last axis has length ``n``.
    """
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != n:
        raise ValueError(f"last axis of z must have length n={n}")
    r2 = np.sum(np.abs(z) ** 2, axis=-1)
    return laguerre_fn_r2(k, n, lam, r2)


@lru_cache(maxsize=512)
def laguerre_fn_grid(kmax: int, n: int, abs_lam: float, h2: float, qmax: int) -> np.ndarray:
    """Table of phi^{n-1}_{k,lambda} at |z|^2 = h2 * q for q = 0..qmax, k = 0..kmax.

    Memoized on its arguments; the returned array is read-only.  Shape
    ``(kmax + 1, qmax + 1)``.
    """
    if abs_lam <= 0:
        raise ValueError("lambda must be nonzero")
    if kmax > KMAX_LIMIT:
        raise ValueError(f"kmax={kmax} exceeds the limit {KMAX_LIMIT}")
    x = abs_lam * h2 * np.arange(qmax + 1)
    table = laguerre_table(kmax, n - 1, 0.5 * x) * np.exp(-0.25 * x)
    table.flags.writeable = False
    return table


def binom(k: int, n: int) -> int:
    """Dimension factor (k+n-1)! / (k! (n-1)!)."""
    return math.comb(k + n - 1, k)


def c_norm(n: int, k: int) -> Fraction:
    """Normalization c_{n,k} = k! (n-1)! / (k+n-1)! as an exact rational."""
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    return Fraction(1, binom(k, n))


def c_norm_float(n: int, k) -> np.ndarray:
    k = np.asarray(k)
    out = np.array([1.0 / binom(int(kk), n) for kk in k.ravel()]).reshape(k.shape)
    return out if out.ndim else float(out)


def eigenvalue(n: int, k, lam):
    """Sublaplacian eigenvalue (2k + n)|lambda| of e^{n-1}_{k,lambda}."""
    _check_lambda(lam)
    return (2 * np.asarray(k) + n) * np.abs(lam)


def laguerre_norm_exact(k: int, n: int, lam: float) -> float:
    """int_{C^n} |phi^{n-1}_{k,lambda}(z)|^2 dz = (2 pi / |lambda|)^n binom(k+n-1, k)."""
    _check_lambda(lam)
    return (2 * math.pi / abs(lam)) ** n * binom(k, n)


def laguerre_radius(k: int, n: int, lam: float, margin: float = 30.0) -> float:
    """Radius beyond which |phi_{k,lambda}|^2 is below about e^{-2 margin} of its scale.

    The largest zero of L^{n-1}_k(x) lies below 4k + 2n, so with
    x = |lambda| r^2 / 2 the radius sqrt(4 (2k + n + margin) / |lambda|)
    puts the cutoff well into the Gaussian tail.
    """
    _check_lambda(lam)
    return math.sqrt(4.0 * (2 * k + n + margin) / abs(lam))


def laguerre_norm_quadrature(k: int, n: int, lam: float, nr: int, radius: float | None = None) -> float:
    """Midpoint-rule value of int |phi^{n-1}_{k,lambda}|^2 dz in polar coordinates.

    Uses |S^{2n-1}| int_0^R |phi(r)|^2 r^{2n-1} dr with ``nr`` equal cells on
    [0, R]; R defaults to :func:`laguerre_radius`.  The integrand has nonzero
    slope at r = 0, so the error is second order in R / nr.
    """
    if nr < 1:
        raise ValueError("nr must be positive")
    R = laguerre_radius(k, n, lam) if radius is None else float(radius)
    h = R / nr
    r = h * (np.arange(nr) + 0.5)
    sphere = 2 * math.pi**n / math.gamma(n)
    vals = laguerre_fn_r2(k, n, lam, r * r)
    return float(sphere * h * np.sum(vals * vals * r ** (2 * n - 1)))
