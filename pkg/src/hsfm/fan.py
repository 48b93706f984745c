"""The discretized Heisenberg fan, its measures, and functionals of symbols.

A fan point is a pair (k, lambda) standing for a = (lambda, (2k+n)|lambda|) on
the ray R_k.  The lambda nodes are the nonzero DFT frequencies pi*j/Lt of the
central axis, j in {-Nt/2, ..., -1, 1, ..., Nt/2 - 1}, so arrays over the fan
have shape ``(Kmax + 1, Nt - 1)`` with k along axis 0 and nodes in increasing
order along axis 1.  The limiting ray R_infinity carries no mass and is not
represented.

Reductions over the fan use numpy's pairwise summation of the flattened
(k-major) array, so results do not depend on how work is scheduled.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np

from .specfun import KMAX_LIMIT, binom


class MeasureKind(str, enum.Enum):
    NU = "nu"
    NU2 = "nu2"
    MU = "mu"


@dataclass(frozen=True)
class FanPoint:
    k: int
    lam: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise ValueError(f"ray index must be a nonnegative integer, got {self.k!r}")
        if self.lam == 0:
            raise ValueError("lambda must be nonzero on the rays R_k")


@dataclass(frozen=True)
class FanGrid:
    n: int
    Kmax: int
    Lt: float
    Nt: int

    def __post_init__(self):
        if int(self.Kmax) != self.Kmax or self.Kmax < 0:
            raise ValueError(f"Kmax must be a nonnegative integer, got {self.Kmax!r}")
        if self.Kmax > KMAX_LIMIT:
            raise ValueError(f"Kmax={self.Kmax} exceeds the limit {KMAX_LIMIT}")
        if int(self.Nt) != self.Nt or self.Nt < 4 or self.Nt % 2:
            raise ValueError(f"Nt must be an even integer >= 4, got {self.Nt!r}")
        if not self.Lt > 0:
            raise ValueError("Lt must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        object.__setattr__(self, "Kmax", int(self.Kmax))
        object.__setattr__(self, "Nt", int(self.Nt))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "Lt", float(self.Lt))

    @property
    def dlambda(self) -> float:
        return np.pi / self.Lt

    @cached_property
    def j(self) -> np.ndarray:
        out = np.concatenate([np.arange(-self.Nt // 2, 0), np.arange(1, self.Nt // 2)])
        out.flags.writeable = False
        return out

    @cached_property
    def lambdas(self) -> np.ndarray:
        out = self.j * self.dlambda
        out.flags.writeable = False
        return out

    @property
    def shape(self) -> tuple[int, int]:
        return (self.Kmax + 1, self.Nt - 1)

    @cached_property
    def k(self) -> np.ndarray:
        return np.arange(self.Kmax + 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Broadcastable (k, lambda) arrays of shapes (K+1, 1) and (1, J)."""
        return self.k[:, None], self.lambdas[None, :]

    def node_index(self, lam: float, rtol: float = 1e-9) -> int:
        j = lam / self.dlambda
        r = round(j)
        if r == 0 or abs(j - r) > rtol * max(1.0, abs(j)) or not (-self.Nt // 2 <= r < self.Nt // 2):
            raise ValueError(f"lambda={lam!r} is not a node of {self!r}")
        return int(r + self.Nt // 2 if r < 0 else r + self.Nt // 2 - 1)

    def index(self, a: FanPoint) -> tuple[int, int]:
        if a.k > self.Kmax:
            raise ValueError(f"k={a.k} exceeds Kmax={self.Kmax}")
        return a.k, self.node_index(a.lam)

    def refined(self, factor: int = 2) -> "FanGrid":
        """Fan with Kmax and Nt scaled by ``factor`` and dlambda divided by it."""
        return FanGrid(self.n, self.Kmax * factor, self.Lt * factor, self.Nt * factor)

    @cached_property
    def _weights(self) -> dict:
        k, lam = self.mesh()
        nu = (2 * np.pi) ** (-2 * self.n - 1) * np.abs(lam) ** (2 * self.n) * self.dlambda
        nu = np.broadcast_to(nu, self.shape).copy()
        b2 = np.array([float(binom(int(kk), self.n)) ** 2 for kk in self.k])[:, None]
        nu2 = b2 * nu
        mu = np.abs(lam) ** (-self.n) * nu2
        out = {MeasureKind.NU: nu, MeasureKind.NU2: nu2, MeasureKind.MU: mu}
        for v in out.values():
            v.flags.writeable = False
        return out

    def weights(self, kind) -> np.ndarray:
        """Quadrature weights of the measure ``kind`` at every fan point."""
        return self._weights[MeasureKind(kind)]


def build_fan(source, Kmax: int) -> FanGrid:
    """Fan whose lambda nodes are the nonzero DFT frequencies of a t-grid.

    ``source`` is a :class:`~hsfm.hgroup.GroupGrid` or a pair ``(Lt, Nt)``;
    for a pair the fan has ``n = 1`` unless ``source`` is ``(Lt, Nt, n)``.
    """
    if Kmax < 0:
        raise ValueError(f"Kmax must be nonnegative, got {Kmax!r}")
    if hasattr(source, "Lt"):
        return FanGrid(source.n, Kmax, source.Lt, source.Nt)
    Lt, Nt, *rest = source
    return FanGrid(rest[0] if rest else 1, Kmax, Lt, Nt)


def measure_weight(a: FanPoint, kind, fan: FanGrid) -> float:
    return float(fan.weights(kind)[fan.index(a)])


# ---------------------------------------------------------------------------
# symbols

@dataclass(frozen=True, eq=False)
class Symbol:
    """A multiplier m(a) on the fan.

    ``family == "power"``: the closed form (1 + (2k+n)|lam|)^-gamma (1+k)^-beta
    for k > 0 and 0 on k = 0.  ``family == "table"``: explicit values over the
    points of ``fan``.  Symbols vanish on R_infinity in both cases.
    """

    family: str
    n: int
    beta: float | None = None
    gamma: float | None = None
    table: np.ndarray | None = None
    fan: FanGrid | None = None
    label: str = ""

    def on(self, fan: FanGrid) -> np.ndarray:
        """Values over ``fan``, shape ``fan.shape``."""
        if fan.n != self.n:
            raise ValueError(f"symbol built for n={self.n}, fan has n={fan.n}")
        if self.family == "power":
            k, lam = fan.mesh()
            vals = (1.0 + (2 * k + fan.n) * np.abs(lam)) ** (-self.gamma) * (1.0 + k) ** (-self.beta)
            vals = np.broadcast_to(vals, fan.shape).copy()
            vals[0] = 0.0
            return vals
        if fan != self.fan:
            raise ValueError("tabulated symbol evaluated on a different fan")
        return self.table

    def __call__(self, k: int, lam: float):
        if self.family == "power":
            if k == 0:
                return 0.0
            return (1.0 + (2 * k + self.n) * abs(lam)) ** (-self.gamma) * (1.0 + k) ** (-self.beta)
        return self.table[self.fan.index(FanPoint(k, lam))]

    @property
    def descriptor(self) -> str:
        if self.label:
            return self.label
        if self.family == "power":
            return f"power:beta={self.beta:g},gamma={self.gamma:g}"
        return "table"


def power_symbol(beta: float, gamma: float, n: int) -> Symbol:
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    if not beta >= 0:
        raise ValueError(f"beta must be nonnegative, got {beta!r}")
    return Symbol("power", int(n), beta=float(beta), gamma=float(gamma))


def table_symbol(values, fan: FanGrid, label: str = "") -> Symbol:
    vals = np.array(np.broadcast_to(values, fan.shape))
    if not np.iscomplexobj(vals):
        vals = vals.astype(float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("symbol values must be finite")
    vals.flags.writeable = False
    return Symbol("table", fan.n, table=vals, fan=fan, label=label)


def constant_symbol(c, fan: FanGrid) -> Symbol:
    return table_symbol(np.full(fan.shape, c), fan, label=f"const:c={c}")


def function_symbol(func: Callable, fan: FanGrid, label: str = "") -> Symbol:
    """Tabulate ``func(k, lam)`` (broadcast over the fan mesh)."""
    k, lam = fan.mesh()
    return table_symbol(np.broadcast_to(func(k, lam), fan.shape), fan, label=label)


SymbolLike = Union[Symbol, np.ndarray]


def as_fan_array(phi: SymbolLike, fan: FanGrid) -> np.ndarray:
    if isinstance(phi, Symbol):
        vals = phi.on(fan)
    else:
        vals = np.asarray(phi)
        if vals.shape != fan.shape:
            vals = np.broadcast_to(vals, fan.shape)
    if np.any(np.isnan(vals)):
        raise ValueError("NaN in function on the fan")
    return vals


# ---------------------------------------------------------------------------
# functionals

def fan_integral(phi: SymbolLike, kind, fan: FanGrid) -> float:
    """Quadrature of phi against the measure ``kind``."""
    vals = as_fan_array(phi, fan)
    s = np.sum((vals * fan.weights(kind)).ravel())
    return s.item()


def distribution(phi: SymbolLike, s: float, kind, fan: FanGrid) -> float:
    """Measure of the superlevel set {|phi| > s}."""
    if not s > 0:
        raise ValueError("s must be positive")
    a = np.abs(as_fan_array(phi, fan))
    return float(np.sum(np.where(a > s, fan.weights(kind), 0.0).ravel()))


def _superlevel_profile(a: np.ndarray, w: np.ndarray):
    """Distinct positive values v of ``a`` (descending) and measure of {a >= v}."""
    a = a.ravel()
    w = w.ravel()
    order = np.argsort(-a, kind="stable")
    a, w = a[order], w[order]
    csum = np.cumsum(w)
    # last occurrence of each distinct value closes the >= set
    last = np.r_[a[1:] != a[:-1], True]
    v, m = a[last], csum[last]
    keep = v > 0
    return v[keep], m[keep]


def weak_l1_norm(phi: SymbolLike, kind, fan: FanGrid) -> float:
    """Weak-L^1 quasinorm sup_{s>0} s * |{|phi| > s}|.

    On a discrete fan the supremum is attained as s approaches a value v of
    |phi| from below, where the superlevel set is {|phi| >= v}.
    """
    vals = as_fan_array(phi, fan)
    if np.iscomplexobj(vals) or np.any(vals < 0):
        raise ValueError("weak_l1_norm expects a nonnegative real function")
    v, m = _superlevel_profile(np.asarray(vals, dtype=float), fan.weights(kind))
    if v.size == 0:
        return 0.0
    return float(np.max(v * m))


def hormander_functional(m: SymbolLike, p: float, q: float, fan: FanGrid) -> float:
    """sup_{alpha>0} alpha * mu{|m| > alpha}^{1/p - 1/q}, evaluated at breakpoints."""
    if not (1 < p <= 2 <= q < np.inf):
        warnings.warn(f"(p, q) = ({p}, {q}) is outside 1 < p <= 2 <= q < inf", stacklevel=2)
    vals = as_fan_array(m, fan)
    a = np.abs(vals)
    if not np.all(np.isfinite(a)):
        raise ValueError("symbol must be bounded")
    v, meas = _superlevel_profile(a, fan.weights(MeasureKind.MU))
    if v.size == 0:
        return 0.0
    e = 1.0 / p - 1.0 / q
    if e == 0:
        return float(v[0])
    return float(np.max(v * meas**e))


def _central_lambda_derivative(vals: np.ndarray, fan: FanGrid) -> np.ndarray:
    """lambda * d/dlambda by central differences within each half-line of nodes.

    Entries whose stencil leaves a half-line (including NaN inputs) are NaN.
    """
    out = np.full(vals.shape, np.nan, dtype=vals.dtype if np.iscomplexobj(vals) else float)
    h = fan.dlambda
    lam = fan.lambdas
    neg = slice(0, fan.Nt // 2)
    pos = slice(fan.Nt // 2, fan.Nt - 1)
    for part in (neg, pos):
        v = vals[:, part]
        d = np.full(v.shape, np.nan, dtype=out.dtype)
        d[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2 * h)
        out[:, part] = lam[part][None, :] * d
    return out


def marcinkiewicz_report(m: SymbolLike, alpha_max: int, beta_max: int, fan: FanGrid) -> np.ndarray:
    """Table of max |(k Delta)^alpha (lambda d/dlambda)^beta m| over interior fan points.

    ``Delta`` is the backward difference m(k) - m(k-1) along the rays; the
    lambda derivative uses central differences, and points whose stencils
    would reach past the ends of a half-line of nodes are left out.  Entry
    ``[alpha, beta]``; no threshold is applied.
    """
    if alpha_max < 0 or beta_max < 0:
        raise ValueError("orders must be nonnegative")
    if fan.Kmax < alpha_max + 1:
        raise ValueError(f"Kmax={fan.Kmax} too small for alpha_max={alpha_max}")
    if fan.Nt // 2 - 1 <= 2 * beta_max:
        raise ValueError(f"Nt={fan.Nt} gives too few lambda nodes for beta_max={beta_max}")
    vals = np.asarray(as_fan_array(m, fan))
    if not np.iscomplexobj(vals):
        vals = vals.astype(float)
    k = fan.k[:, None]
    table = np.zeros((alpha_max + 1, beta_max + 1))
    lam_stage = vals
    for b in range(beta_max + 1):
        if b:
            lam_stage = _central_lambda_derivative(lam_stage, fan)
        cur = lam_stage
        for a in range(alpha_max + 1):
            if a:
                nxt = np.full(cur.shape, np.nan, dtype=cur.dtype)
                nxt[1:] = k[1:] * (cur[1:] - cur[:-1])
                cur = nxt
            mags = np.abs(cur)
            table[a, b] = float(np.max(mags[np.isfinite(mags)]))
    return table
