"""Picard iteration for the nonlinear heat and wave problems.

Four Cauchy problems driven by the multiplier T_m:

    heat1   u_tau = |T_m u|^p
    heat2   u_tau + L u + d u = |T_m u|^p
    wave1   u_tautau = b(tau) |T_m u|^p
    wave2   u_tautau + u_tau = |T_m u|^p

Each is solved through its integral form, e.g. for heat2

    u(tau) = e^{-tau(L + d)} u0 + int_0^tau e^{-(tau - s)(L + d)} |T_m u(s)|^p ds,

with the s-integral replaced by the composite trapezoid rule on a uniform time
grid and the semigroup applied spectrally.  Norms in time are maxima over the
grid nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fan import FanGrid
from .hgroup import GroupFunction
from .multiplier import _symbol_values
from .sft import forward_array, inverse_array

KINDS = ("heat1", "heat2", "wave1", "wave2")


class DivergenceError(RuntimeError):
    """Picard increments grew three times in a row, or became non-finite."""

    def __init__(self, message, increments):
        super().__init__(message)
        self.increments = list(increments)


class MaxIterError(RuntimeError):
    def __init__(self, message, increments):
        super().__init__(message)
        self.increments = list(increments)


@dataclass(frozen=True)
class TimeGrid:
    T: float
    Ntau: int

    def __post_init__(self):
        if not (np.isfinite(self.T) and self.T > 0):
            raise ValueError(f"T must be positive, got {self.T!r}")
        if int(self.Ntau) != self.Ntau or self.Ntau < 2:
            raise ValueError(f"Ntau must be an integer >= 2, got {self.Ntau!r}")
        object.__setattr__(self, "Ntau", int(self.Ntau))
        object.__setattr__(self, "T", float(self.T))

    @property
    def dtau(self) -> float:
        return self.T / self.Ntau

    @property
    def nodes(self) -> np.ndarray:
        return self.dtau * np.arange(self.Ntau + 1)


@dataclass
class PDEProblem:
    """Cauchy problem data.

    ``b`` (wave1 only) is a pair ``(taus, values)`` interpolated linearly.
    """

    kind: str
    m: object
    p: float
    u0: GroupFunction
    fan: FanGrid
    d: float = 0.0
    b: tuple | None = None
    u1: GroupFunction | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}; expected one of {KINDS}")
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p!r}")
        if self.kind == "heat2" and not self.d >= 0:
            raise ValueError("d must be nonnegative")
        if self.kind.startswith("wave") and self.u1 is None:
            self.u1 = GroupFunction.zeros(self.u0.grid)
        if self.u1 is not None:
            self.u0._check(self.u1)
        if self.kind == "wave1":
            if self.b is None:
                raise ValueError("wave1 needs a coefficient table b")
            taus, vals = (np.asarray(x, dtype=float) for x in self.b)
            if taus.shape != vals.shape or taus.ndim != 1 or taus.size < 1:
                raise ValueError("b must be a pair of equal-length 1-d arrays")
            if np.any(np.diff(taus) <= 0):
                raise ValueError("b abscissae must increase")
            if np.any(vals < 0) or not np.all(np.isfinite(vals)):
                raise ValueError("b must be nonnegative and bounded")
            self.b = (taus, vals)
        _symbol_values(self.m, self.fan)

    def b_at(self, tau):
        taus, vals = self.b
        return np.interp(tau, taus, vals)


@dataclass
class Trajectory:
    timegrid: TimeGrid
    states: list
    iterations: int
    increments: list = field(default_factory=list)
    residual: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.stack([u.values for u in self.states])


def _eigs(fan: FanGrid) -> np.ndarray:
    k, lam = fan.mesh()
    return (2 * k + fan.n) * np.abs(lam)


def heat_symbol(fan: FanGrid, tau: float, d: float = 0.0) -> np.ndarray:
    """exp(-tau((2k+n)|lam| + d)) on the fan."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau!r}")
    return np.exp(-tau * (_eigs(fan) + d))


def heat_semigroup(f: GroupFunction, tau: float, d: float, fan: FanGrid, threads=None) -> GroupFunction:
    """e^{-tau(L + d)} f applied through the transform."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau!r}")
    if d < 0:
        raise ValueError(f"d must be nonnegative, got {d!r}")
    E = heat_symbol(fan, tau, d)
    spec = forward_array(f.values[None], f.grid, fan, threads)
    spec *= E[None, :, :, None]
    return GroupFunction(f.grid, inverse_array(spec, f.grid, fan, threads)[0])


def trapezoid_weights(j: int, dtau: float) -> np.ndarray:
    """Composite trapezoid weights on nodes s_0..s_j for the integral over [0, tau_j]."""
    w = np.full(j + 1, dtau)
    if j == 0:
        return np.zeros(1)
    w[0] = w[-1] = 0.5 * dtau
    return w


class _Picard:
    def __init__(self, problem: PDEProblem, tg: TimeGrid, threads=None):
        self.pb = problem
        self.tg = tg
        self.grid = problem.u0.grid
        self.fan = problem.fan
        self.threads = threads
        self.mv = np.asarray(_symbol_values(problem.m, self.fan))
        self.tau = tg.nodes
        self.data = self._data_terms()

    def _fwd(self, vals):
        return forward_array(vals, self.grid, self.fan, self.threads)

    def _inv(self, spec):
        return inverse_array(spec, self.grid, self.fan, self.threads)

    def _data_terms(self) -> np.ndarray:
        pb, tau = self.pb, self.tau
        u0 = pb.u0.values
        nt = tau.size
        if pb.kind == "heat1":
            return np.broadcast_to(u0, (nt,) + u0.shape).copy()
        if pb.kind == "wave1":
            return u0[None] + tau[:, None, None] * pb.u1.values[None]
        if pb.kind == "wave2":
            return u0[None] + (1 - np.exp(-tau))[:, None, None] * pb.u1.values[None]
        # heat2: one forward transform of u0, diagonal decay per node
        if not np.any(u0):
            return np.zeros((nt,) + u0.shape, dtype=complex)
        spec0 = self._fwd(u0[None])[0]
        eig = _eigs(self.fan) + pb.d
        specs = np.exp(-tau[:, None, None] * eig[None])[:, :, :, None] * spec0[None]
        return self._inv(specs)

    def nonlinearity(self, u: np.ndarray) -> np.ndarray:
        """|T_m u(s_i)|^p at every node; u has shape (Ntau+1, Nt, Ns)."""
        if not np.any(u) or not np.any(self.mv):
            return np.zeros(u.shape)
        spec = self._fwd(u)
        spec *= self.mv[None, :, :, None]
        return np.abs(self._inv(spec)) ** self.pb.p

    def apply(self, u: np.ndarray) -> np.ndarray:
        """One Picard map: data + trapezoid Duhamel integral of the nonlinearity."""
        nl = self.nonlinearity(u)
        out = self.data.copy()
        if not np.any(nl):
            return out
        dtau = self.tg.dtau
        tau = self.tau
        kind = self.pb.kind
        if kind == "heat2":
            spec = self._fwd(nl.astype(complex))
            eig = _eigs(self.fan) + self.pb.d
            acc = np.zeros_like(spec)
            for j in range(1, tau.size):
                w = trapezoid_weights(j, dtau)
                gaps = tau[j] - tau[: j + 1]
                decay = np.exp(-gaps[:, None, None] * eig[None])  # (j+1, K+1, J)
                acc[j] = np.einsum("i,ikl,iklz->klz", w, decay, spec[: j + 1])
            out = out + self._inv(acc)
            return out
        for j in range(1, tau.size):
            w = trapezoid_weights(j, dtau)
            s = tau[: j + 1]
            if kind == "heat1":
                kern = np.ones_like(s)
            elif kind == "wave1":
                kern = (tau[j] - s) * self.pb.b_at(s)
            else:
                kern = 1 - np.exp(-(tau[j] - s))
                if np.any(kern < 0) or np.any(kern > 1):
                    raise AssertionError("wave2 kernel weights left [0, 1]")
            out[j] = out[j] + np.tensordot(w * kern, nl[: j + 1], axes=1)
        return out

    def increment(self, a: np.ndarray, b: np.ndarray) -> float:
        """max over nodes of the L^2 norm of a - b."""
        cell = self.grid.dV * self.grid.dt
        d = np.abs(a - b)
        return float(np.sqrt(np.max(np.sum((d * d).reshape(d.shape[0], -1), axis=1)) * cell))


def solve(problem: PDEProblem, timegrid: TimeGrid, tol: float = 1e-8, maxiter: int = 50,
          threads=None) -> Trajectory:
    """Picard iteration u <- data + Duhamel(|T_m u|^p) until the increment is at most ``tol``.

    Raises :class:`DivergenceError` if the increment grows three times in a
    row or becomes non-finite, and :class:`MaxIterError` when ``maxiter``
    iterations do not reach ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if maxiter < 1:
        raise ValueError("maxiter must be at least 1")
    pic = _Picard(problem, timegrid, threads)
    u = pic.data.copy()
    incs: list[float] = []
    growth = 0
    for it in range(1, maxiter + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            new = pic.apply(u)
        inc = pic.increment(new, u) if np.all(np.isfinite(new)) else float("inf")
        incs.append(inc)
        if not np.isfinite(inc):
            raise DivergenceError("non-finite Picard iterate", incs)
        growth = growth + 1 if len(incs) > 1 and inc > incs[-2] else 0
        if growth >= 3:
            raise DivergenceError("Picard increments grew for 3 consecutive iterations", incs)
        u = new
        if inc <= tol:
            resid = pic.increment(pic.apply(u), u)
            states = [GroupFunction(problem.u0.grid, v) for v in u]
            return Trajectory(timegrid, states, it, incs, resid)
    raise MaxIterError(f"no convergence in {maxiter} iterations (last increment {incs[-1]:.3e})", incs)


def contraction_factors(traj: Trajectory) -> np.ndarray:
    """Ratios of successive Picard increments (first increment excluded)."""
    inc = np.asarray(traj.increments)
    if inc.size < 3:
        return np.zeros(0)
    return inc[2:] / inc[1:-1]


def t_star(delta: float, p: float, C: float, u0_norm: float) -> float:
    """Contraction time min{(delta-1)/(C delta^p |u0|^{p-1}), 1/(2p C^p delta^{p-1} |u0|^{p-1})}."""
    if not delta > 1:
        raise ValueError(f"delta must exceed 1, got {delta!r}")
    if not (p > 1 and C > 0 and u0_norm > 0):
        raise ValueError("p must exceed 1 and C, |u0| must be positive")
    a = (delta - 1) / (C * delta**p * u0_norm ** (p - 1))
    b = 1.0 / (2 * p * C**p * delta ** (p - 1) * u0_norm ** (p - 1))
    return float(min(a, b))


def contraction_bound(delta: float, p: float, C: float, T: float, u0_norm: float) -> float:
    """2 p C^p delta^{p-1} T |u0|^{p-1}, the Lipschitz constant of the Picard map on the ball."""
    return float(2 * p * C**p * delta ** (p - 1) * T * u0_norm ** (p - 1))
