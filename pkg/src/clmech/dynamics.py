"""Fixed-step RK4 integration of the three flow kinds, with diagnostics.

Regular systems integrate the first-order form (q, qd) -> (qd, accel).
Degenerate systems integrate q -> closure velocity (first order). Hamiltonian
fields integrate (q, p) from the phase-space flow. Every trajectory records a
per-sample Euler-Lagrange residual in the form appropriate to its kind:

    second-order:  max_a |g_a - (A qdd + (df/dq) qd + df/dt)_a|
    closure:       max_a |f_a - m_a qd_a|
    hamiltonian:   |p - f(q, qd(q, p, t), t)|

The requested step h is snapped to h_eff = span / round(span / h) so the grid
lands exactly on t_end; callers that need an odd sample count for Simpson
quadrature re-plan n themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

from .lagrangian import (
    DEGENERATE,
    EomSystem,
    MechState,
    _accel_arrays,
    _closure_velocity,
)

if TYPE_CHECKING:  # pragma: no cover
    from .hamiltonian import HamiltonianField, PhaseState

BLOWUP_LIMIT = 1e12

SECOND_ORDER = "second-order"
CLOSURE = "closure"
HAMILTONIAN = "hamiltonian"


class StepBlowUp(Exception):
    """A state component exceeded 1e12 in magnitude (or went non-finite)."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 plan over [t_start, t_end].

    t_end < t_start integrates backward (the step is negated internally).
    """

    h: float
    t_start: float
    t_end: float
    max_steps: int = 10_000_000
    method: str = "rk4"

    def __post_init__(self) -> None:
        if self.method != "rk4":
            raise ValueError(f"unsupported method '{self.method}'")
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.t_end == self.t_start:
            raise ValueError("t_end must differ from t_start")
        if abs(self.t_end - self.t_start) / self.h > self.max_steps:
            raise ValueError("plan exceeds max_steps")

    @property
    def n_steps(self) -> int:
        """Step count after snapping h onto the span."""
        return max(1, round(abs(self.t_end - self.t_start) / self.h))

    @property
    def dt(self) -> float:
        """Signed effective step; n_steps of these reach t_end exactly."""
        return (self.t_end - self.t_start) / self.n_steps


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled flow with per-sample momenta and EL residuals."""

    kind: str
    h: float
    t: np.ndarray
    q: np.ndarray
    qd: np.ndarray
    p: np.ndarray
    el_residual: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.t.shape[0]

    @property
    def dim(self) -> int:
        return self.q.shape[1]

    def state(self, idx: int) -> MechState:
        return MechState(self.t[idx], tuple(self.q[idx]), tuple(self.qd[idx]))

    @property
    def final_state(self) -> MechState:
        return self.state(self.n_samples - 1)


def _check_finite(y: np.ndarray, t: float) -> None:
    bad = ~np.isfinite(y)
    if bad.any() or np.abs(y).max() > BLOWUP_LIMIT:
        raise StepBlowUp(f"state magnitude exceeded {BLOWUP_LIMIT:g} at t={t!r}")


def _grid(cfg: IntegratorConfig) -> tuple[np.ndarray, float, int]:
    n = cfg.n_steps
    dt = cfg.dt
    t = cfg.t_start + dt * np.arange(n + 1)
    t[-1] = cfg.t_end  # exact endpoint
    return t, dt, n


def integrate(eom: EomSystem, init: MechState, cfg: IntegratorConfig) -> Trajectory:
    """RK4 trajectory of a regular (second-order) or degenerate (closure) system."""
    if len(init.q) != eom.dim:
        raise ValueError(f"init has {len(init.q)} coordinates, expected {eom.dim}")
    if eom.classification == DEGENERATE:
        return _integrate_closure(eom, init, cfg)
    return _integrate_regular(eom, init, cfg)


def _integrate_regular(
    eom: EomSystem, init: MechState, cfg: IntegratorConfig
) -> Trajectory:
    n_dim = eom.dim
    t_grid, dt, n = _grid(cfg)
    maps = eom.maps

    def deriv(t: float, y: np.ndarray) -> np.ndarray:
        q, qd = y[:n_dim], y[n_dim:]
        return np.concatenate((qd, _accel_arrays(eom, t, q, qd)))

    q_out = np.empty((n + 1, n_dim))
    qd_out = np.empty((n + 1, n_dim))
    p_out = np.empty((n + 1, n_dim))
    res_out = np.empty(n + 1)
    y = np.concatenate((np.array(init.q), np.array(init.qd)))

    for k in range(n + 1):
        t = t_grid[k]
        _check_finite(y, t)
        q, qd = y[:n_dim], y[n_dim:]
        q_out[k], qd_out[k] = q, qd
        p_out[k] = maps.f_vec(t, q, qd)
        qdd = _accel_arrays(eom, t, q, qd)
        res_out[k] = np.abs(
            maps.g_vec(t, q, qd)
            - maps.A_mat(t, q, qd) @ qdd
            - maps.fq_mat(t, q, qd) @ qd
            - maps.ft_vec(t, q, qd)
        ).max()
        if k < n:
            y = _rk4_step(deriv, t, y, dt)
    return Trajectory(SECOND_ORDER, dt, t_grid, q_out, qd_out, p_out, res_out)


def _integrate_closure(
    eom: EomSystem, init: MechState, cfg: IntegratorConfig
) -> Trajectory:
    n_dim = eom.dim
    t_grid, dt, n = _grid(cfg)
    maps = eom.maps
    mass = np.array(eom.closure_mass)
    guess = np.array(init.qd)

    def vel(t: float, q: np.ndarray, g0: np.ndarray) -> np.ndarray:
        return _closure_velocity(maps, mass, t, q, g0)

    q_out = np.empty((n + 1, n_dim))
    qd_out = np.empty((n + 1, n_dim))
    p_out = np.empty((n + 1, n_dim))
    res_out = np.empty(n + 1)
    q = np.array(init.q)

    for k in range(n + 1):
        t = t_grid[k]
        _check_finite(q, t)
        qd = vel(t, q, guess)
        guess = qd
        q_out[k], qd_out[k] = q, qd
        p_out[k] = maps.f_vec(t, q, qd)
        res_out[k] = np.abs(p_out[k] - mass * qd).max()
        if k < n:
            k1 = qd
            k2 = vel(t + dt / 2, q + dt / 2 * k1, k1)
            k3 = vel(t + dt / 2, q + dt / 2 * k2, k2)
            k4 = vel(t + dt, q + dt * k3, k3)
            q = q + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return Trajectory(CLOSURE, dt, t_grid, q_out, qd_out, p_out, res_out)


def integrate_hamiltonian(
    field: "HamiltonianField", init: "PhaseState", cfg: IntegratorConfig
) -> Trajectory:
    """RK4 trajectory of the phase-space flow (q, p) of a single-DOF field.

    The qd column is filled by inverting the momentum map at each sample, so
    the CSV schema is identical across flow kinds.
    """
    t_grid, dt, n = _grid(cfg)
    guess = 0.0  # Newton guess threaded from the last inversion

    def deriv(t: float, y: np.ndarray) -> np.ndarray:
        return np.array(field.flow(t, y[0], y[1], guess))

    q_out = np.empty((n + 1, 1))
    qd_out = np.empty((n + 1, 1))
    p_out = np.empty((n + 1, 1))
    res_out = np.empty(n + 1)
    y = np.array([init.q, init.p])

    for k in range(n + 1):
        t = t_grid[k]
        _check_finite(y, t)
        q, p = y
        qd = field.invert(t, q, p, guess)
        guess = qd
        q_out[k, 0], qd_out[k, 0], p_out[k, 0] = q, qd, p
        res_out[k] = abs(p - field.momentum(t, q, qd))
        if k < n:
            y = _rk4_step(deriv, t, y, dt)
    return Trajectory(HAMILTONIAN, dt, t_grid, q_out, qd_out, p_out, res_out)


def _rk4_step(
    deriv: Callable[[float, np.ndarray], np.ndarray],
    t: float,
    y: np.ndarray,
    dt: float,
) -> np.ndarray:
    k1 = deriv(t, y)
    k2 = deriv(t + dt / 2, y + dt / 2 * k1)
    k3 = deriv(t + dt / 2, y + dt / 2 * k2)
    k4 = deriv(t + dt, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def sampled_path(
    eom: EomSystem,
    q_fn: Callable[[float], Sequence[float]],
    qd_fn: Callable[[float], Sequence[float]],
    cfg: IntegratorConfig,
) -> Trajectory:
    """Trajectory built from a user-supplied path instead of integration.

    Residuals are computed honestly against the path (qdd by central
    difference of qd_fn), so a non-solution path reports a large residual.
    Used to probe the action functional off the solution manifold.
    """
    t_grid, dt, n = _grid(cfg)
    n_dim = eom.dim
    maps = eom.maps
    q_out = np.empty((n + 1, n_dim))
    qd_out = np.empty((n + 1, n_dim))
    p_out = np.empty((n + 1, n_dim))
    res_out = np.empty(n + 1)
    delta = 1e-6 * max(1.0, abs(dt) * n)
    for k in range(n + 1):
        t = t_grid[k]
        q = np.array(q_fn(t), dtype=float).reshape(n_dim)
        qd = np.array(qd_fn(t), dtype=float).reshape(n_dim)
        q_out[k], qd_out[k] = q, qd
        p_out[k] = maps.f_vec(t, q, qd)
        if eom.classification == DEGENERATE:
            res_out[k] = np.abs(p_out[k] - np.array(eom.closure_mass) * qd).max()
        else:
            qdd = (
                np.array(qd_fn(t + delta), dtype=float)
                - np.array(qd_fn(t - delta), dtype=float)
            ).reshape(n_dim) / (2 * delta)
            res_out[k] = np.abs(
                maps.g_vec(t, q, qd)
                - maps.A_mat(t, q, qd) @ qdd
                - maps.fq_mat(t, q, qd) @ qd
                - maps.ft_vec(t, q, qd)
            ).max()
    return Trajectory(SECOND_ORDER, dt, t_grid, q_out, qd_out, p_out, res_out)


def to_csv(traj: Trajectory) -> str:
    """CSV export: t,q_1..q_N,qd_1..qd_N,p_1..p_N,el_residual (17 sig digits)."""
    n_dim = traj.dim
    cols = (
        ["t"]
        + [f"q_{a}" for a in range(1, n_dim + 1)]
        + [f"qd_{a}" for a in range(1, n_dim + 1)]
        + [f"p_{a}" for a in range(1, n_dim + 1)]
        + ["el_residual"]
    )
    lines = [",".join(cols)]
    for k in range(traj.n_samples):
        row = (
            [traj.t[k]]
            + list(traj.q[k])
            + list(traj.qd[k])
            + list(traj.p[k])
            + [traj.el_residual[k]]
        )
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"
