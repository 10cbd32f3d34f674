"""Dynamics of a complex Lagrangian L + iM over real coordinates.

The derivative with respect to the complex phase variable
w = (qd + i*omega0*q)/sqrt(2) is (d/dqd - (i/omega0) d/dq)/sqrt(2). Writing
the dynamical law u = i*omega0 * dLagr/dw in components gives two real maps:

    momentum map  f_a = dL/dqd_a + (1/omega0) dM/dq_a      (p = f)
    force map     g_a = dL/dq_a  - omega0     dM/dqd_a     (pd = g)

The compatibility condition d/dt f = g is the generalized Euler-Lagrange
equation. Expanding the total derivative yields the mass matrix
A_ab = df_a/dqd_b; if A is invertible the system is second-order (regular),
with qdd solving A qdd = g - (df/dq) qd - df/dt. If A is singular the system
is closed to first order by the point-particle identification f = m_c * qd,
solved for qd by damped Newton iteration (closure mass m_c is user-supplied
per coordinate; its sign selects the branch of the flow).
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .exprcore import (
    Const,
    Expr,
    compile_expr,
    diff,
    evaluate,
    free_symbols,
    im_part,
    re_part,
    simplify,
)

REGULAR = "regular"
DEGENERATE = "degenerate"

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class SingularMass(Exception):
    """Mass matrix (or a Newton Jacobian) lost rank at the requested state."""


class DegenerateWithoutClosure(Exception):
    """The mass matrix is singular at the probe and no closure mass was given."""


class ClosureInconsistent(Exception):
    """The algebraic closure f(q, qd, t) = m*qd has no solution at the state."""


class UndeclaredSymbol(Exception):
    """The Lagrangian references a symbol that is neither state nor parameter."""


class ClosureConsistencyWarning(UserWarning):
    """Degenerate closure does not reproduce the force map along its own flow."""


def coordinate_names(dim: int) -> tuple[str, ...]:
    return ("q",) if dim == 1 else tuple(f"q{a}" for a in range(1, dim + 1))


def velocity_names(dim: int) -> tuple[str, ...]:
    return ("qd",) if dim == 1 else tuple(f"qd{a}" for a in range(1, dim + 1))


@dataclass(frozen=True)
class MechState:
    """A (t, q, qd) sample of configuration-velocity space."""

    t: float
    q: tuple[float, ...]
    qd: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "q", tuple(float(x) for x in self.q))
        object.__setattr__(self, "qd", tuple(float(x) for x in self.qd))
        entries = (self.t, *self.q, *self.qd)
        if not all(math.isfinite(x) for x in entries):
            raise ValueError(f"state entries must be finite, got {entries}")
        if len(self.q) != len(self.qd):
            raise ValueError("q and qd must have equal length")


@dataclass(frozen=True)
class ComplexPhase:
    """w = (qd + i*omega0*q)/sqrt(2) and u = (pd + i*omega0*p)/sqrt(2)."""

    w: tuple[complex, ...]
    u: tuple[complex, ...]


@dataclass(frozen=True)
class ComplexLagrangian:
    """An expression in {t, q_a, qd_a, params} plus the frequency constant omega0.

    The real part of the expression is L, the imaginary part is M. omega0
    must be nonzero (it divides in the phase variable and the momentum map).
    """

    expr: Expr
    omega0: float
    dim: int = 1
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega0", float(self.omega0))
        object.__setattr__(self, "params", dict(self.params))
        if self.omega0 == 0 or not math.isfinite(self.omega0):
            raise ValueError("omega0 must be a nonzero finite real")
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        reserved = {"i", "t", *self.coords, *self.vels}
        for name, value in self.params.items():
            if not _IDENT.match(name) or name in reserved:
                raise ValueError(f"invalid or reserved parameter name '{name}'")
            if not math.isfinite(float(value)):
                raise ValueError(f"parameter '{name}' must be finite")
        allowed = reserved | set(self.params)
        loose = free_symbols(self.expr) - allowed
        if loose:
            raise UndeclaredSymbol(
                f"undeclared symbols in Lagrangian: {', '.join(sorted(loose))}"
            )

    @property
    def coords(self) -> tuple[str, ...]:
        return coordinate_names(self.dim)

    @property
    def vels(self) -> tuple[str, ...]:
        return velocity_names(self.dim)

    @cached_property
    def L_expr(self) -> Expr:
        return re_part(self.expr)

    @cached_property
    def M_expr(self) -> Expr:
        return im_part(self.expr)

    def bindings(self, s: MechState) -> dict[str, float]:
        b = dict(self.params)
        b["t"] = s.t
        for name, value in zip(self.coords, s.q):
            b[name] = value
        for name, value in zip(self.vels, s.qd):
            b[name] = value
        return b

    def eval(self, s: MechState) -> complex:
        return evaluate(self.expr, self.bindings(s))


class _Maps:
    """Compiled positional closures for the derived maps; args are (t, *q, *qd)."""

    def __init__(self, lagr: ComplexLagrangian, f, g, A, f_q, f_t) -> None:
        args = ("t",) + lagr.coords + lagr.vels
        cc = lambda e: compile_expr(e, args, lagr.params)  # noqa: E731
        self.f = [cc(e) for e in f]
        self.g = [cc(e) for e in g]
        self.A = [[cc(e) for e in row] for row in A]
        self.f_q = [[cc(e) for e in row] for row in f_q]
        self.f_t = [cc(e) for e in f_t]

    @staticmethod
    def _real(v) -> float:
        # f, g, A are real-valued by construction (Re/Im parts of the
        # Lagrangian's derivatives); the imaginary component is exactly zero
        # because conjugate trees evaluate to bitwise conjugates.
        return float(v.real)

    def f_vec(self, t, q, qd) -> np.ndarray:
        return np.array([self._real(fn(t, *q, *qd)) for fn in self.f])

    def g_vec(self, t, q, qd) -> np.ndarray:
        return np.array([self._real(fn(t, *q, *qd)) for fn in self.g])

    def A_mat(self, t, q, qd) -> np.ndarray:
        return np.array([[self._real(fn(t, *q, *qd)) for fn in row] for row in self.A])

    def fq_mat(self, t, q, qd) -> np.ndarray:
        return np.array([[self._real(fn(t, *q, *qd)) for fn in row] for row in self.f_q])

    def ft_vec(self, t, q, qd) -> np.ndarray:
        return np.array([self._real(fn(t, *q, *qd)) for fn in self.f_t])


@dataclass(frozen=True, eq=False)
class EomSystem:
    """Derived dynamics: symbolic maps, classification, optional closure."""

    lagrangian: ComplexLagrangian
    f: tuple[Expr, ...]
    g: tuple[Expr, ...]
    A: tuple[tuple[Expr, ...], ...]
    f_q: tuple[tuple[Expr, ...], ...]
    f_t: tuple[Expr, ...]
    classification: str
    closure_mass: tuple[float, ...] | None
    probe: MechState
    closure_consistency: float | None
    maps: _Maps = field(repr=False)

    @property
    def dim(self) -> int:
        return self.lagrangian.dim

    @property
    def is_regular(self) -> bool:
        return self.classification == REGULAR


def solve_linear(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting.

    Raises SingularMass when a pivot falls below 1e-13 times the pivot row's
    entry scale: the matrix is (or has drifted) singular.
    """
    a0 = np.array(A, dtype=float)
    b0 = np.array(b, dtype=float)
    a = a0.copy()
    x = b0.copy()
    n = x.shape[0]
    scale = np.abs(a).max(axis=1)
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        row_scale = scale[piv]
        if row_scale == 0.0 or abs(a[piv, k]) <= 1e-13 * row_scale:
            raise SingularMass(
                f"pivot {a[piv, k]!r} below 1e-13 of row scale {row_scale!r}"
            )
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            x[[k, piv]] = x[[piv, k]]
            scale[[k, piv]] = scale[[piv, k]]
        for j in range(k + 1, n):
            m = a[j, k] / a[k, k]
            if m != 0.0:
                a[j, k:] -= m * a[k, k:]
                x[j] -= m * x[k]
    out = np.empty(n)
    for k in range(n - 1, -1, -1):
        out[k] = (x[k] - a[k, k + 1 :] @ out[k + 1 :]) / a[k, k]
    residual = np.abs(a0 @ out - b0).max() if n else 0.0
    if residual > 1e-10 * (1.0 + np.abs(b0).max(initial=0.0)):
        raise SingularMass(f"solve residual {residual!r} exceeds contract bound")
    return out


def _det(A: np.ndarray) -> float:
    a = np.array(A, dtype=float)
    n = a.shape[0]
    det = 1.0
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if a[piv, k] == 0.0:
            return 0.0
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            det = -det
        det *= a[k, k]
        for j in range(k + 1, n):
            m = a[j, k] / a[k, k]
            if m != 0.0:
                a[j, k:] -= m * a[k, k:]
    return det


def _closure_velocity(
    maps: _Maps,
    mass: np.ndarray,
    t: float,
    q: Sequence[float],
    guess: Sequence[float],
    tol: float = 1e-12,
    max_iter: int = 50,
) -> np.ndarray:
    """Solve f(q, qd, t) = mass * qd for qd by damped Newton iteration."""
    qd = np.array(guess, dtype=float)
    m = np.asarray(mass, dtype=float)
    r = maps.f_vec(t, q, qd) - m * qd
    norm = np.abs(r).max()
    for _ in range(max_iter):
        if norm <= tol * (1.0 + np.abs(m * qd).max()):
            return qd
        jac = maps.A_mat(t, q, qd) - np.diag(m)
        try:
            step = solve_linear(jac, r)
        except SingularMass as err:
            raise ClosureInconsistent(
                f"Newton Jacobian singular at t={t!r}: {err}"
            ) from err
        lam = 1.0
        for _ in range(25):
            trial = qd - lam * step
            r_trial = maps.f_vec(t, q, trial) - m * trial
            norm_trial = np.abs(r_trial).max()
            if norm_trial < norm:
                qd, r, norm = trial, r_trial, norm_trial
                break
            lam *= 0.5
        else:
            raise ClosureInconsistent(
                f"Newton stalled at residual {norm!r} (t={t!r}, q={list(q)!r})"
            )
    raise ClosureInconsistent(
        f"no convergence after {max_iter} iterations, residual {norm!r}"
    )


def _closure_consistency(
    maps: _Maps, mass: np.ndarray, probe: MechState
) -> float:
    """Relative residual of m*qdd = g along the closure flow at the probe.

    The closure u = m*wd implies both p = m*qd (solved) and pd = m*qdd; the
    latter must agree with the force map for the first-order flow to satisfy
    the Euler-Lagrange compatibility condition.
    """
    q = np.array(probe.q)
    qd = _closure_velocity(maps, mass, probe.t, q, probe.qd)
    delta = 1e-6 * (1.0 + np.abs(qd).max())
    qd_plus = _closure_velocity(maps, mass, probe.t + delta, q + delta * qd, qd)
    qd_minus = _closure_velocity(maps, mass, probe.t - delta, q - delta * qd, qd)
    qdd = (qd_plus - qd_minus) / (2.0 * delta)
    g = maps.g_vec(probe.t, q, qd)
    return float(np.abs(mass * qdd - g).max() / max(1.0, np.abs(g).max()))


def derive_eom(
    lagr: ComplexLagrangian,
    probe: MechState,
    closure_mass: Sequence[float] | None = None,
    eps_reg: float = 1e-10,
) -> EomSystem:
    """Build f, g, A symbolically and classify the system at the probe state.

    Regular iff |det A(probe)| > eps_reg scaled by the largest |A| entry.
    Degenerate systems require a closure mass (any nonzero real per
    coordinate; the sign selects the flow branch) and are checked for
    closure consistency at the probe, warning when m*qdd deviates from the
    force map by more than 1e-9 relative.
    """
    n = lagr.dim
    if len(probe.q) != n:
        raise ValueError(f"probe has {len(probe.q)} coordinates, expected {n}")
    L, M = lagr.L_expr, lagr.M_expr
    inv_w0 = Const(1.0 / lagr.omega0)
    w0 = Const(lagr.omega0)
    coords, vels = lagr.coords, lagr.vels
    f = tuple(
        simplify(diff(L, vels[a]) + inv_w0 * diff(M, coords[a])) for a in range(n)
    )
    g = tuple(
        simplify(diff(L, coords[a]) - w0 * diff(M, vels[a])) for a in range(n)
    )
    A = tuple(tuple(diff(f[a], vels[b]) for b in range(n)) for a in range(n))
    f_q = tuple(tuple(diff(f[a], coords[b]) for b in range(n)) for a in range(n))
    f_t = tuple(diff(f[a], "t") for a in range(n))
    maps = _Maps(lagr, f, g, A, f_q, f_t)

    a_probe = maps.A_mat(probe.t, probe.q, probe.qd)
    scale = float(np.abs(a_probe).max(initial=0.0))
    regular = scale > 0.0 and abs(_det(a_probe)) > eps_reg * scale

    if regular:
        if closure_mass is not None:
            raise ValueError("closure_mass supplied but the system is regular")
        return EomSystem(
            lagrangian=lagr,
            f=f,
            g=g,
            A=A,
            f_q=f_q,
            f_t=f_t,
            classification=REGULAR,
            closure_mass=None,
            probe=probe,
            closure_consistency=None,
            maps=maps,
        )

    if closure_mass is None:
        raise DegenerateWithoutClosure(
            "mass matrix is singular at the probe; supply a closure mass"
        )
    mass = tuple(float(m) for m in closure_mass)
    if len(mass) != n:
        raise ValueError(f"closure_mass has length {len(mass)}, expected {n}")
    if any(m == 0.0 or not math.isfinite(m) for m in mass):
        raise ValueError("closure_mass entries must be nonzero finite reals")
    consistency = _closure_consistency(maps, np.array(mass), probe)
    if consistency > 1e-9:
        warnings.warn(
            f"closure flow violates d(f)/dt = g by {consistency:.3g} relative "
            "(the Lagrangian's parameters do not satisfy the constraint the "
            "closure imposes)",
            ClosureConsistencyWarning,
            stacklevel=2,
        )
    return EomSystem(
        lagrangian=lagr,
        f=f,
        g=g,
        A=A,
        f_q=f_q,
        f_t=f_t,
        classification=DEGENERATE,
        closure_mass=mass,
        probe=probe,
        closure_consistency=consistency,
        maps=maps,
    )


def momentum(eom: EomSystem, s: MechState) -> np.ndarray:
    """p_a = f_a(q, qd, t); the classical dL/dqd when M vanishes."""
    return eom.maps.f_vec(s.t, s.q, s.qd)


def force(eom: EomSystem, s: MechState) -> np.ndarray:
    """pd_a = g_a(q, qd, t); the classical dL/dq when M vanishes."""
    return eom.maps.g_vec(s.t, s.q, s.qd)


def accel(eom: EomSystem, s: MechState) -> np.ndarray:
    """qdd solving A qdd = g - (df/dq) qd - df/dt by partial-pivot elimination."""
    if not eom.is_regular:
        raise ValueError("accel requires a regular system; this one is degenerate")
    return _accel_arrays(eom, s.t, np.array(s.q), np.array(s.qd))


def _accel_arrays(eom: EomSystem, t: float, q, qd) -> np.ndarray:
    maps = eom.maps
    rhs = maps.g_vec(t, q, qd) - maps.fq_mat(t, q, qd) @ qd - maps.ft_vec(t, q, qd)
    return solve_linear(maps.A_mat(t, q, qd), rhs)


def closure_velocity(eom: EomSystem, t: float, q, guess=None) -> np.ndarray:
    """First-order closure velocity: qd solving f(q, qd, t) = m_c * qd."""
    if eom.closure_mass is None:
        raise ValueError("closure_velocity requires a degenerate system with a mass")
    if guess is None:
        guess = eom.probe.qd
    return _closure_velocity(eom.maps, np.array(eom.closure_mass), t, q, guess)


def wirtinger(lagr: ComplexLagrangian, s: MechState, a: int = 0) -> complex:
    """(1/sqrt(2)) [dLagr/dqd_a - (i/omega0) dLagr/dq_a] evaluated at s.

    Coordinate index `a` is 0-based.
    """
    b = lagr.bindings(s)
    d_vel = evaluate(diff(lagr.expr, lagr.vels[a]), b)
    d_pos = evaluate(diff(lagr.expr, lagr.coords[a]), b)
    return (d_vel - (1j / lagr.omega0) * d_pos) / math.sqrt(2.0)


def to_complex_phase(
    lagr: ComplexLagrangian, eom: EomSystem, s: MechState
) -> ComplexPhase:
    """Phase variables w and u at s, with pd taken from the force map."""
    w0 = lagr.omega0
    rt2 = math.sqrt(2.0)
    p = momentum(eom, s)
    pd = force(eom, s)
    w = tuple((s.qd[a] + 1j * w0 * s.q[a]) / rt2 for a in range(lagr.dim))
    u = tuple((pd[a] + 1j * w0 * p[a]) / rt2 for a in range(lagr.dim))
    return ComplexPhase(w=w, u=u)
