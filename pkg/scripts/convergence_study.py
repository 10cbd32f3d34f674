"""Measure the RK4 convergence order on the damped scenario's closed form.

Each halving of h should cut the endpoint error about sixteenfold until
roundoff takes over. Usage:  python3 scripts/convergence_study.py
"""

import math

import numpy as np

from clmech.dynamics import IntegratorConfig, integrate
from clmech.exprcore import parse
from clmech.lagrangian import ComplexLagrangian, MechState, derive_eom


def closed_form(t: np.ndarray) -> np.ndarray:
    gamma = 0.1
    wd = math.sqrt(1.0 - gamma**2 / 4.0)
    return np.exp(-gamma * t / 2) * (np.cos(wd * t) + (gamma / (2 * wd)) * np.sin(wd * t))


def main() -> None:
    lagr = ComplexLagrangian(
        parse("0.5*(m*qd^2 - k*q^2) + 0.5*i*l0*qd^2"),
        1.0,
        params={"m": 1.0, "k": 1.0, "l0": 0.1},
    )
    eom = derive_eom(lagr, MechState(0.0, (1.0,), (1.0,)))
    print(f"{'h':>10s} {'max |q - exact|':>16s} {'ratio':>8s} {'order':>7s}")
    prev = None
    for k in range(2, 9):
        h = 2.0**-k
        traj = integrate(eom, MechState(0.0, (1.0,), (0.0,)), IntegratorConfig(h, 0.0, 10.0))
        err = float(np.abs(traj.q[:, 0] - closed_form(traj.t)).max())
        if prev is None:
            print(f"{h:10.3e} {err:16.6e} {'':>8s} {'':>7s}")
        else:
            ratio = prev / err
            print(f"{h:10.3e} {err:16.6e} {ratio:8.2f} {math.log2(ratio):7.3f}")
        prev = err


if __name__ == "__main__":
    main()
