"""The bundled scenario corpus: eight analytic test cases.

Four families with closed-form solutions, plus gauge pairs for the
equivalence suite:

- free_particle, classical_oscillator: the real limit (M = 0).
- inverted_oscillator: purely imaginary quadratic Lagrangian; the mass matrix
  vanishes identically, so dynamics comes from the point-particle closure.
  With closure mass -1 the flow is qd = +q and q(1) = e.
- imaginary_ho: the bilinear i*a0*q*qd form. Its generalized mass a0/omega0
  is nonzero, so this is a regular system even though L = 0; it reproduces
  the harmonic oscillator exactly when a0 = m*omega0.
- damped_oscillator: L the classical oscillator plus M = l0*qd^2/2; the force
  map picks up -omega0*l0*qd and the flow is the underdamped oscillator with
  omega1 = omega0*l0/m.
- damped_oscillator_literal: the same damping term added to the purely
  imaginary oscillator instead. This reading is degenerate and its closure
  flow violates d f/dt = g by about 9 percent (the derive report surfaces the
  closure-consistency residual), which is why the corrected reading above is
  the canonical damped scenario. Both ship so the difference stays visible.
- gauge_pair_oscillator, gauge_pair_imaginary: bases for the equivalence
  suite, which constructs gauge partners from them.
"""

from __future__ import annotations

from .scenario import Scenario

_TWO_PI = 6.283185307179586

CORPUS_DICTS: tuple[dict, ...] = (
    {
        "schema_version": 1,
        "name": "free_particle",
        "lagrangian": "0.5*m*qd^2",
        "omega0": 1.0,
        "dim": 1,
        "params": {"m": 1.0},
        "initial": {"q": [0.0], "qd": [1.0]},
        "integrator": {"h": 0.01, "t_start": 0.0, "t_end": 5.0},
        "checks": ["variation", "noether", "geometry", "hamiltonian"],
    },
    {
        "schema_version": 1,
        "name": "classical_oscillator",
        "lagrangian": "0.5*m*qd^2 - 0.5*k*q^2",
        "omega0": 1.0,
        "dim": 1,
        "params": {"m": 1.0, "k": 1.0},
        "initial": {"q": [1.0], "qd": [0.0]},
        "integrator": {"h": 0.001, "t_start": 0.0, "t_end": 10.0},
        "checks": ["variation", "noether", "geometry", "hamiltonian"],
    },
    {
        "schema_version": 1,
        "name": "inverted_oscillator",
        "lagrangian": "0.5*i*(m*qd^2 - k*q^2)",
        "omega0": 1.0,
        "dim": 1,
        "params": {"m": 1.0, "k": 1.0},
        "initial": {"q": [1.0], "qd": [1.0]},
        "integrator": {"h": 0.001, "t_start": 0.0, "t_end": 1.0},
        "closure_mass": [-1.0],
        "checks": ["variation", "noether", "geometry"],
    },
    {
        "schema_version": 1,
        "name": "imaginary_ho",
        "lagrangian": "i*a0*q*qd",
        "omega0": 1.0,
        "dim": 1,
        "params": {"a0": 1.0, "m": 1.0, "k": 1.0},
        "initial": {"q": [1.0], "qd": [0.0]},
        "integrator": {"h": 0.001, "t_start": 0.0, "t_end": _TWO_PI},
        "checks": ["variation", "equivalence", "geometry", "hamiltonian"],
    },
    {
        "schema_version": 1,
        "name": "damped_oscillator",
        "lagrangian": "0.5*(m*qd^2 - k*q^2) + 0.5*i*l0*qd^2",
        "omega0": 1.0,
        "dim": 1,
        "params": {"m": 1.0, "k": 1.0, "l0": 0.1},
        "initial": {"q": [1.0], "qd": [0.0]},
        "integrator": {"h": 0.001, "t_start": 0.0, "t_end": 10.0},
        "checks": ["variation", "noether", "geometry", "hamiltonian"],
    },
    {
        "schema_version": 1,
        "name": "damped_oscillator_literal",
        "lagrangian": "0.5*i*(m*qd^2 - k*q^2) + 0.5*i*l0*qd^2",
        "omega0": 1.0,
        "dim": 1,
        "params": {"m": 1.0, "k": 1.0, "l0": 0.1},
        "initial": {"q": [1.0], "qd": [0.9090909090909091]},
        "integrator": {"h": 0.001, "t_start": 0.0, "t_end": 1.0},
        "closure_mass": [-1.1],
        "checks": ["noether", "geometry"],
    },
    {
        "schema_version": 1,
        "name": "gauge_pair_oscillator",
        "lagrangian": "0.5*m*qd^2 - 0.5*k*q^2",
        "omega0": 1.1,
        "dim": 1,
        "params": {"m": 1.5, "k": 2.0},
        "initial": {"q": [1.0], "qd": [0.0]},
        "integrator": {"h": 0.001, "t_start": 0.0, "t_end": 2.0},
        "checks": ["equivalence", "geometry"],
    },
    {
        "schema_version": 1,
        "name": "gauge_pair_imaginary",
        "lagrangian": "0.5*i*(m*qd^2 - k*q^2)",
        "omega0": 1.0,
        "dim": 1,
        "params": {"m": 1.0, "k": 1.0},
        "initial": {"q": [0.5], "qd": [0.5]},
        "integrator": {"h": 0.001, "t_start": 0.0, "t_end": 1.0},
        "closure_mass": [-1.0],
        "checks": ["equivalence", "geometry"],
    },
)


def bundled_corpus() -> list[Scenario]:
    """The eight bundled scenarios, validated through the schema."""
    return [Scenario.from_dict(d) for d in CORPUS_DICTS]


def corpus_scenario(name: str) -> Scenario:
    for d in CORPUS_DICTS:
        if d["name"] == name:
            return Scenario.from_dict(d)
    raise KeyError(f"no bundled scenario named {name!r}")
