"""LMO-only inner solver for the strongly convex proximal subproblem.

The subproblem is min_z <g, z> + ||z - u||^2 / (2*eta) over the feasible set,
solved by conditional gradient steps with exact segment minimization, stopping
once the subproblem's Frank-Wolfe gap drops to the prescribed tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ContractViolation, NumericalAbort, OracleCounters
from .feasible_sets import FeasibleSet


@dataclass
class SubproblemSpec:
    """One inner solve: gradient anchor g, center u, stepsize eta, gap tolerance delta."""

    g: np.ndarray
    u: np.ndarray
    eta: float
    delta: float
    max_inner: int = 50

    def __post_init__(self):
        if self.eta <= 0 or self.delta <= 0:
            raise ContractViolation("eta and delta must be positive")
        if self.g.shape != self.u.shape:
            raise ContractViolation("g and u must have equal lengths")
        if self.max_inner < 1:
            raise ContractViolation("max_inner must be positive")


@dataclass
class InnerResult:
    z: np.ndarray
    iters: int
    final_gap: float
    hit_cap: bool


def inner_iteration_cap(D: float, eta: float, delta: float) -> int:
    """Worst-case iteration count ceil(6 D^2 / (eta * delta)) for one inner solve."""
    if D <= 0 or eta <= 0 or delta <= 0:
        raise ContractViolation("all arguments must be positive")
    return int(math.ceil(6.0 * D * D / (eta * delta)))


def subproblem_value(spec: SubproblemSpec, z: np.ndarray) -> float:
    """Objective <g, z> + ||z - u||^2 / (2*eta) of the inner subproblem."""
    d = z - spec.u
    return float(np.dot(spec.g, z)) + float(np.dot(d, d)) / (2.0 * spec.eta)


def solve_subproblem(feasible_set: FeasibleSet, spec: SubproblemSpec,
                     counters: OracleCounters | None = None) -> InnerResult:
    """Run inner CG from the warm start u until the FW gap is at most delta.

    Uses exactly one LMO call per iteration: the vertex from the LMO both
    certifies the gap and provides the step direction. Every iterate is a convex
    combination of feasible points, so the returned z is feasible.
    """
    g, u, eta, delta = spec.g, spec.u, spec.eta, spec.delta
    z = u.copy()
    for t in range(1, spec.max_inner + 1):
        grad_psi = g + (z - u) / eta
        v = feasible_set.lmo(grad_psi, counters)
        gap = float(np.dot(grad_psi, z - v))
        if gap <= delta:
            return InnerResult(z=z, iters=t, final_gap=max(gap, 0.0), hit_cap=False)
        if t == spec.max_inner:
            return InnerResult(z=z, iters=t, final_gap=gap, hit_cap=True)
        d = v - z
        dn2 = float(np.dot(d, d))
        if dn2 == 0.0:
            raise NumericalAbort(
                f"inner CG: LMO returned the current iterate but the gap is {gap} > delta")
        if dn2 <= 1e-16 * eta:
            gamma = 1.0  # displacement below noise level: jump to the vertex
        else:
            gamma = min(1.0, gap * eta / dn2)
        z = (1.0 - gamma) * z + gamma * v
    raise AssertionError("unreachable")
