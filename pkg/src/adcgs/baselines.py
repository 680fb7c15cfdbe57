"""Comparison solvers run under the same trace schema and oracle accounting.

* ``run_cg_open``: conditional gradient with open-loop stepsizes 2/(k+2)
* ``run_cg_ls``: conditional gradient with exact (quadratic) or Armijo line search
* ``run_cgs``: conditional gradient sliding with a known global smoothness constant
* ``run_pg``: projected gradient with stepsize 1/L
* ``run_acfgm``: accelerated scheme with exact projection prox steps

All baselines emit the same per-iteration TraceRecord rows as the adaptive
solver, reuse the same oracle counters, and stop on the same FW-gap rule, so
trajectories are directly comparable.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ContractViolation,
    NumericalAbort,
    OracleCounters,
    TraceRecord,
    check_finite,
)
from .feasible_sets import FeasibleSet
from .inner_cg import SubproblemSpec, solve_subproblem
from .objectives import LeastSquares, Objective, lipschitz_ratio
from .solver import RunResult, ScheduleConfig, run


@dataclass
class BaselineConfig:
    """Shared knobs of the comparison solvers."""

    algorithm: str = "cg_open"
    L_override: float | None = None
    max_iter: int = 1000
    stop_gap: float = 1e-10
    alpha: float = 0.5          # acfgm only
    max_inner: int = 50         # cgs only
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ("cg_open", "cg_ls", "cgs", "pg", "acfgm"):
            raise ContractViolation(f"unknown baseline '{self.algorithm}'")
        if self.max_iter < 1:
            raise ContractViolation("max_iter must be positive")
        if self.L_override is not None and self.L_override <= 0:
            raise ContractViolation("L_override must be positive")


@dataclass
class BaselineResult:
    trace: list[TraceRecord]
    x_final: np.ndarray
    counters: OracleCounters
    no_global_L: bool = False   # ran with a sampled surrogate smoothness constant
    diverged: bool = False      # pg only: objective increased, run aborted
    stalled: bool = False       # cg_ls only: backtracking exhausted
    warnings: list[str] = field(default_factory=list)

    @property
    def f_best(self) -> float:
        return min(r.f_value for r in self.trace)


def _record(trace, k, counters, t0, f, gap, f_ref, inner=0, cap=False,
            eta=0.0, tau=0.0, delta=0.0):
    trace.append(TraceRecord(
        k=k, foo_calls=counters.foo_calls, lmo_calls=counters.lmo_calls,
        elapsed_seconds=time.perf_counter() - t0, f_value=f,
        primal_gap=None if f_ref is None else max(f - f_ref, 0.0),
        fw_gap=gap, eta_k=eta, tau_k=tau, delta_k=delta,
        inner_iters_used=inner, hit_cap=cap))


def _resolve_L(obj: Objective, feasible_set: FeasibleSet, cfg: BaselineConfig,
               counters: OracleCounters) -> tuple[float, bool]:
    """Global smoothness constant, or a sampled local surrogate when none exists."""
    if cfg.L_override is not None:
        return cfg.L_override, False
    L = obj.global_smoothness()
    if L is not None:
        return L, False
    # surrogate: largest gradient-difference ratio over random feasible segments
    rng = np.random.default_rng(cfg.seed)
    best = 0.0
    for _ in range(10):
        a = feasible_set.lmo(rng.standard_normal(feasible_set.dim), counters)
        b = feasible_set.lmo(rng.standard_normal(feasible_set.dim), counters)
        t = rng.uniform(0.2, 0.8)
        p, q = t * a + (1 - t) * b, (1 - t) * a + t * b
        best = max(best, lipschitz_ratio(
            obj.gradient(p, counters), obj.gradient(q, counters), p, q))
    if best == 0.0:
        best = 1.0
    return best, True


def run_cg_open(obj: Objective, feasible_set: FeasibleSet, cfg: BaselineConfig,
                x0: np.ndarray, counters: OracleCounters | None = None,
                f_ref: float | None = None) -> BaselineResult:
    """Conditional gradient with the open-loop stepsize 2/(k+2), k from 0."""
    return _run_cg(obj, feasible_set, cfg, x0, counters, f_ref, line_search=False)


def run_cg_ls(obj: Objective, feasible_set: FeasibleSet, cfg: BaselineConfig,
              x0: np.ndarray, counters: OracleCounters | None = None,
              f_ref: float | None = None) -> BaselineResult:
    """Conditional gradient with exact stepsize on quadratics, Armijo backtracking otherwise."""
    return _run_cg(obj, feasible_set, cfg, x0, counters, f_ref, line_search=True)


def _run_cg(obj, feasible_set, cfg, x0, counters, f_ref, line_search):
    t0 = time.perf_counter()
    counters = counters if counters is not None else OracleCounters()
    x = np.asarray(x0, dtype=np.float64)
    if not feasible_set.contains(x):
        raise ContractViolation("x0 must be feasible")
    trace: list[TraceRecord] = []
    stalled = False
    for k in range(cfg.max_iter + 1):
        g = obj.gradient(x, counters)
        f = obj.value(x)
        v = feasible_set.lmo(g, counters)  # one LMO: direction and gap certificate
        gap = max(float(np.dot(g, x - v)), 0.0)
        _record(trace, k, counters, t0, f, gap, f_ref)
        if gap <= cfg.stop_gap or k == cfg.max_iter or stalled:
            break
        d = v - x
        if not line_search:
            gamma = 2.0 / (k + 2.0)
        elif isinstance(obj, LeastSquares):
            curv = obj.curvature_along(d)
            gamma = 1.0 if curv == 0.0 else min(1.0, gap / curv)
        else:
            # Armijo backtracking: halve from 1 until sufficient decrease
            gamma, ok = 1.0, False
            for _ in range(41):
                if obj.value(x + gamma * d) <= f - 1e-4 * gamma * gap:
                    ok = True
                    break
                gamma *= 0.5
            if not ok:
                stalled = True
                continue
        x = x + gamma * d
        check_finite(x)
    return BaselineResult(trace=trace, x_final=x, counters=counters, stalled=stalled)


def run_cgs(obj: Objective, feasible_set: FeasibleSet, cfg: BaselineConfig,
            x0: np.ndarray, counters: OracleCounters | None = None,
            f_ref: float | None = None) -> BaselineResult:
    """Conditional gradient sliding with a fixed global smoothness constant.

    Per-iteration recursion (Lan and Zhou's sliding scheme, fixed horizon N):
    gamma_k = 3/(k+2), prox weight beta_k = 3L/(k+1) (stepsize 1/beta_k),
    inner tolerance delta_k = L D^2/(N k), inner CG capped at max_inner.
    """
    t0 = time.perf_counter()
    counters = counters if counters is not None else OracleCounters()
    x = np.asarray(x0, dtype=np.float64)
    if not feasible_set.contains(x):
        raise ContractViolation("x0 must be feasible")
    L, surrogate = _resolve_L(obj, feasible_set, cfg, counters)
    D = feasible_set.diameter()
    N = cfg.max_iter
    y = x.copy()
    trace: list[TraceRecord] = []
    g0 = obj.gradient(y, counters)
    f0 = obj.value(y)
    gap0 = feasible_set.fw_gap(g0, y, counters)
    _record(trace, 0, counters, t0, f0, gap0, f_ref)
    if gap0 <= cfg.stop_gap:
        return BaselineResult(trace=trace, x_final=y, counters=counters,
                              no_global_L=surrogate)
    for k in range(1, N + 1):
        gamma = 3.0 / (k + 2.0)
        beta_k = 3.0 * L / (k + 1.0)
        delta_k = L * D * D / (N * k)
        z = (1.0 - gamma) * y + gamma * x
        g = obj.gradient(z, counters)
        res = solve_subproblem(
            feasible_set,
            SubproblemSpec(g, x, 1.0 / beta_k, delta_k, cfg.max_inner), counters)
        x = res.z
        y = (1.0 - gamma) * y + gamma * x
        check_finite(y)
        f = obj.value(y)
        gap = feasible_set.fw_gap(obj.gradient(y, counters), y, counters)
        _record(trace, k, counters, t0, f, gap, f_ref,
                inner=res.iters, cap=res.hit_cap, eta=1.0 / beta_k, delta=delta_k)
        if gap <= cfg.stop_gap:
            break
    return BaselineResult(trace=trace, x_final=y, counters=counters,
                          no_global_L=surrogate)


def run_pg(obj: Objective, feasible_set: FeasibleSet, cfg: BaselineConfig,
           x0: np.ndarray, counters: OracleCounters | None = None,
           f_ref: float | None = None) -> BaselineResult:
    """Projected gradient x <- project(x - grad/L); aborts if the objective rises."""
    t0 = time.perf_counter()
    counters = counters if counters is not None else OracleCounters()
    if not feasible_set.supports_projection:
        raise ContractViolation(
            f"projection unsupported for set '{feasible_set.kind}'")
    x = np.asarray(x0, dtype=np.float64)
    if not feasible_set.contains(x):
        raise ContractViolation("x0 must be feasible")
    L, surrogate = _resolve_L(obj, feasible_set, cfg, counters)
    trace: list[TraceRecord] = []
    diverged = False
    f_prev = None
    for k in range(cfg.max_iter + 1):
        g = obj.gradient(x, counters)
        f = obj.value(x)
        gap = feasible_set.fw_gap(g, x, counters)
        _record(trace, k, counters, t0, f, gap, f_ref, eta=1.0 / L)
        if f_prev is not None and f > f_prev + 1e-12 * max(1.0, abs(f_prev)):
            diverged = True
            break
        if gap <= cfg.stop_gap or k == cfg.max_iter:
            break
        f_prev = f
        x = feasible_set.project(x - g / L, counters)
        check_finite(x)
    return BaselineResult(trace=trace, x_final=x, counters=counters,
                          no_global_L=surrogate, diverged=diverged)


def run_acfgm(obj: Objective, feasible_set: FeasibleSet, cfg: BaselineConfig,
              x0: np.ndarray, counters: OracleCounters | None = None,
              f_ref: float | None = None) -> RunResult:
    """Exact-projection accelerated variant: the adaptive outer loop with
    z_k = project(y - eta*grad) and the inner tolerance machinery disabled."""
    scfg = ScheduleConfig(
        variant="cor3", alpha=cfg.alpha, max_outer=cfg.max_iter,
        outer_stop_gap=cfg.stop_gap, prox_mode="projection")
    return run(obj, feasible_set, scfg, x0, counters=counters, f_ref=f_ref,
               seed=cfg.seed)


def run_baseline(obj: Objective, feasible_set: FeasibleSet, cfg: BaselineConfig,
                 x0: np.ndarray, counters: OracleCounters | None = None,
                 f_ref: float | None = None):
    """Dispatch on cfg.algorithm; returns BaselineResult (RunResult for acfgm)."""
    fn = {
        "cg_open": run_cg_open,
        "cg_ls": run_cg_ls,
        "cgs": run_cgs,
        "pg": run_pg,
        "acfgm": run_acfgm,
    }[cfg.algorithm]
    return fn(obj, feasible_set, cfg, x0, counters=counters, f_ref=f_ref)
