"""Adaptive conditional-gradient-sliding outer loop, schedules, and restarts.

The outer loop alternates an inexact proximal step (solved by LMO-only inner CG,
or by exact projection in the projection variant), a momentum average, and an
adaptive stepsize update driven by local Lipschitz estimates. Three stepsize
schedules are provided:

* ``cor1``: tau_k = k/2 with eta_k growing like k/(12*L_hat)
* ``cor2``: same stepsizes with a fixed-horizon inner tolerance delta_k ~ 1/(N*k)
* ``cor3``: alpha-parameterized tau recursion allowing larger stepsizes

A restart wrapper yields linear convergence for strongly convex objectives by
repeatedly running the fixed-horizon variant with geometrically tightening
inner tolerances.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ContractViolation,
    LineSearchFailure,
    NumericalAbort,
    OracleCounters,
    TraceRecord,
    check_finite,
)
from .feasible_sets import FeasibleSet
from .inner_cg import InnerResult, SubproblemSpec, solve_subproblem
from .objectives import Objective, lipschitz_ratio, local_lipschitz

# largest momentum parameter admitted by the schedule analysis
BETA_MAX = 1.0 - math.sqrt(6.0) / 3.0

_VARIANTS = ("cor1", "cor2", "cor3")


def _div(a: float, b: float) -> float:
    """a / b with the conventions a/0 = +inf (a > 0) and 0/0 = 0."""
    if b == 0.0:
        return math.inf if a > 0.0 else 0.0
    return a / b


@dataclass
class ScheduleConfig:
    """Parameters of one outer run."""

    variant: str = "cor1"
    alpha: float = 1.0               # cor3 only
    beta: float = BETA_MAX
    theta: float = 1e-3              # cor1/cor3 tolerance decay exponent
    N: int = 0                       # cor2 horizon (defaults to max_outer)
    eta1_mode: str = "from_L0"       # "from_L0" | "line_search"
    eta1_scale: float | None = None  # c in eta1 = c/(4(1-beta)L0); None -> 2/(5 L0)
    eta1: float | None = None        # explicit eta1, skipping initialization
    L0: float | None = None          # explicit initial curvature estimate
    gamma_ls: float = 2.0            # line-search growth factor
    max_inner: int = 50
    outer_stop_gap: float = 1e-10
    max_outer: int = 1000
    prox_mode: str = "lmo"           # "lmo" | "projection" (exact-prox variant)
    delta_coef: float | None = None  # numerator of delta_k; None -> D^2

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ContractViolation(f"unknown schedule variant '{self.variant}'")
        if not 0.0 < self.beta <= BETA_MAX + 1e-15:
            raise ContractViolation(f"beta must lie in (0, {BETA_MAX}]")
        if not 0.0 <= self.alpha <= 1.0:
            raise ContractViolation("alpha must lie in [0, 1]")
        if self.theta <= 0:
            raise ContractViolation("theta must be positive")
        if self.gamma_ls <= 1.0:
            raise ContractViolation("line-search growth factor must exceed 1")
        if self.prox_mode not in ("lmo", "projection"):
            raise ContractViolation(f"unknown prox mode '{self.prox_mode}'")
        if self.eta1_mode not in ("from_L0", "line_search"):
            raise ContractViolation(f"unknown eta1 mode '{self.eta1_mode}'")


def schedule_delta(variant: str, k: int, D: float, theta: float = 1e-3,
                   N: int | None = None, coef: float | None = None) -> float:
    """Inner FW-gap tolerance for outer iteration k."""
    if k < 1:
        raise ContractViolation("k must be >= 1")
    c = D * D if coef is None else coef
    if variant == "cor2":
        if not N or N < 1:
            raise ContractViolation("cor2 needs a positive horizon N")
        return c / (N * k)
    return c / (k ** (1.0 + theta) * (k + 1))


def schedule_tau(variant: str, k: int, tau_prev: float, alpha: float = 1.0,
                 eta_k: float = 0.0, L_prev: float = 0.0) -> float:
    """Momentum weight tau_k (tau_1 = 0)."""
    if k == 1:
        return 0.0
    if variant in ("cor1", "cor2"):
        return 0.5 * k
    if k == 2:
        return 1.0
    # tau_{k-1} >= 1 for k >= 3, so the recursion never divides by zero
    extra = 0.0
    if alpha < 1.0 and L_prev > 0.0:
        extra = 2.0 * (1.0 - alpha) * eta_k * L_prev / tau_prev
    return tau_prev + 0.5 * alpha + extra


def schedule_next_eta(variant: str, k: int, eta: list[float], tau: list[float],
                      L: list[float], beta: float) -> float:
    """Stepsize eta_k for k >= 2 from the histories (lists indexed by iteration)."""
    if k < 2:
        raise ContractViolation("stepsize rule applies from k = 2")
    if k == 2:
        return min((1.0 - beta) * eta[1], _div(1.0, 4.0 * L[1]))
    if variant in ("cor1", "cor2"):
        if k == 3:
            return min(eta[2], _div(1.0, 4.0 * L[2]))
        return min(k / (k - 1.0) * eta[k - 1], _div(k - 1.0, 8.0 * L[k - 1]))
    return min(
        4.0 / 3.0 * eta[k - 1],
        (tau[k - 2] + 1.0) / tau[k - 1] * eta[k - 1],
        _div(tau[k - 1], 4.0 * L[k - 1]),
    )


def eta_floor(variant: str, k: int, L_hat_prev: float, alpha: float = 1.0) -> float:
    """Provable lower bound on eta_k (k >= 2) given L_hat up to k-1."""
    if variant in ("cor1", "cor2"):
        return k / (12.0 * L_hat_prev)
    return (3.0 + alpha * (k - 3.0)) / (12.0 * L_hat_prev)


def _check_eta_floor(cfg: ScheduleConfig, k: int, eta_k: float, L_hat_prev: float) -> None:
    floor = eta_floor(cfg.variant, k, L_hat_prev, cfg.alpha)
    if eta_k < floor - 1e-12 * max(1.0, floor):
        raise NumericalAbort(
            f"stepsize floor violated at k={k}: eta={eta_k} < {floor}")


def init_eta1(obj: Objective, feasible_set: FeasibleSet, z0: np.ndarray,
              g0: np.ndarray, beta: float, c: float | None = None,
              counters: OracleCounters | None = None, seed: int = 0
              ) -> tuple[float, float, np.ndarray, bool]:
    """Line-search-free initialization of the first stepsize.

    Perturbs z0 a tiny step toward an LMO vertex to obtain a curvature estimate
    L0 = ||grad f(z_-1) - grad f(z0)|| / ||z_-1 - z0||, then sets
    eta1 = c / (4 (1-beta) L0). Costs one extra FOO call and one LMO call.
    Returns (eta1, L0, z_-1, fallback_used).
    """
    if c is None:
        c = 1.6 * (1.0 - beta)  # reproduces eta1 = 2/(5 L0)
    rng = np.random.default_rng(seed)
    v = z0
    for _ in range(100):
        d = rng.standard_normal(z0.shape[0])
        v = feasible_set.lmo(d, counters)
        if not np.array_equal(v, z0):
            break
    if np.array_equal(v, z0):
        raise NumericalAbort("could not find an LMO vertex distinct from z0")
    z_m1 = z0 + 1e-6 * (v - z0)
    g_m1 = obj.gradient(z_m1, counters)
    L0 = lipschitz_ratio(g_m1, g0, z_m1, z0)
    fallback = False
    if L0 == 0.0:
        L0 = 1.0  # constant gradient along the probe segment
        fallback = True
    eta1 = c / (4.0 * (1.0 - beta) * L0)
    return eta1, L0, z_m1, fallback


def first_iteration_line_search(obj: Objective, feasible_set: FeasibleSet,
                                z0: np.ndarray, g0: np.ndarray, beta: float,
                                delta1: float, L0: float, gamma: float,
                                counters: OracleCounters | None = None,
                                max_inner: int = 50, max_trials: int = 200):
    """Halving line search on the first stepsize until eta_1 <= 2/(5 L_1).

    Each trial solves the first proximal subproblem at the candidate stepsize
    and measures the resulting curvature ratio. Returns
    (z1, eta1, L1, g1, trials, total_inner_iters, accepted InnerResult).
    """
    if L0 <= 0.0 or gamma <= 1.0:
        raise ContractViolation("need L0 > 0 and gamma > 1")
    total_inner = 0
    for j in range(max_trials + 1):
        eta = 1.0 / (4.0 * (1.0 - beta) * L0 * gamma**j)
        res = solve_subproblem(
            feasible_set, SubproblemSpec(g0, z0, eta, delta1, max_inner), counters)
        total_inner += res.iters
        g1 = obj.gradient(res.z, counters)
        L1 = lipschitz_ratio(g1, g0, res.z, z0)  # 0/0 = 0 when z1 == z0
        if L1 == 0.0 or eta <= 2.0 / (5.0 * L1):
            return res.z, eta, L1, g1, j + 1, total_inner, res
    raise LineSearchFailure(
        f"first-iteration line search failed after {max_trials + 1} trials "
        "(objective likely not locally smooth)")


@dataclass
class RunResult:
    """Trace and final state of one outer run."""

    trace: list[TraceRecord]
    x_final: np.ndarray
    x_avg: np.ndarray
    x_best: np.ndarray
    counters: OracleCounters
    eta: list[float]       # eta[k], index 0 unused; includes the trailing eta_{k+1}
    tau: list[float]
    L: list[float]
    delta: list[float]
    L_hat: float
    L_low: float
    any_hit_cap: bool
    stopped_by_gap: bool
    ls_trials: int = 0
    warnings: list[str] = field(default_factory=list)

    @property
    def f_best(self) -> float:
        return min(r.f_value for r in self.trace)


def certified_bound(E: float, S: float, tau_k: float, eta_next: float) -> float:
    """Objective-gap certificate (E + S_k) / ((tau_k + 1) eta_{k+1})."""
    return (E + S) / ((tau_k + 1.0) * eta_next)


def run(obj: Objective, feasible_set: FeasibleSet, cfg: ScheduleConfig,
        x0: np.ndarray, counters: OracleCounters | None = None,
        f_ref: float | None = None, seed: int = 0) -> RunResult:
    """Run the adaptive sliding loop from the feasible point x0 = y0 = z0."""
    t_start = time.perf_counter()
    counters = counters if counters is not None else OracleCounters()
    x0 = np.asarray(x0, dtype=np.float64)
    if not feasible_set.contains(x0):
        raise ContractViolation("x0 must be feasible")
    if cfg.prox_mode == "projection" and not feasible_set.supports_projection:
        raise ContractViolation(
            f"projection unsupported for set '{feasible_set.kind}'")
    warnings: list[str] = []
    D = feasible_set.diameter()
    N_horizon = cfg.N if cfg.N else cfg.max_outer
    exact_prox = cfg.prox_mode == "projection"

    def delta_at(k: int) -> float:
        if exact_prox:
            return 0.0
        return schedule_delta(cfg.variant, k, D, theta=cfg.theta,
                              N=N_horizon, coef=cfg.delta_coef)

    def prox_step(g: np.ndarray, u: np.ndarray, eta_k: float, delta_k: float) -> InnerResult:
        if exact_prox:
            z = feasible_set.project(u - eta_k * g, counters)
            return InnerResult(z=z, iters=0, final_gap=0.0, hit_cap=False)
        return solve_subproblem(
            feasible_set, SubproblemSpec(g, u, eta_k, delta_k, cfg.max_inner),
            counters)

    # gradient at x0 (one FOO call); function values are cached, not counted
    g_cur = obj.gradient(x0, counters)
    f_cur = obj.value(x0)

    # --- first stepsize -------------------------------------------------
    L0 = cfg.L0
    if cfg.eta1 is not None:
        eta1 = cfg.eta1
        if L0 is None:
            L0 = 1.0 / (4.0 * (1.0 - cfg.beta) * eta1)
    else:
        if L0 is None:
            eta1, L0, _, fb = init_eta1(obj, feasible_set, x0, g_cur, cfg.beta,
                                        c=cfg.eta1_scale, counters=counters, seed=seed)
            if fb:
                warnings.append("init_eta1: constant gradient, fell back to L0 = 1")
        else:
            c = cfg.eta1_scale if cfg.eta1_scale is not None else 1.6 * (1.0 - cfg.beta)
            eta1 = c / (4.0 * (1.0 - cfg.beta) * L0)

    # --- iteration k = 1 (beta_1 = 0, tau_1 = 0, so y1 = z0 and x1 = z1) --
    y = x0.copy()
    delta1 = delta_at(1)
    ls_trials = 0
    if cfg.eta1_mode == "line_search":
        if exact_prox:
            raise ContractViolation("line search requires the LMO prox mode")
        z1, eta1, L1, g1, ls_trials, inner_used, res1 = first_iteration_line_search(
            obj, feasible_set, x0, g_cur, cfg.beta, delta1, L0, cfg.gamma_ls,
            counters, cfg.max_inner)
    else:
        res1 = prox_step(g_cur, y, eta1, delta1)
        z1 = res1.z
        g1 = obj.gradient(z1, counters)
        L1 = local_lipschitz(obj, x0, z1, g_cur, g1, first_iter=True)
        inner_used = res1.iters
    x = z1
    check_finite(x)
    f_prev_x = f_cur  # objective at x0, for best-so-far tracking
    g_cur = g1
    f_cur = obj.value(x)

    # histories, indexed by iteration number (slot 0 unused)
    eta = [0.0, eta1]
    tau = [0.0, 0.0]
    L = [0.0, L1]
    delta = [0.0, delta1]
    L_hat = max(1.0 / (4.0 * (1.0 - cfg.beta) * eta1), L1)
    L_low = L1

    eta.append(schedule_next_eta(cfg.variant, 2, eta, tau, L, cfg.beta))
    _check_eta_floor(cfg, 2, eta[2], L_hat)
    delta.append(delta_at(2))
    d10 = z1 - x0
    E = D * D / (2.0 * cfg.beta) \
        + 0.5 * eta[2] * (2.5 * L1 - 1.0 / eta1) * float(np.dot(d10, d10))
    S = eta[2] * (delta[2] + delta[1])
    sum_eta = eta[2]
    avg_accum = np.zeros_like(x)  # sum over i < k of weight_i * x_i

    trace: list[TraceRecord] = []
    any_cap = res1.hit_cap
    stopped = False

    def emit(k: int, inner_iters: int, cap: bool) -> float:
        fw = feasible_set.fw_gap(g_cur, x, counters)
        bound = certified_bound(E, S, tau[k], eta[k + 1])
        trace.append(TraceRecord(
            k=k, foo_calls=counters.foo_calls, lmo_calls=counters.lmo_calls,
            elapsed_seconds=time.perf_counter() - t_start,
            f_value=f_cur,
            primal_gap=None if f_ref is None else max(f_cur - f_ref, 0.0),
            fw_gap=fw, eta_k=eta[k], tau_k=tau[k], delta_k=delta[k], L_k=L[k],
            L_hat_k=L_hat, inner_iters_used=inner_iters, hit_cap=cap,
            certified_bound=bound))
        return fw

    fw = emit(1, inner_used, res1.hit_cap)
    stopped = fw <= cfg.outer_stop_gap
    x_best, f_min = (x.copy(), f_cur) if f_cur <= f_prev_x else (x0.copy(), f_prev_x)

    k = 1
    while not stopped and k < cfg.max_outer:
        k += 1
        tau.append(schedule_tau(cfg.variant, k, tau[k - 1], cfg.alpha, eta[k], L[k - 1]))
        res = prox_step(g_cur, y, eta[k], delta[k])
        any_cap = any_cap or res.hit_cap
        z = res.z
        y = (1.0 - cfg.beta) * y + cfg.beta * z
        x_new = (tau[k] * x + z) / (1.0 + tau[k])
        check_finite(x_new)
        g_new = obj.gradient(x_new, counters)
        f_new = obj.value(x_new)
        L_k = local_lipschitz(obj, x, x_new, g_cur, g_new,
                              f_prev=f_cur, f_cur=f_new)
        L.append(L_k)
        L_hat = max(L_hat, L_k)
        L_low = min(L_low, L_k)

        eta.append(schedule_next_eta(cfg.variant, k + 1, eta, tau, L, cfg.beta))
        _check_eta_floor(cfg, k + 1, eta[k + 1], L_hat)
        delta.append(delta_at(k + 1))
        S += eta[k + 1] * (delta[k + 1] + delta[k])
        sum_eta += eta[k + 1]

        # averaged-iterate weight for x_{k-1}, now that eta_{k+1} is known
        w = (tau[k - 1] + 1.0) * eta[k] - tau[k] * eta[k + 1]
        if w < -1e-12 * max(1.0, (tau[k - 1] + 1.0) * eta[k]):
            raise NumericalAbort(f"negative averaging weight {w} at k={k}")
        avg_accum = avg_accum + max(w, 0.0) * x

        x, g_cur, f_cur = x_new, g_new, f_new
        if f_cur < f_min:
            x_best, f_min = x.copy(), f_cur
        fw = emit(k, res.iters, res.hit_cap)
        stopped = fw <= cfg.outer_stop_gap

    x_avg = (avg_accum + (tau[k] + 1.0) * eta[k + 1] * x) / sum_eta
    return RunResult(
        trace=trace, x_final=x, x_avg=x_avg, x_best=x_best, counters=counters,
        eta=eta, tau=tau, L=L, delta=delta, L_hat=L_hat, L_low=L_low,
        any_hit_cap=any_cap, stopped_by_gap=stopped,
        ls_trials=ls_trials, warnings=warnings)


@dataclass
class RestartConfig:
    """Inputs of the restart scheme for strongly convex objectives."""

    mu: float
    L: float
    phi0: float
    eta1: float
    stages: int
    gamma: float = 2.0
    beta: float = BETA_MAX
    max_inner: int = 50
    seed: int = 0

    def __post_init__(self):
        if min(self.mu, self.L, self.phi0, self.eta1) <= 0:
            raise ContractViolation("mu, L, phi0, eta1 must be positive")
        if self.gamma <= 1.0:
            raise ContractViolation("gamma must exceed 1")


def restart_horizon(rcfg: RestartConfig) -> int:
    """Fixed per-stage iteration count N of the restart scheme."""
    b = rcfg.beta
    return int(math.ceil(math.sqrt(
        15.0 * rcfg.gamma * rcfg.L / rcfg.mu
        * (1.0 / (b * (1.0 - b)) + 1.5 * rcfg.eta1))))


@dataclass
class RestartResult:
    w_final: np.ndarray
    stage_values: list[float]       # f(w_s) for s = 0..stages
    N: int
    counters: OracleCounters
    stage_runs: list[RunResult]
    stage_foo_calls: list[int]      # FOO calls consumed by each stage
    stage_ls_trials: list[int]


def run_restarted(obj: Objective, feasible_set: FeasibleSet, rcfg: RestartConfig,
                  w0: np.ndarray, counters: OracleCounters | None = None,
                  f_ref: float | None = None) -> RestartResult:
    """Geometric-halving restarts: each stage runs the fixed-horizon schedule
    with the first-iteration line search and tolerance delta_k = 2*phi0/(2^s mu N k)."""
    counters = counters if counters is not None else OracleCounters()
    w = np.asarray(w0, dtype=np.float64)
    if not feasible_set.contains(w):
        raise ContractViolation("w0 must be feasible")
    N = restart_horizon(rcfg)
    stage_values = [obj.value(w)]
    stage_runs: list[RunResult] = []
    stage_foo: list[int] = []
    stage_ls: list[int] = []
    for s in range(1, rcfg.stages + 1):
        foo_before = counters.foo_calls
        cfg = ScheduleConfig(
            variant="cor2", N=N, max_outer=N, beta=rcfg.beta,
            eta1_mode="line_search", L0=rcfg.L, gamma_ls=rcfg.gamma,
            max_inner=rcfg.max_inner, outer_stop_gap=0.0,
            delta_coef=2.0 * rcfg.phi0 / (2.0**s * rcfg.mu))
        res = run(obj, feasible_set, cfg, w, counters=counters, f_ref=f_ref,
                  seed=rcfg.seed + s)
        w = res.x_final
        stage_values.append(obj.value(w))
        stage_runs.append(res)
        stage_foo.append(counters.foo_calls - foo_before)
        stage_ls.append(res.ls_trials)
    return RestartResult(
        w_final=w, stage_values=stage_values, N=N, counters=counters,
        stage_runs=stage_runs, stage_foo_calls=stage_foo, stage_ls_trials=stage_ls)
