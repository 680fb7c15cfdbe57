import math

import numpy as np
import pytest

from adcgs.core import ContractViolation, OracleCounters
from adcgs.feasible_sets import L2Ball, Simplex
from adcgs.objectives import LeastSquares, smallest_eigenvalue
from adcgs.solver import (
    BETA_MAX,
    RestartConfig,
    ScheduleConfig,
    certified_bound,
    eta_floor,
    first_iteration_line_search,
    init_eta1,
    restart_horizon,
    run,
    run_restarted,
    schedule_delta,
    schedule_next_eta,
    schedule_tau,
)


def simplex_lsq(m, n, seed):
    rng = np.random.default_rng(seed)
    A = rng.uniform(0.0, 1.0, (m, n))
    x_star = Simplex(n).project(rng.uniform(0.0, 1.0, n))
    return LeastSquares(A, A @ x_star), Simplex(n)


class TestSchedules:
    def test_beta_max_value(self):
        assert BETA_MAX == pytest.approx(0.18350341907227408, abs=1e-16)

    def test_delta_schedules(self):
        D = math.sqrt(2.0)
        # cor1/cor3 decay: D^2 / (k^(1+theta) (k+1))
        assert schedule_delta("cor1", 1, D, theta=1e-3) == pytest.approx(1.0, rel=1e-3)
        assert schedule_delta("cor3", 4, D, theta=0.0) == pytest.approx(2.0 / 20.0)
        # cor2 fixed horizon: D^2 / (N k)
        assert schedule_delta("cor2", 5, D, N=100) == pytest.approx(2.0 / 500.0)
        with pytest.raises(ContractViolation):
            schedule_delta("cor2", 1, D, N=0)
        # explicit numerator override replaces D^2
        assert schedule_delta("cor2", 2, D, N=10, coef=1.0) == pytest.approx(1.0 / 20.0)

    def test_tau_schedules(self):
        assert schedule_tau("cor1", 1, 0.0) == 0.0
        assert schedule_tau("cor1", 7, 3.0) == 3.5
        assert schedule_tau("cor3", 2, 0.0) == 1.0
        # alpha = 1 recursion is tau + 1/2 regardless of eta and L
        assert schedule_tau("cor3", 5, 1.5, alpha=1.0, eta_k=9.0, L_prev=7.0) == 2.0
        # alpha < 1 adds the curvature correction
        t = schedule_tau("cor3", 3, 1.0, alpha=0.5, eta_k=0.1, L_prev=2.0)
        assert t == pytest.approx(1.0 + 0.25 + 2.0 * 0.5 * 0.1 * 2.0 / 1.0)

    def test_eta_recursions(self):
        beta = BETA_MAX
        eta = [0.0, 1.0]
        L = [0.0, 2.0]
        tau = [0.0, 0.0, 1.0, 1.5]
        e2 = schedule_next_eta("cor1", 2, eta, tau, L, beta)
        assert e2 == pytest.approx(min((1 - beta) * 1.0, 1.0 / 8.0))
        eta.append(e2)
        L.append(1.0)
        e3 = schedule_next_eta("cor1", 3, eta, tau, L, beta)
        assert e3 == pytest.approx(min(e2, 0.25))
        eta.append(e3)
        L.append(4.0)
        e4 = schedule_next_eta("cor1", 4, eta, tau, L, beta)
        assert e4 == pytest.approx(min(4.0 / 3.0 * e3, 3.0 / 32.0))
        # cor3 uses the tau-ratio and tau/(4L) terms
        e3c = schedule_next_eta("cor3", 3, eta, tau, L, beta)
        assert e3c == pytest.approx(min(4.0 / 3.0 * e2, (tau[1] + 1) / tau[2] * e2,
                                        tau[2] / 4.0))

    def test_zero_curvature_gives_unbounded_candidate(self):
        beta = BETA_MAX
        assert schedule_next_eta("cor1", 2, [0.0, 1.0], [0.0, 0.0], [0.0, 0.0],
                                 beta) == pytest.approx((1 - beta) * 1.0)

    def test_eta_floor_values(self):
        assert eta_floor("cor1", 6, 2.0) == pytest.approx(6.0 / 24.0)
        assert eta_floor("cor3", 6, 2.0, alpha=0.5) == pytest.approx(4.5 / 24.0)

    def test_config_validation(self):
        with pytest.raises(ContractViolation):
            ScheduleConfig(beta=0.5)  # above the admissible range
        with pytest.raises(ContractViolation):
            ScheduleConfig(alpha=1.5)
        with pytest.raises(ContractViolation):
            ScheduleConfig(variant="cor9")
        with pytest.raises(ContractViolation):
            ScheduleConfig(prox_mode="dual")


class TestInitialization:
    def test_identity_quadratic_gives_unit_estimate(self):
        # f = 0.5||x||^2 has constant curvature 1 along any probe
        obj = LeastSquares(np.eye(5), np.zeros(5))
        s = Simplex(5)
        z0 = np.full(5, 0.1)
        eta1, L0, z_m1, fallback = init_eta1(obj, s, z0, obj.gradient(z0), BETA_MAX)
        assert L0 == pytest.approx(1.0)
        assert eta1 == pytest.approx(0.4)  # default scale reproduces 2/(5 L0)
        assert not fallback

    def test_constant_objective_falls_back(self):
        obj = LeastSquares(np.zeros((3, 3)), np.zeros(3))
        s = Simplex(3)
        z0 = np.zeros(3)
        eta1, L0, _, fallback = init_eta1(obj, s, z0, obj.gradient(z0), BETA_MAX)
        assert fallback and L0 == 1.0
        assert eta1 == pytest.approx(0.4)

    def test_line_search_accepts_when_curvature_matches(self):
        obj, s = simplex_lsq(20, 6, 0)
        z0 = np.zeros(6)
        g0 = obj.gradient(z0)
        L0 = 1e-3  # deliberately small start: the search must shrink eta
        z1, eta1, L1, g1, trials, total_inner, res = first_iteration_line_search(
            obj, s, z0, g0, BETA_MAX, delta1=1.0, L0=L0, gamma=2.0)
        assert trials >= 1
        assert L1 == 0.0 or eta1 <= 2.0 / (5.0 * L1) + 1e-15
        assert s.contains(z1)


class TestRun:
    def test_constant_objective_is_stationary(self):
        obj = LeastSquares(np.zeros((4, 4)), np.zeros(4))
        s = Simplex(4)
        x0 = np.full(4, 0.2)
        res = run(obj, s, ScheduleConfig(max_outer=50), x0)
        assert res.stopped_by_gap
        assert res.trace[-1].k == 1  # fw gap 0 at the first iterate
        np.testing.assert_allclose(res.x_final, x0, atol=1e-9)

    def test_infeasible_start_rejected(self):
        obj, s = simplex_lsq(10, 4, 1)
        with pytest.raises(ContractViolation):
            run(obj, s, ScheduleConfig(), np.full(4, 1.0))

    def test_eta_floor_and_tau_bounds_hold(self):
        obj, s = simplex_lsq(40, 8, 2)
        for variant, alpha in (("cor1", 1.0), ("cor3", 0.3)):
            cfg = ScheduleConfig(variant=variant, alpha=alpha, max_outer=120,
                                 outer_stop_gap=0.0)
            res = run(obj, s, cfg, np.zeros(8), seed=2)
            L_hat = 1.0 / (4.0 * (1.0 - cfg.beta) * res.eta[1])
            for k in range(2, len(res.eta)):
                L_hat = max(L_hat, res.L[k - 1])
                assert res.eta[k] >= eta_floor(variant, k, L_hat, alpha) - 1e-12
            for k in range(2, len(res.tau)):
                assert res.tau[k] <= 0.5 * k + 1e-12
                if variant == "cor3":
                    assert res.tau[k] >= 1.0 + alpha * (k - 2) / 2.0 - 1e-12

    def test_cor3_alpha_one_matches_cor1_tau_exactly(self):
        obj, s = simplex_lsq(30, 6, 3)
        res = run(obj, s, ScheduleConfig(variant="cor3", alpha=1.0, max_outer=60,
                                         outer_stop_gap=0.0), np.zeros(6), seed=3)
        for k in range(2, len(res.tau)):
            assert res.tau[k] == 0.5 * k

    def test_certified_bound_covers_primal_gap_uncapped(self):
        obj, s = simplex_lsq(25, 5, 4)
        cfg = ScheduleConfig(variant="cor1", max_outer=150, max_inner=10**7,
                             outer_stop_gap=0.0)
        res = run(obj, s, cfg, np.zeros(5), f_ref=0.0, seed=4)
        assert not res.any_hit_cap
        for r in res.trace:
            assert r.primal_gap <= r.certified_bound + 1e-12

    def test_averaged_iterate_feasible_and_jensen(self):
        obj, s = simplex_lsq(30, 6, 5)
        res = run(obj, s, ScheduleConfig(max_outer=80, outer_stop_gap=0.0),
                  np.zeros(6), seed=5)
        assert s.contains(res.x_avg, tol=1e-8)
        assert obj.value(res.x_avg) <= max(r.f_value for r in res.trace) + 1e-9

    def test_oracle_accounting_per_iteration(self):
        obj, s = simplex_lsq(30, 6, 6)
        c = OracleCounters()
        res = run(obj, s, ScheduleConfig(max_outer=40, outer_stop_gap=0.0),
                  np.zeros(6), counters=c, seed=6)
        rows = res.trace
        for prev, cur in zip(rows, rows[1:]):
            assert cur.foo_calls - prev.foo_calls == 1
            assert cur.lmo_calls - prev.lmo_calls == cur.inner_iters_used + 1

    def test_stop_on_outer_gap(self):
        obj, s = simplex_lsq(20, 4, 7)
        res = run(obj, s, ScheduleConfig(max_outer=5000, outer_stop_gap=1e-6,
                                         max_inner=10**6), np.zeros(4), seed=7)
        assert res.stopped_by_gap
        assert res.trace[-1].fw_gap <= 1e-6

    def test_explicit_eta1_override(self):
        obj, s = simplex_lsq(20, 4, 8)
        res = run(obj, s, ScheduleConfig(eta1=0.05, max_outer=10,
                                         outer_stop_gap=0.0), np.zeros(4))
        assert res.eta[1] == 0.05

    def test_projection_mode_has_no_lmo_prox(self):
        obj, s = simplex_lsq(20, 4, 9)
        c = OracleCounters()
        cfg = ScheduleConfig(variant="cor3", prox_mode="projection", eta1=0.01,
                             max_outer=30, outer_stop_gap=0.0)
        res = run(obj, s, cfg, np.zeros(4), counters=c)
        assert c.projection_calls == 30
        assert all(r.inner_iters_used == 0 for r in res.trace)
        assert all(r.delta_k == 0.0 for r in res.trace)

    def test_certified_bound_helper(self):
        assert certified_bound(2.0, 1.0, 4.0, 0.5) == pytest.approx(1.2)


class TestRestart:
    def test_horizon_pinned_example(self):
        rcfg = RestartConfig(mu=1.0, L=4.0, phi0=1.0, eta1=0.1, stages=1,
                             gamma=2.0, beta=BETA_MAX)
        assert restart_horizon(rcfg) == 29

    def test_config_validation(self):
        with pytest.raises(ContractViolation):
            RestartConfig(mu=0.0, L=1.0, phi0=1.0, eta1=0.1, stages=2)
        with pytest.raises(ContractViolation):
            RestartConfig(mu=1.0, L=1.0, phi0=1.0, eta1=0.1, stages=2, gamma=1.0)

    def test_halving_guarantee_small_instance(self):
        rng = np.random.default_rng(11)
        m, n = 24, 8
        A = rng.uniform(0.0, 1.0, (m, n)) + 0.5 * np.eye(m, n)
        ball = L2Ball(n, 1.0)
        x_t = rng.standard_normal(n)
        x_t *= 0.9 / np.linalg.norm(x_t)
        obj = LeastSquares(A, A @ x_t)
        mu = smallest_eigenvalue(A)
        L = float(np.linalg.eigvalsh(A.T @ A)[-1])
        w0 = np.zeros(n)
        phi0 = obj.value(w0)
        rcfg = RestartConfig(mu=mu, L=L, phi0=phi0, eta1=2.0 / (5.0 * L),
                             stages=5, seed=11)
        res = run_restarted(obj, ball, rcfg, w0)
        for s, val in enumerate(res.stage_values):
            assert val <= phi0 / 2**s + 1e-12

    def test_restart_foo_accounting(self):
        rng = np.random.default_rng(12)
        m, n = 20, 6
        A = rng.uniform(0.0, 1.0, (m, n)) + 0.5 * np.eye(m, n)
        ball = L2Ball(n, 1.0)
        x_t = rng.standard_normal(n)
        x_t *= 0.9 / np.linalg.norm(x_t)
        obj = LeastSquares(A, A @ x_t)
        mu = smallest_eigenvalue(A)
        L = float(np.linalg.eigvalsh(A.T @ A)[-1])
        w0 = np.zeros(n)
        rcfg = RestartConfig(mu=mu, L=L, phi0=obj.value(w0),
                             eta1=2.0 / (5.0 * L), stages=3, seed=12)
        res = run_restarted(obj, ball, rcfg, w0)
        for foo, trials in zip(res.stage_foo_calls, res.stage_ls_trials):
            assert foo == res.N + trials  # N gradients plus line-search probes
            assert trials <= 200
