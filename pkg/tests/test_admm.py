import numpy as np
import pytest

from conftest import CH, table2_problem
from edgecoop.admm import (
    SolveStatus,
    SolverConfig,
    build_problem,
    dual_update,
    empirical_convergence_check,
    export_problem_csv,
    gaussian_back_substitution,
    import_problem_csv,
    lp_oracle,
    round_assignment,
    solve,
    write_trace_csv,
)
from edgecoop.model import Task


def nested_objective(prob, x):
    """Independent spreadsheet-style evaluation of the weighted objective,
    with explicit queue sums instead of collected coefficients."""
    nbs, nh = prob.num_stations, prob.num_tasks
    total = 0.0
    for i in range(nbs):
        for j in range(nh):
            queue = 0.0
            for jp in range(j):
                queue += prob.t_exec[i, jp] * x[i, jp]
            for jp in range(j + 1):
                queue += prob.t_up[i, jp] * x[i, jp]
            own = (prob.t_exec[i, j] + prob.t_down[i, j]) * x[i, j]
            total += prob.coe * (queue + own) + (1 - prob.coe) * prob.e[i, j] * x[i, j]
    return total


class TestBuildProblem:
    def test_empty_task_set_rejected(self):
        with pytest.raises(ValueError):
            build_problem([], np.array([1e10]), np.array([1e9]), np.array([1e6]),
                          np.zeros((1, 0)), 0.5, CH)

    def test_single_cell_objective(self):
        t = Task(id=0, u=5000, c=9e7, r=2000, t_max=20)
        prob = build_problem([t], np.array([1e10]), np.array([1e9]), np.array([1e6]),
                             np.array([[1e8]]), 0.5, CH)
        x = np.array([[1.0]])
        exec_s = 9e7 / 1e10
        up = 5000 / 1e8
        down = 2000 / 1e8
        e = CH.tx_power_user * up + CH.kappa * 1e20 * 9e7
        want = 0.5 * (exec_s + up + down) + 0.5 * e
        assert prob.objective(x) == pytest.approx(want, rel=1e-12)

    def test_coe_one_drops_energy(self):
        rng = np.random.default_rng(0)
        prob = table2_problem(rng, 3, 2, coe=1.0)
        # perturbing the energy matrix must not change the objective weights
        assert np.allclose(prob.w, prob.coe * (prob.w / prob.coe))
        w_before = prob.w.copy()
        prob2 = table2_problem(np.random.default_rng(0), 3, 2, coe=1.0)
        prob2.e *= 100.0
        assert np.allclose(prob2.w, w_before)

    def test_2x2_spreadsheet_oracle(self):
        rng = np.random.default_rng(1)
        prob = table2_problem(rng, 2, 2)
        for _ in range(10):
            x = rng.uniform(0, 1, size=(2, 2))
            assert prob.objective(x) == pytest.approx(nested_objective(prob, x), rel=1e-12)

    def test_deadline_lhs_matches_nested_sum(self):
        rng = np.random.default_rng(2)
        prob = table2_problem(rng, 3, 2)
        x = rng.uniform(0, 1, size=(2, 3))
        for j in range(3):
            want = 0.0
            for i in range(2):
                for jp in range(j):
                    want += prob.t_exec[i, jp] * x[i, jp]
                for jp in range(j + 1):
                    want += prob.t_up[i, jp] * x[i, jp]
                want += (prob.t_exec[i, j] + prob.t_down[i, j]) * x[i, j]
            assert prob.deadline_lhs(x, j) == pytest.approx(want, rel=1e-12)


class TestGaussianBackSubstitution:
    def test_noop_is_exact(self):
        v = np.array([0.3, 0.8, -0.2, 1.7])
        out = gaussian_back_substitution(v, v.copy(), 0.5)
        assert np.array_equal(out, v)

    def test_two_block_closed_form(self):
        # one corrected block plus the multiplier: the triangular system is
        # the identity, so the correction is a plain relaxation step
        rng = np.random.default_rng(3)
        for _ in range(20):
            v = rng.normal(size=2)
            vt = rng.normal(size=2)
            a2 = float(rng.uniform(0.05, 0.95))
            got = gaussian_back_substitution(v, vt, a2)
            want = v + a2 * (vt - v)
            assert np.max(np.abs(got - want)) < 1e-12

    def test_three_block_hand_solution(self):
        # blocks (x2, x3) plus multiplier: d3 = a2 r3, d2 = a2 r2 - d3
        v = np.array([0.1, 0.4, -0.3])
        vt = np.array([0.7, 0.2, 0.5])
        a2 = 0.5
        r = a2 * (vt - v)
        want = v + np.array([r[0] - r[1], r[1], r[2]])
        got = gaussian_back_substitution(v, vt, a2)
        assert np.max(np.abs(got - want)) < 1e-15

    def test_alpha2_linearity(self):
        rng = np.random.default_rng(4)
        v = rng.normal(size=5)
        vt = rng.normal(size=5)
        d1 = gaussian_back_substitution(v, vt, 0.2) - v
        d2 = gaussian_back_substitution(v, vt, 0.4) - v
        assert np.max(np.abs(d2 - 2.0 * d1)) < 1e-9

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            gaussian_back_substitution(np.zeros(3), np.zeros(4), 0.5)

    def test_alpha2_range_rejected(self):
        with pytest.raises(ValueError):
            gaussian_back_substitution(np.zeros(3), np.zeros(3), 1.0)


class TestDualUpdate:
    def test_consensus_fixed_point(self):
        lam = np.array([[1.0, -2.0]])
        x = np.array([[0.3, 0.7]])
        assert np.array_equal(dual_update(lam, 2.0, x, x.copy()), lam)

    def test_unit_gap(self):
        lam = np.zeros((1, 1))
        out = dual_update(lam, 2.0, np.ones((1, 1)), np.zeros((1, 1)))
        assert out[0, 0] == 2.0

    def test_recurrence_replay(self):
        rng = np.random.default_rng(5)
        lam = np.zeros((2, 3))
        shadow = np.zeros((2, 3))
        for _ in range(50):
            x = rng.uniform(size=(2, 3))
            y = rng.uniform(size=(2, 3))
            lam = dual_update(lam, 1.7, x, y)
            shadow = shadow + 1.7 * (x - y)
            assert np.allclose(lam, shadow, atol=1e-14)


class TestSolve:
    def test_single_cell_forced_assignment(self):
        rng = np.random.default_rng(6)
        prob = table2_problem(rng, 1, 1)
        res = solve(prob, SolverConfig(kappa=50))
        assert res.status is SolveStatus.CONVERGED
        assert res.iterations <= 25
        assert res.x[0, 0] == pytest.approx(1.0, abs=1e-3)
        assert res.y[0, 0] == pytest.approx(1.0, abs=1e-3)
        assert res.objective == pytest.approx(prob.w[0, 0], rel=1e-3)

    def test_zero_cost_uniform_fixed_point(self):
        rng = np.random.default_rng(7)
        prob = table2_problem(rng, 2, 3)
        prob.w = np.zeros_like(prob.w)
        res = solve(prob, SolverConfig(kappa=20, init="uniform"))
        assert res.status is SolveStatus.CONVERGED
        assert np.allclose(res.x, 1.0 / 3.0, atol=1e-12)

    def test_energy_coefficient_monotonicity(self):
        rng = np.random.default_rng(8)
        prob = table2_problem(rng, 2, 2)
        cfg = SolverConfig(kappa=1, dwell=1, init="uniform")
        base = solve(prob, cfg).trace[0].x[1, 0]
        prob.w[1, 0] *= 4.0
        bumped = solve(prob, cfg).trace[0].x[1, 0]
        assert bumped <= base + 1e-12

    def test_one_task_two_stations_grid_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            prob = table2_problem(rng, 1, 2)
            res = solve(prob, SolverConfig(kappa=500, tol=1e-5))
            grid = np.linspace(0.0, 1.0, 1001)
            objs = [prob.objective(np.array([[g], [1.0 - g]])) for g in grid]
            assert res.objective <= min(objs) + 1e-3 * abs(min(objs)) + 1e-9

    def test_consensus_at_convergence(self):
        rng = np.random.default_rng(10)
        prob = table2_problem(rng, 4, 3)
        res = solve(prob, SolverConfig(kappa=500, tol=1e-5))
        assert res.status is SolveStatus.CONVERGED
        assert np.max(np.abs(res.x - res.y)) <= 1e-4

    def test_feasibility_invariants(self):
        rng = np.random.default_rng(11)
        for seed in range(8):
            prob = table2_problem(np.random.default_rng(seed), 4, 3,
                                  tight=(seed % 2 == 0))
            res = solve(prob, SolverConfig(kappa=2000, tol=1e-3))
            assert res.status is SolveStatus.CONVERGED
            assert np.all(res.x >= -1e-12) and np.all(res.x <= 1.0 + 1e-12)
            assert np.max(np.abs(res.x.sum(axis=0) - 1.0)) <= 1e-3
            assert np.all(res.x @ prob.c <= prob.m_c * (1.0 + 1e-3))
            assert np.all(res.x @ prob.u <= prob.m_u * (1.0 + 1e-3))

    def test_oracle_closeness_small(self):
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            nh = int(rng.integers(1, 5))
            nbs = int(rng.integers(2, 4))
            prob = table2_problem(rng, nh, nbs, tight=(seed % 3 == 0))
            res = solve(prob, SolverConfig(kappa=2000, tol=1e-3))
            opt, _ = lp_oracle(prob)
            assert abs(res.objective - opt) <= 0.05 * abs(opt)

    def test_storage_multiplier_complementary_slackness(self):
        rng = np.random.default_rng(12)
        slack = table2_problem(rng, 3, 2)  # huge budgets
        res = solve(slack, SolverConfig(kappa=200))
        assert np.all(res.theta == 0.0)

        rng = np.random.default_rng(13)
        tight = table2_problem(rng, 1, 3)
        tight.m_u = np.full(3, float(tight.u.sum()) * 0.4)  # must use 3 stations
        res = solve(tight, SolverConfig(kappa=2000, tol=1e-3))
        assert res.status is SolveStatus.CONVERGED
        util = (res.y @ tight.u) / tight.m_u
        assert float(util.max()) >= 0.95  # the budget actually binds

    def test_deadline_infeasible_reported(self):
        t = Task(id=0, u=5000, c=9e7, r=2000, t_max=1e-4)
        prob = build_problem([t], np.array([1e10, 2e10]), np.full(2, 1e9),
                             np.full(2, 1e6), np.full((2, 1), 1e8), 0.5, CH)
        res = solve(prob, SolverConfig(kappa=300))
        assert res.status is SolveStatus.CONVERGED_INFEASIBLE
        assert res.deadline_violation > 0.0
        assert np.any(res.eps > 0.0)

    def test_residual_stability_after_burn_in(self):
        rng = np.random.default_rng(14)
        prob = table2_problem(rng, 5, 3, tight=True)
        res = solve(prob, SolverConfig(kappa=200, tol=1e-12))  # forced long run
        primals = [rec.primal_residual for rec in res.trace]
        # anchor on the late burn-in window so a residual wobble straddling
        # k=30 is tolerated but divergence is not
        anchor = max(max(primals[15:30]), 1e-9)
        assert all(p <= 1.5 * anchor + 1e-9 for p in primals[30:])

    def test_lambda_unchanged_at_consensus(self):
        rng = np.random.default_rng(15)
        prob = table2_problem(rng, 2, 2)
        res = solve(prob, SolverConfig(kappa=500, tol=1e-6))
        lam_again = dual_update(res.lam, 2.0, res.x, res.x.copy())
        assert np.array_equal(lam_again, res.lam)

    def test_trace_csv_schema(self, tmp_path):
        rng = np.random.default_rng(16)
        prob = table2_problem(rng, 2, 2)
        res = solve(prob, SolverConfig(kappa=50))
        path = tmp_path / "trace.csv"
        write_trace_csv(res.trace, path)
        header = path.read_text().splitlines()[0]
        assert header == "k,objective,primal_residual,constraint_residual,dual_residual"


class TestLpOracle:
    def test_size_limit(self):
        rng = np.random.default_rng(17)
        prob = table2_problem(rng, 9, 3)
        with pytest.raises(ValueError):
            lp_oracle(prob)

    def test_dominant_station_takes_everything(self):
        rng = np.random.default_rng(18)
        prob = table2_problem(rng, 3, 2, coe=1.0)
        prob.w[0, :] = 1e-6   # station 0 dominates every delay term
        prob.w[1, :] = 1.0
        _, x = lp_oracle(prob)
        assert np.allclose(x[0, :], 1.0, atol=1e-9)

    def test_capacity_forces_split(self):
        rng = np.random.default_rng(19)
        prob = table2_problem(rng, 2, 2)
        prob.w[0, :] = 1e-6
        prob.w[1, :] = 1.0
        prob.m_c = np.array([prob.c.sum() * 0.5, prob.c.sum()])
        opt, x = lp_oracle(prob)
        assert np.any(x[1, :] > 1e-9)  # overflow pushed to the slower station
        assert np.dot(x[0, :], prob.c) == pytest.approx(prob.m_c[0], rel=1e-6)
        assert np.allclose(x.sum(axis=0), 1.0, atol=1e-9)

    def test_grid_dominance_self_check(self):
        rng = np.random.default_rng(20)
        for _ in range(5):
            prob = table2_problem(rng, 3, 2)
            opt, _ = lp_oracle(prob)
            for _ in range(200):
                x = rng.dirichlet(np.ones(2), size=3).T  # columns sum to 1
                if (np.all(x @ prob.c <= prob.m_c) and np.all(x @ prob.u <= prob.m_u)
                        and np.all(prob.deadline_lhs_all(x) <= prob.t_max)):
                    assert opt <= prob.objective(x) + 1e-9


class TestRounding:
    def test_largest_x_wins(self):
        rng = np.random.default_rng(21)
        prob = table2_problem(rng, 3, 3)
        x = np.array([[0.7, 0.2, 0.1],
                      [0.2, 0.5, 0.2],
                      [0.1, 0.3, 0.7]])
        assign, ok = round_assignment(prob, x)
        assert assign == [0, 1, 2]
        assert ok

    def test_capacity_repair(self):
        rng = np.random.default_rng(22)
        prob = table2_problem(rng, 2, 2)
        # both tasks prefer station 0, but it can only hold one
        prob.m_c = np.array([prob.c.max() * 1.05, prob.c.sum()])
        x = np.array([[0.9, 0.8], [0.1, 0.2]])
        assign, ok = round_assignment(prob, x)
        assert ok
        loads = np.zeros(2)
        for j, i in enumerate(assign):
            loads[i] += prob.c[j]
        assert np.all(loads <= prob.m_c + 1e-9)


class TestConvergenceReport:
    def test_converged_run_passes(self):
        rng = np.random.default_rng(23)
        prob = table2_problem(rng, 4, 3)
        res = solve(prob, SolverConfig(kappa=500, tol=1e-4))
        report = empirical_convergence_check(res.trace, tol=1e-4)
        assert report.ok, report.violations

    def test_tiny_penalty_flags_stagnation(self):
        rng = np.random.default_rng(24)
        prob = table2_problem(rng, 4, 3, tight=True)
        res = solve(prob, SolverConfig(rho=0.01, kappa=60, tol=1e-9, init="uniform"))
        report = empirical_convergence_check(res.trace, tol=1e-9)
        assert not report.residuals_vanish
        assert report.violations  # flagged, not crashed


class TestProblemFixtures:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(25)
        prob = table2_problem(rng, 3, 2, coe=0.7)
        path = tmp_path / "problem.csv"
        export_problem_csv(prob, path)
        loaded = import_problem_csv(path)
        assert loaded.coe == prob.coe
        assert np.allclose(loaded.w, prob.w)
        assert np.allclose(loaded.rates, prob.rates)
        assert [t.id for t in loaded.tasks] == [t.id for t in prob.tasks]
