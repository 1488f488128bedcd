"""Sparse code solver: KKT rule, both solvers, and their mutual agreement."""

import numpy as np
import pytest

from gomtl import (
    TaskData,
    TaskKind,
    ista_solve_codes,
    kkt_residual,
    solve_codes,
)
from gomtl.losses import code_problem

from conftest import random_classification_task, random_regression_task

MU_GRID = (0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4)


def eq2_objective(basis, task, mu, s):
    problem = code_problem(np.asarray(basis, float), task)
    return problem.value(np.asarray(s, float)) + mu * np.abs(s).sum()


class TestKktResidual:
    def test_zero_everywhere(self):
        assert kkt_residual(np.zeros(3), np.zeros(3), 0.7) == 0.0

    def test_inactive_coordinate_excess(self):
        s = np.zeros(3)
        g = np.array([0.0, 0.5 + 0.3, 0.0])
        assert kkt_residual(s, g, 0.5) == pytest.approx(0.3)

    def test_matches_per_coordinate_loop(self, rng):
        for _ in range(50):
            k = int(rng.integers(1, 9))
            s = np.where(rng.random(k) < 0.4, 0.0, rng.standard_normal(k))
            g = rng.standard_normal(k)
            mu = float(rng.random())
            expected = 0.0
            for i in range(k):
                if s[i] == 0.0:
                    expected = max(expected, max(abs(g[i]) - mu, 0.0))
                else:
                    expected = max(expected, abs(g[i] + mu * np.sign(s[i])))
            assert kkt_residual(s, g, mu) == pytest.approx(expected)


class TestSolveCodes:
    def test_large_mu_returns_zero(self, rng):
        task = random_regression_task(rng, 5, 12)
        L = rng.standard_normal((5, 3))
        problem = code_problem(L, task)
        _, g0 = problem.value_grad(np.zeros(3))
        mu = float(np.abs(g0).max())  # exactly at the subgradient boundary
        res = solve_codes(L, task, mu)
        assert res.converged
        assert np.all(res.codes == 0.0)

    def test_mu_zero_matches_normal_equations(self, rng):
        task = random_regression_task(rng, 6, 25)
        L = rng.standard_normal((6, 4))
        A = task.features.T @ L
        expected = np.linalg.solve(A.T @ A, A.T @ task.labels)
        res = solve_codes(L, task, 0.0, tol=1e-10)
        assert res.converged
        assert np.allclose(res.codes, expected, atol=1e-7)

    def test_objective_never_exceeds_warm_start(self, rng):
        for _ in range(20):
            task = random_regression_task(rng, 4, 10)
            L = rng.standard_normal((4, 3))
            s0 = rng.standard_normal(3) * 2
            mu = float(rng.choice(MU_GRID))
            res = solve_codes(L, task, mu, s0=s0)
            assert eq2_objective(L, task, mu, res.codes) <= eq2_objective(
                L, task, mu, s0
            ) + 1e-12

    def test_monotone_descent_per_accepted_step(self, rng):
        # re-run the solver one accepted step at a time via max_iter
        task = random_regression_task(rng, 5, 14)
        L = rng.standard_normal((5, 4))
        mu = 0.05
        prev = eq2_objective(L, task, mu, np.zeros(4))
        for cap in range(1, 25):
            res = solve_codes(L, task, mu, max_iter=cap)
            obj = eq2_objective(L, task, mu, res.codes)
            assert obj <= prev + 1e-12
            prev = min(prev, obj)
            if res.converged:
                break

    def test_max_iter_exhaustion_flags_not_raises(self, rng):
        task = random_regression_task(rng, 6, 18)
        L = rng.standard_normal((6, 5))
        res = solve_codes(L, task, 0.01, max_iter=1, tol=1e-14)
        assert not res.converged
        assert res.iterations <= 1

    def test_warm_start_no_slower_than_cold(self, rng):
        for _ in range(10):
            task = random_regression_task(rng, 5, 12)
            L = rng.standard_normal((5, 3))
            mu = 0.05
            cold = solve_codes(L, task, mu)
            warm = solve_codes(L, task, mu, s0=cold.codes)
            assert warm.iterations <= cold.iterations
            assert warm.converged

    def test_sparsity_nondecreasing_in_mu(self, rng):
        # orthonormal design: the solution is an exact per-coordinate soft
        # threshold, so the support shrinks monotonically along the grid
        for _ in range(5):
            n, k = 20, 5
            Q, _ = np.linalg.qr(rng.standard_normal((n, k)))
            X = Q.T  # (k, n) features with d == k, basis = identity
            y = rng.standard_normal(n) * 2
            task = TaskData(X, y, TaskKind.REGRESSION)
            L = np.eye(k)
            nnz_prev = None
            for mu in MU_GRID:
                res = solve_codes(L, task, mu)
                assert res.converged
                nnz = int(np.sum(np.abs(res.codes) > 1e-6))
                if nnz_prev is not None:
                    assert nnz <= nnz_prev
                nnz_prev = nnz


class TestIstaOracle:
    def test_huge_mu_zero(self, rng):
        task = random_regression_task(rng, 4, 9)
        L = rng.standard_normal((4, 2))
        res = ista_solve_codes(L, task, mu=1e6)
        assert res.converged
        assert np.all(res.codes == 0.0)

    def test_one_dimensional_soft_threshold(self):
        # minimize (1-s)^2 + |s|  ->  s = 0.5
        task = TaskData([[1.0]], [1.0], TaskKind.REGRESSION)
        res = ista_solve_codes([[1.0]], task, mu=1.0)
        assert res.converged
        assert res.codes == pytest.approx([0.5], abs=1e-9)

    @pytest.mark.parametrize("kind", [TaskKind.REGRESSION, TaskKind.CLASSIFICATION])
    def test_agreement_with_two_metric_solver(self, rng, kind):
        for trial in range(12):
            k = int(rng.integers(2, 9))
            n = int(rng.integers(5, 31))
            d = int(rng.integers(k, 11))
            maker = (
                random_regression_task
                if kind is TaskKind.REGRESSION
                else random_classification_task
            )
            task = maker(rng, d, n)
            L = rng.standard_normal((d, k))
            mu = float(MU_GRID[trial % len(MU_GRID)])
            prod = solve_codes(L, task, mu, tol=1e-8)
            oracle = ista_solve_codes(L, task, mu)
            obj_prod = eq2_objective(L, task, mu, prod.codes)
            obj_oracle = eq2_objective(L, task, mu, oracle.codes)
            assert abs(obj_prod - obj_oracle) <= 1e-6
            assert np.array_equal(
                np.abs(prod.codes) > 1e-6, np.abs(oracle.codes) > 1e-6
            )
