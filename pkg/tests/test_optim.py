"""Projected L-BFGS contract: convergence, exact feasibility, monotonicity."""

import numpy as np
import pytest

from commfit.optim import (
    STATUS_CONVERGED_GRAD,
    STATUS_CONVERGED_IMPROVE,
    STATUS_MAX_ITERS,
    FitConfig,
    OptimResult,
    minimize,
)


def quadratic(x):
    return float(x @ x), 2.0 * x


def shifted_quadratic(x):
    # minimum at -1, infeasible under lower bound 0
    return float((x[0] + 1.0) ** 2), np.array([2.0 * (x[0] + 1.0)])


def rosenbrock(x):
    a, b = x
    f = (1.0 - a) ** 2 + 100.0 * (b - a * a) ** 2
    g = np.array([-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)])
    return float(f), g


class TestConvergence:
    def test_strongly_convex_quadratic(self):
        res = minimize(quadratic, np.array([3.0, 4.0]))
        assert res.loss_history[-1] < 1e-12
        assert len(res.loss_history) - 1 <= 30
        assert res.status == STATUS_CONVERGED_GRAD

    def test_active_lower_bound(self):
        res = minimize(shifted_quadratic, np.array([1.0]), lower_bounds=0.0)
        np.testing.assert_allclose(res.x, [0.0], atol=1e-12)

    def test_rosenbrock(self):
        cfg = FitConfig(max_iters=200, grad_tol=1e-10, rel_improve_tol=1e-15)
        res = minimize(rosenbrock, np.array([-1.2, 1.0]), cfg=cfg)
        assert res.loss_history[-1] < 1e-8
        assert len(res.loss_history) - 1 <= 200

    def test_starts_at_optimum(self):
        res = minimize(quadratic, np.zeros(3))
        assert res.status == STATUS_CONVERGED_GRAD
        assert len(res.loss_history) == 1


class TestContract:
    def test_monotone_history(self, rng):
        for _ in range(5):
            x0 = rng.normal(size=6) * 3.0
            res = minimize(quadratic, x0)
            assert np.all(np.diff(res.loss_history) <= 0.0)
        res = minimize(rosenbrock, np.array([-1.2, 1.0]))
        assert np.all(np.diff(res.loss_history) <= 0.0)

    def test_exact_feasibility_of_all_iterates(self, rng):
        seen = []

        def tracking(x):
            seen.append(x.copy())
            shifted = x + 2.0
            return float(shifted @ shifted), 2.0 * shifted

        minimize(tracking, np.full(4, 1.0), lower_bounds=0.0)
        assert seen, "objective never called"
        for x in seen:
            assert np.all(x >= 0.0)  # exact, not approximate

    def test_determinism(self):
        cfg = FitConfig(seed=7)
        r1 = minimize(rosenbrock, np.array([-1.2, 1.0]), cfg=cfg)
        r2 = minimize(rosenbrock, np.array([-1.2, 1.0]), cfg=cfg)
        assert np.array_equal(r1.x, r2.x)
        assert np.array_equal(r1.loss_history, r2.loss_history)
        assert r1.status == r2.status

    def test_max_iters_status(self):
        cfg = FitConfig(max_iters=1)
        res = minimize(rosenbrock, np.array([-1.2, 1.0]), cfg=cfg)
        assert res.status == STATUS_MAX_ITERS
        assert len(res.loss_history) == 2

    def test_relative_improvement_exit(self):
        cfg = FitConfig(rel_improve_tol=0.9)  # absurdly loose: stop almost at once
        res = minimize(rosenbrock, np.array([-1.2, 1.0]), cfg=cfg)
        assert res.status == STATUS_CONVERGED_IMPROVE

    def test_nonfinite_at_start_rejected(self):
        def bad(x):
            return float("inf"), np.zeros_like(x)

        with pytest.raises(ValueError):
            minimize(bad, np.zeros(2))

    def test_nonfinite_region_handled_by_backtracking(self):
        # objective blows up left of -0.5; halving must recover
        def partial(x):
            if x[0] < -0.5:
                return float("nan"), np.full_like(x, np.nan)
            return float(x @ x), 2.0 * x

        res = minimize(partial, np.array([4.0]))
        assert res.loss_history[-1] < 1e-10


class TestFitConfig:
    def test_defaults(self):
        cfg = FitConfig()
        assert cfg.max_iters == 200
        assert cfg.memory == 10
        assert cfg.reg_weight == "auto"

    def test_validation(self):
        with pytest.raises(ValueError):
            FitConfig(max_iters=0)
        with pytest.raises(ValueError):
            FitConfig(grad_tol=0.0)
        with pytest.raises(ValueError):
            FitConfig(reg_weight=-0.1)
        with pytest.raises(ValueError):
            FitConfig(reg_weight="sometimes")

    def test_result_fields(self):
        res = minimize(quadratic, np.array([1.0]))
        assert isinstance(res, OptimResult)
        assert res.loss_history[0] == pytest.approx(1.0)
