import unittest

import numpy as np
from numpy.testing import assert_allclose

from mtfl.data.penalty_data import PenaltyConfig, SolverOptions
from mtfl.solvers import (
    fista,
    fit_fsgl,
    fit_lasso,
    fit_model,
    fit_ridge,
    fsgl_objective,
    lasso_kkt_residual,
    lipschitz_constant,
    objective,
)

TIGHT = SolverOptions(tol=1e-12, max_iter=20000)


def _problem(seed, n=30, d=5, k=3, noise=0.5):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d))
    w = rng.normal(size=(d, k))
    y = x @ w + noise * rng.normal(size=(n, k))
    return x, y


def _least_squares(x, y):
    return np.linalg.lstsq(x, y, rcond=None)[0]


class TestObjective(unittest.TestCase):

    def test_zero_weights(self):
        x, y = _problem(0)
        penalty = PenaltyConfig(
            model='fsgl', lambda1=1.0, lambda2=1.0, lambda3=1.0
        )
        self.assertAlmostEqual(
            fsgl_objective(x, y, np.zeros((5, 3)), penalty),
            float(np.sum(y ** 2))
        )

    def test_exact_fit(self):
        x = np.eye(3)
        y = np.arange(6.0).reshape(3, 2)
        self.assertEqual(
            fsgl_objective(x, y, y, PenaltyConfig(model='fsgl')), 0.0
        )

    def test_hand_instance(self):
        # loss 0 + 4 + 9 + 9, then L1 2, fused 2 and L2,1 2
        x = np.eye(2)
        y = np.array([[1.0, 2.0], [3.0, 4.0]])
        w = np.eye(2)
        penalty = PenaltyConfig(
            model='fsgl', lambda1=1.0, lambda2=1.0, lambda3=1.0
        )
        self.assertAlmostEqual(fsgl_objective(x, y, w, penalty), 28.0)

    def test_shape_mismatch(self):
        self.assertRaises(
            ValueError, fsgl_objective, np.eye(2), np.eye(2),
            np.zeros((3, 2)), PenaltyConfig(model='fsgl')
        )


class TestLipschitz(unittest.TestCase):

    def test_matches_eigenvalue(self):
        x, _ = _problem(1)
        expected = 2.0 * np.linalg.eigvalsh(x.T @ x).max()
        self.assertAlmostEqual(
            lipschitz_constant(x, n_iter=500, rel_tol=1e-12) / expected,
            1.0, places=6
        )

    def test_zero_design(self):
        self.assertEqual(lipschitz_constant(np.zeros((4, 2))), 0.0)


class TestFista(unittest.TestCase):
    """
    Ill-conditioned quadratic with no penalty; plain acceleration
    overshoots on the slow direction
    """
    SCALE = np.array([1.0, 1e-2])

    def _value(self, w):
        return float(np.sum(self.SCALE * w * w))

    def _solve(self, points=None):
        def gradient(w):
            if points is not None:
                points.append(w.copy())
            return 2.0 * self.SCALE * w

        return fista(
            smooth=self._value,
            gradient=gradient,
            nonsmooth=lambda w: 0.0,
            prox=lambda v, step: v,
            w0=np.ones(2),
            lipschitz=2.0,
            options=SolverOptions(max_iter=50000),
            stop=lambda w: float(np.max(np.abs(w))) < 1e-4,
        )

    def test_overshoot_not_recorded(self):
        w, report = self._solve()
        steps = np.diff(report.objective_trace)
        self.assertTrue(np.all(steps <= 0.0))
        # some candidates raised the objective and were kept out
        self.assertTrue(np.any(steps == 0.0))
        self.assertTrue(report.converged)
        assert_allclose(w, 0.0, atol=1e-4)

    def test_rejected_candidate_steers_next_point(self):
        points = []
        _, report = self._solve(points)
        trace = report.objective_trace
        # iteration j + 1 takes its gradient at points[j] and records
        # trace[j]
        rejected = [
            j for j in range(1, len(trace) - 1) if trace[j] == trace[j - 1]
        ]
        self.assertTrue(rejected)
        for j in rejected:
            self.assertNotEqual(self._value(points[j + 1]), trace[j])


class TestRidge(unittest.TestCase):

    def test_heavy_shrinkage(self):
        x, y = _problem(2)
        w, _ = fit_ridge(x, y, 1e9)
        self.assertLess(
            np.linalg.norm(w), 1e-6 * np.linalg.norm(x.T @ y)
        )

    def test_identity_design(self):
        y = np.arange(12.0).reshape(4, 3)
        w, _ = fit_ridge(np.eye(4), y, 1e-10)
        assert_allclose(w, y, atol=1e-8)

    def test_normal_equations(self):
        x, y = _problem(3, n=5, d=3, k=2)
        w, report = fit_ridge(x, y, 0.7)
        expected = np.linalg.solve(x.T @ x + 0.7 * np.eye(3), x.T @ y)
        assert_allclose(w, expected, atol=1e-8)
        self.assertTrue(report.converged)
        self.assertLess(report.kkt_residual, 1e-8)

    def test_requires_positive_lambda(self):
        self.assertRaises(ValueError, fit_ridge, np.eye(2), np.eye(2), 0.0)


class TestLasso(unittest.TestCase):

    def test_large_lambda_gives_zero(self):
        x, y = _problem(4)
        lam = 2.0 * np.abs(x.T @ y).max()
        w, report = fit_lasso(x, y, lam)
        assert_allclose(w, 0.0)
        self.assertTrue(report.converged)

    def test_zero_lambda_is_least_squares(self):
        x, y = _problem(5)
        w, report = fit_lasso(x, y, 0.0)
        assert_allclose(w, _least_squares(x, y), atol=1e-6)
        self.assertTrue(report.converged)

    def test_orthonormal_design(self):
        rng = np.random.default_rng(6)
        q, _ = np.linalg.qr(rng.normal(size=(20, 4)))
        y = rng.normal(size=(20, 2))
        lam = 0.5
        w, _ = fit_lasso(q, y, lam)
        xty = q.T @ y
        expected = np.sign(xty) * np.maximum(np.abs(xty) - lam / 2, 0.0)
        assert_allclose(w, expected, atol=1e-8)

    def test_kkt_conditions(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(30, 8))
        planted = np.zeros((8, 3))
        planted[:4] = rng.normal(size=(4, 3))
        y = x @ planted + 0.5 * rng.normal(size=(30, 3))
        w, report = fit_lasso(x, y, 20.0)
        residual = lasso_kkt_residual(x, y, w, 20.0)
        self.assertLessEqual(residual, 1e-6)
        self.assertTrue(np.any(w == 0))
        self.assertEqual(report.kkt_residual, residual)
        self.assertTrue(report.converged)

    def test_objective_trace_monotone(self):
        x, y = _problem(8, d=8)
        _, report = fit_lasso(x, y, 2.0)
        self.assertTrue(np.all(np.diff(report.objective_trace) <= 1e-12))

    def test_warm_start_shape(self):
        x, y = _problem(9)
        self.assertRaises(
            ValueError, fit_lasso, x, y, 1.0, None, np.zeros((2, 2))
        )


class TestFsgl(unittest.TestCase):

    def test_zero_penalty_is_least_squares(self):
        x, y = _problem(10)
        w, _ = fit_fsgl(x, y, PenaltyConfig(model='fsgl'), TIGHT)
        penalty = PenaltyConfig(model='fsgl')
        best = objective(x, y, _least_squares(x, y), penalty)
        found = objective(x, y, w, penalty)
        self.assertLessEqual((found - best) / best, 1e-5)

    def test_reduces_to_lasso(self):
        x, y = _problem(11)
        w_fsgl, _ = fit_fsgl(
            x, y, PenaltyConfig(model='fsgl', lambda1=1.0), TIGHT
        )
        w_lasso, _ = fit_lasso(x, y, 1.0)
        penalty = PenaltyConfig(model='lasso', lambda1=1.0)
        lasso_value = objective(x, y, w_lasso, penalty)
        fsgl_value = objective(x, y, w_fsgl, penalty)
        self.assertLessEqual(
            abs(fsgl_value - lasso_value) / lasso_value, 1e-5
        )

    def test_strong_fusion_flattens_rows(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=(20, 3))
        y = rng.normal(size=(20, 4))
        w, _ = fit_fsgl(
            x, y, PenaltyConfig(model='fsgl', lambda2=1e4), TIGHT
        )
        self.assertLess(np.abs(np.diff(w, axis=1)).max(), 1e-3)

    def test_group_penalty_zeroes_rows(self):
        x, y = _problem(13, d=6)
        w, _ = fit_fsgl(
            x, y, PenaltyConfig(model='fsgl', lambda3=1e6), TIGHT
        )
        assert_allclose(w, 0.0)

    def test_objective_trace_monotone(self):
        x, y = _problem(14, d=6, k=7)
        penalty = PenaltyConfig(
            model='fsgl', lambda1=0.5, lambda2=2.0, lambda3=1.0
        )
        _, report = fit_fsgl(x, y, penalty)
        self.assertTrue(np.all(np.diff(report.objective_trace) <= 1e-12))
        self.assertTrue(report.converged)

    def test_iteration_limit(self):
        x, y = _problem(15)
        penalty = PenaltyConfig(model='fsgl', lambda1=0.1, lambda2=0.1)
        w, report = fit_fsgl(x, y, penalty, SolverOptions(max_iter=1))
        self.assertFalse(report.converged)
        self.assertEqual(report.iterations, 1)
        self.assertEqual(w.shape, (5, 3))


class TestFitModel(unittest.TestCase):

    def test_dispatch(self):
        x, y = _problem(16)
        w_ridge, _ = fit_model(PenaltyConfig(model='ridge', lambda1=1.0), x, y)
        assert_allclose(w_ridge, fit_ridge(x, y, 1.0)[0])
        w_lasso, _ = fit_model(PenaltyConfig(model='lasso', lambda1=1.0), x, y)
        assert_allclose(w_lasso, fit_lasso(x, y, 1.0)[0])

    def test_penalty_validation(self):
        self.assertRaises(ValueError, PenaltyConfig, model='svm')
        self.assertRaises(
            ValueError, PenaltyConfig, model='lasso', lambda2=1.0
        )
        self.assertRaises(
            ValueError, PenaltyConfig, model='fsgl', lambda1=-1.0
        )
