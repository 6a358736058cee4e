import os
import unittest
from unittest import mock

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from mtfl import multitask
from mtfl.data.penalty_data import PenaltyConfig, SolverOptions

FAST = SolverOptions(tol=1e-6, max_iter=500)


def _daily(n=12, window=14, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 0.1, size=(n, window))


def _signal_task(seed=0, n=30, d=6, group_size=7, window=14, noise=0.01):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d))
    w = np.zeros((d, window))
    w[:2] = np.linspace(0.5, 1.0, window)
    y = x @ w + noise * rng.normal(size=(n, window))
    return multitask.build_tasks(x, y, group_size)


class TestBuildTasks(unittest.TestCase):

    def test_groups_share_final_day(self):
        y = np.tile(np.arange(42.0), (3, 1))
        task = multitask.build_tasks(np.ones((3, 2)), y, 7)
        self.assertEqual(task.n_groups, 6)
        assert_array_equal(task.y[0, :7], np.full(7, 6.0))
        assert_array_equal(task.y[0, 35:], np.full(7, 41.0))

    def test_single_group(self):
        y = _daily(window=7)
        task = multitask.build_tasks(np.ones((12, 1)), y, 7)
        for col in range(7):
            assert_array_equal(task.y[:, col], y[:, 6])

    def test_indivisible_window(self):
        with self.assertRaisesRegex(ValueError, 'not divisible'):
            multitask.build_tasks(np.ones((3, 1)), np.ones((3, 40)), 7)

    def test_group_size_one(self):
        y = _daily()
        task = multitask.build_tasks(np.ones((12, 1)), y, 1)
        assert_array_equal(task.y, y)

    def test_row_mismatch(self):
        self.assertRaises(
            ValueError, multitask.build_tasks, np.ones((4, 1)), _daily(), 7
        )


class TestRmse(unittest.TestCase):

    def test_perfect(self):
        y = _daily()
        self.assertEqual(multitask.rmse_multitask(y, y), 0.0)

    def test_unit_residuals(self):
        self.assertEqual(
            multitask.rmse_multitask(np.zeros((4, 1)), np.ones((4, 1))), 1.0
        )

    def test_length_weighted(self):
        true = [np.array([0.0]), np.zeros(3)]
        pred = [np.array([2.0]), np.zeros(3)]
        self.assertAlmostEqual(multitask.rmse_multitask(true, pred), 0.5)

    def test_flat_with_lengths(self):
        self.assertAlmostEqual(
            multitask.rmse_multitask(
                [0.0, 0.0, 0.0, 0.0], [2.0, 0.0, 0.0, 0.0], [1, 3]
            ),
            0.5
        )

    def test_empty_task(self):
        with self.assertRaises(ValueError):
            multitask.rmse_multitask([1.0], [1.0], [1, 0])

    def test_shape_mismatch(self):
        with self.assertRaises(ValueError):
            multitask.rmse_multitask(np.zeros((3, 2)), np.zeros((3, 3)))

    def test_phase_rmse(self):
        y = np.zeros((2, 42))
        pred = np.zeros((2, 42))
        pred[:, 28:] = 1.0
        assert_allclose(multitask.phase_rmse(y, pred), [0.0, 0.0, 1.0])


class TestGrid(unittest.TestCase):

    def test_default_grid_sizes(self):
        self.assertEqual(len(multitask.default_grid('lasso', 4)), 4)
        self.assertEqual(len(multitask.default_grid('fsgl', 3)), 27)

    def test_log_spacing(self):
        grid = multitask.default_grid('ridge', 3, 1e-2, 1.0)
        assert_allclose([p.lambda1 for p in grid], [1e-2, 1e-1, 1.0])

    def test_descending_order_stable(self):
        grid = multitask.grid_from_points(
            'fsgl', [[1, 0, 0], [0, 0, 2], [0, 1, 0]]
        )
        ordered = multitask.descending_order(grid)
        self.assertEqual(ordered[0].lambda3, 2.0)
        self.assertEqual(ordered[1].lambda1, 1.0)
        self.assertEqual(ordered[2].lambda2, 1.0)

    def test_empty_points(self):
        self.assertRaises(ValueError, multitask.grid_from_points, 'lasso', [])


class TestFolds(unittest.TestCase):

    def test_partition(self):
        folds = multitask.fold_indices(23, 5, seed=3)
        validation = np.concatenate([valid for _, valid in folds])
        self.assertEqual(sorted(validation.tolist()), list(range(23)))
        for train, valid in folds:
            self.assertFalse(set(train) & set(valid))

    def test_deterministic(self):
        first = multitask.fold_indices(20, 4, seed=9)
        second = multitask.fold_indices(20, 4, seed=9)
        for (a, b), (c, d) in zip(first, second):
            assert_array_equal(a, c)
            assert_array_equal(b, d)

    def test_too_few_samples(self):
        self.assertRaises(ValueError, multitask.fold_indices, 3, 5, 0)

    def test_validation_folds_skip_synthetic(self):
        synthetic = [False, True] * 6 + [False] * 8
        task = multitask.build_tasks(
            np.ones((20, 2)), _daily(n=20), 7, synthetic=synthetic
        )
        fake = {i for i, flag in enumerate(synthetic) if flag}
        folds = multitask.validation_folds(task, 4, seed=2)
        self.assertEqual(len(folds), 4)
        validated = []
        for train, valid in folds:
            self.assertFalse(fake & set(valid))
            self.assertTrue(fake <= set(train))
            self.assertFalse(set(train) & set(valid))
            validated += valid
        self.assertEqual(sorted(validated), sorted(set(range(20)) - fake))

    def test_validation_folds_without_synthetic(self):
        task = multitask.build_tasks(np.ones((12, 2)), _daily(), 7)
        for (train, valid), (a, b) in zip(
            multitask.validation_folds(task, 3, seed=4),
            multitask.fold_indices(12, 3, seed=4)
        ):
            self.assertEqual(train, a.tolist())
            self.assertEqual(valid, b.tolist())

    def test_too_few_real_rows(self):
        task = multitask.build_tasks(
            np.ones((12, 2)), _daily(), 7, synthetic=[True] * 10 + [False] * 2
        )
        self.assertRaises(ValueError, multitask.validation_folds, task, 3, 0)

    def test_split_rows(self):
        plan = multitask.split_rows(29, seed=1, test_fraction=0.1)
        self.assertEqual(len(plan.test_rows), 3)
        self.assertEqual(
            sorted(plan.train_rows + plan.test_rows), list(range(29))
        )


class TestCrossValidate(unittest.TestCase):

    def test_single_point(self):
        task = _signal_task()
        grid = [PenaltyConfig(model='lasso', lambda1=0.3)]
        self.assertEqual(multitask.cross_validate(task, grid), grid[0])

    def test_moderate_beats_huge(self):
        task = _signal_task()
        grid = multitask.grid_from_points('lasso', [[1e6], [0.5]])
        chosen = multitask.cross_validate(task, grid, 3, 0, FAST)
        self.assertEqual(chosen.lambda1, 0.5)

    def test_tie_prefers_larger_penalty(self):
        # both penalties zero every weight, so the scores tie
        task = _signal_task()
        grid = multitask.grid_from_points('lasso', [[1e6], [1e7]])
        chosen = multitask.cross_validate(task, grid, 3, 0, FAST)
        self.assertEqual(chosen.lambda1, 1e7)

    def test_empty_grid(self):
        self.assertRaises(
            ValueError, multitask.cross_validate, _signal_task(), []
        )


class TestExperiments(unittest.TestCase):

    def setUp(self):
        self.task = _signal_task(seed=1)
        self.grid = multitask.grid_from_points('ridge', [[0.1], [10.0]])

    def test_fit_task_intercept(self):
        w, intercept, scaled, report = multitask.fit_task(
            self.task, self.grid[0]
        )
        assert_allclose(intercept, self.task.y.mean(axis=0))
        self.assertEqual(w.shape, (6, 14))
        self.assertTrue(report.converged)
        assert_allclose(scaled.values.mean(axis=0), 0.0, atol=1e-12)

    def test_run_experiment(self):
        run = multitask.run_experiment(
            self.task, self.grid, seed=5, run_id=2, folds=3
        )
        self.assertEqual(run.run_id, 2)
        self.assertEqual(run.model, 'ridge')
        self.assertEqual(len(run.test_rows), 3)
        self.assertEqual(len(run.per_phase), 3)
        self.assertEqual(run.weights.shape, (6, 14))
        self.assertLess(run.test_rmse, 0.1)

    def test_synthetic_rows_always_train(self):
        synthetic = [False] * 24 + [True] * 6
        task = multitask.build_tasks(
            self.task.x, self.task.y, 7, synthetic=synthetic
        )
        for seed in range(5):
            run = multitask.run_experiment(task, self.grid, seed, folds=3)
            self.assertTrue(all(i < 24 for i in run.test_rows))

    def test_synthetic_rows_never_validated(self):
        synthetic = [False] * 24 + [True] * 6
        task = multitask.build_tasks(
            self.task.x, self.task.y, 7, synthetic=synthetic
        )
        folds_of = multitask.validation_folds
        seen = []

        def recording(sub, folds, seed):
            partition = folds_of(sub, folds, seed)
            self.assertEqual(sum(sub.synthetic), 6)
            seen.extend(sub.synthetic[i] for _, valid in partition
                        for i in valid)
            return partition

        with mock.patch.object(
            multitask, 'validation_folds', side_effect=recording
        ):
            for seed in range(3):
                multitask.run_experiment(task, self.grid, seed, folds=3)
        self.assertTrue(seen)
        self.assertFalse(any(seen))

    def test_identical_seeds(self):
        with mock.patch.dict(os.environ, {'MTFL_THREADS': '1'}):
            first = multitask.repeat_experiments(
                self.task, self.grid, 3, 11, folds=3
            )
            second = multitask.repeat_experiments(
                self.task, self.grid, 3, 11, folds=3
            )
        self.assertEqual(first.as_dict(), second.as_dict())

    def test_worker_count_does_not_matter(self):
        serial = multitask.repeat_experiments(
            self.task, self.grid, 3, 11, folds=3, n_jobs=1
        )
        parallel = multitask.repeat_experiments(
            self.task, self.grid, 3, 11, folds=3, n_jobs=2
        )
        self.assertEqual(
            [r.penalty for r in serial.runs],
            [r.penalty for r in parallel.runs]
        )
        for a, b in zip(serial.runs, parallel.runs):
            self.assertEqual(a.test_rows, b.test_rows)
            assert_allclose(a.weights, b.weights, rtol=1e-9, atol=1e-12)
        self.assertAlmostEqual(serial.rmse_mean, parallel.rmse_mean)

    def test_single_run_std(self):
        report = multitask.repeat_experiments(
            self.task, self.grid, 1, 0, folds=3, n_jobs=1
        )
        self.assertEqual(report.rmse_std, 0.0)
        self.assertEqual(report.representative, 0)

    def test_seeds_follow_run_order(self):
        report = multitask.repeat_experiments(
            self.task, self.grid, 3, 100, folds=3, n_jobs=1
        )
        self.assertEqual([run.seed for run in report.runs], [100, 101, 102])
        self.assertAlmostEqual(
            report.rmse_mean, np.mean([r.test_rmse for r in report.runs])
        )

    def test_noise_near_baseline(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(40, 4))
        task = multitask.build_tasks(x, rng.normal(size=(40, 7)), 7)
        grid = multitask.grid_from_points('lasso', [[1e3], [1e4]])
        ratios = []
        for seed in range(5):
            run = multitask.run_experiment(
                task, grid, seed, folds=3, options=FAST
            )
            test = run.test_rows
            train = sorted(set(range(40)) - set(test))
            baseline = np.broadcast_to(
                task.y[train].mean(axis=0), task.y[test].shape
            )
            reference = multitask.rmse_multitask(task.y[test], baseline)
            ratios.append(run.test_rmse / reference)
        assert_allclose(ratios, 1.0, rtol=0.2)


class TestModelOrdering(unittest.TestCase):
    """
    Five planted rows, piecewise constant over the week groups, among
    22 null rows. Every model sees the same seeded splits.
    """

    @classmethod
    def setUpClass(cls):
        rng = np.random.default_rng(31)
        x = rng.normal(size=(40, 27))
        planted = np.zeros((27, 42))
        for row in range(5):
            levels = rng.uniform(1.0, 2.0, 6) * rng.choice([-1.0, 1.0])
            planted[row] = np.repeat(levels, 7)
        signal = x @ planted
        y = signal + 0.3 * signal.std() * rng.normal(size=signal.shape)
        task = multitask.build_tasks(x, y, 7)
        lasso_points = [[1.0], [4.0], [16.0]]
        grids = {
            'ridge': [[0.1], [1.0], [10.0], [100.0]],
            'lasso': lasso_points,
            'fsgl': [p + [0.0, 0.0] for p in lasso_points] + [
                [1.0, 0.5, 10.0], [1.0, 0.5, 40.0], [4.0, 0.5, 40.0],
                [1.0, 0.5, 80.0],
            ],
        }
        options = SolverOptions(tol=1e-6, max_iter=1000)
        cls.reports = {
            model: multitask.repeat_experiments(
                task, multitask.grid_from_points(model, points),
                n_runs=5, base_seed=0, folds=3, options=options, n_jobs=1
            )
            for model, points in grids.items()
        }

    def test_lasso_beats_ridge(self):
        self.assertLess(
            self.reports['lasso'].rmse_mean, self.reports['ridge'].rmse_mean
        )

    def test_fsgl_beats_ridge(self):
        self.assertLess(
            self.reports['fsgl'].rmse_mean, self.reports['ridge'].rmse_mean
        )

    def test_fsgl_no_worse_than_lasso(self):
        # the fsgl grid holds every lasso point
        self.assertLessEqual(
            self.reports['fsgl'].rmse_mean,
            self.reports['lasso'].rmse_mean * (1 + 1e-3)
        )

    def test_same_splits(self):
        rows = {
            model: [run.test_rows for run in report.runs]
            for model, report in self.reports.items()
        }
        self.assertEqual(rows['ridge'], rows['lasso'])
        self.assertEqual(rows['lasso'], rows['fsgl'])
