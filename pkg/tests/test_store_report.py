import tempfile
import unittest

import numpy as np
import pandas as pd
from numpy.testing import assert_allclose

from mtfl import voting
from mtfl.data.factor_data import Sector
from mtfl.data.penalty_data import PenaltyConfig, SolverReport
from mtfl.data.task_data import EvalReport, RunResult
from mtfl.errors import DataError
from mtfl.report import ReportWriter, local_importance
from mtfl.store import ResultStore

FEATURES = ['Median age', 'Hospital beds', 'GDP per capita']
SECTORS = ['Demographics', 'Healthcare resource', 'Others']


def _read_csv(store, name):
    return pd.read_csv(store.root / name)


def _report(model='lasso', n_runs=3):
    rng = np.random.default_rng(4)
    runs = []
    for i in range(n_runs):
        weights = np.zeros((3, 14))
        weights[0] = rng.uniform(0.5, 1.0, 14)
        weights[2, :i + 3] = 0.1
        runs.append(RunResult(
            run_id=i, seed=10 + i, model=model,
            penalty=PenaltyConfig(model=model, lambda1=0.1),
            test_rmse=0.01 * (i + 1), per_phase=[0.01, 0.02, 0.03],
            weights=weights, test_rows=[i],
        ))
    rmse = [r.test_rmse for r in runs]
    return EvalReport(
        model=model, rmse_mean=float(np.mean(rmse)),
        rmse_std=float(np.std(rmse)), per_phase=[0.01, 0.02, 0.03],
        representative=0, runs=runs,
    )


class TestResultStore(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.store = ResultStore(self.tmp.name)

    def test_json_sorted_and_plain(self):
        self.store.write_json('a/b.json', {'z': np.float64(1.5), 'a': [1]})
        text = (self.store.root / 'a' / 'b.json').read_text()
        self.assertLess(text.index('"a"'), text.index('"z"'))
        self.assertEqual(self.store.read_json('a/b.json')['z'], 1.5)

    def test_read_errors(self):
        self.assertRaises(DataError, self.store.read_json, 'absent.json')
        self.store.path('bad.json').write_text('{')
        self.assertRaises(DataError, self.store.read_json, 'bad.json')
        self.assertRaises(DataError, self.store.read_experiment)

    def test_weights_columns(self):
        self.store.write_weights('w.csv', np.ones((3, 2)), FEATURES)
        frame = _read_csv(self.store, 'w.csv')
        self.assertEqual(list(frame.columns), ['feature', 'task_1', 'task_2'])
        self.assertEqual(frame['feature'].tolist(), FEATURES)

    def test_trace(self):
        report = SolverReport(
            objective_trace=[3.0, 2.0], step_sizes=[0.5, 0.5], iterations=2
        )
        self.store.write_trace('trace.csv', report)
        frame = _read_csv(self.store, 'trace.csv')
        self.assertEqual(frame['iteration'].tolist(), [1, 2])
        self.assertEqual(frame['objective'].tolist(), [3.0, 2.0])

    def test_experiment_round_trip(self):
        report = _report()
        self.store.write_experiment(
            FEATURES, SECTORS, {'lasso': report}, {'seed': 7}
        )
        features, sectors, reports = self.store.read_experiment()
        self.assertEqual(features, FEATURES)
        self.assertEqual(sectors, SECTORS)
        again = reports['lasso']
        self.assertEqual(again.rmse_mean, report.rmse_mean)
        self.assertEqual(again.runs[1].penalty, report.runs[1].penalty)
        assert_allclose(again.weights, report.weights)
        self.assertEqual(self.store.read_json('experiment.json')['seed'], 7)


class TestReportWriter(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.store = ResultStore(self.tmp.name)
        self.writer = ReportWriter(self.store)
        self.report = _report()
        self.votes = {'lasso': voting.run_voting(self.report, p=2)}

    def test_rankings(self):
        written = self.writer.write_rankings(self.votes, FEATURES, SECTORS)
        self.assertEqual(
            written, ['ranking_lasso.csv', 'global_importance.csv']
        )
        frame = _read_csv(self.store, 'ranking_lasso.csv')
        self.assertEqual(
            list(frame.columns),
            ['rank', 'feature', 'sector', 'stage1_mean_count', 'borda_score']
        )
        self.assertEqual(frame['feature'].iloc[0], 'Median age')
        self.assertEqual(frame['rank'].tolist(), [1, 2, 3])
        overall = _read_csv(self.store, 'global_importance.csv')
        self.assertIn('experiment_vote_share', overall.columns)
        self.assertEqual(set(overall['model']), {'lasso'})

    def test_model_comparison(self):
        frame = self.writer.write_model_comparison({'lasso': self.report})
        self.assertAlmostEqual(frame['rmse_mean'].iloc[0], 0.02)
        self.assertIn('phase_3_rmse', frame.columns)
        self.assertEqual(frame['runs'].iloc[0], 3)
        self.assertRaises(DataError, self.writer.write_model_comparison, {})

    def test_non_finite_rejected(self):
        self.report.rmse_std = float('nan')
        self.assertRaises(
            DataError, self.writer.write_model_comparison,
            {'lasso': self.report}
        )
        self.assertFalse((self.store.root / 'model_comparison.csv').exists())

    def test_local_importance_scale(self):
        weights = np.array([[1.0, -2.0], [-3.0, 4.0]])
        assert_allclose(
            local_importance(weights, [1, 0], 'magnitude'),
            [[3.0, 4.0], [1.0, 2.0]]
        )
        assert_allclose(local_importance(weights, [0, 1]), weights)
        self.assertRaises(ValueError, local_importance, weights, [0], 'log')

    def test_heatmap_deterministic(self):
        order = self.votes['lasso'].stability.order
        self.writer.write_local_importance(
            'lasso', self.report.weights, order, FEATURES
        )
        first = (self.store.root / 'local_importance.svg').read_bytes()
        self.writer.write_local_importance(
            'lasso', self.report.weights, order, FEATURES
        )
        second = (self.store.root / 'local_importance.svg').read_bytes()
        self.assertEqual(first, second)
        frame = _read_csv(self.store, 'local_importance.csv')
        self.assertEqual(frame.shape, (3, 15))

    def test_ablation(self):
        rows = [
            {'sectors': tuple(Sector), 'augmented': False,
             'rmse_mean': 0.02, 'rmse_std': 0.001},
            {'sectors': (Sector.DEMOGRAPHICS,), 'augmented': True,
             'rmse_mean': 0.03, 'rmse_std': 0.002},
        ]
        frame = self.writer.write_ablation(rows)
        self.assertEqual(frame['no'].tolist(), [1, 2])
        self.assertEqual(frame['progression'].tolist(), [1, 0])
        self.assertEqual(frame['demographics'].tolist(), [1, 1])
        self.assertEqual(frame['augmented'].tolist(), [0, 1])
        self.assertAlmostEqual(frame['rmse_std'].iloc[1], 0.002)
