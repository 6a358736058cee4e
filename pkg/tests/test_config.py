import json
import os
import tempfile
import unittest

from mtfl.data.config_data import AugmentConfig, PipelineConfig
from mtfl.data.factor_data import Sector
from mtfl.errors import ConfigError


class TestPipelineConfig(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def _write(self, data):
        path = os.path.join(self.tmp.name, 'config.json')
        with open(path, 'w', encoding='utf-8') as fh:
            fh.write(data if isinstance(data, str) else json.dumps(data))
        return path

    def test_defaults_valid(self):
        PipelineConfig().validate(require_inputs=False)

    def test_from_file_resolves_paths(self):
        config = PipelineConfig.from_json_file(self._write({
            'factors': 'f.csv', 'epidemic': 'e.csv', 'n_runs': 3,
            'solver': {'max_iter': 50},
        }))
        self.assertEqual(
            config.factors, os.path.join(self.tmp.name, 'f.csv')
        )
        self.assertEqual(config.n_runs, 3)
        self.assertEqual(config.solver.max_iter, 50)

    def test_unknown_key(self):
        with self.assertRaisesRegex(ConfigError, 'colour'):
            PipelineConfig.from_json_file(self._write({'colour': 'red'}))

    def test_invalid_nested_value(self):
        with self.assertRaises(ConfigError):
            PipelineConfig.from_json_file(self._write({
                'solver': {'tol': -1.0}
            }))

    def test_bad_json(self):
        self.assertRaises(
            ConfigError, PipelineConfig.from_json_file, self._write('{')
        )

    def test_missing_file(self):
        self.assertRaises(
            ConfigError, PipelineConfig.from_json_file,
            os.path.join(self.tmp.name, 'absent.json')
        )

    def test_indivisible_window(self):
        config = PipelineConfig(window=40)
        with self.assertRaisesRegex(ConfigError, 'divisible'):
            config.validate(require_inputs=False)

    def test_grid_shape(self):
        config = PipelineConfig(grid={'fsgl': [[1.0]]})
        self.assertRaises(ConfigError, config.validate, False)
        config = PipelineConfig(grid={'ridge': [[0.0]]})
        self.assertRaises(ConfigError, config.validate, False)

    def test_unknown_model(self):
        config = PipelineConfig(models=['svm'])
        self.assertRaises(ConfigError, config.validate, False)

    def test_ablation_sectors(self):
        config = PipelineConfig(ablations=[['ihr', 'Healthcare resource']])
        self.assertEqual(
            config.ablation_sectors, [(Sector.IHR, Sector.HEALTHCARE)]
        )
        config = PipelineConfig(ablations=[['weather']])
        self.assertRaises(ConfigError, config.validate, False)

    def test_missing_inputs(self):
        config = PipelineConfig(
            factors=os.path.join(self.tmp.name, 'nope.csv'),
            epidemic=os.path.join(self.tmp.name, 'nope.csv'),
        )
        with self.assertRaisesRegex(ConfigError, 'nope.csv'):
            config.validate()

    def test_override_ignores_none(self):
        config = PipelineConfig(n_runs=7).override(n_runs=None, seed=3)
        self.assertEqual(config.n_runs, 7)
        self.assertEqual(config.seed, 3)

    def test_seir_params(self):
        params = AugmentConfig(beta=0.4).seir_params(21)
        self.assertEqual(params.beta, 0.4)
        self.assertEqual(params.days, 21)

    def test_json_round_trip(self):
        config = PipelineConfig(models=['lasso'], grid={'lasso': [[0.1]]})
        again = PipelineConfig.from_dict(json.loads(config.json))
        self.assertEqual(again, config)
