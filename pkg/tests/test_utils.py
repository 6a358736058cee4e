import os
import unittest
from unittest import mock

from mtfl import utils
from mtfl.errors import ConfigError


class TestUtils(unittest.TestCase):

    def test_clip_value_input(self):
        self.assertRaises(TypeError, utils.clip_value, '4', 0, 10)

    def test_clip_value_bounds(self):
        self.assertRaises(ValueError, utils.clip_value, 0, -1, -10)

    def test_clip_value_bounds_equal(self):
        self.assertEqual(
            utils.clip_value(10, 0, 0),
            0
        )

    def test_clip_value_below(self):
        self.assertEqual(
            utils.clip_value(-20, -10, 10),
            -10
        )

    def test_clip_value_within(self):
        self.assertEqual(
            utils.clip_value(4.5, 0, 10),
            4.5
        )

    def test_clip_value_above(self):
        self.assertEqual(
            utils.clip_value(15, -10, 10),
            10
        )

    def test_check_count(self):
        self.assertEqual(utils.check_count(3, 'n'), 3)
        self.assertRaises(TypeError, utils.check_count, 3.0, 'n')
        self.assertRaises(TypeError, utils.check_count, True, 'n')
        self.assertRaises(ValueError, utils.check_count, 0, 'n')
        self.assertEqual(utils.check_count(0, 'n', minimum=0), 0)

    def test_rank_descending_ties_by_index(self):
        self.assertEqual(
            utils.rank_descending([1.0, 3.0, 1.0, 2.0]),
            [1, 3, 0, 2]
        )

    def test_rank_descending_secondary(self):
        self.assertEqual(
            utils.rank_descending([2, 2, 1], [0.1, 0.5, 9.0]),
            [1, 0, 2]
        )

    def test_worker_count_default(self):
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(utils.worker_count(), 1)
            self.assertEqual(utils.worker_count(4), 4)

    def test_worker_count_capped(self):
        with mock.patch.dict(os.environ, {'MTFL_THREADS': '2'}):
            self.assertEqual(utils.worker_count(8), 2)
            self.assertEqual(utils.worker_count(), 2)

    def test_worker_count_invalid_env(self):
        with mock.patch.dict(os.environ, {'MTFL_THREADS': 'many'}):
            self.assertRaises(ConfigError, utils.worker_count)
        with mock.patch.dict(os.environ, {'MTFL_THREADS': '0'}):
            self.assertRaises(ConfigError, utils.worker_count)
