import os
import tempfile
import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from mtfl import ingest
from mtfl.data.factor_data import EpidemicSeries, Sector
from mtfl.errors import DataError

SAMPLE_DIR = os.path.join(
    os.path.dirname(__file__), os.pardir, 'data', 'sample'
)


def _series(region, cases, deaths, population=None):
    return EpidemicSeries(
        region=region,
        days=np.arange(len(cases)),
        confirmed_cases=cases,
        confirmed_deaths=deaths,
        population=population,
    )


class TestLoadFactorTable(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def _write(self, text):
        path = os.path.join(self.tmp.name, 'factors.csv')
        with open(path, 'w', encoding='utf-8') as fh:
            fh.write(text)
        return path

    def test_complete_table(self):
        path = self._write(
            "region_id,sector,indicator,value\n"
            "B,Demographics,Median age,40\n"
            "B,Others,GDP per capita,30000\n"
            "B,Healthcare resource,Hospital beds,3\n"
            "A,Demographics,Median age,30\n"
            "A,Others,GDP per capita,20000\n"
            "A,Healthcare resource,Hospital beds,5\n"
        )
        table = ingest.load_factor_table(path)
        self.assertEqual(table.shape, (2, 3))
        self.assertEqual(table.regions, ('A', 'B'))
        self.assertEqual(
            table.indicator_names,
            ['Median age', 'Hospital beds', 'GDP per capita']
        )
        self.assertFalse(table.missing_mask.any())
        self.assertEqual(table.row('B')['Hospital beds'], 3.0)

    def test_blank_value_is_missing(self):
        path = self._write(
            "region_id,sector,indicator,value\n"
            "A,Demographics,Median age,\n"
            "B,Demographics,Median age,31\n"
        )
        table = ingest.load_factor_table(path)
        assert_array_equal(table.missing_mask, [[True], [False]])

    def test_absent_cell_is_missing(self):
        path = self._write(
            "region_id,sector,indicator,value\n"
            "A,Demographics,Median age,30\n"
            "B,Others,GDP per capita,100\n"
        )
        table = ingest.load_factor_table(path)
        assert_array_equal(table.missing_mask, [[False, True], [True, False]])

    def test_duplicate_cell(self):
        path = self._write(
            "region_id,sector,indicator,value\n"
            "A,Demographics,Median age,30\n"
            "A,Demographics,Median age,31\n"
        )
        with self.assertRaisesRegex(DataError, 'duplicate cell'):
            ingest.load_factor_table(path)

    def test_unknown_sector(self):
        path = self._write(
            "region_id,sector,indicator,value\n"
            "A,Astrology,Moon phase,3\n"
        )
        self.assertRaises(DataError, ingest.load_factor_table, path)

    def test_non_numeric_value(self):
        path = self._write(
            "region_id,sector,indicator,value\n"
            "A,Demographics,Median age,old\n"
        )
        with self.assertRaisesRegex(DataError, 'non-numeric'):
            ingest.load_factor_table(path)

    def test_schema_mapping(self):
        path = self._write(
            "country,group,name,val\n"
            "A,ihr,Surveillance,80\n"
        )
        table = ingest.load_factor_table(path, schema={
            'region_id': 'country', 'sector': 'group',
            'indicator': 'name', 'value': 'val',
        })
        self.assertEqual(table.sectors, [Sector.IHR])

    def test_missing_column(self):
        path = self._write("region_id,sector,value\nA,Others,1\n")
        with self.assertRaisesRegex(DataError, 'indicator'):
            ingest.load_factor_table(path)


class TestImputeMissing(unittest.TestCase):

    def _table(self, column):
        path = os.path.join(self.tmp.name, 'factors.csv')
        with open(path, 'w', encoding='utf-8') as fh:
            fh.write("region_id,sector,indicator,value\n")
            for i, value in enumerate(column):
                fh.write(f"R{i},Others,GDP,{value}\n")
        return ingest.load_factor_table(path)

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_mean_of_observed(self):
        table = ingest.impute_missing(self._table(['1', '', '3']))
        assert_allclose(table.column('GDP'), [1.0, 2.0, 3.0])
        self.assertFalse(table.missing_mask.any())

    def test_complete_table_unchanged(self):
        table = self._table(['1', '2', '3'])
        self.assertIs(ingest.impute_missing(table), table)

    def test_all_missing_column(self):
        table = self._table(['', '', ''])
        with self.assertRaisesRegex(DataError, 'GDP'):
            ingest.impute_missing(table)

    def test_flag_outliers(self):
        table = self._table(['1', '2', '3', '2', '1', '3', '500'])
        flagged_table, flagged = ingest.flag_outliers(table, 3.0)
        self.assertEqual(flagged, [('R6', 'GDP')])
        self.assertTrue(flagged_table.missing_mask[6, 0])


class TestCfr(unittest.TestCase):

    def test_reported_ratio(self):
        series = _series('A', [896000.0], [45000.0])
        cfr = ingest.compute_cfr_series(series, window=1)
        self.assertAlmostEqual(cfr.cfr[0], 0.050223, places=6)

    def test_zero_deaths(self):
        cfr = ingest.compute_cfr_series(_series('A', [100.0], [0.0]), 1)
        self.assertEqual(cfr.cfr[0], 0.0)

    def test_zero_cases_warns(self):
        series = _series('A', [0.0, 10.0], [0.0, 1.0])
        with self.assertLogs('mtfl.ingest', level='WARNING'):
            cfr = ingest.compute_cfr_series(series, window=2)
        assert_allclose(cfr.cfr, [0.0, 0.1])

    def test_short_series(self):
        series = _series('A', np.ones(41), np.zeros(41))
        with self.assertRaisesRegex(DataError, 'missing day 41'):
            ingest.compute_cfr_series(series, window=42)

    def test_progression_features(self):
        series = _series(
            'A', [10.0, 20.0, 40.0], [0.0, 1.0, 2.0], population=1e6
        )
        features = ingest.progression_features(series, summary_days=3)
        self.assertAlmostEqual(features[ingest.NEW_CASES], 40.0 / 3)
        self.assertAlmostEqual(features[ingest.NEW_DEATHS], 2.0 / 3)
        self.assertAlmostEqual(features[ingest.ACTIVE_CASES], 67.0 / 3)
        self.assertAlmostEqual(
            features[ingest.CASES_PER_MILLION], 70.0 / 3
        )


class TestSampleData(unittest.TestCase):

    def setUp(self):
        table = ingest.impute_missing(ingest.load_factor_table(
            os.path.join(SAMPLE_DIR, 'factors.csv')
        ))
        self.series = ingest.load_epidemic_series(
            os.path.join(SAMPLE_DIR, 'epidemic.csv')
        )
        self.table = table
        self.cfr = {
            region: ingest.compute_cfr_series(s, 42)
            for region, s in self.series.items()
        }

    def test_assemble_full_design(self):
        dataset = ingest.assemble_dataset(
            self.table, self.cfr, 42, self.series
        )
        self.assertEqual(dataset.x.shape, (29, 27))
        self.assertEqual(dataset.y.shape, (29, 42))
        self.assertEqual(dataset.regions, sorted(dataset.regions))
        self.assertEqual(dataset.sectors[0], Sector.PROGRESSION)
        self.assertTrue(np.all((dataset.y >= 0) & (dataset.y <= 1)))

    def test_assemble_single_region(self):
        region = self.table.regions[0]
        single = self.table.replace(
            regions=(region,),
            values=self.table.values[:1],
            missing_mask=self.table.missing_mask[:1],
        )
        dataset = ingest.assemble_dataset(
            single, self.cfr, 42, {region: self.series[region]}
        )
        self.assertEqual(dataset.x.shape, (1, 27))
        self.assertEqual(dataset.y.shape, (1, 42))

    def test_assemble_short_window(self):
        region = self.table.regions[0]
        cfr = dict(self.cfr)
        cfr[region] = ingest.compute_cfr_series(self.series[region], 41)
        with self.assertRaisesRegex(DataError, '41 days'):
            ingest.assemble_dataset(self.table, cfr, 42, self.series)

    def test_drop_sectors(self):
        dropped = ingest.drop_sectors(
            self.table, [Sector.HEALTHCARE, Sector.IHR]
        )
        self.assertEqual(dropped.shape, (29, 15))
        self.assertNotIn(Sector.IHR, dropped.sectors)
