"""
FactorTable, EpidemicSeries, CfrSeries and Dataset Classes
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Tuple

import numpy as np

from mtfl.errors import DataError


class Sector(Enum):
    """
    The indicator sectors of the regional factor table. Values are
    the sector headers; names lower-cased are the short slugs
    accepted on the command line.
    """
    PROGRESSION = 'COVID-19 progression'
    DEMOGRAPHICS = 'Demographics'
    MORTALITY = 'Mortality of key diseases'
    HEALTHCARE = 'Healthcare resource'
    IHR = 'IHR core capacity index'
    SOCIAL_CULTURE = 'Social-culture index'
    OTHERS = 'Others'

    @property
    def slug(self) -> str:
        return self.name.lower()

    @property
    def order(self) -> int:
        return list(Sector).index(self)

    @classmethod
    def parse(cls, text: str) -> Sector:
        """
        Parse a sector from its slug or its header text,
        ignoring case and surrounding whitespace

        :param text: The sector slug or header
        :type text: str
        :return: The matching sector
        :rtype: :py:class:`mtfl.data.factor_data.Sector`
        :raises DataError: if no sector matches
        """
        key = text.strip().lower()
        for sector in cls:
            if key in (
                sector.slug,
                sector.value.lower(),
                sector.slug.replace('_', '-'),
            ):
                return sector
        # the long IHR header as printed in the source table
        if key.startswith('ihr'):
            return cls.IHR
        raise DataError(f"unknown sector name: '{text}'")


def _frozen(array: np.ndarray, dtype: Any) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, kw_only=True)
class Indicator:
    sector: Sector
    name: str

    @property
    def sort_key(self) -> Tuple[int, str]:
        return (self.sector.order, self.name)


@dataclass(frozen=True, kw_only=True, repr=False)
class FactorTable:
    """
    Static regional design data: one row per region, one column
    per indicator. Arrays are stored read-only so a table can be
    shared between readers.

    :param regions: Region identifiers in row order
    :type regions: tuple[str, ...]
    :param indicators: Indicators in column order
    :type indicators: tuple[:py:class:`mtfl.data.factor_data.Indicator`]
    :param values: Matrix of shape (regions, indicators); missing
        cells hold NaN
    :type values: :py:class:`numpy.ndarray`
    :param missing_mask: True where a value is absent
    :type missing_mask: :py:class:`numpy.ndarray`
    """
    regions: Tuple[str, ...]
    indicators: Tuple[Indicator, ...]
    values: np.ndarray
    missing_mask: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'regions', tuple(self.regions))
        object.__setattr__(self, 'indicators', tuple(self.indicators))
        object.__setattr__(self, 'values', _frozen(self.values, float))
        object.__setattr__(
            self, 'missing_mask', _frozen(self.missing_mask, bool)
        )
        shape = (len(self.regions), len(self.indicators))
        if self.values.shape != shape:
            raise DataError(
                f"value matrix has shape {self.values.shape}, "
                + f"expected {shape}"
            )
        if self.missing_mask.shape != shape:
            raise DataError(
                f"missing mask has shape {self.missing_mask.shape}, "
                + f"expected {shape}"
            )
        if any(not region for region in self.regions):
            raise DataError("region identifiers must be non-empty")
        if len(set(self.regions)) != len(self.regions):
            raise DataError("region identifiers must be unique")
        names = [x.name for x in self.indicators]
        if len(set(names)) != len(names):
            raise DataError("indicator names must be unique")

    def __repr__(self):
        return (
            f"FactorTable({len(self.regions)} regions x "
            + f"{len(self.indicators)} indicators, "
            + f"{int(self.missing_mask.sum())} missing)"
        )

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @property
    def indicator_names(self) -> List[str]:
        return [x.name for x in self.indicators]

    @property
    def sectors(self) -> List[Sector]:
        return [x.sector for x in self.indicators]

    def column(self, name: str) -> np.ndarray:
        """
        Get the values of one indicator

        :param name: The indicator name
        :type name: str
        :return: Column values in region order
        :rtype: :py:class:`numpy.ndarray`
        :raises KeyError: if the indicator does not exist
        """
        return self.values[:, self.indicator_names.index(name)]

    def row(self, region: str) -> Dict[str, float]:
        """
        Get one region's values keyed by indicator name

        :param region: The region identifier
        :type region: str
        :rtype: dict[str, float]
        """
        values = self.values[self.regions.index(region)]
        return dict(zip(self.indicator_names, values.tolist()))

    def replace(self, **changes: Any) -> FactorTable:
        fields = {
            'regions': self.regions,
            'indicators': self.indicators,
            'values': self.values,
            'missing_mask': self.missing_mask,
        }
        fields.update(changes)
        return FactorTable(**fields)


@dataclass(frozen=True, kw_only=True, repr=False)
class EpidemicSeries:
    """
    Cumulative confirmed cases and deaths for one region, indexed
    by day offset from the first confirmed case.

    :param region: The region identifier
    :type region: str
    :param days: 0-based day offsets, strictly increasing
    :type days: :py:class:`numpy.ndarray`
    :param confirmed_cases: Cumulative cases per day
    :type confirmed_cases: :py:class:`numpy.ndarray`
    :param confirmed_deaths: Cumulative deaths per day
    :type confirmed_deaths: :py:class:`numpy.ndarray`
    :param population: Regional population, used for per-capita
        progression indicators
    :type population: float or None
    """
    region: str
    days: np.ndarray
    confirmed_cases: np.ndarray
    confirmed_deaths: np.ndarray
    population: float | None = None

    def __post_init__(self):
        object.__setattr__(self, 'days', _frozen(self.days, int))
        object.__setattr__(
            self, 'confirmed_cases', _frozen(self.confirmed_cases, float)
        )
        object.__setattr__(
            self, 'confirmed_deaths', _frozen(self.confirmed_deaths, float)
        )
        if not self.region:
            raise DataError("region identifier must be non-empty")
        n_days = len(self.days)
        if (
            len(self.confirmed_cases) != n_days
            or len(self.confirmed_deaths) != n_days
        ):
            raise DataError(
                f"series for '{self.region}' has mismatched lengths"
            )
        if n_days and self.days.min() < 0:
            raise DataError(f"series for '{self.region}' has negative days")
        if np.any(np.diff(self.days) <= 0):
            raise DataError(
                f"series for '{self.region}' has unordered or repeated days"
            )
        if np.any(self.confirmed_cases < 0) or np.any(
            self.confirmed_deaths < 0
        ):
            raise DataError(
                f"series for '{self.region}' has negative counts"
            )
        if np.any(np.diff(self.confirmed_cases) < 0) or np.any(
            np.diff(self.confirmed_deaths) < 0
        ):
            raise DataError(
                f"cumulative series for '{self.region}' decreases"
            )
        if self.population is not None and not self.population > 0:
            raise DataError(
                f"population for '{self.region}' must be positive"
            )

    def __repr__(self):
        return f"EpidemicSeries({self.region}, {len(self.days)} days)"

    @property
    def n_days(self) -> int:
        return len(self.days)


@dataclass(frozen=True, kw_only=True, repr=False)
class CfrSeries:
    """
    Daily case fatality rate for one region over the observation
    window.

    :param region: The region identifier
    :type region: str
    :param cfr: One rate in [0, 1] per window day
    :type cfr: :py:class:`numpy.ndarray`
    """
    region: str
    cfr: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'cfr', _frozen(self.cfr, float))
        if np.any(self.cfr < 0) or np.any(self.cfr > 1):
            raise DataError(f"CFR for '{self.region}' outside [0, 1]")

    def __repr__(self):
        return f"CfrSeries({self.region}, window={self.window})"

    @property
    def window(self) -> int:
        return len(self.cfr)


@dataclass(kw_only=True, repr=False)
class Dataset:
    """
    The assembled design matrix and daily targets

    :param regions: Row labels, sorted
    :type regions: list[str]
    :param features: Column labels of `x`
    :type features: list[str]
    :param sectors: Sector of each column of `x`
    :type sectors: list[:py:class:`mtfl.data.factor_data.Sector`]
    :param x: Matrix of shape (regions, features)
    :type x: :py:class:`numpy.ndarray`
    :param y: Daily CFR matrix of shape (regions, window)
    :type y: :py:class:`numpy.ndarray`
    """
    regions: List[str]
    features: List[str]
    sectors: List[Sector]
    x: np.ndarray
    y: np.ndarray
    synthetic: List[bool] = field(default_factory=list)

    def __post_init__(self):
        if not self.synthetic:
            self.synthetic = [False] * len(self.regions)

    def __repr__(self):
        return (
            f"Dataset(x={self.x.shape}, y={self.y.shape}, "
            + f"synthetic={sum(self.synthetic)})"
        )

    @property
    def window(self) -> int:
        return self.y.shape[1]

    def select_features(self, indices: List[int]) -> Dataset:
        """
        Get a copy restricted to the given feature columns

        :param indices: Column indices to keep, in order
        :type indices: list[int]
        :rtype: :py:class:`mtfl.data.factor_data.Dataset`
        """
        return Dataset(
            regions=list(self.regions),
            features=[self.features[i] for i in indices],
            sectors=[self.sectors[i] for i in indices],
            x=self.x[:, indices].copy(),
            y=self.y.copy(),
            synthetic=list(self.synthetic),
        )
