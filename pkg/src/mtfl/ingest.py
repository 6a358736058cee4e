"""
Loading, cleaning and aligning the factor table and epidemic series
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Tuple

import numpy as np
import pandas as pd

import mtfl.defaults
from mtfl.data.factor_data import (
    CfrSeries,
    Dataset,
    EpidemicSeries,
    FactorTable,
    Indicator,
    Sector,
)
from mtfl.errors import DataError
from mtfl.utils import check_count

logger = logging.getLogger(__name__)

FACTOR_COLUMNS = ('region_id', 'sector', 'indicator', 'value')
EPIDEMIC_COLUMNS = ('region_id', 'day', 'confirmed_cases', 'confirmed_deaths')
POPULATION_COLUMN = 'population'

NEW_CASES = 'Daily new cases'
NEW_DEATHS = 'Daily new deaths'
ACTIVE_CASES = 'Current active case'
CASES_PER_MILLION = 'Cases per million inhabitants'
PROGRESSION_INDICATORS = (
    NEW_CASES, NEW_DEATHS, ACTIVE_CASES, CASES_PER_MILLION
)


def _read_csv(path: str | Path, what: str) -> pd.DataFrame:
    try:
        return pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            encoding='utf-8',
            skipinitialspace=True,
        )
    except (OSError, UnicodeDecodeError, pd.errors.ParserError,
            pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read {what} '{path}': {exc}") from exc


def _rename(
    frame: pd.DataFrame,
    required: Iterable[str],
    schema: Mapping[str, str] | None,
    path: str | Path
) -> pd.DataFrame:
    schema = dict(schema or {})
    frame = frame.rename(columns={v: k for k, v in schema.items()})
    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataError(f"'{path}' is missing column(s): {', '.join(missing)}")
    return frame


def _parse_number(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise DataError(f"non-numeric value '{text}' at {where}") from exc
    if not np.isfinite(value):
        raise DataError(f"non-finite value '{text}' at {where}")
    return value


def load_factor_table(
    path: str | Path,
    schema: Mapping[str, str] | None = None
) -> FactorTable:
    """
    Load a long-format factor CSV with one row per
    (region_id, sector, indicator, value). Empty values and
    region/indicator pairs without a row are marked missing.

    Regions are sorted by identifier and indicators by
    (sector, name), so the layout does not depend on row order.

    :param path: Path to the CSV file
    :type path: str or :py:class:`pathlib.Path`
    :param schema: Optional mapping from the standard column names
        to the names used in the file
    :type schema: dict[str, str] or None
    :return: The factor table
    :rtype: :py:class:`mtfl.data.factor_data.FactorTable`
    :raises DataError: on an unreadable file, unknown sector,
        duplicate cell or non-numeric value
    """
    frame = _rename(
        _read_csv(path, 'factor table'), FACTOR_COLUMNS, schema, path
    )
    cells: Dict[Tuple[str, str], float] = {}
    sectors: Dict[str, Sector] = {}
    for line, row in enumerate(frame.itertuples(index=False), start=2):
        region = str(row.region_id).strip()
        name = str(row.indicator).strip()
        where = f"'{path}' line {line}"
        if not region or not name:
            raise DataError(f"empty region or indicator at {where}")
        sector = Sector.parse(str(row.sector))
        if sectors.setdefault(name, sector) is not sector:
            raise DataError(
                f"indicator '{name}' listed under two sectors at {where}"
            )
        if (region, name) in cells:
            raise DataError(f"duplicate cell ({region}, {name}) at {where}")
        text = str(row.value).strip()
        cells[(region, name)] = (
            np.nan if text == '' else _parse_number(text, where)
        )
    regions = sorted({region for region, _ in cells})
    indicators = sorted(
        (Indicator(sector=s, name=n) for n, s in sectors.items()),
        key=lambda x: x.sort_key
    )
    values = np.full((len(regions), len(indicators)), np.nan)
    row_of = {region: i for i, region in enumerate(regions)}
    col_of = {ind.name: j for j, ind in enumerate(indicators)}
    for (region, name), value in cells.items():
        values[row_of[region], col_of[name]] = value
    table = FactorTable(
        regions=tuple(regions),
        indicators=tuple(indicators),
        values=values,
        missing_mask=np.isnan(values),
    )
    logger.debug("loaded %r from %s", table, path)
    return table


def impute_missing(table: FactorTable) -> FactorTable:
    """
    Fill every missing cell with the mean of the observed values of
    its indicator column

    :param table: The factor table
    :type table: :py:class:`mtfl.data.factor_data.FactorTable`
    :return: A table with an all-false missing mask
    :rtype: :py:class:`mtfl.data.factor_data.FactorTable`
    :raises DataError: if an indicator has no observed value
    """
    mask = table.missing_mask
    if not mask.any():
        return table
    values = np.array(table.values, copy=True)
    for j, indicator in enumerate(table.indicators):
        observed = values[~mask[:, j], j]
        if observed.size == 0:
            raise DataError(
                f"indicator '{indicator.name}' has no observed value"
            )
        values[mask[:, j], j] = observed.mean()
    return table.replace(values=values, missing_mask=np.zeros_like(mask))


def flag_outliers(
    table: FactorTable,
    factor: float = mtfl.defaults.OUTLIER_IQR_FACTOR
) -> tuple[FactorTable, List[Tuple[str, str]]]:
    """
    Mark as missing every observed value further than `factor`
    interquartile ranges from its column median. Columns with a zero
    interquartile range are left alone.

    :param table: The factor table
    :type table: :py:class:`mtfl.data.factor_data.FactorTable`
    :param factor: Width of the accepted band in IQRs
    :type factor: float
    :return: The updated table and the flagged (region, indicator) cells
    :rtype: tuple[:py:class:`mtfl.data.factor_data.FactorTable`,
        list[tuple[str, str]]]
    """
    if factor <= 0:
        raise ValueError("`factor` must be positive")
    values = np.array(table.values, copy=True)
    mask = np.array(table.missing_mask, copy=True)
    flagged: List[Tuple[str, str]] = []
    for j, indicator in enumerate(table.indicators):
        observed = values[~mask[:, j], j]
        if observed.size < 4:
            continue
        q1, median, q3 = np.percentile(observed, [25, 50, 75])
        iqr = q3 - q1
        if iqr == 0:
            continue
        far = np.abs(values[:, j] - median) > factor * iqr
        outside = (~mask[:, j]) & far
        for i in np.flatnonzero(outside):
            flagged.append((table.regions[i], indicator.name))
            logger.warning(
                "outlier %s=%.6g for region %s set missing",
                indicator.name, values[i, j], table.regions[i]
            )
        values[outside, j] = np.nan
        mask[outside, j] = True
    return table.replace(values=values, missing_mask=mask), flagged


def drop_sectors(
    table: FactorTable,
    sectors: Iterable[Sector]
) -> FactorTable:
    """
    Remove every indicator belonging to one of `sectors`
    """
    dropped = set(sectors)
    keep = [j for j, x in enumerate(table.indicators)
            if x.sector not in dropped]
    return table.replace(
        indicators=tuple(table.indicators[j] for j in keep),
        values=table.values[:, keep],
        missing_mask=table.missing_mask[:, keep],
    )


def load_epidemic_series(
    path: str | Path,
    schema: Mapping[str, str] | None = None
) -> Dict[str, EpidemicSeries]:
    """
    Load per-region cumulative case and death counts. An optional
    ``population`` column must be constant within a region.

    :param path: Path to the CSV file
    :type path: str or :py:class:`pathlib.Path`
    :param schema: Optional mapping from standard to file column names
    :type schema: dict[str, str] or None
    :return: Series keyed by region identifier
    :rtype: dict[str, :py:class:`mtfl.data.factor_data.EpidemicSeries`]
    :raises DataError: on an unreadable file, malformed value,
        repeated day or inconsistent counts
    """
    frame = _rename(
        _read_csv(path, 'epidemic series'), EPIDEMIC_COLUMNS, schema, path
    )
    has_population = POPULATION_COLUMN in frame.columns
    rows: Dict[str, List[Tuple[int, float, float, float | None]]] = {}
    for line, row in enumerate(frame.to_dict('records'), start=2):
        where = f"'{path}' line {line}"
        region = str(row['region_id']).strip()
        if not region:
            raise DataError(f"empty region at {where}")
        day = _parse_number(str(row['day']).strip(), where)
        if day != int(day):
            raise DataError(f"non-integer day '{row['day']}' at {where}")
        population = None
        if has_population and str(row[POPULATION_COLUMN]).strip():
            population = _parse_number(
                str(row[POPULATION_COLUMN]).strip(), where
            )
        rows.setdefault(region, []).append((
            int(day),
            _parse_number(str(row['confirmed_cases']).strip(), where),
            _parse_number(str(row['confirmed_deaths']).strip(), where),
            population,
        ))
    series: Dict[str, EpidemicSeries] = {}
    for region in sorted(rows):
        entries = sorted(rows[region], key=lambda x: x[0])
        days = [x[0] for x in entries]
        if len(set(days)) != len(days):
            raise DataError(f"repeated day in series for '{region}'")
        populations = {x[3] for x in entries if x[3] is not None}
        if len(populations) > 1:
            raise DataError(f"population varies within '{region}'")
        deaths = np.array([x[2] for x in entries])
        cases = np.array([x[1] for x in entries])
        over = np.flatnonzero(deaths > cases)
        if over.size:
            raise DataError(
                f"deaths exceed cases for '{region}' on day {days[over[0]]}"
            )
        series[region] = EpidemicSeries(
            region=region,
            days=np.array(days),
            confirmed_cases=cases,
            confirmed_deaths=deaths,
            population=populations.pop() if populations else None,
        )
    return series


def _window_slice(
    series: EpidemicSeries,
    window: int
) -> tuple[np.ndarray, np.ndarray]:
    check_count(window, 'window')
    position = {int(day): i for i, day in enumerate(series.days)}
    missing = [day for day in range(window) if day not in position]
    if missing:
        raise DataError(
            f"series for '{series.region}' is missing day {missing[0]} "
            + f"of a {window}-day window"
        )
    index = [position[day] for day in range(window)]
    return series.confirmed_cases[index], series.confirmed_deaths[index]


def compute_cfr_series(
    series: EpidemicSeries,
    window: int = mtfl.defaults.WINDOW
) -> CfrSeries:
    """
    Daily case fatality rate ``deaths[t] / cases[t]`` over days
    0..window-1. Days without cases get a rate of 0 and a warning.

    :param series: One region's cumulative counts
    :type series: :py:class:`mtfl.data.factor_data.EpidemicSeries`
    :param window: Number of days
    :type window: int
    :rtype: :py:class:`mtfl.data.factor_data.CfrSeries`
    :raises DataError: if a window day is missing or deaths exceed
        cases
    """
    cases, deaths = _window_slice(series, window)
    over = np.flatnonzero(deaths > cases)
    if over.size:
        raise DataError(
            f"deaths exceed cases for '{series.region}' on day {over[0]}"
        )
    zero = cases == 0
    if zero.any():
        logger.warning(
            "region %s has zero confirmed cases on %d day(s); CFR set to 0",
            series.region, int(zero.sum())
        )
    cfr = np.zeros(window)
    np.divide(deaths, cases, out=cfr, where=~zero)
    return CfrSeries(region=series.region, cfr=np.clip(cfr, 0.0, 1.0))


def progression_features(
    series: EpidemicSeries,
    summary_days: int = mtfl.defaults.SUMMARY_DAYS
) -> Dict[str, float]:
    """
    Summarize the early progression of one region as the mean over
    days 0..summary_days-1 of daily new cases, daily new deaths,
    active cases and (with a known population) cases per million

    :param series: One region's cumulative counts
    :type series: :py:class:`mtfl.data.factor_data.EpidemicSeries`
    :param summary_days: Length of the summary window
    :type summary_days: int
    :return: Indicator values keyed by indicator name
    :rtype: dict[str, float]
    """
    cases, deaths = _window_slice(series, summary_days)
    features = {
        NEW_CASES: float(np.diff(cases, prepend=0.0).mean()),
        NEW_DEATHS: float(np.diff(deaths, prepend=0.0).mean()),
        ACTIVE_CASES: float((cases - deaths).mean()),
    }
    if series.population:
        features[CASES_PER_MILLION] = float(
            (cases / series.population * 1e6).mean()
        )
    return features


def assemble_dataset(
    table: FactorTable,
    cfr: Mapping[str, CfrSeries],
    window: int = mtfl.defaults.WINDOW,
    series: Mapping[str, EpidemicSeries] | None = None,
    summary_days: int = mtfl.defaults.SUMMARY_DAYS,
    synthetic: Iterable[str] = ()
) -> Dataset:
    """
    Build the shared design matrix X (one row per region, sorted by
    identifier) and the daily CFR target matrix Y.

    Progression indicators already in `table` are used as supplied;
    the others are derived from `series` over the first
    `summary_days` days.

    :param table: Imputed factor table
    :type table: :py:class:`mtfl.data.factor_data.FactorTable`
    :param cfr: CFR series keyed by region
    :type cfr: dict[str, :py:class:`mtfl.data.factor_data.CfrSeries`]
    :param window: Number of target days
    :type window: int
    :param series: Epidemic series keyed by region, used for the
        progression indicators
    :type series: dict[str, :py:class:`mtfl.data.factor_data.EpidemicSeries`]
    :param summary_days: Days summarized by progression indicators
    :type summary_days: int
    :param synthetic: Regions produced by simulation
    :type synthetic: iterable of str
    :return: X of shape (regions, indicators) and Y of shape
        (regions, window)
    :rtype: :py:class:`mtfl.data.factor_data.Dataset`
    :raises DataError: on missing values, a region without a
        complete CFR series or inconsistent population data
    """
    check_count(window, 'window')
    if table.missing_mask.any():
        raise DataError("factor table has missing values; impute first")
    regions = sorted(table.regions)
    absent = [r for r in regions if r not in cfr]
    if absent:
        raise DataError(f"region '{absent[0]}' has no CFR series")
    short = [r for r in regions if cfr[r].window < window]
    if short:
        raise DataError(
            f"CFR series for '{short[0]}' has {cfr[short[0]].window} days, "
            + f"window needs {window}"
        )
    rows = [table.regions.index(r) for r in regions]
    columns: List[Tuple[Indicator, np.ndarray]] = [
        (ind, table.values[rows, j].copy())
        for j, ind in enumerate(table.indicators)
    ]
    present = set(table.indicator_names)
    derive = [n for n in PROGRESSION_INDICATORS if n not in present]
    if derive and series is not None:
        lacking = [r for r in regions if r not in series]
        if lacking:
            raise DataError(f"region '{lacking[0]}' has no epidemic series")
        derived = [progression_features(series[r], summary_days)
                   for r in regions]
        for name in derive:
            have = [name in x for x in derived]
            if not any(have):
                logger.warning(
                    "indicator '%s' not derivable (no population data)", name
                )
                continue
            if not all(have):
                raise DataError(
                    f"indicator '{name}' derivable for some regions only"
                )
            columns.append((
                Indicator(sector=Sector.PROGRESSION, name=name),
                np.array([x[name] for x in derived]),
            ))
    columns.sort(key=lambda x: x[0].sort_key)
    x = np.column_stack([c for _, c in columns]) if columns \
        else np.zeros((len(regions), 0))
    y = np.vstack([cfr[r].cfr[:window] for r in regions])
    flagged = set(synthetic)
    return Dataset(
        regions=regions,
        features=[ind.name for ind, _ in columns],
        sectors=[ind.sector for ind, _ in columns],
        x=x,
        y=y,
        synthetic=[r in flagged for r in regions],
    )
