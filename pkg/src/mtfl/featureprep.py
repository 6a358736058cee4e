"""
Hybrid preliminary feature selection: standard scaling, univariate
filters, recursive elimination and tree importance, combined by the
intersection-union rule
"""
from __future__ import annotations

import logging
import warnings
from typing import List, Sequence

import numpy as np
from sklearn.ensemble import GradientBoostingRegressor, RandomForestRegressor
from sklearn.feature_selection import RFE, f_regression, r_regression
from sklearn.linear_model import Ridge
from sklearn.preprocessing import StandardScaler

from mtfl.data.config_data import SelectionConfig
from mtfl.data.factor_data import Dataset
from mtfl.data.selection_data import (
    FilterScores,
    ScaledMatrix,
    SelectionReport,
    SelectionResult,
)
from mtfl.utils import check_count, rank_descending

logger = logging.getLogger(__name__)

# relative spread below which a column counts as constant
CONSTANT_TOL = 1e-12


def standard_scale(
    x: np.ndarray,
    fit_rows: Sequence[int] | np.ndarray | None = None
) -> ScaledMatrix:
    """
    Standardize every column with the mean and population standard
    deviation of `fit_rows`, applying the result to all rows

    :param x: Matrix of shape (n, d)
    :type x: :py:class:`numpy.ndarray`
    :param fit_rows: Rows the statistics are computed on; all rows
        when omitted
    :type fit_rows: sequence of int or None
    :return: The scaled matrix; constant columns become zeros and
        are flagged
    :rtype: :py:class:`mtfl.data.selection_data.ScaledMatrix`
    :raises ValueError: if `fit_rows` is empty
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("`x` must be a matrix")
    rows = np.arange(x.shape[0]) if fit_rows is None \
        else np.asarray(fit_rows, dtype=int)
    if rows.size == 0:
        raise ValueError("`fit_rows` must not be empty")
    scaler = StandardScaler().fit(x[rows])
    means = np.asarray(scaler.mean_, dtype=float)
    stds = np.sqrt(np.asarray(scaler.var_, dtype=float))
    constant = stds <= CONSTANT_TOL * np.maximum(1.0, np.abs(means))
    scaled = ScaledMatrix(
        values=np.empty_like(x),
        means=means,
        stds=np.where(constant, 0.0, stds),
        constant=constant,
    )
    scaled.values = scaled.transform(x)
    return scaled


def univariate_scores(
    x: ScaledMatrix | np.ndarray,
    y: np.ndarray
) -> FilterScores:
    """
    Pearson correlation and univariate regression F statistic of each
    feature with the target, computed together. Constant features
    score 0 on both and are flagged.

    :param x: Scaled (or raw) features
    :type x: :py:class:`mtfl.data.selection_data.ScaledMatrix`
    :param y: Target vector
    :type y: :py:class:`numpy.ndarray`
    :rtype: :py:class:`mtfl.data.selection_data.FilterScores`
    :raises ValueError: with fewer than 3 samples
    """
    if isinstance(x, ScaledMatrix):
        values, constant = x.values, x.constant
    else:
        values = np.asarray(x, dtype=float)
        constant = np.ptp(values, axis=0) == 0
    y = np.asarray(y, dtype=float).ravel()
    if values.shape[0] < 3:
        raise ValueError("filter scores need at least 3 samples")
    if values.shape[0] != y.size:
        raise ValueError("`x` and `y` have different numbers of samples")
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', RuntimeWarning)
        r = r_regression(values, y, center=True, force_finite=True)
        f_stat, _ = f_regression(values, y, center=True, force_finite=True)
    r = np.clip(np.asarray(r, dtype=float), -1.0, 1.0)
    f_stat = np.asarray(f_stat, dtype=float)
    r[constant] = 0.0
    f_stat[constant] = 0.0
    return FilterScores(pearson_r=r, f_stat=f_stat, constant=constant)


def pearson_scores(
    x: ScaledMatrix | np.ndarray,
    y: np.ndarray
) -> np.ndarray:
    """
    Pearson correlation of each feature with the target; constant
    features score 0

    :rtype: :py:class:`numpy.ndarray`
    :raises ValueError: with fewer than 3 samples
    """
    return univariate_scores(x, y).pearson_r


def f_scores(x: ScaledMatrix | np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Univariate regression F statistic ``(n - 2) r^2 / (1 - r^2)``;
    a perfect correlation maps to the largest finite float so it
    ranks first
    """
    return univariate_scores(x, y).f_stat


def select_top(
    scores: np.ndarray,
    m: int,
    method: str,
    secondary: np.ndarray | None = None
) -> SelectionResult:
    """
    Select the `m` best-scoring features, ties broken by index

    :param scores: One score per feature, larger is better
    :type scores: :py:class:`numpy.ndarray`
    :param m: Number of features to select
    :type m: int
    :param method: Name of the scoring method
    :type method: str
    :param secondary: Optional tie-breaking score
    :type secondary: :py:class:`numpy.ndarray` or None
    :rtype: :py:class:`mtfl.data.selection_data.SelectionResult`
    """
    scores = np.asarray(scores, dtype=float)
    m = check_count(m, 'm')
    if m > scores.size:
        raise ValueError(f"`m`={m} exceeds the {scores.size} features")
    return SelectionResult(
        method=method,
        selected=rank_descending(scores, secondary)[:m],
        scores=scores,
        n_features=scores.size,
    )


def rfe_select(
    x: ScaledMatrix | np.ndarray,
    y: np.ndarray,
    m: int,
    alpha: float = 1.0
) -> SelectionResult:
    """
    Recursive feature elimination with a ridge model: refit on the
    surviving features and drop the one with the smallest absolute
    coefficient until `m` remain

    :param x: Scaled features
    :type x: :py:class:`mtfl.data.selection_data.ScaledMatrix`
    :param y: Target vector
    :type y: :py:class:`numpy.ndarray`
    :param m: Number of features to keep
    :type m: int
    :param alpha: Ridge strength, strictly positive
    :type alpha: float
    :return: Selected features; scores grow with elimination round,
        survivors scoring highest
    :rtype: :py:class:`mtfl.data.selection_data.SelectionResult`
    :raises ValueError: if `m` is outside 1..d or `alpha` is not
        positive
    """
    values = x.values if isinstance(x, ScaledMatrix) else np.asarray(x, float)
    m = check_count(m, 'm')
    if m > values.shape[1]:
        raise ValueError(f"`m`={m} exceeds the {values.shape[1]} features")
    if not alpha > 0:
        raise ValueError("`alpha` must be positive")
    rfe = RFE(Ridge(alpha=alpha), n_features_to_select=m, step=1)
    rfe.fit(values, np.asarray(y, dtype=float).ravel())
    ranking = np.asarray(rfe.ranking_, dtype=float)
    scores = ranking.max() + 1.0 - ranking
    magnitude = np.zeros(values.shape[1])
    magnitude[rfe.support_] = np.abs(np.ravel(rfe.estimator_.coef_))
    return select_top(scores, m, 'rfe', secondary=magnitude)


def _normalized(importance: np.ndarray) -> np.ndarray:
    importance = np.clip(np.asarray(importance, dtype=float), 0.0, None)
    total = importance.sum()
    if total <= 0:
        return np.full(importance.size, 1.0 / importance.size)
    return importance / total


def forest_importance(
    x: ScaledMatrix | np.ndarray,
    y: np.ndarray,
    config: SelectionConfig,
    seed: int,
    n_jobs: int = 1
) -> SelectionResult:
    """
    Impurity-decrease importance from a bagged forest of regression
    trees, normalized to sum to 1

    :param x: Features
    :type x: :py:class:`numpy.ndarray`
    :param y: Target vector
    :type y: :py:class:`numpy.ndarray`
    :param config: Forest parameters and selection size
    :type config: :py:class:`mtfl.data.config_data.SelectionConfig`
    :param seed: Random state; results do not depend on `n_jobs`
    :type seed: int
    :param n_jobs: Parallel tree fits
    :type n_jobs: int
    :rtype: :py:class:`mtfl.data.selection_data.SelectionResult`
    :raises ValueError: with fewer than 5 samples
    """
    values = x.values if isinstance(x, ScaledMatrix) else np.asarray(x, float)
    if values.shape[0] < 5:
        raise ValueError("forest importance needs at least 5 samples")
    forest = RandomForestRegressor(
        n_estimators=config.forest_trees,
        max_depth=config.forest_max_depth,
        min_samples_leaf=config.forest_min_leaf,
        max_features=config.forest_max_features,
        bootstrap=True,
        random_state=seed,
        n_jobs=n_jobs,
    )
    forest.fit(values, np.asarray(y, dtype=float).ravel())
    importance = _normalized(forest.feature_importances_)
    return select_top(importance, min(config.m, importance.size), 'forest')


def boosting_importance(
    x: ScaledMatrix | np.ndarray,
    y: np.ndarray,
    config: SelectionConfig,
    seed: int
) -> SelectionResult:
    """
    Impurity-decrease importance from gradient-boosted regression
    trees, normalized to sum to 1
    """
    values = x.values if isinstance(x, ScaledMatrix) else np.asarray(x, float)
    if values.shape[0] < 5:
        raise ValueError("boosting importance needs at least 5 samples")
    booster = GradientBoostingRegressor(
        n_estimators=config.boosting_stages,
        learning_rate=config.boosting_learning_rate,
        max_depth=config.forest_max_depth,
        min_samples_leaf=config.forest_min_leaf,
        random_state=seed,
    )
    booster.fit(values, np.asarray(y, dtype=float).ravel())
    importance = _normalized(booster.feature_importances_)
    return select_top(importance, min(config.m, importance.size), 'boosting')


def _positions(result: SelectionResult) -> np.ndarray:
    position = np.empty(result.n_features)
    position[rank_descending(result.scores)] = np.arange(result.n_features)
    return position


def hybrid_select(
    filters: Sequence[SelectionResult],
    wrappers: Sequence[SelectionResult],
    m: int | None = None
) -> tuple[List[int], bool]:
    """
    Combine selections as ``(filter_1 & filter_2) | (wrapper_1 & ... )``.
    A combination larger than `m` keeps its `m` members with the best
    mean rank across all methods; an empty one falls back to the `m`
    best-ranked features overall.

    :param filters: The two filter selections
    :type filters: sequence of
        :py:class:`mtfl.data.selection_data.SelectionResult`
    :param wrappers: Two or more wrapper/tree selections
    :type wrappers: sequence of
        :py:class:`mtfl.data.selection_data.SelectionResult`
    :param m: Most features kept; defaults to the first filter's
        selection size
    :type m: int or None
    :return: Sorted feature indices and whether the fallback was used
    :rtype: tuple[list[int], bool]
    :raises ValueError: on mismatched feature universes
    """
    if len(filters) != 2:
        raise ValueError("hybrid selection takes exactly two filters")
    if len(wrappers) < 2:
        raise ValueError("hybrid selection takes at least two wrappers")
    results = list(filters) + list(wrappers)
    universe = {r.n_features for r in results}
    if len(universe) != 1:
        raise ValueError(
            f"selections cover different feature universes: {sorted(universe)}"
        )
    m = m or len(filters[0].selected) or 1
    mean_rank = np.mean([_positions(r) for r in results], axis=0)
    filtered = filters[0].selected_set & filters[1].selected_set
    wrapped = frozenset.intersection(*(w.selected_set for w in wrappers))
    combined = sorted(filtered | wrapped)
    if len(combined) > m:
        logger.info(
            "hybrid combination of %d features trimmed to %d by mean rank",
            len(combined), m
        )
        best = rank_descending(-mean_rank[combined])[:m]
        return sorted(combined[i] for i in best), False
    if combined:
        return combined, False
    fallback = sorted(rank_descending(-mean_rank)[:m])
    logger.warning(
        "hybrid selection empty; falling back to %d features by mean rank", m
    )
    return fallback, True


def run_hybrid_selection(
    dataset: Dataset,
    config: SelectionConfig,
    seed: int,
    n_jobs: int = 1
) -> SelectionReport:
    """
    Run the whole hybrid selection against the window's final-day
    CFR, the converged critical point of the series

    :param dataset: The assembled dataset
    :type dataset: :py:class:`mtfl.data.factor_data.Dataset`
    :param config: Selection parameters
    :type config: :py:class:`mtfl.data.config_data.SelectionConfig`
    :param seed: Seed for the tree models
    :type seed: int
    :param n_jobs: Parallel tree fits
    :type n_jobs: int
    :rtype: :py:class:`mtfl.data.selection_data.SelectionReport`
    """
    scaled = standard_scale(dataset.x)
    y = dataset.y[:, -1]
    m = min(config.m, scaled.shape[1])
    scores = univariate_scores(scaled, y)
    pearson = select_top(np.abs(scores.pearson_r), m, 'pearson')
    fscore = select_top(scores.f_stat, m, 'fscore')
    wrappers = [
        rfe_select(scaled, y, m, config.rfe_alpha),
        forest_importance(scaled, y, config, seed, n_jobs),
    ]
    if config.third_wrapper == 'boosting':
        wrappers.append(boosting_importance(scaled, y, config, seed + 1))
    else:
        wrappers.append(forest_importance(scaled, y, config, seed + 1, n_jobs))
    hybrid, fallback = hybrid_select([pearson, fscore], wrappers, m)
    logger.info(
        "hybrid selection kept %d of %d features", len(hybrid), scaled.shape[1]
    )
    return SelectionReport(
        features=list(dataset.features),
        sectors=[s.value for s in dataset.sectors],
        filters=scores,
        results=[pearson, fscore] + wrappers,
        hybrid=hybrid,
        fallback=fallback,
    )
