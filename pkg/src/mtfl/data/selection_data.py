"""
ScaledMatrix, FilterScores, SelectionResult and SelectionReport Classes
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

METHODS = ('pearson', 'fscore', 'rfe', 'forest', 'boosting')


@dataclass(kw_only=True, repr=False)
class ScaledMatrix:
    """
    A standardized matrix and the statistics used to produce it.
    Constant columns are all zeros in `values` and flagged in
    `constant`.
    """
    values: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    constant: np.ndarray

    def __repr__(self):
        return (
            f"ScaledMatrix({self.values.shape}, "
            + f"{int(self.constant.sum())} constant)"
        )

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    def transform(self, x: np.ndarray) -> np.ndarray:
        """
        Apply the stored statistics to new rows

        :param x: Matrix with the same columns
        :type x: :py:class:`numpy.ndarray`
        :rtype: :py:class:`numpy.ndarray`
        """
        x = np.asarray(x, dtype=float)
        safe = np.where(self.constant, 1.0, self.stds)
        out = (x - self.means) / safe
        out[:, self.constant] = 0.0
        return out


@dataclass(kw_only=True)
class FilterScores:
    """
    Univariate filter scores, one entry per feature

    :param pearson_r: Correlation with the target, in [-1, 1]
    :type pearson_r: :py:class:`numpy.ndarray`
    :param f_stat: ``(n - 2) r^2 / (1 - r^2)``; a perfect fit
        holds the largest finite float
    :type f_stat: :py:class:`numpy.ndarray`
    :param constant: Features with no variance, scored 0
    :type constant: :py:class:`numpy.ndarray`
    """
    pearson_r: np.ndarray
    f_stat: np.ndarray
    constant: np.ndarray


@dataclass(kw_only=True)
class SelectionResult:
    method: str
    selected: List[int]
    scores: np.ndarray
    n_features: int

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown selection method '{self.method}'")
        if len(set(self.selected)) != len(self.selected):
            raise ValueError("selected indices must be unique")
        if any(i < 0 or i >= self.n_features for i in self.selected):
            raise ValueError("selected index outside the feature universe")

    @property
    def selected_set(self) -> frozenset:
        return frozenset(self.selected)


@dataclass(kw_only=True)
class SelectionReport:
    """
    Everything the hybrid selection computed, kept for the
    selection report CSV
    """
    features: List[str]
    sectors: List[str]
    filters: FilterScores
    results: List[SelectionResult] = field(default_factory=list)
    hybrid: List[int] = field(default_factory=list)
    fallback: bool = False

    def result(self, method: str) -> SelectionResult | None:
        for result in self.results:
            if result.method == method:
                return result
        return None
