"""
Utility functions for mtfl
"""
from __future__ import annotations

import os
from typing import Iterable, List, Sequence

import numpy as np

import mtfl.defaults
from mtfl.errors import ConfigError


def clip_value(
    val: int | float,
    min_val: int | float,
    max_val: int | float
) -> int | float:
    """
    Clip the input by provided minimum and maximum

    :param val: The value to be clipped
    :type val: int or float
    :param min_val: The minimum bound for the value
    :type min_val: int or float
    :param max_val: The maximum bound for the value
    :type max_val: int or float
    :return: The clipped value
    :rtype: int or float
    :raises TypeError: if the input values are not of type `int` or `float`
    :raises ValueError: if `min_val` is greater `max_val`
    """
    for name, value in (('val', val), ('min_val', min_val),
                        ('max_val', max_val)):
        if not isinstance(value, (int, float)):
            raise TypeError(
                f"argument `{name}` must be of type `int` or `float`"
            )
    if min_val > max_val:
        raise ValueError("`min_val` must be smaller than `max_val`")
    if val <= min_val:
        return min_val
    if val >= max_val:
        return max_val
    return val


def check_count(value: int, name: str, minimum: int = 1) -> int:
    """
    Validate an integer count argument

    :param value: The value to check
    :type value: int
    :param name: Argument name used in the error message
    :type name: str
    :param minimum: Smallest allowed value
    :type minimum: int
    :return: The value
    :rtype: int
    :raises TypeError: if `value` is not an `int`
    :raises ValueError: if `value` is below `minimum`
    """
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise TypeError(f"`{name}` must be of type `int`")
    if value < minimum:
        raise ValueError(f"`{name}` must be at least {minimum}")
    return int(value)


def rank_descending(
    scores: Sequence[float] | np.ndarray,
    secondary: Sequence[float] | np.ndarray | None = None
) -> List[int]:
    """
    Order indices by descending score, then by descending secondary
    score, then by ascending index

    :param scores: Primary sort key
    :type scores: sequence of float
    :param secondary: Optional tie-breaking key
    :type secondary: sequence of float or None
    :return: Indices from best to worst
    :rtype: list[int]
    """
    scores = np.asarray(scores, dtype=float)
    index = np.arange(scores.size)
    if secondary is None:
        order = np.lexsort((index, -scores))
    else:
        secondary = np.asarray(secondary, dtype=float)
        order = np.lexsort((index, -secondary, -scores))
    return order.tolist()


def worker_count(requested: int | None = None) -> int:
    """
    Number of parallel workers, capped by the ``MTFL_THREADS``
    environment variable

    :param requested: Workers asked for by the caller
    :type requested: int or None
    :return: At least one worker
    :rtype: int
    :raises ConfigError: if the environment variable is not a
        positive integer
    """
    raw = os.environ.get(mtfl.defaults.THREADS_ENV)
    cap = None
    if raw is not None and raw.strip():
        try:
            cap = int(raw)
        except ValueError as exc:
            raise ConfigError(
                f"{mtfl.defaults.THREADS_ENV} must be an integer, got '{raw}'"
            ) from exc
        if cap < 1:
            raise ConfigError(
                f"{mtfl.defaults.THREADS_ENV} must be at least 1"
            )
    workers = requested if requested is not None else (cap or 1)
    if cap is not None:
        workers = int(clip_value(workers, 1, cap))
    return max(1, workers)


def all_finite(values: Iterable[float] | np.ndarray) -> bool:
    return bool(np.all(np.isfinite(np.asarray(list(values), dtype=float))))
