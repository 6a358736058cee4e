"""
SeirParams and SeirTrajectory Classes
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Dict

import numpy as np

import mtfl.defaults


@dataclass(frozen=True, kw_only=True)
class SeirParams:
    """
    Parameters of a deterministic SEIR epidemic

    :param beta: Transmission rate per day
    :type beta: float
    :param sigma: Rate of leaving the exposed compartment per day
    :type sigma: float
    :param gamma: Rate of leaving the infected compartment per day
    :type gamma: float
    :param mu: Fraction of infected outflow that dies, in [0, 1]
    :type mu: float
    :param n_pop: Population size
    :type n_pop: float
    :param e0: Initially exposed
    :type e0: float
    :param i0: Initially infected, counted as confirmed cases on day 0
    :type i0: float
    :param days: Number of daily samples
    :type days: int
    :param dt: Integration step in days, at most 1
    :type dt: float
    """
    beta: float = mtfl.defaults.SEIR_BETA
    sigma: float = mtfl.defaults.SEIR_SIGMA
    gamma: float = mtfl.defaults.SEIR_GAMMA
    mu: float = mtfl.defaults.SEIR_MU
    n_pop: float = mtfl.defaults.SEIR_POPULATION
    e0: float = mtfl.defaults.SEIR_E0
    i0: float = mtfl.defaults.SEIR_I0
    days: int = mtfl.defaults.WINDOW
    dt: float = mtfl.defaults.SEIR_DT

    def __post_init__(self):
        for name in ('beta', 'sigma', 'gamma', 'e0', 'i0'):
            if getattr(self, name) < 0:
                raise ValueError(f"`{name}` must be non-negative")
        if not 0 <= self.mu <= 1:
            raise ValueError("`mu` must lie in [0, 1]")
        if self.n_pop <= 0:
            raise ValueError("`n_pop` must be positive")
        if self.e0 + self.i0 > self.n_pop:
            raise ValueError("`e0` + `i0` cannot exceed `n_pop`")
        if self.days < 1:
            raise ValueError("`days` must be at least 1")
        if not 0 < self.dt <= 1:
            raise ValueError("`dt` must lie in (0, 1]")

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(kw_only=True, repr=False)
class SeirTrajectory:
    """
    Daily samples of a simulated epidemic, day 0 first
    """
    params: SeirParams
    s: np.ndarray
    e: np.ndarray
    i: np.ndarray
    r: np.ndarray
    cumulative_cases: np.ndarray
    cumulative_deaths: np.ndarray

    def __repr__(self):
        return (
            f"SeirTrajectory(days={self.days}, "
            + f"cases={self.cumulative_cases[-1]:.4g})"
        )

    @property
    def days(self) -> int:
        return self.s.size

    @property
    def total(self) -> np.ndarray:
        return self.s + self.e + self.i + self.r

    @property
    def cfr(self) -> np.ndarray:
        out = np.zeros(self.days)
        np.divide(
            self.cumulative_deaths, self.cumulative_cases,
            out=out, where=self.cumulative_cases > 0
        )
        return out
