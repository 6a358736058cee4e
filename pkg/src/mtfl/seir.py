"""
Deterministic SEIR simulation and synthetic region augmentation
"""
from __future__ import annotations

from dataclasses import dataclass, replace
import logging
import math
from typing import Any, Dict, List, Mapping, Sequence

import numpy as np

import mtfl.defaults
from mtfl.data.factor_data import EpidemicSeries, FactorTable
from mtfl.data.seir_data import SeirParams, SeirTrajectory
from mtfl.errors import DataError
from mtfl.ingest import progression_features
from mtfl.utils import check_count

logger = logging.getLogger(__name__)

SYNTHETIC_PREFIX = 'SIM-'


def _derivative(state: np.ndarray, p: SeirParams) -> np.ndarray:
    s, e, i, _, _, _ = state
    infection = p.beta * s * i / p.n_pop
    onset = p.sigma * e
    removal = p.gamma * i
    return np.array([
        -infection,
        infection - onset,
        onset - removal,
        removal,
        onset,
        removal,
    ])


def _rk4_step(state: np.ndarray, p: SeirParams, h: float) -> np.ndarray:
    k1 = _derivative(state, p)
    k2 = _derivative(state + 0.5 * h * k1, p)
    k3 = _derivative(state + 0.5 * h * k2, p)
    k4 = _derivative(state + h * k3, p)
    return state + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def simulate_seir(params: SeirParams) -> SeirTrajectory:
    """
    Integrate

    ``S' = -beta S I / N``, ``E' = beta S I / N - sigma E``,
    ``I' = sigma E - gamma I``, ``R' = gamma I``

    with classical Runge-Kutta, sampling days 0..days-1. Each day is
    split into ``ceil(1 / dt)`` equal steps. Cumulative cases start at
    ``i0`` and grow by the flow ``sigma E``; cumulative deaths are
    ``mu`` times the flow ``gamma I``.

    :param params: Simulation parameters
    :type params: :py:class:`mtfl.data.seir_data.SeirParams`
    :rtype: :py:class:`mtfl.data.seir_data.SeirTrajectory`
    :raises DataError: if a compartment turns negative
    """
    steps = max(1, math.ceil(1.0 / params.dt - 1e-9))
    h = 1.0 / steps
    state = np.array([
        params.n_pop - params.e0 - params.i0,
        params.e0, params.i0, 0.0, 0.0, 0.0,
    ])
    samples = np.empty((params.days, state.size))
    samples[0] = state
    floor = -1e-9 * params.n_pop
    for day in range(1, params.days):
        for _ in range(steps):
            state = _rk4_step(state, params, h)
        if np.any(state[:4] < floor):
            raise DataError(
                f"SEIR compartment turned negative on day {day}; "
                + f"use a smaller dt than {params.dt}"
            )
        samples[day] = state
    compartments = np.maximum(samples[:, :4], 0.0)
    return SeirTrajectory(
        params=params,
        s=compartments[:, 0],
        e=compartments[:, 1],
        i=compartments[:, 2],
        r=compartments[:, 3],
        cumulative_cases=params.i0 + np.maximum.accumulate(samples[:, 4]),
        cumulative_deaths=params.mu * np.maximum.accumulate(samples[:, 5]),
    )


def trajectory_series(
    trajectory: SeirTrajectory,
    region: str
) -> EpidemicSeries:
    return EpidemicSeries(
        region=region,
        days=np.arange(trajectory.days),
        confirmed_cases=trajectory.cumulative_cases,
        confirmed_deaths=trajectory.cumulative_deaths,
        population=trajectory.params.n_pop,
    )


def default_variants(
    count: int,
    base: SeirParams | None = None,
    seed: int = mtfl.defaults.SEED,
    spread: float = mtfl.defaults.AUGMENT_BETA_SPREAD
) -> List[SeirParams]:
    """
    Draw `count` parameter sets whose transmission rate is uniform
    within ``beta * (1 +/- spread)`` of `base`

    :rtype: list[:py:class:`mtfl.data.seir_data.SeirParams`]
    """
    count = check_count(count, 'count')
    if not 0 <= spread < 1:
        raise ValueError("`spread` must lie in [0, 1)")
    base = base or SeirParams()
    rng = np.random.default_rng(seed)
    factors = rng.uniform(1.0 - spread, 1.0 + spread, size=count)
    return [replace(base, beta=float(base.beta * f)) for f in factors]


@dataclass(kw_only=True)
class SyntheticRegion:
    """
    One simulated region: jittered static factors plus the epidemic
    series of its trajectory
    """
    region: str
    factors: Dict[str, float]
    series: EpidemicSeries
    params: SeirParams
    seed: int

    def manifest_entry(self) -> Dict[str, Any]:
        return {
            'region': self.region,
            'params': self.params.as_dict(),
            'seed': self.seed,
        }


def synthetic_name(index: int) -> str:
    return f"{SYNTHETIC_PREFIX}{index + 1:03d}"


def synthesize_samples(
    template: Mapping[str, float],
    variants: Sequence[SeirParams],
    count: int,
    jitter: float = mtfl.defaults.AUGMENT_JITTER,
    seed: int = mtfl.defaults.SEED,
    summary_days: int = mtfl.defaults.SUMMARY_DAYS
) -> List[SyntheticRegion]:
    """
    Simulate `count` synthetic regions. Static factors are the
    template values scaled by a seeded uniform factor in
    ``1 +/- jitter``; progression indicators named in the template
    are replaced by the simulated series' own summaries.

    :param template: Static factor values keyed by indicator name
    :type template: dict[str, float]
    :param variants: Parameter sets, cycled when fewer than `count`
    :type variants: sequence of :py:class:`mtfl.data.seir_data.SeirParams`
    :param count: Number of regions
    :type count: int
    :param jitter: Relative jitter of static factors
    :type jitter: float
    :param seed: Seed of the jitter
    :type seed: int
    :rtype: list[:py:class:`mtfl.seir.SyntheticRegion`]
    :raises ValueError: if `count` is below 1 or no variants are given
    """
    count = check_count(count, 'count')
    if not variants:
        raise ValueError("`variants` must not be empty")
    if jitter < 0:
        raise ValueError("`jitter` must be non-negative")
    names = sorted(template)
    rng = np.random.default_rng(seed)
    regions = []
    for index in range(count):
        params = variants[index % len(variants)]
        region = synthetic_name(index)
        series = trajectory_series(simulate_seir(params), region)
        scale = rng.uniform(1.0 - jitter, 1.0 + jitter, size=len(names))
        factors = {
            name: float(template[name] * s) for name, s in zip(names, scale)
        }
        progression = progression_features(series, summary_days)
        factors.update({
            name: value for name, value in progression.items()
            if name in factors
        })
        regions.append(SyntheticRegion(
            region=region, factors=factors, series=series,
            params=params, seed=seed,
        ))
    return regions


def column_template(table: FactorTable) -> Dict[str, float]:
    """
    Column means of an imputed factor table

    :rtype: dict[str, float]
    """
    if table.missing_mask.any():
        raise DataError("factor table has missing values; impute first")
    means = table.values.mean(axis=0)
    return dict(zip(table.indicator_names, means.tolist()))


def augment_dataset(
    table: FactorTable,
    series: Mapping[str, EpidemicSeries],
    samples: Sequence[SyntheticRegion]
) -> tuple[FactorTable, Dict[str, EpidemicSeries]]:
    """
    Append synthetic regions to an imputed table and series mapping

    :rtype: tuple[:py:class:`mtfl.data.factor_data.FactorTable`,
        dict[str, :py:class:`mtfl.data.factor_data.EpidemicSeries`]]
    :raises DataError: if a synthetic region clashes with a real one
        or lacks an indicator of the table
    """
    rows = []
    for sample in samples:
        if sample.region in table.regions or sample.region in series:
            raise DataError(f"region '{sample.region}' already exists")
        try:
            rows.append([sample.factors[n] for n in table.indicator_names])
        except KeyError as exc:
            raise DataError(
                f"synthetic region '{sample.region}' lacks indicator {exc}"
            ) from exc
    if not rows:
        return table, dict(series)
    values = np.vstack([table.values, np.asarray(rows, dtype=float)])
    augmented = table.replace(
        regions=table.regions + tuple(s.region for s in samples),
        values=values,
        missing_mask=np.zeros(values.shape, dtype=bool),
    )
    merged = dict(series)
    merged.update({s.region: s.series for s in samples})
    logger.info("appended %d synthetic region(s)", len(samples))
    return augmented, merged


def manifest(samples: Sequence[SyntheticRegion], jitter: float) -> Dict:
    return {
        'jitter': jitter,
        'regions': [s.manifest_entry() for s in samples],
    }
