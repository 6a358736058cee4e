"""
Pipeline Model
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import wraps
import logging
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from mtfl.data.config_data import PipelineConfig
from mtfl.data.factor_data import Dataset, EpidemicSeries, FactorTable, Sector
from mtfl.data.penalty_data import PenaltyConfig, SolverReport
from mtfl.data.seir_data import SeirParams, SeirTrajectory
from mtfl.data.selection_data import SelectionReport
from mtfl.data.task_data import EvalReport, TaskSpec
from mtfl.data.vote_data import VotingResult
from mtfl.errors import ConvergenceError, DataError, MtflError
from mtfl.featureprep import run_hybrid_selection
from mtfl.ingest import (
    assemble_dataset,
    compute_cfr_series,
    drop_sectors,
    flag_outliers,
    impute_missing,
    load_epidemic_series,
    load_factor_table,
)
from mtfl.multitask import (
    build_tasks,
    cross_validate,
    default_grid,
    fit_task,
    grid_from_points,
    repeat_experiments,
)
from mtfl.observable_types import ObservableMixin, observable
from mtfl.seir import (
    SyntheticRegion,
    augment_dataset,
    column_template,
    default_variants,
    manifest,
    simulate_seir,
    synthesize_samples,
)
from mtfl.utils import worker_count
from mtfl.voting import run_voting

logger = logging.getLogger(__name__)

STAGES = [
    'load', 'augment', 'assemble', 'select', 'experiment', 'vote',
    'ablate', 'fit', 'simulate',
]


def stage(method):
    """
    Method decorator naming the failing stage on any error it
    propagates. Precondition failures (`ValueError`) surface as
    :py:class:`mtfl.errors.DataError`.
    """
    @wraps(method)
    def tagged(self, *args, **kwargs):
        try:
            return method(self, *args, **kwargs)
        except MtflError as exc:
            if exc.stage is None:
                exc.stage = method.__name__
            raise
        except ValueError as exc:
            raise DataError(str(exc), stage=method.__name__) from exc
    return tagged


@dataclass(kw_only=True)
class FitOutcome:
    penalty: PenaltyConfig
    weights: np.ndarray
    intercept: np.ndarray
    report: SolverReport
    features: List[str]


@dataclass(kw_only=True)
class PipelineResult:
    """
    Everything a full run produces, ready for the report writer
    """
    dataset: Dataset
    selection: SelectionReport | None
    reports: Dict[str, EvalReport]
    votes: Dict[str, VotingResult]
    ablation: List[Dict[str, Any]] = field(default_factory=list)
    manifest: Dict[str, Any] | None = None


@observable(STAGES)
class Pipeline(ObservableMixin):
    """
    The application model: holds the loaded data and runs one
    method per stage. An extension of
    :py:class:`mtfl.observable_types.ObservableMixin` decorated by
    :py:func:`mtfl.observable_types.observable`, so observers can
    follow progress.

    :param config: Validated settings
    :type config: :py:class:`mtfl.data.config_data.PipelineConfig`
    """
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.table: FactorTable | None = None
        self.series: Dict[str, EpidemicSeries] = {}
        self.samples: List[SyntheticRegion] = []
        self.flagged: List[Tuple[str, str]] = []

    def __repr__(self):
        return f"Pipeline(table={self.table!r}, series={len(self.series)})"

    @property
    def augmented(self) -> bool:
        return bool(self.samples)

    @property
    def ablation_model(self) -> str:
        models = self.config.models
        return 'fsgl' if 'fsgl' in models else models[0]

    @property
    def augment_seed(self) -> int:
        seed = self.config.augment.seed
        return self.config.seed if seed is None else seed

    def grid(self, model: str) -> List[PenaltyConfig]:
        """
        Get the penalty grid of a model, explicit points first

        :param model: Model name
        :type model: str
        :rtype: list[:py:class:`mtfl.data.penalty_data.PenaltyConfig`]
        """
        if model in self.config.grid:
            return grid_from_points(model, self.config.grid[model])
        return default_grid(
            model, self.config.grid_points,
            self.config.grid_low, self.config.grid_high
        )

    def _require_table(self) -> FactorTable:
        if self.table is None:
            self.load()
        return self.table

    @stage
    def load(self) -> FactorTable:
        """
        Read, optionally outlier-filter and impute the factor table
        and read the epidemic series

        :rtype: :py:class:`mtfl.data.factor_data.FactorTable`
        """
        table = load_factor_table(self.config.factors)
        if self.config.outlier_filter:
            table, self.flagged = flag_outliers(
                table, self.config.outlier_factor
            )
        self.table = impute_missing(table)
        self.series = load_epidemic_series(self.config.epidemic)
        self.samples = []
        return self.table

    @stage
    def augment(self) -> List[SyntheticRegion]:
        """
        Append ``augment.count`` simulated regions to the loaded data

        :rtype: list[:py:class:`mtfl.seir.SyntheticRegion`]
        """
        settings = self.config.augment
        if settings.count < 1:
            return []
        table = self._require_table()
        if self.samples:
            return self.samples
        variants = default_variants(
            settings.count, settings.seir_params(self.config.window),
            self.augment_seed, settings.beta_spread
        )
        samples = synthesize_samples(
            column_template(table), variants, settings.count,
            settings.jitter, self.augment_seed, self.config.summary_days
        )
        self.table, self.series = augment_dataset(table, self.series, samples)
        self.samples = samples
        return samples

    @property
    def augmentation_manifest(self) -> Dict[str, Any] | None:
        if not self.samples:
            return None
        return manifest(self.samples, self.config.augment.jitter)

    @stage
    def assemble(
        self,
        dropped: Sequence[Sector] = (),
        real_only: bool = False
    ) -> Dataset:
        """
        Build X and the daily CFR matrix from the loaded data

        :param dropped: Sectors left out of X
        :type dropped: sequence of :py:class:`mtfl.data.factor_data.Sector`
        :param real_only: Leave synthetic regions out
        :type real_only: bool
        :rtype: :py:class:`mtfl.data.factor_data.Dataset`
        """
        table = self._require_table()
        synthetic = {s.region for s in self.samples}
        if real_only and synthetic:
            keep = [
                i for i, r in enumerate(table.regions) if r not in synthetic
            ]
            table = table.replace(
                regions=tuple(table.regions[i] for i in keep),
                values=table.values[keep],
                missing_mask=table.missing_mask[keep],
            )
            synthetic = set()
        if dropped:
            table = drop_sectors(table, dropped)
        missing = [r for r in table.regions if r not in self.series]
        if missing:
            raise DataError(f"region '{missing[0]}' has no epidemic series")
        window = self.config.window
        cfr = {
            r: compute_cfr_series(self.series[r], window)
            for r in table.regions
        }
        derive = Sector.PROGRESSION not in set(dropped)
        dataset = assemble_dataset(
            table, cfr, window,
            series=self.series if derive else None,
            summary_days=self.config.summary_days,
            synthetic=synthetic,
        )
        if dataset.x.shape[1] == 0:
            raise DataError("no indicators left to learn from")
        return dataset

    @stage
    def select(
        self,
        dataset: Dataset
    ) -> Tuple[Dataset, SelectionReport | None]:
        """
        Run hybrid selection and restrict the dataset to its result

        :rtype: tuple[:py:class:`mtfl.data.factor_data.Dataset`,
            :py:class:`mtfl.data.selection_data.SelectionReport` or None]
        """
        if not self.config.selection.enabled:
            return dataset, None
        report = run_hybrid_selection(
            dataset, self.config.selection, self.config.seed,
            worker_count(self.config.n_jobs)
        )
        return dataset.select_features(report.hybrid), report

    def tasks(self, dataset: Dataset) -> TaskSpec:
        return build_tasks(
            dataset.x, dataset.y, self.config.group_size,
            dataset.features, dataset.synthetic
        )

    @stage
    def experiment(
        self,
        dataset: Dataset,
        models: Sequence[str] | None = None
    ) -> Dict[str, EvalReport]:
        """
        Repeat the train/test protocol for every configured model

        :rtype: dict[str, :py:class:`mtfl.data.task_data.EvalReport`]
        :raises ConvergenceError: in strict mode, when a run did not
            converge
        """
        task = self.tasks(dataset)
        reports: Dict[str, EvalReport] = {}
        for model in models or self.config.models:
            report = repeat_experiments(
                task, self.grid(model),
                n_runs=self.config.n_runs,
                base_seed=self.config.seed,
                folds=self.config.folds,
                test_fraction=self.config.test_fraction,
                options=self.config.solver,
                n_jobs=self.config.n_jobs,
            )
            if self.config.strict and report.n_unconverged:
                raise ConvergenceError(
                    f"{report.n_unconverged} {model} run(s) did not converge"
                )
            reports[model] = report
        return reports

    @stage
    def vote(self, reports: Dict[str, EvalReport]) -> Dict[str, VotingResult]:
        """
        Vote over each model's runs; the best matching run becomes
        the model's representative

        :rtype: dict[str, :py:class:`mtfl.data.vote_data.VotingResult`]
        """
        votes = {}
        for model, report in reports.items():
            votes[model] = run_voting(
                report, self.config.vote_eps, self.config.top_p
            )
            report.representative = votes[model].best_run
        return votes

    def _evaluate(
        self,
        dropped: Sequence[Sector],
        real_only: bool
    ) -> EvalReport:
        dataset, _ = self.select(self.assemble(dropped, real_only))
        return self.experiment(dataset, [self.ablation_model])[
            self.ablation_model
        ]

    @stage
    def ablate(
        self,
        main: EvalReport | None = None
    ) -> List[Dict[str, Any]]:
        """
        Compare data configurations with the ablation model: all
        sectors on real data, all sectors with augmentation and one
        row per configured sector mask (real data)

        :param main: Result of the main run for the ablation model,
            reused for the row it matches
        :type main: :py:class:`mtfl.data.task_data.EvalReport` or None
        :rtype: list[dict]
        """
        every = tuple(Sector)
        rows = []

        def row(sectors, augmented, report):
            rows.append({
                'sectors': tuple(sectors),
                'augmented': augmented,
                'rmse_mean': report.rmse_mean,
                'rmse_std': report.rmse_std,
            })

        real = main if main is not None and not self.augmented \
            else self._evaluate((), real_only=True)
        row(every, False, real)
        if self.augmented:
            row(every, True, main or self._evaluate((), real_only=False))
        for mask in self.config.ablation_sectors:
            kept = tuple(s for s in every if s not in mask)
            row(kept, False, self._evaluate(mask, real_only=True))
        return rows

    @stage
    def fit(self, dataset: Dataset, model: str) -> FitOutcome:
        """
        Cross-validate on every row and fit one model

        :rtype: :py:class:`mtfl.pipeline.FitOutcome`
        """
        task = self.tasks(dataset)
        penalty = cross_validate(
            task, self.grid(model), self.config.folds, self.config.seed,
            self.config.solver
        )
        weights, intercept, _, report = fit_task(
            task, penalty, options=self.config.solver
        )
        if not report.converged:
            if self.config.strict:
                raise ConvergenceError(
                    f"{model} fit did not converge in {report.iterations} "
                    + "iterations"
                )
            logger.warning("%s fit did not converge", model)
        return FitOutcome(
            penalty=penalty, weights=weights, intercept=intercept,
            report=report, features=list(dataset.features),
        )

    @stage
    def simulate(self, params: SeirParams | None = None) -> SeirTrajectory:
        """
        Simulate one epidemic, by default with the configured
        augmentation parameters over the window

        :rtype: :py:class:`mtfl.data.seir_data.SeirTrajectory`
        """
        if params is None:
            params = self.config.augment.seir_params(self.config.window)
        return simulate_seir(params)

    def run(self) -> PipelineResult:
        """
        Every stage in order: load, augment, assemble, select,
        experiment, vote and ablate

        :rtype: :py:class:`mtfl.pipeline.PipelineResult`
        """
        self.load()
        self.augment()
        dataset, selection = self.select(self.assemble())
        reports = self.experiment(dataset)
        votes = self.vote(reports)
        ablation = []
        if self.config.ablations or self.augmented:
            ablation = self.ablate(reports.get(self.ablation_model))
        return PipelineResult(
            dataset=dataset,
            selection=selection,
            reports=reports,
            votes=votes,
            ablation=ablation,
            manifest=self.augmentation_manifest,
        )
