"""
App Class
"""
from __future__ import annotations

import logging
from typing import Dict

import pandas as pd

from mtfl.data.config_data import PipelineConfig
from mtfl.data.factor_data import Dataset
from mtfl.data.task_data import EvalReport
from mtfl.data.vote_data import VotingResult
from mtfl.errors import MtflError
from mtfl.observable_types import CallbackData
from mtfl.pipeline import Pipeline
from mtfl.report import ReportWriter
from mtfl.store import ResultStore

logger = logging.getLogger(__name__)

COMMANDS = (
    'ingest', 'select', 'fit', 'experiment', 'vote', 'report', 'simulate',
    'run',
)


class App:
    """
    The root application object. Builds the pipeline, store and
    report writer from a config, logs stage progress and maps
    errors to exit codes.

    :param config: The resolved config
    :type config: :py:class:`mtfl.data.config_data.PipelineConfig`
    """
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.pipeline = Pipeline(config)
        self.store = ResultStore(config.out)
        self.writer = ReportWriter(self.store, config.heatmap_scale)
        self.pipeline.add_callback_all(self.on_stage_finished)

    def on_stage_finished(self, data: CallbackData):
        """
        Log a finished stage; never alters results

        :param data: The callback data
        :type data: :py:class:`mtfl.observable_types.CallbackData`
        """
        logger.info(
            "stage '%s' finished in %.2fs", data.attribute_name, data.elapsed
        )

    def execute(self, command: str) -> int:
        """
        Run a command and translate pipeline errors to exit codes. Stray
        key and file system errors map to the generic exit code 1.

        :param command: One of :py:data:`mtfl.app.COMMANDS`
        :type command: str
        :return: 0 on success, the error's exit code otherwise
        :rtype: int
        """
        if command not in COMMANDS:
            raise ValueError(f"unknown command '{command}'")
        try:
            self.config.validate(require_inputs=command not in (
                'vote', 'report', 'simulate'
            ))
            getattr(self, f"cmd_{command}")()
        except MtflError as exc:
            if exc.stage is None and command != 'run':
                exc.stage = command
            logger.error("%s", exc)
            return exc.exit_code
        except (KeyError, OSError) as exc:
            error = MtflError(f"{type(exc).__name__}: {exc}", stage=command)
            logger.debug("unexpected failure", exc_info=exc)
            logger.error("%s", error)
            return error.exit_code
        return 0

    def _dataset(self) -> Dataset:
        self.pipeline.load()
        self.pipeline.augment()
        self._write_manifest()
        return self.pipeline.assemble()

    def _write_manifest(self):
        manifest = self.pipeline.augmentation_manifest
        if manifest is not None:
            self.store.write_json('augmentation.json', manifest)

    def _frame(self, dataset: Dataset, values, columns) -> pd.DataFrame:
        frame = pd.DataFrame(values, columns=columns)
        frame.insert(0, 'region_id', dataset.regions)
        return frame

    def cmd_ingest(self):
        dataset = self._dataset()
        self.store.write_csv('X.csv', self._frame(
            dataset, dataset.x, dataset.features
        ))
        self.store.write_csv('Y.csv', self._frame(
            dataset, dataset.y,
            [f"day_{t + 1}" for t in range(dataset.window)]
        ))
        self.store.write_csv('features.csv', pd.DataFrame({
            'feature': dataset.features,
            'sector': [s.value for s in dataset.sectors],
        }))
        if self.pipeline.flagged:
            self.store.write_csv('outliers.csv', pd.DataFrame(
                self.pipeline.flagged, columns=['region_id', 'indicator']
            ))

    def cmd_select(self):
        _, report = self.pipeline.select(self._dataset())
        if report is None:
            logger.warning("selection is disabled in the config")
            return
        self.writer.write_selection_report(report)

    def cmd_fit(self):
        dataset, report = self.pipeline.select(self._dataset())
        if report is not None:
            self.writer.write_selection_report(report)
        for model in self.config.models:
            outcome = self.pipeline.fit(dataset, model)
            self.store.write_weights(
                f"weights_{model}.csv", outcome.weights, outcome.features
            )
            self.store.write_json(f"fit_{model}.json", {
                'penalty': outcome.penalty.as_dict(),
                'objective': outcome.report.objective,
                'iterations': outcome.report.iterations,
                'converged': outcome.report.converged,
                'kkt_residual': outcome.report.kkt_residual,
                'intercept': outcome.intercept,
            })
            if self.config.trace:
                self.store.write_trace(f"trace_{model}.csv", outcome.report)

    def _write_experiment(
        self,
        dataset: Dataset,
        reports: Dict[str, EvalReport]
    ):
        self.store.write_experiment(
            dataset.features,
            [s.value for s in dataset.sectors],
            reports,
            {'regions': list(dataset.regions), 'seed': self.config.seed},
        )
        if self.config.write_run_weights:
            for model, report in reports.items():
                for run in report.runs:
                    self.store.write_weights(
                        f"runs/{model}_run{run.run_id:03d}.csv",
                        run.weights, dataset.features
                    )

    def cmd_experiment(self):
        dataset, report = self.pipeline.select(self._dataset())
        if report is not None:
            self.writer.write_selection_report(report)
        self._write_experiment(dataset, self.pipeline.experiment(dataset))

    def _write_votes(self, votes: Dict[str, VotingResult], features, sectors):
        self.writer.write_rankings(votes, features, sectors)
        self.store.write_json('votes.json', {
            model: voting.as_dict() for model, voting in votes.items()
        })

    def cmd_vote(self):
        features, sectors, reports = self.store.read_experiment()
        self._write_votes(self.pipeline.vote(reports), features, sectors)

    def _write_reports(self, reports, votes, features):
        self.writer.write_model_comparison(reports)
        model = self.pipeline.ablation_model
        if model not in reports:
            model = next(iter(reports))
        self.writer.write_local_importance(
            model, reports[model].weights,
            votes[model].stability.order, features
        )

    def cmd_report(self):
        features, sectors, reports = self.store.read_experiment()
        votes = self.pipeline.vote(reports)
        self._write_votes(votes, features, sectors)
        self._write_reports(reports, votes, features)

    def cmd_simulate(self):
        trajectory = self.pipeline.simulate()
        self.store.write_csv('seir_trajectory.csv', pd.DataFrame({
            'day': range(trajectory.days),
            'S': trajectory.s,
            'E': trajectory.e,
            'I': trajectory.i,
            'R': trajectory.r,
            'cumulative_cases': trajectory.cumulative_cases,
            'cumulative_deaths': trajectory.cumulative_deaths,
            'cfr': trajectory.cfr,
        }))

    def cmd_run(self):
        result = self.pipeline.run()
        self._write_manifest()
        dataset = result.dataset
        sectors = [s.value for s in dataset.sectors]
        if result.selection is not None:
            self.writer.write_selection_report(result.selection)
        self._write_experiment(dataset, result.reports)
        self._write_votes(result.votes, dataset.features, sectors)
        self._write_reports(result.reports, result.votes, dataset.features)
        if result.ablation:
            self.writer.write_ablation(result.ablation)
        logger.info("artifacts written to %s", self.store.root)
