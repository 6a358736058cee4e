"""
ReportWriter Class
"""
from __future__ import annotations

import logging
from typing import Dict, List, Mapping, Sequence

import matplotlib
from matplotlib.figure import Figure
import numpy as np
import pandas as pd

import mtfl.defaults
from mtfl.data.factor_data import Sector
from mtfl.data.selection_data import SelectionReport
from mtfl.data.task_data import EvalReport
from mtfl.data.vote_data import VotingResult
from mtfl.errors import DataError
from mtfl.store import ResultStore
from mtfl.utils import all_finite

logger = logging.getLogger(__name__)

RANKING_COLUMNS = (
    'rank', 'feature', 'sector', 'stage1_mean_count', 'borda_score'
)


def _check_finite(name: str, frame: pd.DataFrame):
    numeric = frame.select_dtypes(include='number')
    if not all_finite(numeric.to_numpy().ravel()):
        raise DataError(f"'{name}' would contain non-finite values")


def ranking_frame(
    voting: VotingResult,
    features: Sequence[str],
    sectors: Sequence[str]
) -> pd.DataFrame:
    """
    One row per feature in stable order. Both vote levels are
    reported; the order follows the task-level votes.

    :rtype: :py:class:`pandas.DataFrame`
    """
    order = voting.stability.order
    task_mean = voting.task_votes.mean_counts
    experiment_mean = voting.experiment_votes.mean_counts
    return pd.DataFrame({
        'rank': np.arange(1, len(order) + 1),
        'feature': [features[i] for i in order],
        'sector': [sectors[i] for i in order],
        'stage1_mean_count': task_mean[order],
        'borda_score': voting.stability.scores[order],
        'experiment_vote_share': experiment_mean[order],
    })


def local_importance(
    weights: np.ndarray,
    order: Sequence[int],
    scale: str = mtfl.defaults.HEATMAP_SCALE
) -> np.ndarray:
    """
    Heatmap values: the weights with rows in stable order, as
    magnitudes or signed

    :rtype: :py:class:`numpy.ndarray`
    """
    if scale not in ('signed', 'magnitude'):
        raise ValueError("`scale` must be 'signed' or 'magnitude'")
    values = np.asarray(weights, dtype=float)[list(order)]
    return np.abs(values) if scale == 'magnitude' else values


class ReportWriter:
    """
    Turns pipeline results into report artifacts

    :param store: Where artifacts go
    :type store: :py:class:`mtfl.store.ResultStore`
    :param heatmap_scale: ``'signed'`` or ``'magnitude'``
    :type heatmap_scale: str
    """
    def __init__(
        self,
        store: ResultStore,
        heatmap_scale: str = mtfl.defaults.HEATMAP_SCALE
    ) -> None:
        self.store = store
        self.heatmap_scale = heatmap_scale

    def _write(self, name: str, frame: pd.DataFrame):
        _check_finite(name, frame)
        return self.store.write_csv(name, frame)

    def write_rankings(
        self,
        votes: Mapping[str, VotingResult],
        features: Sequence[str],
        sectors: Sequence[str]
    ) -> List[str]:
        """
        Write ``ranking_<model>.csv`` per model and all of them in
        ``global_importance.csv``

        :return: Names of the written files
        :rtype: list[str]
        """
        frames = []
        written = []
        for model, voting in votes.items():
            frame = ranking_frame(voting, features, sectors)
            name = f"ranking_{model}.csv"
            self._write(name, frame[list(RANKING_COLUMNS)])
            written.append(name)
            frame.insert(0, 'model', model)
            frames.append(frame)
        if frames:
            self._write('global_importance.csv', pd.concat(frames))
            written.append('global_importance.csv')
        return written

    def write_model_comparison(
        self,
        reports: Mapping[str, EvalReport]
    ) -> pd.DataFrame:
        """
        One row per model: mean and population standard deviation of
        test rMSE, the per-phase means and run diagnostics

        :rtype: :py:class:`pandas.DataFrame`
        """
        if not reports:
            raise DataError("no completed model runs to report")
        rows = []
        for model, report in reports.items():
            row = {
                'model': model,
                'rmse_mean': report.rmse_mean,
                'rmse_std': report.rmse_std,
            }
            for p, value in enumerate(report.per_phase, start=1):
                row[f"phase_{p}_rmse"] = value
            row['runs'] = len(report.runs)
            row['unconverged'] = report.n_unconverged
            row['representative_run'] = report.representative
            rows.append(row)
        frame = pd.DataFrame(rows)
        self._write('model_comparison.csv', frame)
        return frame

    def write_local_importance(
        self,
        model: str,
        weights: np.ndarray,
        order: Sequence[int],
        features: Sequence[str]
    ):
        """
        Write the representative weights of `model` as
        ``local_importance.csv`` (features by tasks) and a heatmap
        ``local_importance.svg``. Rows follow the stable ranking;
        tasks run left to right in time.
        """
        values = local_importance(weights, order, self.heatmap_scale)
        labels = [features[i] for i in order]
        frame = pd.DataFrame(
            values, columns=[f"task_{t + 1}" for t in range(values.shape[1])]
        )
        frame.insert(0, 'feature', labels)
        self._write('local_importance.csv', frame)
        self._heatmap('local_importance.svg', values, labels, model)

    def _heatmap(
        self,
        name: str,
        values: np.ndarray,
        labels: Sequence[str],
        model: str
    ):
        if self.heatmap_scale == 'signed':
            bound = float(np.max(np.abs(values))) or 1.0
            cmap, vmin, vmax = 'RdBu_r', -bound, bound
        else:
            cmap, vmin, vmax = 'viridis', 0.0, float(np.max(values)) or 1.0
        height = max(3.0, 0.22 * len(labels) + 1.5)
        with matplotlib.rc_context({
            'svg.hashsalt': mtfl.defaults.SVG_HASH_SALT,
            'svg.fonttype': 'none',
        }):
            figure = Figure(figsize=(10.0, height))
            axes = figure.add_subplot(1, 1, 1)
            image = axes.imshow(
                values, aspect='auto', cmap=cmap, vmin=vmin, vmax=vmax,
                interpolation='nearest'
            )
            axes.set_yticks(np.arange(len(labels)))
            axes.set_yticklabels(labels, fontsize=7)
            ticks = np.arange(0, values.shape[1], 7)
            axes.set_xticks(ticks)
            axes.set_xticklabels([str(t + 1) for t in ticks], fontsize=7)
            axes.set_xlabel('task (day)')
            axes.set_title(f"Local importance ({model})")
            figure.colorbar(
                image, ax=axes,
                label='|weight|' if self.heatmap_scale == 'magnitude'
                else 'weight'
            )
            figure.tight_layout()
            target = self.store.path(name)
            figure.savefig(target, format='svg', metadata={'Date': None})
        logger.debug("wrote %s", target)

    def write_selection_report(self, report: SelectionReport) -> pd.DataFrame:
        """
        Every score each selector computed and which features it
        kept, plus the hybrid verdict

        :rtype: :py:class:`pandas.DataFrame`
        """
        frame = pd.DataFrame({
            'feature': report.features,
            'sector': report.sectors,
            'pearson_r': report.filters.pearson_r,
            'f_stat': report.filters.f_stat,
            'constant': report.filters.constant.astype(int),
        })
        seen: Dict[str, int] = {}
        for result in report.results:
            seen[result.method] = seen.get(result.method, 0) + 1
            label = result.method if seen[result.method] == 1 \
                else f"{result.method}{seen[result.method]}"
            if result.method not in ('pearson', 'fscore'):
                frame[f"{label}_score"] = result.scores
            frame[f"{label}_selected"] = [
                int(i in result.selected_set) for i in range(result.n_features)
            ]
        hybrid = set(report.hybrid)
        frame['hybrid'] = [int(i in hybrid) for i in range(len(frame))]
        frame['fallback'] = int(report.fallback)
        self._write('selection_report.csv', frame)
        return frame

    def write_ablation(self, rows: Sequence[Mapping]) -> pd.DataFrame:
        """
        Write ``ablation.csv``: one row per data configuration with
        an included flag per sector and the resulting rMSE

        :param rows: Dicts with keys ``sectors`` (included sectors),
            ``augmented``, ``rmse_mean`` and ``rmse_std``
        :type rows: sequence of dict
        :rtype: :py:class:`pandas.DataFrame`
        """
        records = []
        for number, row in enumerate(rows, start=1):
            record: Dict[str, object] = {'no': number}
            for sector in Sector:
                record[sector.slug] = int(sector in row['sectors'])
            record['augmented'] = int(row['augmented'])
            record['rmse_mean'] = row['rmse_mean']
            record['rmse_std'] = row['rmse_std']
            records.append(record)
        frame = pd.DataFrame(records)
        self._write('ablation.csv', frame)
        return frame
