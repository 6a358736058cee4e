"""
Client to read and write pipeline artifacts in an output directory
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping

import numpy as np
import pandas as pd

import mtfl.defaults
from mtfl.data.penalty_data import SolverReport
from mtfl.data.task_data import EvalReport
from mtfl.errors import ConfigError, DataError

logger = logging.getLogger(__name__)

EXPERIMENT_FILE = 'experiment.json'


def _plain(value: Any) -> Any:
    # numpy scalars and arrays are not JSON serializable
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


class ResultStore:
    """
    Artifact store rooted at an output directory. Every file is
    written deterministically: sorted JSON keys and a fixed float
    format in CSV.

    :param root: The output directory, created on first use
    :type root: str or :py:class:`pathlib.Path`
    """
    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)

    def __repr__(self):
        return f"ResultStore('{self.root}')"

    def path(self, name: str) -> Path:
        """
        Get the path of an artifact, creating its directory

        :param name: File name relative to the root
        :type name: str
        :rtype: :py:class:`pathlib.Path`
        :raises ConfigError: if the directory cannot be created
        """
        target = self.root / name
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(
                f"cannot create output directory '{target.parent}': {exc}"
            ) from exc
        return target

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        """
        Write a table without its index

        :param name: File name
        :type name: str
        :param frame: The table
        :type frame: :py:class:`pandas.DataFrame`
        :return: The written path
        :rtype: :py:class:`pathlib.Path`
        """
        target = self.path(name)
        try:
            frame.to_csv(
                target, index=False, float_format=mtfl.defaults.FLOAT_FORMAT
            )
        except OSError as exc:
            raise ConfigError(f"cannot write '{target}': {exc}") from exc
        logger.debug("wrote %s", target)
        return target

    def write_json(self, name: str, data: Mapping[str, Any]) -> Path:
        target = self.path(name)
        text = json.dumps(data, indent=2, sort_keys=True, default=_plain)
        try:
            target.write_text(text + '\n', encoding='utf-8')
        except OSError as exc:
            raise ConfigError(f"cannot write '{target}': {exc}") from exc
        logger.debug("wrote %s", target)
        return target

    def read_json(self, name: str) -> Dict[str, Any]:
        target = self.root / name
        try:
            return json.loads(target.read_text(encoding='utf-8'))
        except OSError as exc:
            raise DataError(f"cannot read '{target}': {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"'{target}' is not valid JSON: {exc}") from exc

    def write_trace(self, name: str, report: SolverReport) -> Path:
        """
        Write a solver trace as ``iteration, objective, step_size``
        """
        frame = pd.DataFrame({
            'iteration': np.arange(1, len(report.objective_trace) + 1),
            'objective': report.objective_trace,
            'step_size': report.step_sizes,
        })
        return self.write_csv(name, frame)

    def write_weights(
        self,
        name: str,
        weights: np.ndarray,
        features: List[str]
    ) -> Path:
        """
        Write a (features, tasks) weight matrix with one row per
        feature and columns ``task_1`` .. ``task_k``
        """
        frame = pd.DataFrame(
            weights,
            columns=[f"task_{t + 1}" for t in range(weights.shape[1])],
        )
        frame.insert(0, 'feature', features)
        return self.write_csv(name, frame)

    def write_experiment(
        self,
        features: List[str],
        sectors: List[str],
        reports: Mapping[str, EvalReport],
        extra: Mapping[str, Any] | None = None
    ) -> Path:
        """
        Write every model's repeated experiments, weights included,
        to ``experiment.json``
        """
        data = {
            'features': list(features),
            'sectors': list(sectors),
            'models': {
                name: report.as_dict() for name, report in reports.items()
            },
        }
        data.update(extra or {})
        return self.write_json(EXPERIMENT_FILE, data)

    def read_experiment(
        self
    ) -> tuple[List[str], List[str], Dict[str, EvalReport]]:
        """
        Read ``experiment.json`` back

        :return: Feature names, sector names and reports by model
        :rtype: tuple
        :raises DataError: if the file is missing or malformed
        """
        data = self.read_json(EXPERIMENT_FILE)
        try:
            reports = {
                name: EvalReport.from_dict(report)
                for name, report in data['models'].items()
            }
            return list(data['features']), list(data['sectors']), reports
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(
                f"'{self.root / EXPERIMENT_FILE}' is malformed: {exc}"
            ) from exc
