"""
TaskSpec, SplitPlan, RunResult and EvalReport Classes
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from mtfl.data.penalty_data import PenaltyConfig


@dataclass(kw_only=True, repr=False)
class TaskSpec:
    """
    Shared design matrix and grouped task targets.

    Tasks are split into contiguous groups of `group_size`; every
    column of a group holds the group's final-day CFR.

    :param x: Design matrix (n, d) shared by all tasks
    :type x: :py:class:`numpy.ndarray`
    :param y: Targets (n, k)
    :type y: :py:class:`numpy.ndarray`
    :param group_size: Tasks per group
    :type group_size: int
    :param features: Column labels of `x`
    :type features: list[str]
    :param synthetic: Rows that are only ever used for training
    :type synthetic: list[bool]
    """
    x: np.ndarray
    y: np.ndarray
    group_size: int
    features: List[str] = field(default_factory=list)
    synthetic: List[bool] = field(default_factory=list)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape[0] != self.y.shape[0]:
            raise ValueError("`x` and `y` have different numbers of rows")
        if self.group_size < 1 or self.n_tasks % self.group_size:
            raise ValueError(
                f"{self.n_tasks} tasks cannot form groups of {self.group_size}"
            )
        if not self.features:
            self.features = [f"x{j}" for j in range(self.n_features)]
        if not self.synthetic:
            self.synthetic = [False] * self.n_samples
        if len(self.synthetic) != self.n_samples:
            raise ValueError("`synthetic` needs one flag per row")

    def __repr__(self):
        return (
            f"TaskSpec(n={self.n_samples}, d={self.n_features}, "
            + f"k={self.n_tasks}, groups={self.n_groups})"
        )

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]

    @property
    def n_tasks(self) -> int:
        return self.y.shape[1]

    @property
    def n_groups(self) -> int:
        return self.n_tasks // self.group_size

    @property
    def groups(self) -> List[range]:
        """
        Get the task columns of each group

        :type: list[range]
        """
        return [
            range(g * self.group_size, (g + 1) * self.group_size)
            for g in range(self.n_groups)
        ]


@dataclass(frozen=True, kw_only=True)
class SplitPlan:
    train_rows: tuple
    test_rows: tuple
    seed: int

    def __post_init__(self):
        if set(self.train_rows) & set(self.test_rows):
            raise ValueError("train and test rows overlap")


@dataclass(kw_only=True, repr=False)
class RunResult:
    """
    Outcome of one train/test experiment

    :param run_id: Position of the run in its repeat sequence
    :type run_id: int
    :param seed: Seed of the split and folds
    :type seed: int
    :param penalty: Cross-validated penalty
    :type penalty: :py:class:`mtfl.data.penalty_data.PenaltyConfig`
    :param test_rmse: Multi-task rMSE on the test rows
    :type test_rmse: float
    :param per_phase: Test rMSE of each phase of the window
    :type per_phase: list[float]
    :param weights: Trained weights (d, k)
    :type weights: :py:class:`numpy.ndarray`
    :param converged: Whether the final fit converged
    :type converged: bool
    """
    run_id: int
    seed: int
    model: str
    penalty: PenaltyConfig
    test_rmse: float
    per_phase: List[float]
    weights: np.ndarray
    converged: bool = True
    iterations: int = 0
    test_rows: List[int] = field(default_factory=list)

    def __repr__(self):
        return (
            f"RunResult({self.model} #{self.run_id}, "
            + f"rmse={self.test_rmse:.4g})"
        )

    def as_dict(self, with_weights: bool = True) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            'run_id': self.run_id,
            'seed': self.seed,
            'model': self.model,
            'penalty': self.penalty.as_dict(),
            'test_rmse': self.test_rmse,
            'per_phase': list(self.per_phase),
            'converged': self.converged,
            'iterations': self.iterations,
            'test_rows': list(self.test_rows),
        }
        if with_weights:
            data['weights'] = self.weights.tolist()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> RunResult:
        return cls(
            run_id=int(data['run_id']),
            seed=int(data['seed']),
            model=data['model'],
            penalty=PenaltyConfig(**data['penalty']),
            test_rmse=float(data['test_rmse']),
            per_phase=[float(v) for v in data['per_phase']],
            weights=np.asarray(data['weights'], dtype=float),
            converged=bool(data.get('converged', True)),
            iterations=int(data.get('iterations', 0)),
            test_rows=[int(v) for v in data.get('test_rows', [])],
        )


@dataclass(kw_only=True, repr=False)
class EvalReport:
    """
    Summary of repeated experiments for one model

    :param rmse_mean: Mean test rMSE over runs
    :type rmse_mean: float
    :param rmse_std: Population standard deviation of test rMSE
    :type rmse_std: float
    :param per_phase: Mean test rMSE per phase
    :type per_phase: list[float]
    :param representative: Run whose weights represent the model
    :type representative: int
    """
    model: str
    rmse_mean: float
    rmse_std: float
    per_phase: List[float]
    representative: int
    runs: List[RunResult] = field(default_factory=list)

    def __repr__(self):
        return (
            f"EvalReport({self.model}, {self.rmse_mean:.4g} "
            + f"+/- {self.rmse_std:.4g}, runs={len(self.runs)})"
        )

    @property
    def weights(self) -> np.ndarray:
        return self.run(self.representative).weights

    @property
    def n_unconverged(self) -> int:
        return sum(not run.converged for run in self.runs)

    def run(self, run_id: int) -> RunResult:
        for run in self.runs:
            if run.run_id == run_id:
                return run
        raise KeyError(f"no run with id {run_id}")

    def as_dict(self, with_weights: bool = True) -> Dict[str, Any]:
        return {
            'model': self.model,
            'rmse_mean': self.rmse_mean,
            'rmse_std': self.rmse_std,
            'per_phase': list(self.per_phase),
            'representative': self.representative,
            'runs': [run.as_dict(with_weights) for run in self.runs],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> EvalReport:
        return cls(
            model=data['model'],
            rmse_mean=float(data['rmse_mean']),
            rmse_std=float(data['rmse_std']),
            per_phase=[float(v) for v in data['per_phase']],
            representative=int(data['representative']),
            runs=[RunResult.from_dict(run) for run in data['runs']],
        )
