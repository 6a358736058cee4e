"""
VoteTable and StabilityRanking Classes
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

LEVELS = ('task', 'experiment')


@dataclass(kw_only=True, repr=False)
class VoteTable:
    """
    Per-feature vote counts accumulated over polls

    :param counts: Votes of each feature
    :type counts: :py:class:`numpy.ndarray`
    :param n_polls: Number of experiments folded in
    :type n_polls: int
    :param n_tasks: Tasks per experiment; only bounds task-level
        counts
    :type n_tasks: int
    :param level: ``'task'`` or ``'experiment'``
    :type level: str
    """
    counts: np.ndarray
    n_polls: int
    n_tasks: int = 1
    level: str = 'task'

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.level not in LEVELS:
            raise ValueError(f"`level` must be one of {LEVELS}")
        if self.n_polls < 0:
            raise ValueError("`n_polls` must be non-negative")
        bound = self.n_polls * (self.n_tasks if self.level == 'task' else 1)
        if self.counts.size and (
            self.counts.min() < 0 or self.counts.max() > bound
        ):
            raise ValueError(f"vote counts must lie in [0, {bound}]")

    def __repr__(self):
        return (
            f"VoteTable({self.level}, features={self.counts.size}, "
            + f"polls={self.n_polls})"
        )

    @property
    def n_features(self) -> int:
        return self.counts.size

    @property
    def mean_counts(self) -> np.ndarray:
        """
        Get the counts averaged over polls, zeros when empty

        :type: :py:class:`numpy.ndarray`
        """
        if not self.n_polls:
            return np.zeros(self.n_features)
        return self.counts / self.n_polls

    @classmethod
    def empty(cls, n_features: int, n_tasks: int = 1, level: str = 'task'):
        return cls(
            counts=np.zeros(n_features, dtype=np.int64),
            n_polls=0,
            n_tasks=n_tasks,
            level=level,
        )

    def merge(self, other: VoteTable) -> VoteTable:
        """
        Fold two tables together. The fold is commutative and
        associative, so any accumulation order gives the same table.

        :param other: Table over the same features and level
        :type other: :py:class:`mtfl.data.vote_data.VoteTable`
        :rtype: :py:class:`mtfl.data.vote_data.VoteTable`
        :raises ValueError: on mismatched tables
        """
        if (
            other.n_features != self.n_features
            or other.level != self.level
            or other.n_tasks != self.n_tasks
        ):
            raise ValueError("cannot merge vote tables of different shape")
        return VoteTable(
            counts=self.counts + other.counts,
            n_polls=self.n_polls + other.n_polls,
            n_tasks=self.n_tasks,
            level=self.level,
        )


@dataclass(kw_only=True)
class StabilityRanking:
    """
    Feature order aggregated across experiments

    :param order: Feature indices, most important first
    :type order: list[int]
    :param scores: Aggregate score of each feature, indexed by feature
    :type scores: :py:class:`numpy.ndarray`
    :param tie_notes: One note per block of tied scores
    :type tie_notes: list[str]
    """
    order: List[int]
    scores: np.ndarray
    tie_notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        if sorted(self.order) != list(range(self.scores.size)):
            raise ValueError("`order` must be a permutation of the features")
        ordered = self.scores[self.order]
        if np.any(np.diff(ordered) > 0):
            raise ValueError("scores must be non-increasing along `order`")

    @property
    def n_features(self) -> int:
        return len(self.order)

    def top(self, p: int) -> List[int]:
        return list(self.order[:p])

    def rank_of(self, feature: int) -> int:
        """
        Get the 1-based rank of a feature

        :param feature: Feature index
        :type feature: int
        :rtype: int
        """
        return self.order.index(feature) + 1

    def as_dict(self) -> Dict[str, Any]:
        return {
            'order': list(self.order),
            'scores': self.scores.tolist(),
            'tie_notes': list(self.tie_notes),
        }


@dataclass(kw_only=True)
class VotingResult:
    """
    Both voting stages for one model

    :param task_votes: Task-level counts over all runs
    :type task_votes: :py:class:`mtfl.data.vote_data.VoteTable`
    :param experiment_votes: Experiment-level counts over all runs
    :type experiment_votes: :py:class:`mtfl.data.vote_data.VoteTable`
    :param rankings: Per-run feature order, in run order
    :type rankings: list[list[int]]
    :param stability: Aggregated ranking
    :type stability: :py:class:`mtfl.data.vote_data.StabilityRanking`
    :param best_run: Run matching the stable ranking best
    :type best_run: int
    """
    model: str
    task_votes: VoteTable
    experiment_votes: VoteTable
    rankings: List[List[int]]
    stability: StabilityRanking
    best_run: int

    def as_dict(self) -> Dict[str, Any]:
        return {
            'model': self.model,
            'task_counts': self.task_votes.counts.tolist(),
            'experiment_counts': self.experiment_votes.counts.tolist(),
            'n_polls': self.task_votes.n_polls,
            'stability': self.stability.as_dict(),
            'best_run': self.best_run,
        }
