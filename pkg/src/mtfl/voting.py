"""
Two-stage temporal voting over trained weight matrices
"""
from __future__ import annotations

from functools import reduce
import logging
from typing import List, Sequence

import numpy as np

import mtfl.defaults
from mtfl.data.task_data import EvalReport, RunResult
from mtfl.data.vote_data import StabilityRanking, VoteTable, VotingResult
from mtfl.utils import check_count, rank_descending

logger = logging.getLogger(__name__)


def _check_eps(eps: float) -> float:
    if not eps > 0:
        raise ValueError("`eps` must be positive")
    return float(eps)


def _membership(w: np.ndarray, eps: float) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 2:
        raise ValueError("`w` must be a (features, tasks) matrix")
    return np.abs(w) > _check_eps(eps)


def task_vote(
    w: np.ndarray,
    eps: float = mtfl.defaults.VOTE_EPS
) -> tuple[VoteTable, List[int]]:
    """
    Stage one: every task votes for the features it uses,
    ``|W[i, t]| > eps``. Features are ranked by votes, then by
    summed absolute weight, then by index.

    :param w: Weights (d, k)
    :type w: :py:class:`numpy.ndarray`
    :param eps: Membership threshold
    :type eps: float
    :return: The single-poll vote table and the feature ranking
    :rtype: tuple[:py:class:`mtfl.data.vote_data.VoteTable`, list[int]]
    """
    member = _membership(w, eps)
    counts = member.sum(axis=1)
    table = VoteTable(
        counts=counts, n_polls=1, n_tasks=member.shape[1], level='task'
    )
    magnitude = np.abs(np.asarray(w, dtype=float)).sum(axis=1)
    return table, rank_descending(counts, magnitude)


def experiment_vote(
    w: np.ndarray,
    eps: float = mtfl.defaults.VOTE_EPS
) -> VoteTable:
    """
    Experiment-level vote: one vote per feature used by any task

    :rtype: :py:class:`mtfl.data.vote_data.VoteTable`
    """
    member = _membership(w, eps)
    return VoteTable(
        counts=member.any(axis=1), n_polls=1,
        n_tasks=member.shape[1], level='experiment'
    )


def _tie_notes(order: List[int], scores: np.ndarray) -> List[str]:
    notes = []
    start = 0
    for end in range(1, len(order) + 1):
        if end == len(order) or scores[order[end]] != scores[order[start]]:
            if end - start > 1:
                block = ', '.join(str(i) for i in order[start:end])
                notes.append(
                    f"features {block} tie at score "
                    + f"{scores[order[start]]:g}; ordered by index"
                )
            start = end
    return notes


def aggregate_ranking(rankings: Sequence[Sequence[int]]) -> StabilityRanking:
    """
    Stage two: Borda aggregation. A feature at 1-based position ``r``
    of a ``d``-feature ranking earns ``d - r`` points; features are
    ordered by total points, ties by index.

    :param rankings: Per-experiment rankings over the same features
    :type rankings: sequence of sequence of int
    :rtype: :py:class:`mtfl.data.vote_data.StabilityRanking`
    :raises ValueError: without rankings or on differing universes
    """
    if not rankings:
        raise ValueError("at least one ranking is required")
    d = len(rankings[0])
    universe = list(range(d))
    scores = np.zeros(d)
    for ranking in rankings:
        if sorted(ranking) != universe:
            raise ValueError("rankings cover different feature universes")
        scores[list(ranking)] += d - np.arange(1, d + 1)
    order = rank_descending(scores)
    return StabilityRanking(
        order=order, scores=scores, tie_notes=_tie_notes(order, scores)
    )


def select_best_model(
    ranking: StabilityRanking,
    runs: Sequence[RunResult],
    p: int = mtfl.defaults.TOP_P,
    eps: float = mtfl.defaults.VOTE_EPS
) -> int:
    """
    Find the run whose own top `p` features overlap the stable top
    `p` the most; the lowest test rMSE breaks ties, then the lowest
    run id.

    :param ranking: The stable ranking
    :type ranking: :py:class:`mtfl.data.vote_data.StabilityRanking`
    :param runs: Candidate runs
    :type runs: sequence of :py:class:`mtfl.data.task_data.RunResult`
    :param p: Size of the compared top sets
    :type p: int
    :return: The chosen run id
    :rtype: int
    :raises ValueError: on no runs or ``p`` above the feature count
    """
    p = check_count(p, 'p')
    if not runs:
        raise ValueError("`runs` must not be empty")
    if p > ranking.n_features:
        raise ValueError(
            f"`p`={p} exceeds the {ranking.n_features} ranked features"
        )
    stable = set(ranking.top(p))

    def key(run: RunResult):
        _, own = task_vote(run.weights, eps)
        return (-len(stable & set(own[:p])), run.test_rmse, run.run_id)

    return min(runs, key=key).run_id


def run_voting(
    report: EvalReport,
    eps: float = mtfl.defaults.VOTE_EPS,
    p: int = mtfl.defaults.TOP_P
) -> VotingResult:
    """
    Vote over every run of a model and match the best run back

    :param report: Repeated experiments of one model
    :type report: :py:class:`mtfl.data.task_data.EvalReport`
    :param eps: Membership threshold
    :type eps: float
    :param p: Top set size used to find the best run
    :type p: int
    :rtype: :py:class:`mtfl.data.vote_data.VotingResult`
    """
    if not report.runs:
        raise ValueError("the report holds no runs")
    votes = [task_vote(run.weights, eps) for run in report.runs]
    task_table = reduce(VoteTable.merge, (table for table, _ in votes))
    experiment_table = reduce(
        VoteTable.merge,
        (experiment_vote(run.weights, eps) for run in report.runs)
    )
    rankings = [ranking for _, ranking in votes]
    stability = aggregate_ranking(rankings)
    best = select_best_model(
        stability, report.runs, min(p, stability.n_features), eps
    )
    for note in stability.tie_notes:
        logger.debug("%s: %s", report.model, note)
    logger.info(
        "%s: stable top feature %d, best run %d",
        report.model, stability.order[0], best
    )
    return VotingResult(
        model=report.model,
        task_votes=task_table,
        experiment_votes=experiment_table,
        rankings=rankings,
        stability=stability,
        best_run=best,
    )
