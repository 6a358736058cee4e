"""
Grouped temporal tasks, cross-validated penalty selection and
repeated train/test experiments scored with the length-weighted
multi-task rMSE
"""
from __future__ import annotations

import itertools
import logging
from typing import List, Sequence

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import KFold, train_test_split

import mtfl.defaults
from mtfl.data.penalty_data import (
    MODEL_NAMES,
    PenaltyConfig,
    SolverOptions,
    SolverReport,
)
from mtfl.data.selection_data import ScaledMatrix
from mtfl.data.task_data import EvalReport, RunResult, SplitPlan, TaskSpec
from mtfl.featureprep import standard_scale
from mtfl.solvers import fit_model
from mtfl.utils import check_count, worker_count

logger = logging.getLogger(__name__)


def build_tasks(
    x: np.ndarray,
    y_daily: np.ndarray,
    group_size: int = mtfl.defaults.GROUP_SIZE,
    features: Sequence[str] | None = None,
    synthetic: Sequence[bool] | None = None
) -> TaskSpec:
    """
    Couple the daily targets into groups: every task of group ``g``
    learns the CFR of the group's last day, ``(g + 1) * group_size``

    :param x: Design matrix (n, d)
    :type x: :py:class:`numpy.ndarray`
    :param y_daily: Daily CFR (n, window)
    :type y_daily: :py:class:`numpy.ndarray`
    :param group_size: Tasks per group
    :type group_size: int
    :param features: Column labels of `x`
    :type features: sequence of str or None
    :param synthetic: Rows kept out of every test split
    :type synthetic: sequence of bool or None
    :rtype: :py:class:`mtfl.data.task_data.TaskSpec`
    :raises ValueError: if the window is not divisible by `group_size`
    """
    group_size = check_count(group_size, 'group_size')
    y_daily = np.asarray(y_daily, dtype=float)
    if y_daily.ndim != 2:
        raise ValueError("`y_daily` must be a matrix")
    window = y_daily.shape[1]
    if window == 0 or window % group_size:
        raise ValueError(
            f"window {window} is not divisible by group size {group_size}"
        )
    ends = np.arange(group_size - 1, window, group_size)
    y = np.repeat(y_daily[:, ends], group_size, axis=1)
    return TaskSpec(
        x=x, y=y, group_size=group_size, features=list(features or []),
        synthetic=list(synthetic or []),
    )


def _task_vectors(y_true, y_pred, task_lengths):
    if task_lengths is not None:
        lengths = [int(n) for n in task_lengths]
        if any(n <= 0 for n in lengths):
            raise ValueError("every task needs at least one sample")
        flat_true = np.asarray(y_true, dtype=float).ravel()
        flat_pred = np.asarray(y_pred, dtype=float).ravel()
        if flat_true.size != sum(lengths) or flat_pred.size != sum(lengths):
            raise ValueError("`task_lengths` do not match the samples given")
        cuts = np.cumsum(lengths)[:-1]
        return np.split(flat_true, cuts), np.split(flat_pred, cuts)
    if isinstance(y_true, np.ndarray) and y_true.ndim == 2:
        y_pred = np.asarray(y_pred, dtype=float)
        if y_pred.shape != y_true.shape:
            raise ValueError("`y_true` and `y_pred` have different shapes")
        return list(y_true.astype(float).T), list(y_pred.T)
    true = [np.asarray(t, dtype=float).ravel() for t in y_true]
    pred = [np.asarray(p, dtype=float).ravel() for p in y_pred]
    if len(true) != len(pred) or any(
        t.size != p.size for t, p in zip(true, pred)
    ):
        raise ValueError("`y_true` and `y_pred` have different shapes")
    return true, pred


def rmse_multitask(
    y_true: np.ndarray | Sequence[np.ndarray],
    y_pred: np.ndarray | Sequence[np.ndarray],
    task_lengths: Sequence[int] | None = None
) -> float:
    """
    Length-weighted mean of per-task RMSE,
    ``sum_t n_t sqrt(SSE_t / n_t) / sum_t n_t``.

    Tasks are the columns of 2-D inputs, the items of sequence
    inputs, or consecutive runs of flat inputs split by
    `task_lengths`.

    :param y_true: Observed targets
    :type y_true: :py:class:`numpy.ndarray` or sequence
    :param y_pred: Predicted targets, same layout
    :type y_pred: :py:class:`numpy.ndarray` or sequence
    :param task_lengths: Samples per task for flat inputs
    :type task_lengths: sequence of int or None
    :rtype: float
    :raises ValueError: on a task without samples or mismatched shapes
    """
    true, pred = _task_vectors(y_true, y_pred, task_lengths)
    if not true:
        raise ValueError("at least one task is required")
    weighted = 0.0
    total = 0
    for t, p in zip(true, pred):
        if t.size == 0:
            raise ValueError("every task needs at least one sample")
        weighted += t.size * np.sqrt(np.sum((p - t) ** 2) / t.size)
        total += t.size
    return float(weighted / total)


def phase_rmse(
    y_true: np.ndarray,
    y_pred: np.ndarray,
    phases: int = mtfl.defaults.N_PHASES
) -> List[float]:
    """
    Multi-task rMSE over consecutive column ranges, e.g. days 1-14,
    15-28 and 29-42 of a 42-day window

    :rtype: list[float]
    """
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    check_count(phases, 'phases')
    if phases > y_true.shape[1]:
        raise ValueError("more phases than task columns")
    return [
        rmse_multitask(y_true[:, cols], y_pred[:, cols])
        for cols in np.array_split(np.arange(y_true.shape[1]), phases)
    ]


def default_grid(
    model: str,
    points: int = mtfl.defaults.GRID_POINTS,
    low: float = mtfl.defaults.GRID_LOW,
    high: float = mtfl.defaults.GRID_HIGH
) -> List[PenaltyConfig]:
    """
    Log-spaced penalty grid. Fsgl varies its three strengths
    independently over the same axis (``points ** 3`` combinations).

    :param model: Model name
    :type model: str
    :param points: Values per strength
    :type points: int
    :param low: Smallest strength
    :type low: float
    :param high: Largest strength
    :type high: float
    :rtype: list[:py:class:`mtfl.data.penalty_data.PenaltyConfig`]
    """
    if model not in MODEL_NAMES:
        raise ValueError(f"unknown model '{model}'")
    check_count(points, 'points')
    if not 0 < low <= high:
        raise ValueError("grid bounds must satisfy 0 < `low` <= `high`")
    spaced = np.logspace(np.log10(low), np.log10(high), points)
    axis = [float(v) for v in spaced]
    if model != 'fsgl':
        return [PenaltyConfig(model=model, lambda1=v) for v in axis]
    return [
        PenaltyConfig(model=model, lambda1=a, lambda2=b, lambda3=c)
        for a, b, c in itertools.product(axis, repeat=3)
    ]


def grid_from_points(model: str, points: Sequence[Sequence[float]]):
    """
    Build a grid from explicit ``[lambda1]`` or
    ``[lambda1, lambda2, lambda3]`` points

    :rtype: list[:py:class:`mtfl.data.penalty_data.PenaltyConfig`]
    """
    grid = []
    for point in points:
        names = ('lambda1', 'lambda2', 'lambda3')[:len(point)]
        grid.append(PenaltyConfig(
            model=model, **{n: float(v) for n, v in zip(names, point)}
        ))
    if not grid:
        raise ValueError(f"empty grid for model '{model}'")
    return grid


def descending_order(grid: Sequence[PenaltyConfig]) -> List[PenaltyConfig]:
    # stable, so equal totals keep their grid order
    return sorted(grid, key=lambda p: -p.total)


def split_rows(
    n: int,
    seed: int,
    test_fraction: float = mtfl.defaults.TEST_FRACTION
) -> SplitPlan:
    """
    Seeded random train/test split of ``n`` rows

    :rtype: :py:class:`mtfl.data.task_data.SplitPlan`
    """
    check_count(n, 'n', minimum=2)
    train, test = train_test_split(
        np.arange(n), test_size=test_fraction, random_state=seed,
        shuffle=True
    )
    return SplitPlan(
        train_rows=tuple(sorted(int(i) for i in train)),
        test_rows=tuple(sorted(int(i) for i in test)),
        seed=seed,
    )


def predict(
    x: np.ndarray,
    w: np.ndarray,
    intercept: np.ndarray | None = None
) -> np.ndarray:
    out = np.asarray(x, dtype=float) @ np.asarray(w, dtype=float)
    if intercept is not None:
        out = out + np.asarray(intercept, dtype=float)
    return out


def fit_task(
    task: TaskSpec,
    penalty: PenaltyConfig,
    rows: Sequence[int] | None = None,
    options: SolverOptions | None = None,
    w0: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray, ScaledMatrix, SolverReport]:
    """
    Fit on `rows` after standardizing X and centring Y with the
    statistics of those rows. The centring means act as an
    unpenalized intercept.

    :param task: Tasks to fit
    :type task: :py:class:`mtfl.data.task_data.TaskSpec`
    :param penalty: Model and strengths
    :type penalty: :py:class:`mtfl.data.penalty_data.PenaltyConfig`
    :param rows: Training rows; all rows when omitted
    :type rows: sequence of int or None
    :param options: Solver options
    :type options: :py:class:`mtfl.data.penalty_data.SolverOptions`
    :param w0: Warm start
    :type w0: :py:class:`numpy.ndarray` or None
    :return: Weights, intercept, the scaled X of all rows and the
        solver report
    :rtype: tuple
    """
    rows = np.arange(task.n_samples) if rows is None \
        else np.asarray(rows, dtype=int)
    scaled = standard_scale(task.x, fit_rows=rows)
    intercept = task.y[rows].mean(axis=0)
    w, report = fit_model(
        penalty, scaled.values[rows], task.y[rows] - intercept, options, w0
    )
    return w, intercept, scaled, report


def fold_indices(n: int, folds: int, seed: int) -> List[tuple]:
    """
    Shuffled K-fold partition; depends only on `n`, `folds` and `seed`

    :return: ``(train, validation)`` index arrays per fold
    :rtype: list[tuple]
    :raises ValueError: if ``n < folds``
    """
    check_count(folds, 'folds', minimum=2)
    if n < folds:
        raise ValueError(f"{n} samples cannot form {folds} folds")
    splitter = KFold(n_splits=folds, shuffle=True, random_state=seed)
    return list(splitter.split(np.arange(n)))


def validation_folds(
    task: TaskSpec,
    folds: int = mtfl.defaults.CV_FOLDS,
    seed: int = mtfl.defaults.SEED
) -> List[tuple]:
    """
    K-fold partition of the real rows of `task`. Synthetic rows are
    never validated on; every fold trains on all of them.

    :return: ``(train, validation)`` row lists per fold
    :rtype: list[tuple]
    :raises ValueError: with fewer real rows than folds
    """
    real = np.array(
        [i for i, flag in enumerate(task.synthetic) if not flag], dtype=int
    )
    synthetic = [i for i, flag in enumerate(task.synthetic) if flag]
    return [
        (sorted(real[train].tolist() + synthetic), real[valid].tolist())
        for train, valid in fold_indices(real.size, folds, seed)
    ]


def cross_validate(
    task: TaskSpec,
    grid: Sequence[PenaltyConfig],
    folds: int = mtfl.defaults.CV_FOLDS,
    seed: int = mtfl.defaults.SEED,
    options: SolverOptions | None = None
) -> PenaltyConfig:
    """
    Pick the grid point with the lowest mean validation rMSE over
    `folds` shuffled folds of the real rows. Each fold walks the grid
    from the largest total penalty down, warm starting from the
    previous solution.
    Ties go to the larger total penalty.

    :param task: Training tasks
    :type task: :py:class:`mtfl.data.task_data.TaskSpec`
    :param grid: Candidate penalties of one model
    :type grid: sequence of
        :py:class:`mtfl.data.penalty_data.PenaltyConfig`
    :param folds: Number of folds
    :type folds: int
    :param seed: Seed of the fold shuffle
    :type seed: int
    :rtype: :py:class:`mtfl.data.penalty_data.PenaltyConfig`
    :raises ValueError: on an empty grid or too few samples
    """
    if not grid:
        raise ValueError("`grid` must not be empty")
    ordered = descending_order(grid)
    if len(ordered) == 1:
        return ordered[0]
    partition = validation_folds(task, folds, seed)
    scores = np.zeros(len(ordered))
    for train, valid in partition:
        w = None
        for i, penalty in enumerate(ordered):
            w, intercept, scaled, _ = fit_task(
                task, penalty, train, options, w
            )
            pred = predict(scaled.values[valid], w, intercept)
            scores[i] += rmse_multitask(task.y[valid], pred)
    scores /= len(partition)
    best = 0
    for i in range(1, len(ordered)):
        if scores[i] < scores[best] - 1e-12 * max(1.0, abs(scores[best])):
            best = i
    logger.debug(
        "cv picked %s with mean rmse %.6g", ordered[best], scores[best]
    )
    return ordered[best]


def _subtask(task: TaskSpec, rows: Sequence[int]) -> TaskSpec:
    rows = list(rows)
    return TaskSpec(
        x=task.x[rows], y=task.y[rows],
        group_size=task.group_size, features=list(task.features),
        synthetic=[task.synthetic[i] for i in rows],
    )


def run_experiment(
    task: TaskSpec,
    grid: Sequence[PenaltyConfig],
    seed: int,
    run_id: int = 0,
    folds: int = mtfl.defaults.CV_FOLDS,
    test_fraction: float = mtfl.defaults.TEST_FRACTION,
    phases: int = mtfl.defaults.N_PHASES,
    options: SolverOptions | None = None
) -> RunResult:
    """
    One experiment: seeded split of the real rows, cross-validation
    on the training rows, refit on all training rows and scoring on
    the test rows. Synthetic rows always train. Solver
    non-convergence is recorded on the result.

    :param task: All tasks
    :type task: :py:class:`mtfl.data.task_data.TaskSpec`
    :param grid: Candidate penalties of one model
    :type grid: sequence of
        :py:class:`mtfl.data.penalty_data.PenaltyConfig`
    :param seed: Seed of the split and the folds
    :type seed: int
    :param run_id: Identifier stored on the result
    :type run_id: int
    :rtype: :py:class:`mtfl.data.task_data.RunResult`
    """
    real = [i for i, flag in enumerate(task.synthetic) if not flag]
    plan = split_rows(len(real), seed, test_fraction)
    test = [real[i] for i in plan.test_rows]
    train = sorted(set(range(task.n_samples)) - set(test))
    penalty = cross_validate(_subtask(task, train), grid, folds, seed, options)
    w, intercept, scaled, report = fit_task(task, penalty, train, options)
    pred = predict(scaled.values[test], w, intercept)
    if not report.converged:
        logger.warning(
            "run %d (%s) did not converge after %d iterations",
            run_id, penalty.model, report.iterations
        )
    return RunResult(
        run_id=run_id,
        seed=seed,
        model=penalty.model,
        penalty=penalty,
        test_rmse=rmse_multitask(task.y[test], pred),
        per_phase=phase_rmse(task.y[test], pred, phases),
        weights=w,
        converged=report.converged,
        iterations=report.iterations,
        test_rows=test,
    )


def summarize(model: str, runs: Sequence[RunResult]) -> EvalReport:
    """
    Mean and population standard deviation of test rMSE over runs.
    The lowest-rMSE run (lowest id on ties) represents the model
    until voting picks one.

    :rtype: :py:class:`mtfl.data.task_data.EvalReport`
    """
    if not runs:
        raise ValueError("`runs` must not be empty")
    rmse = np.array([run.test_rmse for run in runs])
    representative = min(runs, key=lambda r: (r.test_rmse, r.run_id))
    return EvalReport(
        model=model,
        rmse_mean=float(np.mean(rmse)),
        rmse_std=float(np.std(rmse)),
        per_phase=[
            float(v) for v in np.mean([run.per_phase for run in runs], axis=0)
        ],
        representative=representative.run_id,
        runs=list(runs),
    )


def repeat_experiments(
    task: TaskSpec,
    grid: Sequence[PenaltyConfig],
    n_runs: int = mtfl.defaults.N_RUNS,
    base_seed: int = mtfl.defaults.SEED,
    folds: int = mtfl.defaults.CV_FOLDS,
    test_fraction: float = mtfl.defaults.TEST_FRACTION,
    options: SolverOptions | None = None,
    n_jobs: int | None = None
) -> EvalReport:
    """
    Run `n_runs` experiments with seeds ``base_seed + i``. Runs are
    independent and collected in run order, so the report does not
    depend on the number of workers.

    :param n_jobs: Requested workers, capped by ``MTFL_THREADS``
    :type n_jobs: int or None
    :rtype: :py:class:`mtfl.data.task_data.EvalReport`
    """
    n_runs = check_count(n_runs, 'n_runs')
    if not grid:
        raise ValueError("`grid` must not be empty")
    model = grid[0].model
    workers = worker_count(n_jobs)
    logger.info(
        "running %d %s experiment(s) on %d worker(s)", n_runs, model, workers
    )
    runs = Parallel(n_jobs=workers)(
        delayed(run_experiment)(
            task, grid, base_seed + i, i, folds, test_fraction,
            mtfl.defaults.N_PHASES, options
        )
        for i in range(n_runs)
    )
    report = summarize(model, runs)
    if report.n_unconverged:
        logger.warning(
            "%s: %d of %d run(s) did not converge",
            model, report.n_unconverged, n_runs
        )
    return report
