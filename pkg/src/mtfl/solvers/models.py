"""
Ridge, lasso and fused sparse group lasso multi-task regression
"""
from __future__ import annotations

import logging

import numpy as np
import scipy.linalg

from mtfl.data.penalty_data import PenaltyConfig, SolverOptions, SolverReport
from mtfl.solvers.fista import fista, lipschitz_constant
from mtfl.solvers.penalties import (
    check_shapes,
    lasso_kkt_residual,
    loss_gradient,
    objective,
    penalty_value,
    ridge_kkt_residual,
    squared_loss,
)
from mtfl.solvers.prox import prox_fsgl, prox_l1

logger = logging.getLogger(__name__)


def _as_matrices(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    check_shapes(x, y)
    return x, y


def _start(w0: np.ndarray | None, shape) -> np.ndarray:
    if w0 is None:
        return np.zeros(shape)
    w0 = np.asarray(w0, dtype=float)
    if w0.shape != shape:
        raise ValueError(f"`w0` has shape {w0.shape}, expected {shape}")
    return w0.copy()


def fit_ridge(
    x: np.ndarray,
    y: np.ndarray,
    lambda1: float
) -> tuple[np.ndarray, SolverReport]:
    """
    Closed-form ridge fit solving ``(X^T X + lambda I) W = X^T Y``,
    the minimizer of ``||Y - XW||_F^2 + lambda ||W||_F^2``

    :param x: Design matrix (n, d)
    :type x: :py:class:`numpy.ndarray`
    :param y: Targets (n, k)
    :type y: :py:class:`numpy.ndarray`
    :param lambda1: Penalty strength, strictly positive
    :type lambda1: float
    :return: Weights (d, k) and report
    :rtype: tuple[:py:class:`numpy.ndarray`,
        :py:class:`mtfl.data.penalty_data.SolverReport`]
    :raises ValueError: if `lambda1` is not positive
    """
    if not lambda1 > 0:
        raise ValueError("`lambda1` must be positive for ridge")
    x, y = _as_matrices(x, y)
    gram = x.T @ x
    gram[np.diag_indices_from(gram)] += lambda1
    w = scipy.linalg.solve(gram, x.T @ y, assume_a='pos')
    penalty = PenaltyConfig(model='ridge', lambda1=lambda1)
    report = SolverReport(
        objective_trace=[objective(x, y, w, penalty)],
        step_sizes=[0.0],
        iterations=1,
        converged=True,
        kkt_residual=ridge_kkt_residual(x, y, w, lambda1),
    )
    return w, report


def _polish_lasso(
    x: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    lambda1: float
) -> np.ndarray:
    # re-solve each column on its support with the signs held fixed
    polished = w.copy()
    for col in range(w.shape[1]):
        support = np.flatnonzero(w[:, col])
        if support.size == 0 or support.size > x.shape[0]:
            continue
        signs = np.sign(w[support, col])
        xs = x[:, support]
        rhs = xs.T @ y[:, col] - 0.5 * lambda1 * signs
        try:
            solved = scipy.linalg.solve(xs.T @ xs, rhs, assume_a='sym')
        except (scipy.linalg.LinAlgError, ValueError):
            continue
        if not np.all(np.sign(solved) == signs):
            continue
        candidate = np.zeros(w.shape[0])
        candidate[support] = solved
        before = lasso_kkt_residual(
            x, y[:, [col]], w[:, [col]], lambda1
        )
        after = lasso_kkt_residual(
            x, y[:, [col]], candidate[:, None], lambda1
        )
        if after <= before:
            polished[:, col] = candidate
    return polished


def fit_lasso(
    x: np.ndarray,
    y: np.ndarray,
    lambda1: float,
    options: SolverOptions | None = None,
    w0: np.ndarray | None = None
) -> tuple[np.ndarray, SolverReport]:
    """
    Fit ``||Y - XW||_F^2 + lambda1 ||W||_1`` by FISTA with soft
    thresholding, stopping once the subgradient residual drops below
    ``options.kkt_tol``. The support found is then re-solved exactly.

    Non-convergence is reported through ``SolverReport.converged``;
    the best iterate is still returned.

    :param x: Design matrix (n, d)
    :type x: :py:class:`numpy.ndarray`
    :param y: Targets (n, k)
    :type y: :py:class:`numpy.ndarray`
    :param lambda1: L1 strength, non-negative
    :type lambda1: float
    :param options: Solver options
    :type options: :py:class:`mtfl.data.penalty_data.SolverOptions`
    :param w0: Warm start
    :type w0: :py:class:`numpy.ndarray` or None
    :rtype: tuple[:py:class:`numpy.ndarray`,
        :py:class:`mtfl.data.penalty_data.SolverReport`]
    """
    options = options or SolverOptions()
    x, y = _as_matrices(x, y)
    penalty = PenaltyConfig(model='lasso', lambda1=lambda1)
    w, report = fista(
        smooth=lambda w: squared_loss(x, y, w),
        gradient=lambda w: loss_gradient(x, y, w),
        nonsmooth=lambda w: penalty_value(w, penalty),
        prox=lambda v, step: prox_l1(v, step * lambda1),
        w0=_start(w0, (x.shape[1], y.shape[1])),
        lipschitz=lipschitz_constant(
            x, options.power_iter, options.power_tol
        ),
        options=options,
        stop=lambda w: (
            lasso_kkt_residual(x, y, w, lambda1) <= options.kkt_tol
        ),
    )
    w = _polish_lasso(x, y, w, lambda1)
    report.kkt_residual = lasso_kkt_residual(x, y, w, lambda1)
    report.converged = report.kkt_residual <= options.kkt_tol
    final = objective(x, y, w, penalty)
    if not report.objective_trace or final <= report.objective_trace[-1]:
        report.objective_trace.append(final)
        report.step_sizes.append(0.0)
    if not report.converged:
        logger.debug(
            "lasso kkt residual %.3g above tolerance %.3g",
            report.kkt_residual, options.kkt_tol
        )
    return w, report


def fit_fsgl(
    x: np.ndarray,
    y: np.ndarray,
    penalty: PenaltyConfig,
    options: SolverOptions | None = None,
    w0: np.ndarray | None = None
) -> tuple[np.ndarray, SolverReport]:
    """
    Fit the fused sparse group lasso
    ``||Y - XW||_F^2 + l1 ||W||_1 + l2 ||R W^T||_1 + l3 ||W||_2,1``
    by FISTA with the row-wise composite prox. Stops when the
    relative objective change falls below ``options.tol`` or at
    ``options.max_iter``.

    :param x: Design matrix (n, d)
    :type x: :py:class:`numpy.ndarray`
    :param y: Targets (n, k)
    :type y: :py:class:`numpy.ndarray`
    :param penalty: Strengths; read as fsgl regardless of its model
    :type penalty: :py:class:`mtfl.data.penalty_data.PenaltyConfig`
    :param options: Solver options
    :type options: :py:class:`mtfl.data.penalty_data.SolverOptions`
    :param w0: Warm start
    :type w0: :py:class:`numpy.ndarray` or None
    :rtype: tuple[:py:class:`numpy.ndarray`,
        :py:class:`mtfl.data.penalty_data.SolverReport`]
    """
    options = options or SolverOptions()
    x, y = _as_matrices(x, y)
    if penalty.model != 'fsgl':
        penalty = PenaltyConfig(model='fsgl', lambda1=penalty.lambda1)
    l1, l2, l3 = penalty.lambda1, penalty.lambda2, penalty.lambda3
    w, report = fista(
        smooth=lambda w: squared_loss(x, y, w),
        gradient=lambda w: loss_gradient(x, y, w),
        nonsmooth=lambda w: penalty_value(w, penalty),
        prox=lambda v, step: prox_fsgl(v, step * l1, step * l2, step * l3),
        w0=_start(w0, (x.shape[1], y.shape[1])),
        lipschitz=lipschitz_constant(
            x, options.power_iter, options.power_tol
        ),
        options=options,
    )
    if not report.converged:
        logger.debug(
            "fsgl did not converge in %d iterations", report.iterations
        )
    return w, report


def fit_model(
    penalty: PenaltyConfig,
    x: np.ndarray,
    y: np.ndarray,
    options: SolverOptions | None = None,
    w0: np.ndarray | None = None
) -> tuple[np.ndarray, SolverReport]:
    """
    Fit the model named by ``penalty.model``

    :param penalty: Model and strengths
    :type penalty: :py:class:`mtfl.data.penalty_data.PenaltyConfig`
    :param x: Design matrix (n, d)
    :type x: :py:class:`numpy.ndarray`
    :param y: Targets (n, k)
    :type y: :py:class:`numpy.ndarray`
    :param options: Solver options, ignored by ridge
    :type options: :py:class:`mtfl.data.penalty_data.SolverOptions`
    :param w0: Warm start, ignored by ridge
    :type w0: :py:class:`numpy.ndarray` or None
    :rtype: tuple[:py:class:`numpy.ndarray`,
        :py:class:`mtfl.data.penalty_data.SolverReport`]
    """
    if penalty.model == 'ridge':
        return fit_ridge(x, y, penalty.lambda1)
    if penalty.model == 'lasso':
        return fit_lasso(x, y, penalty.lambda1, options, w0)
    return fit_fsgl(x, y, penalty, options, w0)
