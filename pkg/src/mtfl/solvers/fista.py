"""
Monotone accelerated proximal gradient (FISTA) engine
"""
from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np

from mtfl.data.penalty_data import SolverOptions, SolverReport

logger = logging.getLogger(__name__)

SmoothFn = Callable[[np.ndarray], float]
GradientFn = Callable[[np.ndarray], np.ndarray]
ProxFn = Callable[[np.ndarray, float], np.ndarray]
StopFn = Callable[[np.ndarray], bool]

# how often an explicit stopping test is evaluated
STOP_CHECK_EVERY = 10


def lipschitz_constant(
    x: np.ndarray,
    n_iter: int = 50,
    rel_tol: float = 1e-6
) -> float:
    """
    Lipschitz constant ``2 * sigma_max(X^T X)`` of the squared
    Frobenius loss gradient, estimated by power iteration

    :param x: Design matrix
    :type x: :py:class:`numpy.ndarray`
    :param n_iter: Maximum power iterations
    :type n_iter: int
    :param rel_tol: Relative change that ends the iteration early
    :type rel_tol: float
    :return: The estimated constant; backtracking in
        :py:func:`fista` corrects any underestimate
    :rtype: float
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[1]
    if d == 0 or not np.any(x):
        return 0.0
    vec = np.ones(d) / math.sqrt(d)
    estimate = 0.0
    for _ in range(n_iter):
        product = x.T @ (x @ vec)
        norm = float(np.linalg.norm(product))
        if norm == 0.0:
            # start vector orthogonal to the range; use a fixed basis
            vec = np.eye(d)[int(np.argmax(np.abs(x).sum(axis=0)))]
            continue
        vec = product / norm
        previous, estimate = estimate, norm
        if previous and abs(estimate - previous) <= rel_tol * estimate:
            break
    return 2.0 * estimate


def fista(
    smooth: SmoothFn,
    gradient: GradientFn,
    nonsmooth: SmoothFn,
    prox: ProxFn,
    w0: np.ndarray,
    lipschitz: float,
    options: SolverOptions,
    stop: StopFn | None = None
) -> tuple[np.ndarray, SolverReport]:
    """
    Minimize ``smooth(W) + nonsmooth(W)``.

    Each iteration takes a proximal gradient step from the
    extrapolated point, backtracking on the step size until the
    sufficient decrease condition holds. This is the monotone variant
    of FISTA: the iterate is the better of the candidate and the
    previous iterate, while the extrapolation keeps using the
    candidate and the momentum sequence is never reset. The recorded
    objective therefore never increases.

    :param smooth: Smooth part of the objective
    :type smooth: :py:class:`typing.Callable`
    :param gradient: Gradient of `smooth`
    :type gradient: :py:class:`typing.Callable`
    :param nonsmooth: Non-smooth part of the objective
    :type nonsmooth: :py:class:`typing.Callable`
    :param prox: ``prox(V, step)`` of ``step * nonsmooth``
    :type prox: :py:class:`typing.Callable`
    :param w0: Starting point
    :type w0: :py:class:`numpy.ndarray`
    :param lipschitz: Initial Lipschitz estimate of `gradient`
    :type lipschitz: float
    :param options: Tolerances and iteration limits
    :type options: :py:class:`mtfl.data.penalty_data.SolverOptions`
    :param stop: Optional convergence test on the current iterate;
        when given it replaces the relative objective change rule
    :type stop: :py:class:`typing.Callable` or None
    :return: The best iterate and the solver report
    :rtype: tuple[:py:class:`numpy.ndarray`,
        :py:class:`mtfl.data.penalty_data.SolverReport`]
    """
    report = SolverReport()
    x = np.array(w0, dtype=float, copy=True)
    f_x = smooth(x) + nonsmooth(x)
    y = x.copy()
    t = 1.0
    lip = max(float(lipschitz), 1e-12)
    for iteration in range(1, options.max_iter + 1):
        grad = gradient(y)
        f_y = smooth(y)
        while True:
            z = prox(y - grad / lip, 1.0 / lip)
            delta = z - y
            f_z = smooth(z)
            bound = (
                f_y + float(np.sum(grad * delta))
                + 0.5 * lip * float(np.sum(delta * delta))
            )
            if f_z <= bound + 1e-12 * max(1.0, abs(f_y)):
                break
            lip *= options.backtrack_factor
        obj_z = f_z + nonsmooth(z)
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        previous = x
        accepted = obj_z <= f_x
        if accepted:
            change = f_x - obj_z
            x, f_x = z, obj_z
        else:
            change = 0.0
        # a rejected candidate still steers the extrapolation
        y = x + (t / t_next) * (z - x) \
            + ((t - 1.0) / t_next) * (x - previous)
        t = t_next
        report.objective_trace.append(f_x)
        report.step_sizes.append(1.0 / lip)
        report.iterations = iteration
        step_norm = float(np.max(np.abs(delta))) if delta.size else 0.0
        if accepted and step_norm <= 1e-15 * (1.0 + float(np.max(np.abs(x)))):
            report.converged = True
            break
        if stop is not None:
            if iteration % STOP_CHECK_EVERY == 0 and stop(x):
                report.converged = True
                break
        elif accepted and change <= options.tol * max(abs(f_x), 1e-12):
            report.converged = True
            break
    if not report.converged:
        logger.debug(
            "fista stopped at max_iter=%d, objective %.6g",
            options.max_iter, f_x
        )
    # gradient mapping norm at the returned point
    mapped = prox(x - gradient(x) / lip, 1.0 / lip)
    report.kkt_residual = float(lip * np.max(np.abs(x - mapped))) \
        if x.size else 0.0
    return x, report
