"""
Objective values and optimality residuals for the three models.

The loss is ``||Y - XW||_F^2`` without a one-half factor, so the
smooth gradient is ``2 X^T (XW - Y)``.
"""
from __future__ import annotations

import numpy as np

from mtfl.data.penalty_data import PenaltyConfig


def check_shapes(x: np.ndarray, y: np.ndarray, w: np.ndarray | None = None):
    """
    Validate the shapes of a design, target and weight triple

    :raises ValueError: on any disagreement
    """
    if x.ndim != 2 or y.ndim != 2:
        raise ValueError("`x` and `y` must be matrices")
    if x.shape[0] != y.shape[0]:
        raise ValueError(
            f"`x` has {x.shape[0]} rows but `y` has {y.shape[0]}"
        )
    if w is not None and w.shape != (x.shape[1], y.shape[1]):
        raise ValueError(
            f"`w` has shape {w.shape}, expected "
            + f"{(x.shape[1], y.shape[1])}"
        )


def forward_difference(w: np.ndarray) -> np.ndarray:
    """
    Apply the (k-1) x k forward difference operator R to every
    feature row: column t of the result is ``w[:, t+1] - w[:, t]``,
    i.e. ``(R W^T)^T``

    :param w: Weight matrix of shape (features, tasks)
    :type w: :py:class:`numpy.ndarray`
    :rtype: :py:class:`numpy.ndarray`
    """
    return np.diff(w, axis=1)


def fused_penalty(w: np.ndarray) -> float:
    return float(np.abs(forward_difference(w)).sum())


def l21_norm(w: np.ndarray) -> float:
    return float(np.linalg.norm(w, axis=1).sum())


def squared_loss(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    residual = y - x @ w
    return float(np.sum(residual * residual))


def loss_gradient(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    return 2.0 * (x.T @ (x @ w - y))


def penalty_value(w: np.ndarray, penalty: PenaltyConfig) -> float:
    """
    Value of the non-loss term of the configured model

    :param w: Weight matrix
    :type w: :py:class:`numpy.ndarray`
    :param penalty: Model and strengths
    :type penalty: :py:class:`mtfl.data.penalty_data.PenaltyConfig`
    :rtype: float
    """
    if penalty.model == 'ridge':
        return penalty.lambda1 * float(np.sum(w * w))
    value = penalty.lambda1 * float(np.abs(w).sum())
    if penalty.model == 'fsgl':
        if penalty.lambda2:
            value += penalty.lambda2 * fused_penalty(w)
        if penalty.lambda3:
            value += penalty.lambda3 * l21_norm(w)
    return value


def fsgl_objective(
    x: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    penalty: PenaltyConfig
) -> float:
    """
    ``||Y - XW||_F^2 + l1 ||W||_1 + l2 ||R W^T||_1 + l3 ||W||_2,1``

    :param x: Design matrix (n, d)
    :type x: :py:class:`numpy.ndarray`
    :param y: Targets (n, k)
    :type y: :py:class:`numpy.ndarray`
    :param w: Weights (d, k)
    :type w: :py:class:`numpy.ndarray`
    :param penalty: Penalty strengths; the model field is ignored
    :type penalty: :py:class:`mtfl.data.penalty_data.PenaltyConfig`
    :return: The objective value
    :rtype: float
    :raises ValueError: on shape mismatch
    """
    x, y, w = np.asarray(x, float), np.asarray(y, float), np.asarray(w, float)
    check_shapes(x, y, w)
    return (
        squared_loss(x, y, w)
        + penalty.lambda1 * float(np.abs(w).sum())
        + penalty.lambda2 * fused_penalty(w)
        + penalty.lambda3 * l21_norm(w)
    )


def objective(
    x: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    penalty: PenaltyConfig
) -> float:
    """
    Objective of whichever model `penalty` names
    """
    check_shapes(x, y, w)
    return squared_loss(x, y, w) + penalty_value(w, penalty)


def lasso_kkt_residual(
    x: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    lambda1: float
) -> float:
    """
    Largest violation of the lasso subgradient conditions: for a
    zero weight ``|g| <= lambda1``, otherwise ``g + lambda1 sign(w) = 0``
    where ``g = 2 X^T (XW - Y)``
    """
    grad = loss_gradient(x, y, w)
    active = w != 0
    residual = np.where(
        active,
        np.abs(grad + lambda1 * np.sign(w)),
        np.maximum(np.abs(grad) - lambda1, 0.0)
    )
    return float(residual.max()) if residual.size else 0.0


def ridge_kkt_residual(
    x: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    lambda1: float
) -> float:
    grad = loss_gradient(x, y, w) + 2.0 * lambda1 * w
    return float(np.abs(grad).max()) if grad.size else 0.0
