"""
Proximal operators for the elementwise, fused and group penalties.

Every operator returns ``argmin_u 0.5 * ||u - v||^2 + penalty(u)``
exactly. The fused sparse group operator composes the three in the
order fused -> L1 -> group L2, which is exact for this penalty family.
"""
from __future__ import annotations

from typing import List

import numpy as np


def _check_tau(tau: float, name: str) -> float:
    if not isinstance(tau, (int, float, np.floating)):
        raise TypeError(f"`{name}` must be of type `int` or `float`")
    if tau < 0:
        raise ValueError(f"`{name}` must be non-negative")
    return float(tau)


def prox_l1(v: np.ndarray, tau: float) -> np.ndarray:
    """
    Soft thresholding, the prox of ``tau * ||u||_1``

    :param v: Input array of any shape
    :type v: :py:class:`numpy.ndarray`
    :param tau: Threshold
    :type tau: float
    :return: ``sign(v) * max(|v| - tau, 0)``
    :rtype: :py:class:`numpy.ndarray`
    """
    tau = _check_tau(tau, 'tau')
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def _tv1d(values: List[float], lam: float) -> List[float]:
    # direct algorithm for 1D total variation denoising; the taut
    # string is tracked through the dual bounds umin/umax
    width = len(values)
    out = [0.0] * width
    k = k0 = kplus = kminus = 0
    umin, umax = lam, -lam
    vmin, vmax = values[0] - lam, values[0] + lam
    twolam = 2.0 * lam
    while True:
        while k == width - 1:
            if umin < 0.0:
                # negative jump at the right boundary
                while True:
                    out[k0] = vmin
                    k0 += 1
                    if k0 > kminus:
                        break
                k = kminus = k0
                vmin = values[k]
                umin = lam
                umax = vmin + umin - vmax
            elif umax > 0.0:
                # positive jump at the right boundary
                while True:
                    out[k0] = vmax
                    k0 += 1
                    if k0 > kplus:
                        break
                k = kplus = k0
                vmax = values[k]
                umax = -lam
                umin = vmax + umax - vmin
            else:
                vmin += umin / (k - k0 + 1)
                while k0 <= k:
                    out[k0] = vmin
                    k0 += 1
                return out
        umin += values[k + 1] - vmin
        if umin < -lam:
            while True:
                out[k0] = vmin
                k0 += 1
                if k0 > kminus:
                    break
            k = kplus = kminus = k0
            vmin = values[k]
            vmax = vmin + twolam
            umin, umax = lam, -lam
            continue
        umax += values[k + 1] - vmax
        if umax > lam:
            while True:
                out[k0] = vmax
                k0 += 1
                if k0 > kplus:
                    break
            k = kplus = kminus = k0
            vmax = values[k]
            vmin = vmax - twolam
            umin, umax = lam, -lam
            continue
        k += 1
        if umin >= lam:
            kminus = k
            vmin += (umin - lam) / (kminus - k0 + 1)
            umin = lam
        if umax <= -lam:
            kplus = k
            vmax += (umax + lam) / (kplus - k0 + 1)
            umax = -lam


def prox_flsa(v: np.ndarray, tau2: float) -> np.ndarray:
    """
    Prox of the 1D total variation ``tau2 * sum_t |u[t+1] - u[t]|``
    (fused lasso signal approximator)

    :param v: Input vector of length k >= 1
    :type v: :py:class:`numpy.ndarray`
    :param tau2: Fusion strength
    :type tau2: float
    :return: The exact minimizer
    :rtype: :py:class:`numpy.ndarray`
    """
    tau2 = _check_tau(tau2, 'tau2')
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("`v` must be a vector")
    if v.size == 0:
        raise ValueError("`v` must have at least one entry")
    if tau2 == 0.0 or v.size == 1:
        return v.copy()
    return np.asarray(_tv1d(v.tolist(), tau2))


def prox_group_l2(v: np.ndarray, tau3: float) -> np.ndarray:
    """
    Block soft thresholding, the prox of ``tau3 * ||u||_2``

    :param v: Input vector
    :type v: :py:class:`numpy.ndarray`
    :param tau3: Threshold on the Euclidean norm
    :type tau3: float
    :return: ``max(1 - tau3 / ||v||, 0) * v``
    :rtype: :py:class:`numpy.ndarray`
    """
    tau3 = _check_tau(tau3, 'tau3')
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm <= tau3:
        return np.zeros_like(v)
    return (1.0 - tau3 / norm) * v


def prox_fsgl_row(
    v: np.ndarray,
    tau1: float,
    tau2: float,
    tau3: float
) -> np.ndarray:
    """
    Prox of ``tau1 ||u||_1 + tau2 TV(u) + tau3 ||u||_2`` for one
    feature row

    :param v: Row of task weights
    :type v: :py:class:`numpy.ndarray`
    :param tau1: Elementwise threshold
    :type tau1: float
    :param tau2: Fusion strength
    :type tau2: float
    :param tau3: Group threshold
    :type tau3: float
    :rtype: :py:class:`numpy.ndarray`
    """
    return prox_group_l2(prox_l1(prox_flsa(v, tau2), tau1), tau3)


def prox_fsgl(
    w: np.ndarray,
    tau1: float,
    tau2: float,
    tau3: float
) -> np.ndarray:
    """
    Apply :py:func:`prox_fsgl_row` to every row of a weight matrix.
    Rows are independent, so the result does not depend on the
    order they are processed in.

    :param w: Weight matrix of shape (features, tasks)
    :type w: :py:class:`numpy.ndarray`
    :rtype: :py:class:`numpy.ndarray`
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2:
        raise ValueError("`w` must be a matrix")
    tau1 = _check_tau(tau1, 'tau1')
    tau2 = _check_tau(tau2, 'tau2')
    tau3 = _check_tau(tau3, 'tau3')
    if tau2 > 0.0 and w.shape[1] > 1:
        fused = np.vstack([_tv1d(row, tau2) for row in w.tolist()])
    else:
        fused = w.copy()
    out = np.sign(fused) * np.maximum(np.abs(fused) - tau1, 0.0)
    if tau3 > 0.0:
        norms = np.linalg.norm(out, axis=1, keepdims=True)
        with np.errstate(divide='ignore', invalid='ignore'):
            shrink = np.where(
                norms > tau3, 1.0 - tau3 / np.where(norms > 0, norms, 1.0), 0.0
            )
        out = out * shrink
    return out
