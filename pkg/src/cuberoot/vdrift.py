"""Numerical-derivative drift estimator, its step rule, and PSD repair."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bootstrap import DriftMatrix
from .core import ContractError, Criterion, Sample, empirical_objective

STEP_RATE = -1.0 / 7.0


@dataclass(frozen=True)
class NDConfig:
    epsilon: float
    c_rot: float = 1.0
    eigen_floor: float | None = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ContractError("epsilon must be positive")
        if self.eigen_floor is not None and self.eigen_floor <= 0:
            raise ContractError("eigen_floor must be positive")


def epsilon_rule(n: int, c_rot: float = 1.0) -> float:
    """Step ``c_rot * n**(-1/7)``."""
    if n < 2 or c_rot <= 0:
        raise ContractError("epsilon_rule needs n >= 2 and c_rot > 0")
    return c_rot * float(n) ** STEP_RATE


def numerical_hessian(objective: Callable[[np.ndarray], float], theta_hat, epsilon: float,
                      box=None) -> DriftMatrix:
    """Minus the central second difference of ``objective`` at ``theta_hat``.

    Entry ``(k, l)`` is
    ``-[f(+e_k+e_l) - f(+e_k-e_l) - f(-e_k+e_l) + f(-e_k-e_l)] / (4 eps^2)``
    with all offsets scaled by ``epsilon``; the result is symmetrized.
    Probes must stay inside ``box`` when one is given.
    """
    if epsilon <= 0:
        raise ContractError("epsilon must be positive")
    th = np.atleast_1d(np.asarray(theta_hat, dtype=np.float64))
    d = th.shape[0]
    if box is not None:
        box = np.asarray(box, dtype=np.float64).reshape(d, 2)
        for k in range(d):
            if th[k] - 2 * epsilon < box[k, 0] or th[k] + 2 * epsilon > box[k, 1]:
                raise ContractError(f"numerical_hessian probe leaves the box in coordinate {k}")

    cache: dict[tuple, float] = {}

    def f(offset):
        key = tuple(offset)
        if key not in cache:
            val = float(objective(th + epsilon * np.asarray(offset, dtype=np.float64)))
            if not np.isfinite(val):
                raise ContractError(f"objective is not finite at probe offset {key} * epsilon")
            cache[key] = val
        return cache[key]

    V = np.empty((d, d))
    eye = np.eye(d, dtype=np.int64)
    for k in range(d):
        for l in range(k, d):
            ek, el = eye[k], eye[l]
            num = f(ek + el) - f(ek - el) - f(-ek + el) + f(-ek - el)
            V[k, l] = V[l, k] = -num / (4.0 * epsilon * epsilon)
    return DriftMatrix(0.5 * (V + V.T))


def nd_drift(criterion: Criterion, sample: Sample, theta_hat, epsilon: float) -> DriftMatrix:
    """Numerical-derivative drift estimate from the empirical objective."""
    return numerical_hessian(lambda t: empirical_objective(criterion, sample, t),
                             theta_hat, epsilon, criterion.box)


def default_eigen_floor(V: DriftMatrix) -> float:
    """``1e-8 * (1 + mean |diagonal|)``."""
    return 1e-8 * (1.0 + float(np.mean(np.abs(np.diag(V.V)))))


def psd_repair(V: DriftMatrix, eigen_floor: float | None = None) -> DriftMatrix:
    """Clamp eigenvalues below ``eigen_floor`` up to it.

    Matrices whose smallest eigenvalue already reaches the floor are
    returned unchanged.
    """
    floor = default_eigen_floor(V) if eigen_floor is None else float(eigen_floor)
    if floor <= 0:
        raise ContractError("eigen_floor must be positive")
    w, Q = np.linalg.eigh(V.V)
    # eigensolver round-off must not trigger a second repair
    if w.min() >= floor - 1e-12 * max(1.0, float(np.abs(w).max())):
        return V
    w = np.maximum(w, floor)
    R = (Q * w) @ Q.T
    return DriftMatrix(0.5 * (R + R.T), repaired=True)
