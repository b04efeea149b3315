"""Maximum score estimation for the binary response model.

Rows are laid out as ``(y, x1, x2_1, ..., x2_d)`` with ``y`` in {0, 1} and
the first regression coefficient normalized to one, so the criterion is
``(2y - 1) * 1(x1 + x2' theta >= 0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bootstrap import DriftMatrix
from .core import ContractError, Criterion, Estimate, Sample, student_t3
from .optimize import ExactStepSolver, StepRows
from .vdrift import STEP_RATE, psd_repair

THETA0 = 1.0
DEFAULT_BOX = (-5.0, 5.0)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Kernel:
    k: Callable[[np.ndarray], np.ndarray]
    kdot: Callable[[np.ndarray], np.ndarray]
    name: str = ""


def _phi(u):
    u = np.asarray(u, dtype=np.float64)
    return np.exp(-0.5 * u * u) / _SQRT_2PI


def _phi_dot(u):
    u = np.asarray(u, dtype=np.float64)
    return -u * _phi(u)


GAUSSIAN = Kernel(_phi, _phi_dot, "gaussian")


def binary_response_sample(y, x1, x2) -> Sample:
    """Stack ``(y, x1, x2)`` into a :class:`Sample`, checking ``y`` is binary."""
    y = np.asarray(y, dtype=np.float64).ravel()
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ContractError("y must be exactly 0 or 1")
    x1 = np.asarray(x1, dtype=np.float64).ravel()
    x2 = np.asarray(x2, dtype=np.float64).reshape(y.shape[0], -1)
    return Sample(np.column_stack([y, x1, x2]))


def ms_criterion(row, theta) -> float:
    row = np.asarray(row, dtype=np.float64)
    idx = row[1] + float(np.dot(row[2:], np.atleast_1d(theta)))
    return float(2.0 * row[0] - 1.0) if idx >= 0.0 else 0.0


def _ms_batch(rows, theta):
    idx = rows[:, 1] + rows[:, 2:] @ np.atleast_1d(theta)
    return np.where(idx >= 0.0, 2.0 * rows[:, 0] - 1.0, 0.0)


def ms_step_rows(sample: Sample, box=DEFAULT_BOX) -> StepRows:
    """Breakpoint decomposition of the maximum score objective (d = 1).

    ``1(x1 + x2*theta >= 0)`` switches on at ``-x1/x2`` from the right when
    ``x2 > 0`` and from the left when ``x2 < 0``; rows with ``x2 == 0`` or a
    breakpoint outside the box are constant on the box.
    """
    rows = sample.rows
    if rows.shape[1] != 3:
        raise ContractError("the exact maximum score solver needs d = 1")
    lo, hi = (float(v) for v in np.asarray(box, dtype=np.float64).ravel())
    y, x1, x2 = rows[:, 0], rows[:, 1], rows[:, 2]
    unit = 2.0 * y - 1.0
    nz = x2 != 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        bk = np.where(nz, -x1 / np.where(nz, x2, 1.0), np.nan)
    in_dom = nz & (bk >= lo) & (bk <= hi)
    const_on = np.where(
        nz,
        ((x2 > 0) & (bk < lo)) | ((x2 < 0) & (bk > hi)),
        x1 >= 0.0,
    ) & ~in_dom
    cand = np.flatnonzero(in_dom)
    order = cand[np.argsort(bk[cand], kind="stable")]
    return StepRows(order=order, bk=bk[order], right=x2[order] > 0, unit=unit,
                    const_on=const_on, domain=(lo, hi))


def maxscore_criterion(box=DEFAULT_BOX, d: int = 1) -> Criterion:
    box = np.asarray(box, dtype=np.float64)
    box = np.tile(box.reshape(1, 2), (d, 1)) if box.size == 2 else box.reshape(d, 2)
    step = (lambda s: ms_step_rows(s, box[0])) if d == 1 else None
    return Criterion(dim=d, eval=ms_criterion, box=box, batch=_ms_batch, step_rows=step)


def ms_estimate(sample: Sample, box=DEFAULT_BOX) -> Estimate:
    """Exact maximum score estimate for ``d = 1`` (midpoint of the leftmost
    maximizing interval)."""
    if sample.arity != 3:
        raise ContractError("ms_estimate supports d = 1 only")
    if not np.any(sample.rows[:, 2] != 0.0):
        raise ContractError("unidentified: every x2 is zero, the criterion is constant in theta")
    crit = maxscore_criterion(box)
    prepared = ExactStepSolver().prepare(crit, sample)
    theta, value = prepared.maximize(np.ones(sample.n), 0.0, sample.n, None, np.zeros(1))
    return Estimate(theta_hat=theta, objective_value=value, solver_tag=ExactStepSolver.tag)


def ms_index(sample: Sample, theta_hat) -> np.ndarray:
    rows = sample.rows
    return rows[:, 1] + rows[:, 2:] @ np.atleast_1d(np.asarray(theta_hat, dtype=np.float64))


def plugin_V_MS(sample: Sample, theta_hat, h: float, kernel: Kernel = GAUSSIAN,
                repair: bool = True) -> DriftMatrix:
    """Minus the second derivative of the kernel-smoothed score at ``theta_hat``.

    ``-(n h^2)^-1 sum_i (2y_i - 1) Kdot(index_i / h) x2_i x2_i'``, symmetrized
    and (by default) PSD-repaired.
    """
    if h <= 0:
        raise ContractError("bandwidth must be positive")
    rows = sample.rows
    x2 = rows[:, 2:]
    wts = (2.0 * rows[:, 0] - 1.0) * kernel.kdot(ms_index(sample, theta_hat) / h)
    V = -(x2.T * wts) @ x2 / (sample.n * h * h)
    V = DriftMatrix(0.5 * (V + V.T))
    return psd_repair(V) if repair else V


def index_scale(sample: Sample, theta_hat) -> float:
    """Sample standard deviation of ``x1 + x2' theta_hat``."""
    return float(np.std(ms_index(sample, theta_hat), ddof=1))


def rot_bandwidth_MS(n: int, c_rot: float = 1.0, scale: float = 1.0) -> float:
    """Rule-of-thumb bandwidth ``c_rot * scale * n**(-1/7)``."""
    if n < 2:
        raise ContractError("rot_bandwidth_MS needs n >= 2")
    return c_rot * scale * float(n) ** STEP_RATE


def ms_errors(dgp_id: int, x1: np.ndarray, x2: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = x1.shape[0]
    if dgp_id == 1:
        return rng.logistic(0.0, 1.0, n) / math.sqrt(2.0 * math.pi**2 / 3.0)
    if dgp_id == 2:
        return student_t3(rng, n) / math.sqrt(3.0)
    if dgp_id == 3:
        s = x1 + x2
        return (1.0 + 2.0 * s**2 + s**4) * rng.logistic(0.0, 1.0, n) / math.sqrt(math.pi**2 / 48.0)
    raise ContractError(f"unknown maximum score DGP {dgp_id!r}")


def ms_dgp(dgp_id: int, n: int, rng: np.random.Generator) -> Sample:
    """Simulation designs 1-3: ``x ~ N((0, 1)', I)``, ``theta0 = 1``."""
    if dgp_id not in (1, 2, 3):
        raise ContractError(f"unknown maximum score DGP {dgp_id!r}")
    if n < 1:
        raise ContractError("n must be >= 1")
    x1 = rng.standard_normal(n)
    x2 = 1.0 + rng.standard_normal(n)
    eps = ms_errors(dgp_id, x1, x2, rng)
    y = (x1 + x2 * THETA0 + eps >= 0.0).astype(np.float64)
    return Sample(np.column_stack([y, x1, x2]))
