"""Argmax engines for step-plus-concave-quadratic objectives.

Two engines live here: an exact solver for one-dimensional piecewise
constant objectives with an optional concave quadratic added, and a
coarse-to-fine grid search used for ``d > 1`` and as a cross-check.
The solver classes at the bottom bind an engine to a (criterion, sample)
pair so that bootstrap replicates only pay for the per-draw work.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._backend import kernels
from .core import ContractError, Criterion, Sample


class SolverError(RuntimeError):
    """Objective evaluation failed (e.g. returned a non-finite value)."""

    def __init__(self, message: str, theta=None):
        super().__init__(message)
        self.theta = theta


@dataclass(frozen=True)
class StepPlusQuadratic1D:
    """``S(t) + a*t**2 + b*t + c`` on a closed domain, ``S`` piecewise constant.

    ``step_values[j]`` is the value of ``S`` on the open interval left of
    ``breakpoints[j]`` (the final entry is the interval right of the last
    breakpoint).  ``point_values[j]`` is ``S(breakpoints[j])``; use
    :meth:`from_sides` to build it from left/right-closed flags.
    """

    breakpoints: np.ndarray
    step_values: np.ndarray
    point_values: np.ndarray
    quad: tuple[float, float, float]
    domain: tuple[float, float]

    def __post_init__(self):
        bk = np.asarray(self.breakpoints, dtype=np.float64).ravel()
        sv = np.asarray(self.step_values, dtype=np.float64).ravel()
        pv = np.asarray(self.point_values, dtype=np.float64).ravel()
        lo, hi = (float(v) for v in self.domain)
        a, b, c = (float(v) for v in self.quad)
        if not lo < hi:
            raise ContractError("empty domain")
        if sv.shape[0] != bk.shape[0] + 1 or pv.shape[0] != bk.shape[0]:
            raise ContractError("need len(step_values) == len(breakpoints) + 1 == len(point_values) + 1")
        if bk.size and (np.any(np.diff(bk) <= 0) or bk[0] < lo or bk[-1] > hi):
            raise ContractError("breakpoints must be strictly increasing inside the domain")
        if a > 0:
            raise ContractError("quadratic part must be concave (a <= 0)")
        for name, arr in (("breakpoints", bk), ("step_values", sv), ("point_values", pv)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "quad", (a, b, c))
        object.__setattr__(self, "domain", (lo, hi))

    @classmethod
    def from_sides(cls, breakpoints, side, step_values, quad=(0.0, 0.0, 0.0), domain=(-1.0, 1.0)):
        """Build from per-breakpoint flags: ``side[j]`` true means right-closed,
        i.e. ``S(breakpoints[j])`` takes the value of the interval to its right."""
        sv = np.asarray(step_values, dtype=np.float64)
        side = np.asarray(side, dtype=bool)
        pv = np.where(side, sv[1:], sv[:-1])
        return cls(breakpoints, sv, pv, quad, domain)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        a, b, c = self.quad
        s = self.step_values[np.searchsorted(self.breakpoints, t, side="right")]
        if self.breakpoints.size:
            j = np.minimum(np.searchsorted(self.breakpoints, t, side="left"), self.breakpoints.size - 1)
            s = np.where(self.breakpoints[j] == t, self.point_values[j], s)
        return s + (a * t + b) * t + c


def argmax_exact_1d(f: StepPlusQuadratic1D) -> tuple[float, float]:
    """Exact global maximizer of a :class:`StepPlusQuadratic1D`.

    Every open interval contributes the quadratic's vertex clipped to its
    closure (evaluated with the interval's step value) and every breakpoint
    its attained value.  For pure step objectives the midpoint of the
    leftmost maximizing region is returned; otherwise the maximizing
    candidate with smallest ``t``.
    """
    a, b, c = f.quad
    lo, hi = f.domain
    t, v = kernels.step_quad_argmax(f.breakpoints, f.step_values, f.point_values, a, b, c, lo, hi)
    return float(t), float(v)


def argmax_grid(
    objective: Callable[[np.ndarray], float],
    box,
    grid_points_per_dim: int = 11,
    refine_rounds: int = 4,
) -> tuple[np.ndarray, float]:
    """Coarse-to-fine grid search.

    Evaluates a full tensor grid over the current box, then re-centres a box
    one third the width on the best point (clipped to the original box) and
    repeats ``refine_rounds`` times.  Ties keep the first point visited.
    """
    if grid_points_per_dim < 3:
        raise ContractError("grid_points_per_dim must be >= 3")
    box = np.array(box, dtype=np.float64).reshape(-1, 2)
    lo0, hi0 = box[:, 0].copy(), box[:, 1].copy()
    lo, hi = lo0.copy(), hi0.copy()
    best_theta, best_val = None, -np.inf
    for _ in range(refine_rounds + 1):
        axes = [np.linspace(l, h, grid_points_per_dim) for l, h in zip(lo, hi)]
        for point in itertools.product(*axes):
            theta = np.array(point)
            val = float(objective(theta))
            if not np.isfinite(val):
                raise SolverError(f"objective is not finite at theta={theta.tolist()}", theta)
            if best_theta is None or val > best_val:
                best_theta, best_val = theta, val
        half = (hi - lo) / 6.0
        lo = np.maximum(best_theta - half, lo0)
        hi = np.minimum(best_theta + half, hi0)
    return best_theta, best_val


# ---------------------------------------------------------------------------
# Solvers for weighted empirical objectives
# ---------------------------------------------------------------------------
#
# All bootstrap schemes maximize
#     theta -> norm**-1 * sum_i (w_i - base) * m(z_i, theta)
#              - (theta - theta_hat)' V (theta - theta_hat) / 2
# with w_i the multiplicity of row i in the resample; base = 1 gives the
# reshaped objective, base = 0 with V = 0 the plain bootstrap objective.


@dataclass(frozen=True)
class StepRows:
    """Indicator decomposition of a 1-D step criterion over one sample.

    Row ``i`` contributes ``unit[i]`` times an indicator.  Rows listed in
    ``order`` switch at ``bk`` (sorted): on ``t >= bk`` if ``right`` else on
    ``t <= bk``.  The remaining rows are constant on the domain and switched
    on where ``const_on`` is true.
    """

    order: np.ndarray
    bk: np.ndarray
    right: np.ndarray
    unit: np.ndarray
    const_on: np.ndarray
    domain: tuple[float, float]


class _PreparedExact:
    def __init__(self, rows: StepRows):
        self.rows = rows
        self._unit_sorted = rows.unit[rows.order]
        self._const_unit = np.where(rows.const_on, rows.unit, 0.0)
        self._right_u8 = rows.right.astype(np.uint8)

    def maximize(self, weights, base, norm, V, theta_hat):
        r = self.rows
        w = np.asarray(weights, dtype=np.float64) - base
        coef = w[r.order] * self._unit_sorted
        const = float(np.dot(w, self._const_unit))
        lo, hi = r.domain
        # work in units of norm * objective so integer weights stay exact
        v = float(np.asarray(V, dtype=np.float64).reshape(-1)[0]) if V is not None else 0.0
        th = float(np.asarray(theta_hat).reshape(-1)[0])
        a = -0.5 * norm * v
        b = norm * v * th
        c = -0.5 * norm * v * th * th
        t, val = kernels.step_quad_argmax_rows(r.bk, self._right_u8, coef, const, a, b, c, lo, hi)
        return np.array([t]), val / norm


class ExactStepSolver:
    """Exact solver for one-dimensional criteria exposing ``step_rows``."""

    tag = "exact_1d"

    def prepare(self, criterion: Criterion, sample: Sample) -> _PreparedExact:
        if criterion.dim != 1 or criterion.step_rows is None:
            raise ContractError("exact solver needs a one-dimensional step criterion")
        return _PreparedExact(criterion.step_rows(sample))


class _PreparedGrid:
    def __init__(self, criterion: Criterion, sample: Sample, points: int, rounds: int):
        self.criterion = criterion
        self.sample = sample
        self.points = points
        self.rounds = rounds

    def maximize(self, weights, base, norm, V, theta_hat):
        w = np.asarray(weights, dtype=np.float64) - base
        active = np.flatnonzero(w)
        rows = self.sample.rows[active]
        w = w[active]
        d = self.criterion.dim
        Vm = np.zeros((d, d)) if V is None else np.asarray(V, dtype=np.float64).reshape(d, d)
        th = np.asarray(theta_hat, dtype=np.float64).reshape(d)

        def objective(theta):
            s = theta - th
            vals = self.criterion.values(rows, theta) if rows.shape[0] else np.zeros(0)
            return float(np.dot(w, vals)) / norm - 0.5 * float(s @ Vm @ s)

        return argmax_grid(objective, self.criterion.box, self.points, self.rounds)


class GridSolver:
    """Coarse-to-fine grid search over the criterion's box."""

    tag = "grid"

    def __init__(self, grid_points_per_dim: int = 11, refine_rounds: int = 4):
        self.grid_points_per_dim = grid_points_per_dim
        self.refine_rounds = refine_rounds

    def prepare(self, criterion: Criterion, sample: Sample) -> _PreparedGrid:
        return _PreparedGrid(criterion, sample, self.grid_points_per_dim, self.refine_rounds)
