"""Fast oracle-equivalence checks run by ``cuberoot selftest``.

Each check compares a production kernel with a slow, independent
reimplementation on seeded random instances.
"""

from __future__ import annotations

import numpy as np

from . import grenander as gr
from . import maxscore as ms
from .core import substream
from .optimize import ExactStepSolver
from .vdrift import numerical_hessian

SEED = 20240917


def _brute_ms_value(sample, weights, base, norm, V, theta_hat, grid):
    # direct evaluation, breakpoints and their float neighbours included
    rows = sample.rows
    w = weights - base
    unit = 2.0 * rows[:, 0] - 1.0
    x2 = rows[:, 2]
    nz = x2 != 0
    bk = -rows[nz, 1] / x2[nz]
    bk = bk[(bk >= grid[0]) & (bk <= grid[-1])]
    # probe a few ulps either side; x1 + t*x2 can round back to 0 at the adjacent float
    ulp = np.spacing(np.abs(bk) + np.finfo(float).tiny)
    t = np.concatenate([grid, bk] + [bk + k * ulp for k in (-16, -4, -1, 1, 4, 16)])
    t = t[(t >= grid[0]) & (t <= grid[-1])]
    on = rows[:, 1][None, :] + np.outer(t, x2) >= 0.0
    val = (on * (w * unit)[None, :]).sum(axis=1) / norm
    if V is not None:
        val = val - 0.5 * V * (t - theta_hat) ** 2
    return float(val.max())


def check_exact_solver(trials: int = 20) -> bool:
    rng = substream(SEED, "selftest", "exact")
    grid = np.linspace(-5.0, 5.0, 20001)
    solver = ExactStepSolver()
    for _ in range(trials):
        n = int(rng.integers(5, 40))
        sample = ms.ms_dgp(1, n, rng)
        crit = ms.maxscore_criterion()
        prep = solver.prepare(crit, sample)
        w = rng.integers(0, 3, n).astype(np.float64)
        th = float(rng.uniform(-1, 2))
        V = float(rng.uniform(0.1, 2.0))
        for base, Vq in ((0.0, None), (1.0, V)):
            _, val = prep.maximize(w, base, n, None if Vq is None else np.array([[Vq]]), np.array([th]))
            ref = _brute_ms_value(sample, w, base, n, Vq, th, grid)
            if val < ref - 1e-9:
                return False
    return True


def _pava_decreasing(y, w):
    # pool adjacent violators for a non-increasing fit
    vals, wts, cnt = [], [], []
    for yi, wi in zip(y, w):
        vals.append(yi)
        wts.append(wi)
        cnt.append(1)
        while len(vals) > 1 and vals[-2] < vals[-1]:
            v2, w2, c2 = vals.pop(), wts.pop(), cnt.pop()
            tot = wts[-1] + w2
            vals[-1] = (vals[-1] * wts[-1] + v2 * w2) / tot
            wts[-1] = tot
            cnt[-1] += c2
    return np.repeat(vals, cnt)


def check_lcm_pava(trials: int = 20) -> bool:
    rng = substream(SEED, "selftest", "pava")
    for _ in range(trials):
        x = np.unique(rng.exponential(1.0, int(rng.integers(2, 200))))
        fit = gr.grenander_fit(x)
        dx = np.diff(np.concatenate([[0.0], x]))
        ref = _pava_decreasing(1.0 / (x.size * dx), dx)
        if not np.allclose(fit.density(x), ref, rtol=0, atol=1e-10):
            return False
        if abs(fit.total_mass - 1.0) > 1e-12:
            return False
    return True


def check_nd_quadratic(trials: int = 20) -> bool:
    rng = substream(SEED, "selftest", "nd")
    for _ in range(trials):
        d = int(rng.integers(1, 5))
        G = rng.standard_normal((d, d))
        A = G @ G.T + d * np.eye(d)
        eps = float(10 ** rng.uniform(-3, -1))
        V = numerical_hessian(lambda t: -0.5 * t @ A @ t, np.zeros(d), eps)
        if np.max(np.abs(V.V - A)) > 1e-8:
            return False
    return True


CHECKS = {
    "exact_solver_vs_brute_force": check_exact_solver,
    "lcm_vs_pava": check_lcm_pava,
    "nd_hessian_quadratic": check_nd_quadratic,
}


def run_selftest() -> dict[str, bool]:
    return {name: bool(fn()) for name, fn in CHECKS.items()}
