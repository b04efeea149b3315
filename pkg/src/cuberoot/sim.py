"""Monte Carlo harness: coverage and length of bootstrap intervals.

Replication ``s`` draws its data from ``substream(seed, "dgp", s)`` and the
bootstrap for row ``(method, tuning)`` from ``substream(seed, tag, s)``, so
a replication gives the same numbers whether it runs alone, in a batch, or
on any worker thread.  Aggregation is a fold in replication order.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import grenander as gr
from . import maxscore as ms
from .bootstrap import (
    m_out_of_n_draws,
    percentile_ci,
    reshaped_bootstrap_draws,
    standard_bootstrap_draws,
)
from .core import ContractError, Sample, substream
from .optimize import ExactStepSolver
from .vdrift import epsilon_rule, nd_drift, psd_repair

EXAMPLES = ("maxscore", "grenander")
METHODS = ("standard", "m_out_of_n", "reshaped_plugin", "reshaped_nd")
FORMATS = ("csv", "markdown")
INTERVALS = ("basic", "percentile")
HEADER = ("method", "tuning", "coverage", "avg_length", "avg_tuning", "failures")


class SimulationError(RuntimeError):
    """A replication failed; carries the row, replication index and seed."""

    def __init__(self, method: str, tuning: str, replication: int, seed: int, cause: Exception):
        super().__init__(f"{method} ({tuning}) failed in replication {replication} "
                         f"(seed {seed}): {cause}")
        self.method = method
        self.tuning = tuning
        self.replication = replication
        self.seed = seed


def default_m_values(n: int) -> tuple[int, int]:
    """``round(n**(2/3))`` and ``n // 2``."""
    return int(round(n ** (2.0 / 3.0))), n // 2


@dataclass(frozen=True)
class MethodRow:
    """One report row. ``value`` is ``m`` or a fixed tuning value, ``None`` for ROT."""

    method: str
    tuning: str
    value: float | None = None

    @property
    def tag(self) -> str:
        return f"{self.method}:{self.tuning}"


def _tuning_label(t) -> str:
    return "rot" if t == "rot" else f"{float(t):.6g}"


@dataclass(frozen=True)
class SimConfig:
    example: str
    dgp_id: int
    n: int
    S: int
    B: int
    alpha: float = 0.05
    methods: tuple = METHODS
    tuning_grid: tuple = ("rot",)
    m_values: tuple | None = None
    master_seed: int = 0
    x0: float = 1.0
    c_rot: float = 1.0
    kde_constant: float = gr.KDE_ROT_CONSTANT
    knot_densification: int = gr.DEFAULT_KNOT_DENSIFICATION
    box: tuple = ms.DEFAULT_BOX
    interval: str = "basic"

    def __post_init__(self):
        if self.interval not in INTERVALS:
            raise ContractError(f"interval must be one of {INTERVALS}")
        if self.example not in EXAMPLES:
            raise ContractError(f"example must be one of {EXAMPLES}")
        if self.dgp_id not in (1, 2, 3):
            raise ContractError("dgp_id must be 1, 2 or 3")
        if self.n < 2 or self.S < 1 or self.B < 1:
            raise ContractError("need n >= 2, S >= 1 and B >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ContractError("alpha must lie in (0, 1)")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ContractError(f"unknown methods {sorted(unknown)}")
        for t in self.tuning_grid:
            if t != "rot" and not (isinstance(t, (int, float)) and t > 0):
                raise ContractError(f"tuning values must be positive numbers or 'rot', got {t!r}")
        for m in self.m_values or ():
            if not 1 <= m <= self.n:
                raise ContractError(f"m={m} must satisfy 1 <= m <= n")

    def rows(self) -> list[MethodRow]:
        out = []
        for method in self.methods:
            if method == "standard":
                out.append(MethodRow(method, "-"))
            elif method == "m_out_of_n":
                ms_ = self.m_values or default_m_values(self.n)
                out.extend(MethodRow(method, f"m={int(m)}", int(m)) for m in ms_)
            else:
                out.extend(MethodRow(method, _tuning_label(t), None if t == "rot" else float(t))
                           for t in self.tuning_grid)
        return out


@dataclass(frozen=True)
class ReportRow:
    method: str
    tuning: str
    coverage: float
    avg_length: float
    avg_tuning: float | None
    failures: int


@dataclass(frozen=True)
class SimReport:
    rows: tuple = field(default_factory=tuple)

    def row(self, method: str, tuning: str | None = None) -> ReportRow:
        for r in self.rows:
            if r.method == method and (tuning is None or r.tuning == tuning):
                return r
        raise KeyError((method, tuning))


def truth(example: str, dgp_id: int, x0: float = 1.0) -> float:
    """``theta0 = 1`` for maximum score; the exact density at ``x0`` otherwise."""
    return ms.THETA0 if example == "maxscore" else gr.true_density(dgp_id, x0)


def draw_data(config: SimConfig, s: int):
    rng = substream(config.master_seed, "dgp", s)
    if config.example == "maxscore":
        return ms.ms_dgp(config.dgp_id, config.n, rng)
    return gr.gren_dgp(config.dgp_id, config.n, rng)


def point_estimate(example: str, data, x0: float = 1.0, box=ms.DEFAULT_BOX) -> float:
    if example == "maxscore":
        return float(ms.ms_estimate(data, box).theta_hat[0])
    return gr.grenander_estimate(data, x0)


def _ci(draws, center, n: int, config: SimConfig):
    # "basic" inverts P[r(theta_hat - theta0) <= t] ~ P*[r(theta* - theta_hat) <= t]
    return percentile_ci(draws, center, alpha=config.alpha, n=n, basic=config.interval == "basic")


def _maxscore_ci(sample: Sample, theta_hat: float, row: MethodRow, rng, config: SimConfig):
    n, B = sample.n, config.B
    crit = ms.maxscore_criterion(config.box)
    th = np.array([theta_hat])
    solver = ExactStepSolver()
    if row.method == "standard":
        draws = standard_bootstrap_draws(crit, sample, th, B, solver, rng)
        return _ci(draws, th, n, config), None, False
    if row.method == "m_out_of_n":
        draws = m_out_of_n_draws(crit, sample, th, int(row.value), B, solver, rng)
        return _ci(draws, th, n, config), float(row.value), False
    if row.method == "reshaped_plugin":
        tune = row.value
        if tune is None:
            tune = ms.rot_bandwidth_MS(n, config.c_rot, ms.index_scale(sample, th))
        V = ms.plugin_V_MS(sample, th, tune)
    else:
        tune = row.value if row.value is not None else epsilon_rule(n, config.c_rot)
        V = psd_repair(nd_drift(crit, sample, th, tune))
    draws = reshaped_bootstrap_draws(crit, sample, th, V, B, solver, rng)
    return _ci(draws, th, n, config), float(tune), V.repaired


def _grenander_ci(x: np.ndarray, fhat: float, row: MethodRow, rng, config: SimConfig):
    n, B = x.size, config.B
    x0 = config.x0
    if row.method == "standard":
        draws = gr.grenander_bootstrap_draws(x, x0, "standard", B, rng)
        return _ci(draws, fhat, n, config), None, False
    if row.method == "m_out_of_n":
        draws = gr.grenander_bootstrap_draws(x, x0, "m_out_of_n", B, rng, m=int(row.value))
        return _ci(draws, fhat, n, config), float(row.value), False
    if row.method == "reshaped_plugin":
        tune = row.value if row.value is not None else gr.rot_bandwidth_fprime(x, config.kde_constant)
        fp = gr.kernel_fprime(x, x0, tune)
    else:
        tune = row.value if row.value is not None else epsilon_rule(n, config.c_rot)
        fp = gr.nd_fprime(x, x0, tune)
    fp, clamped = gr.clamp_fprime(fp, fhat, x0)
    draws = gr.grenander_bootstrap_draws(x, x0, "reshaped", B, rng, fprime=fp,
                                         knot_densification=config.knot_densification)
    return _ci(draws, fhat, n, config), float(tune), clamped


def interval(config: SimConfig, data, estimate: float, row: MethodRow, rng):
    """``((lo, hi), tuning_used, failure_flag)`` for one dataset and row."""
    if config.example == "maxscore":
        return _maxscore_ci(data, estimate, row, rng, config)
    return _grenander_ci(np.asarray(data, dtype=np.float64), estimate, row, rng, config)


def run_replication(config: SimConfig, s: int, rows=None) -> np.ndarray:
    """Array of shape ``(len(rows), 4)``: covered, length, tuning, failure."""
    rows = config.rows() if rows is None else rows
    target = truth(config.example, config.dgp_id, config.x0)
    data = draw_data(config, s)
    try:
        est = point_estimate(config.example, data, config.x0, config.box)
    except ContractError as exc:
        raise SimulationError("point_estimate", "-", s, config.master_seed, exc) from exc
    out = np.zeros((len(rows), 4))
    for k, row in enumerate(rows):
        rng = substream(config.master_seed, row.tag, s)
        try:
            (lo, hi), tune, failed = interval(config, data, est, row, rng)
        except Exception as exc:  # noqa: BLE001 - re-raised with replication context
            raise SimulationError(row.method, row.tuning, s, config.master_seed, exc) from exc
        out[k] = (lo <= target <= hi, hi - lo, np.nan if tune is None else tune, failed)
    return out


def _threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("CUBEROOT_THREADS", "0") or 0) or (os.cpu_count() or 1)
    return max(1, int(threads))


def run_monte_carlo(config: SimConfig, threads: int | None = None) -> SimReport:
    """Run replications ``1..S`` and aggregate one :class:`ReportRow` per row."""
    rows = config.rows()
    reps = range(1, config.S + 1)
    nthreads = min(_threads(threads), config.S)
    if nthreads == 1:
        results = [run_replication(config, s, rows) for s in reps]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            results = list(pool.map(lambda s: run_replication(config, s, rows), reps))
    out = []
    for k, row in enumerate(rows):
        col = np.array([r[k] for r in results])
        tune = None if np.isnan(col[0, 2]) else math.fsum(col[:, 2]) / config.S
        out.append(ReportRow(row.method, row.tuning, math.fsum(col[:, 0]) / config.S,
                             math.fsum(col[:, 1]) / config.S, tune, int(col[:, 3].sum())))
    return SimReport(tuple(out))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.6g}"


def _cells(r: ReportRow) -> list[str]:
    return [r.method, r.tuning, _fmt(r.coverage), _fmt(r.avg_length), _fmt(r.avg_tuning),
            _fmt(r.failures)]


def emit_report(report: SimReport, fmt: str = "csv") -> bytes:
    """Serialize to UTF-8 CSV or a Markdown table, LF line endings."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HEADER)
        for r in report.rows:
            w.writerow(_cells(r))
        return buf.getvalue().encode("utf-8")
    if fmt == "markdown":
        lines = ["| " + " | ".join(HEADER) + " |", "|" + "---|" * len(HEADER)]
        lines += ["| " + " | ".join(_cells(r)) + " |" for r in report.rows]
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ContractError(f"unknown report format {fmt!r}; use one of {FORMATS}")


def parse_report(data: bytes) -> SimReport:
    """Inverse of the CSV form of :func:`emit_report`."""
    reader = csv.reader(io.StringIO(data.decode("utf-8")))
    header = next(reader)
    if tuple(header) != HEADER:
        raise ContractError(f"unexpected header {header}")
    rows = []
    for method, tuning, cov, length, tune, fails in reader:
        rows.append(ReportRow(method, tuning, float(cov), float(length),
                              float(tune) if tune else None, int(fails)))
    return SimReport(tuple(rows))


def write_report(report: SimReport, path, fmt: str = "csv") -> None:
    with open(path, "wb") as fh:
        fh.write(emit_report(report, fmt))
