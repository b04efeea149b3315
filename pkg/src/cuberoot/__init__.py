"""Reshaped nonparametric bootstrap for cube-root consistent M-estimators.

Maximum score and Grenander instantiations, drift-matrix estimators,
standard and m-out-of-n baselines, and a Monte Carlo harness.
"""

from ._backend import BACKEND
from .bootstrap import (
    BootstrapDraws,
    BootstrapReplicateError,
    DriftMatrix,
    m_out_of_n_draws,
    percentile_ci,
    reshaped_bootstrap_draws,
    reshaped_objective,
    standard_bootstrap_draws,
)
from .core import ContractError, Criterion, Estimate, Sample, empirical_objective, substream
from .grenander import grenander_estimate, reshaped_grenander_draw
from .maxscore import ms_estimate, plugin_V_MS
from .optimize import ExactStepSolver, GridSolver, StepPlusQuadratic1D, argmax_exact_1d, argmax_grid
from .sim import SimConfig, emit_report, run_monte_carlo
from .vdrift import nd_drift, numerical_hessian, psd_repair

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BootstrapDraws", "BootstrapReplicateError", "ContractError", "Criterion",
    "DriftMatrix", "Estimate", "ExactStepSolver", "GridSolver", "Sample", "SimConfig",
    "StepPlusQuadratic1D", "argmax_exact_1d", "argmax_grid", "emit_report",
    "empirical_objective", "grenander_estimate", "m_out_of_n_draws", "ms_estimate",
    "nd_drift", "numerical_hessian", "percentile_ci", "plugin_V_MS", "psd_repair",
    "reshaped_bootstrap_draws", "reshaped_grenander_draw", "reshaped_objective",
    "run_monte_carlo", "standard_bootstrap_draws", "substream",
]
