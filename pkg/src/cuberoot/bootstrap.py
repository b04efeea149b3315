"""Standard, m-out-of-n and reshaped bootstrap draws; percentile intervals.

Every scheme draws its ``(B, size)`` index matrix up front from the stream
it is given, so replicate ``b`` is a pure function of that stream and
``b``.  Draws are stored recentred (``theta_star - theta_hat``) and are not
multiplied by any rate; :func:`percentile_ci` applies the rates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContractError, Criterion, Sample, empirical_objective, stream_label

CUBE_ROOT = 1.0 / 3.0


class BootstrapReplicateError(RuntimeError):
    """A bootstrap replicate could not be solved; the run is aborted."""

    def __init__(self, scheme: str, replicate: int, stream: str, cause: Exception | str):
        super().__init__(f"{scheme} bootstrap replicate {replicate} failed ({stream}): {cause}")
        self.scheme = scheme
        self.replicate = replicate
        self.stream = stream


@dataclass(frozen=True)
class DriftMatrix:
    """Symmetric estimate of the curvature ``-d^2 M / d theta d theta'``.

    ``repaired`` records whether eigenvalues were clamped by
    :func:`cuberoot.vdrift.psd_repair`.
    """

    V: np.ndarray
    repaired: bool = False

    def __post_init__(self):
        V = np.array(self.V, dtype=np.float64, ndmin=2)
        if V.ndim != 2 or V.shape[0] != V.shape[1]:
            raise ContractError("drift matrix must be square")
        if not np.all(np.isfinite(V)):
            raise ContractError("drift matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(V))))
        if np.max(np.abs(V - V.T)) > 1e-12 * scale:
            raise ContractError("drift matrix must be symmetric")
        V.setflags(write=False)
        object.__setattr__(self, "V", V)

    @property
    def dim(self) -> int:
        return self.V.shape[0]


@dataclass(frozen=True)
class BootstrapDraws:
    draws: np.ndarray
    rate_exponent: float
    n_effective: int
    scheme: str = ""

    def __post_init__(self):
        d = np.array(self.draws, dtype=np.float64, ndmin=2)
        if d.shape[0] < 1:
            raise ContractError("need at least one draw")
        if not 0.0 < self.rate_exponent < 1.0:
            raise ContractError("rate_exponent must lie in (0, 1)")
        d.setflags(write=False)
        object.__setattr__(self, "draws", d)

    @property
    def B(self) -> int:
        return self.draws.shape[0]


def reshaped_objective(criterion: Criterion, sample: Sample, theta_hat, V: DriftMatrix,
                       boot_sample: Sample, theta) -> float:
    """``M*_n(theta) - M_n(theta) - (theta - theta_hat)' V (theta - theta_hat) / 2``."""
    theta = criterion.check_theta(theta)
    theta_hat = criterion.check_theta(theta_hat)
    if V.dim != criterion.dim:
        raise ContractError("drift matrix dimension does not match the criterion")
    s = theta - theta_hat
    return (
        empirical_objective(criterion, boot_sample, theta)
        - empirical_objective(criterion, sample, theta)
        - 0.5 * float(s @ V.V @ s)
    )


def _replicates(criterion, sample, theta_hat, B, solver, rng, size, base, V, scheme):
    if B < 1:
        raise ContractError("B must be >= 1")
    theta_hat = criterion.check_theta(theta_hat)
    n = sample.n
    prepared = solver.prepare(criterion, sample)
    Vm = None if V is None else V.V
    idx = rng.integers(0, n, size=(B, size))
    out = np.empty((B, criterion.dim))
    label = stream_label(rng)
    for b in range(B):
        w = np.bincount(idx[b], minlength=n)
        try:
            theta, _ = prepared.maximize(w, base, size, Vm, theta_hat)
        except Exception as exc:  # noqa: BLE001 - re-raised with replicate context
            raise BootstrapReplicateError(scheme, b, label, exc) from exc
        if not np.all(np.isfinite(theta)):
            raise BootstrapReplicateError(scheme, b, label, "non-finite maximizer")
        out[b] = theta - theta_hat
    return out


def reshaped_bootstrap_draws(criterion: Criterion, sample: Sample, theta_hat, V: DriftMatrix,
                             B: int, solver, rng: np.random.Generator) -> BootstrapDraws:
    """Draws of ``argmax M~*_n - theta_hat`` from size-``n`` resamples."""
    if V.dim != criterion.dim:
        raise ContractError("drift matrix dimension does not match the criterion")
    d = _replicates(criterion, sample, theta_hat, B, solver, rng, sample.n, 1.0, V, "reshaped")
    return BootstrapDraws(d, CUBE_ROOT, sample.n, "reshaped")


def standard_bootstrap_draws(criterion: Criterion, sample: Sample, theta_hat, B: int,
                             solver, rng: np.random.Generator) -> BootstrapDraws:
    """Draws of ``argmax M*_n - theta_hat`` (the inconsistent baseline)."""
    d = _replicates(criterion, sample, theta_hat, B, solver, rng, sample.n, 0.0, None, "standard")
    return BootstrapDraws(d, CUBE_ROOT, sample.n, "standard")


def m_out_of_n_draws(criterion: Criterion, sample: Sample, theta_hat, m: int, B: int,
                     solver, rng: np.random.Generator) -> BootstrapDraws:
    """Draws of ``argmax M*_m - theta_hat`` from size-``m`` resamples."""
    if not 1 <= m <= sample.n:
        raise ContractError("m-out-of-n needs 1 <= m <= n")
    d = _replicates(criterion, sample, theta_hat, B, solver, rng, m, 0.0, None, "m_out_of_n")
    return BootstrapDraws(d, CUBE_ROOT, m, "m_out_of_n")


def empirical_quantile(x, p):
    """Order statistics with linear interpolation at rank ``p*(B-1) + 1``."""
    return np.quantile(np.asarray(x, dtype=np.float64), p, method="linear")


def percentile_ci(draws: BootstrapDraws, theta_hat, coordinate: int = 0, alpha: float = 0.05,
                  n: int | None = None, basic: bool = False) -> tuple[float, float]:
    """Bootstrap confidence interval for one coordinate.

    Quantiles are taken of ``n_effective**r * draw`` and mapped back with
    ``n**r``, so m-out-of-n draws are rescaled while standard and reshaped
    draws give the plain percentile interval of ``theta_star``.  ``basic``
    reflects the quantiles around ``theta_hat`` instead.
    """
    if not 0.0 < alpha < 1.0:
        raise ContractError("alpha must lie in (0, 1)")
    if n is None:
        n = draws.n_effective
    r = draws.rate_exponent
    r_boot = float(draws.n_effective) ** r
    r_n = float(n) ** r
    center = float(np.asarray(theta_hat, dtype=np.float64).reshape(-1)[coordinate])
    q_lo, q_hi = empirical_quantile(r_boot * draws.draws[:, coordinate], [alpha / 2, 1 - alpha / 2])
    if basic:
        return center - q_hi / r_n, center - q_lo / r_n
    return center + q_lo / r_n, center + q_hi / r_n
