"""Grenander estimator of a non-increasing density and its bootstraps.

The estimate at ``x0`` is the left derivative of the least concave
majorant (LCM) of the empirical CDF, taken over ``[0, max(sample)]`` with
the anchor ``(0, 0)``.  The reshaped bootstrap replaces the bootstrap CDF by

    F~*(x) = F*(x) - F(x) + F(x0) + f(x0) (x - x0) + f'(x0) (x - x0)^2 / 2

and hulls it on a densified knot set (see :func:`reshaped_grenander_draw`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .bootstrap import CUBE_ROOT, BootstrapDraws, BootstrapReplicateError
from .core import ContractError, stream_label, student_t3
from .maxscore import GAUSSIAN
from .vdrift import STEP_RATE

DEFAULT_X0 = 1.0
DEFAULT_KNOT_DENSIFICATION = 4
KDE_ROT_CONSTANT = 1.06


@dataclass(frozen=True)
class PlanarPointSet:
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64).ravel()
        v = np.array(self.v, dtype=np.float64).ravel()
        if x.shape != v.shape or x.size == 0:
            raise ContractError("x and v must be nonempty and of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise ContractError("points must be finite")
        if np.any(np.diff(x) <= 0):
            raise ContractError("x must be strictly increasing")
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)


def _as_data(sample) -> np.ndarray:
    x = np.asarray(getattr(sample, "rows", sample), dtype=np.float64).ravel()
    if x.size == 0:
        raise ContractError("sample must be nonempty")
    return x


def ecdf(sample):
    """Right-continuous empirical distribution function of ``sample``."""
    xs = np.sort(_as_data(sample))
    n = xs.size

    def F(x):
        return np.searchsorted(xs, x, side="right") / n

    return F


def upper_hull(ps: PlanarPointSet) -> PlanarPointSet:
    """Vertices of the least concave majorant of a planar point set."""
    hx, hy = kernels.upper_hull(ps.x, ps.v)
    return PlanarPointSet(hx, hy)


def lcm_left_derivative(ps: PlanarPointSet, x0: float) -> float:
    """Left derivative at ``x0`` of the LCM of ``ps``.

    At a hull vertex the segment to the left is used.
    """
    if not ps.x[0] < x0 <= ps.x[-1]:
        raise ContractError(f"x0={x0} must lie in (min x, max x]")
    return float(kernels.lcm_left_slope(ps.x, ps.v, x0))


def ecdf_points(sample) -> PlanarPointSet:
    """``{(0, 0)} U {(x_(i), F_n(x_(i)))}`` over the distinct sorted data."""
    x = _as_data(sample)
    if np.any(x < 0):
        raise ContractError("Grenander sample must be nonnegative")
    u, counts = np.unique(x, return_counts=True)
    F = np.cumsum(counts) / x.size
    if u[0] == 0.0:
        return PlanarPointSet(u, F)
    return PlanarPointSet(np.concatenate([[0.0], u]), np.concatenate([[0.0], F]))


def grenander_estimate(sample, x0: float) -> float:
    x = _as_data(sample)
    if not 0.0 < x0 <= x.max():
        raise ContractError(f"Grenander estimate undefined at x0={x0} (need 0 < x0 <= max sample)")
    return lcm_left_derivative(ecdf_points(x), x0)


@dataclass(frozen=True)
class GrenanderFit:
    """LCM of the empirical CDF: hull knots, heights and left slopes."""

    knots: np.ndarray
    heights: np.ndarray
    slopes: np.ndarray

    def density(self, x) -> np.ndarray:
        """Left-continuous Grenander density at ``x`` in ``(0, max]``."""
        i = np.searchsorted(self.knots, x, side="left") - 1
        return self.slopes[np.clip(i, 0, self.slopes.size - 1)]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.slopes * np.diff(self.knots)))


def grenander_fit(sample) -> GrenanderFit:
    hull = upper_hull(ecdf_points(sample))
    slopes = np.diff(hull.v) / np.diff(hull.x)
    return GrenanderFit(hull.x, hull.v, slopes)


@dataclass(frozen=True)
class ReshapedCDF:
    boot_points: np.ndarray
    orig_points: np.ndarray
    x0: float
    fhat_x0: float
    fprime_tilde: float
    Fhat_x0: float

    def __post_init__(self):
        for name in ("boot_points", "orig_points"):
            arr = np.sort(np.array(getattr(self, name), dtype=np.float64).ravel())
            if arr.size == 0:
                raise ContractError(f"{name} must be nonempty")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.x0 <= 0:
            raise ContractError("x0 must be positive")

    @classmethod
    def from_sample(cls, orig, boot, x0: float, fprime_tilde: float) -> "ReshapedCDF":
        orig = _as_data(orig)
        return cls(boot, orig, x0, grenander_estimate(orig, x0), fprime_tilde, float(ecdf(orig)(x0)))


def reshaped_cdf_eval(r: ReshapedCDF, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    z = x - r.x0
    return (
        ecdf(r.boot_points)(x)
        - ecdf(r.orig_points)(x)
        + r.Fhat_x0
        + r.fhat_x0 * z
        + 0.5 * r.fprime_tilde * z * z
    )


def _jumps(r: ReshapedCDF):
    u = np.union1d(r.boot_points, r.orig_points)
    nb, no = r.boot_points.size, r.orig_points.size
    cb = np.searchsorted(r.boot_points, u, side="right") - np.searchsorted(r.boot_points, u, side="left")
    co = np.searchsorted(r.orig_points, u, side="right") - np.searchsorted(r.orig_points, u, side="left")
    return u, cb / nb - co / no


def reshaped_grenander_draw(r: ReshapedCDF, knot_densification: int = DEFAULT_KNOT_DENSIFICATION) -> float:
    """Left derivative at ``x0`` of the LCM of the reshaped bootstrap CDF.

    Knots: ``0``, ``x0``, every jump point together with a point 1e-12 to
    its left (the left limit), ``knot_densification - 1`` equally spaced
    points inside each gap, and the vertex of the quadratic when it falls
    in range.  When ``x0`` ends up a contact point of the hull (and is not a
    jump) the majorant is tangent to the quadratic there and the slope is
    exactly ``fhat_x0``.
    """
    if r.fprime_tilde >= 0:
        raise ContractError("fprime_tilde must be negative (clamp it upstream)")
    if knot_densification < 1:
        raise ContractError("knot_densification must be >= 1")
    u, dD = _jumps(r)
    xmax = float(u[-1])
    if not 0.0 < r.x0 < xmax:
        raise ContractError("degenerate knot set: x0 must lie strictly inside (0, max point)")
    return float(kernels.reshaped_lcm_slope(u, dD, r.x0, r.Fhat_x0, r.fhat_x0, r.fprime_tilde,
                                            xmax, int(knot_densification)))


def kernel_fprime(sample, x0: float, b: float) -> float:
    """Derivative at ``x0`` of the Gaussian kernel density estimate."""
    if b <= 0:
        raise ContractError("bandwidth must be positive")
    x = _as_data(sample)
    return float(np.sum(GAUSSIAN.kdot((x0 - x) / b)) / (x.size * b * b))


def rot_bandwidth_fprime(sample, c: float = KDE_ROT_CONSTANT) -> float:
    """``c * sd(sample) * n**(-1/7)``."""
    x = _as_data(sample)
    return c * float(np.std(x, ddof=1)) * float(x.size) ** STEP_RATE


def nd_fprime(sample, x0: float, eps: float) -> float:
    """Central difference of the Grenander estimate around ``x0``."""
    if eps <= 0:
        raise ContractError("eps must be positive")
    x = _as_data(sample)
    if x0 - eps <= 0.0 or x0 + eps > x.max():
        raise ContractError(f"nd_fprime probes x0 +/- eps = {x0 - eps}, {x0 + eps} leave (0, max sample]")
    pts = ecdf_points(x)
    return (lcm_left_derivative(pts, x0 + eps) - lcm_left_derivative(pts, x0 - eps)) / (2.0 * eps)


def clamp_fprime(fprime: float, fhat_x0: float, x0: float) -> tuple[float, bool]:
    """Force a strictly negative slope estimate; returns ``(value, clamped)``."""
    if fprime < 0:
        return float(fprime), False
    return -1e-3 * (fhat_x0 / x0 + 1e-6), True


def gren_dgp(dgp_id: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Exponential(1), |N(0, 1)| or |t(3)| draws."""
    if n < 1:
        raise ContractError("n must be >= 1")
    if dgp_id == 1:
        return rng.exponential(1.0, n)
    if dgp_id == 2:
        return np.abs(rng.standard_normal(n))
    if dgp_id == 3:
        return np.abs(student_t3(rng, n))
    raise ContractError(f"unknown Grenander DGP {dgp_id!r}")


def true_density(dgp_id: int, x: float) -> float:
    """Exact density of the design: ``exp(-x)``, ``2 phi(x)``, ``2 t3(x)``."""
    if dgp_id == 1:
        return math.exp(-x)
    if dgp_id == 2:
        return 2.0 * math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    if dgp_id == 3:
        # t_3 density: Gamma(2) / (sqrt(3 pi) Gamma(3/2)) (1 + x^2/3)^-2
        c = math.gamma(2.0) / (math.sqrt(3.0 * math.pi) * math.gamma(1.5))
        return 2.0 * c * (1.0 + x * x / 3.0) ** -2
    raise ContractError(f"unknown Grenander DGP {dgp_id!r}")


def grenander_bootstrap_draws(sample, x0: float, scheme: str, B: int, rng: np.random.Generator, *,
                              fprime: float | None = None, m: int | None = None,
                              knot_densification: int = DEFAULT_KNOT_DENSIFICATION) -> BootstrapDraws:
    """Recentred bootstrap draws ``f*(x0) - fhat(x0)``.

    ``scheme`` is ``"standard"``, ``"m_out_of_n"`` (needs ``m``) or
    ``"reshaped"`` (needs a negative ``fprime``).
    """
    if B < 1:
        raise ContractError("B must be >= 1")
    x = _as_data(sample)
    n = x.size
    u, inv, co = np.unique(x, return_inverse=True, return_counts=True)
    fhat = grenander_estimate(x, x0)
    size = n
    if scheme == "m_out_of_n":
        if m is None or not 1 <= m <= n:
            raise ContractError("m-out-of-n needs 1 <= m <= n")
        size = m
    elif scheme == "reshaped":
        if fprime is None or fprime >= 0:
            raise ContractError("reshaped scheme needs a negative fprime")
        if not x0 < u[-1]:
            raise ContractError("degenerate knot set: x0 must lie below the largest observation")
        Fx0 = float(np.sum(co[u <= x0])) / n
    elif scheme != "standard":
        raise ContractError(f"unknown scheme {scheme!r}")

    anchored = u[0] > 0.0
    px = np.concatenate([[0.0], u]) if anchored else u
    idx = rng.integers(0, n, size=(B, size))
    out = np.empty(B)
    label = stream_label(rng)
    K = int(knot_densification)
    for b in range(B):
        w = np.bincount(inv[idx[b]], minlength=u.size)
        try:
            if scheme == "reshaped":
                val = kernels.reshaped_lcm_slope(u, (w - co) / n, x0, Fx0, fhat, fprime, float(u[-1]), K)
            else:
                F = np.cumsum(w) / size
                py = np.concatenate([[0.0], F]) if anchored else F
                val = kernels.lcm_left_slope(px, py, x0)
        except Exception as exc:  # noqa: BLE001 - re-raised with replicate context
            raise BootstrapReplicateError(scheme, b, label, exc) from exc
        out[b] = val - fhat
    return BootstrapDraws(out[:, None], CUBE_ROOT, size, scheme)
