"""Samples, criteria, empirical objectives and seeded resampling."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class ContractError(ValueError):
    """Raised when an operation is called outside its documented preconditions."""


class Sample:
    """Immutable, ordered collection of observation rows of equal arity.

    Rows are stored as a read-only ``(n, arity)`` float array; iteration
    yields them in insertion order.
    """

    __slots__ = ("_rows",)

    def __init__(self, rows):
        arr = np.array(rows, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ContractError("a sample needs n >= 1 rows of a fixed, positive arity")
        arr.setflags(write=False)
        self._rows = arr

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    @property
    def n(self) -> int:
        return self._rows.shape[0]

    @property
    def arity(self) -> int:
        return self._rows.shape[1]

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return iter(self._rows)

    def column(self, j: int) -> np.ndarray:
        return self._rows[:, j]

    def take(self, idx) -> "Sample":
        return Sample(self._rows[np.asarray(idx, dtype=np.intp)])

    def __repr__(self) -> str:
        return f"Sample(n={self.n}, arity={self.arity})"


@dataclass(frozen=True)
class Criterion:
    """An M-estimation problem: ``m(z, theta)`` maximized over a box.

    Parameters
    ----------
    dim : int
        Parameter dimension.
    eval : callable
        ``eval(row, theta) -> float``.
    box : array-like of shape (dim, 2)
        Closed per-coordinate bounds of the parameter space.
    batch : callable, optional
        Vectorized ``batch(rows, theta) -> ndarray`` of per-row values.
        Used instead of looping over ``eval`` when present.
    step_rows : callable, optional
        ``step_rows(sample) -> StepRows`` compiling the empirical objective
        to indicator breakpoints (only for one-dimensional step criteria);
        enables :class:`~cuberoot.optimize.ExactStepSolver`.
    """

    dim: int
    eval: Callable[[np.ndarray, np.ndarray], float]
    box: np.ndarray
    batch: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    step_rows: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        box = np.array(self.box, dtype=np.float64).reshape(self.dim, 2)
        if not np.all(np.isfinite(box)) or np.any(box[:, 1] <= box[:, 0]):
            raise ContractError("box must be finite with nonempty interior in every coordinate")
        box.setflags(write=False)
        object.__setattr__(self, "box", box)

    def check_theta(self, theta) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        if theta.shape != (self.dim,):
            raise ContractError(f"theta has shape {theta.shape}, criterion expects ({self.dim},)")
        return theta

    def values(self, rows: np.ndarray, theta) -> np.ndarray:
        """Per-row criterion values at ``theta``."""
        theta = self.check_theta(theta)
        if self.batch is not None:
            return np.asarray(self.batch(rows, theta), dtype=np.float64)
        return np.array([self.eval(r, theta) for r in rows], dtype=np.float64)


@dataclass(frozen=True)
class Estimate:
    theta_hat: np.ndarray
    objective_value: float
    solver_tag: str


def empirical_objective(criterion: Criterion, sample: Sample, theta) -> float:
    """Sample average ``n**-1 * sum_i m(z_i, theta)`` with exact summation."""
    theta = criterion.check_theta(theta)
    box = criterion.box
    if np.any(theta < box[:, 0]) or np.any(theta > box[:, 1]):
        raise ContractError(f"theta={theta} lies outside the parameter box")
    vals = criterion.values(sample.rows, theta)
    return math.fsum(vals.tolist()) / sample.n


def _key_word(key) -> int:
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ContractError("substream keys must be non-negative")
        return int(key)
    digest = hashlib.blake2b(str(key).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def substream(master_seed: int, *keys) -> np.random.Generator:
    """Independent Philox stream for ``(master_seed, *keys)``.

    String keys are hashed, so ``substream(seed, "dgp", 3)`` is the same
    stream no matter which other streams were created before it.
    """
    seq = np.random.SeedSequence(
        entropy=int(master_seed) & (2**64 - 1),
        spawn_key=tuple(_key_word(k) for k in keys),
    )
    return np.random.Generator(np.random.Philox(seq))


def stream_label(rng: np.random.Generator) -> str:
    """Human-readable identity of a stream for error messages."""
    seq = getattr(rng.bit_generator, "seed_seq", None)
    if seq is None:
        return "<unknown>"
    return f"entropy={seq.entropy}, spawn_key={tuple(seq.spawn_key)}"


def resample_with_replacement(sample: Sample, m: int, rng: np.random.Generator) -> Sample:
    """Draw ``m`` rows i.i.d. uniformly from ``sample``."""
    if m < 1:
        raise ContractError("resample size must be >= 1")
    return sample.take(rng.integers(0, sample.n, size=m))


def student_t3(rng: np.random.Generator, n: int) -> np.ndarray:
    """t(3) draws as ``Z / sqrt(chi2_3 / 3)`` from four normal columns."""
    z = rng.standard_normal((n, 4))
    chi2 = np.sum(z[:, 1:] ** 2, axis=1)
    return z[:, 0] / np.sqrt(chi2 / 3.0)
