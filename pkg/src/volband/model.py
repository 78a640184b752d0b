"""Observation records, bin partitions and the Gaussian pseudo-likelihood.

The volatility is modelled as a step function ``s^2 = sum_k theta_k 1_{B_k}``
on a partition of ``[0, T]`` into ``N`` bins of ``m`` observation intervals
each (the last bin absorbs the remainder ``r = n - m N``).  With the drift
set to zero the increments are independent Gaussians with variance
``theta_k * T / n`` in bin ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionError, DomainError, InvalidPartitionError

EQUIDISTANT_RTOL = 1e-9


@dataclass(frozen=True)
class ObservationRecord:
    """A discretely observed path ``X_{t_0}, ..., X_{t_n}`` on ``[0, T]``."""

    times: NDArray[np.float64]
    values: NDArray[np.float64]

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or values.ndim != 1:
            raise DimensionError("times and values must be one-dimensional")
        if times.shape != values.shape:
            raise DimensionError(
                f"times ({times.size}) and values ({values.size}) differ in length"
            )
        if times.size < 3:
            raise DimensionError(
                f"need at least 3 observations (n >= 2 increments), got {times.size}"
            )
        if times[0] != 0.0:
            raise DomainError(f"first observation time must be 0, got {times[0]!r}")
        if not np.all(np.diff(times) > 0):
            raise DomainError("observation times must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DomainError("observed values must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def equispaced(cls, values: ArrayLike, T: float = 1.0) -> "ObservationRecord":
        """Record with observation times ``t_i = i T / n``."""
        values = np.asarray(values, dtype=float)
        if T <= 0:
            raise DomainError(f"horizon must be positive, got {T}")
        n = values.size - 1
        return cls(np.arange(n + 1) * T / max(n, 1), values)

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def equidistant(self) -> bool:
        grid = np.arange(self.n + 1) * self.T / self.n
        return bool(np.allclose(self.times, grid, rtol=EQUIDISTANT_RTOL, atol=0.0))


@dataclass(frozen=True)
class BinLayout:
    """Partition of ``[0, T]`` into ``n_bins`` bins of ``m`` intervals each.

    Attributes
    ----------
    n : int
        Number of increments.
    m : int
        Observation intervals per bin (bins ``1..N-1``).
    n_bins : int
        ``N = floor(n / m)``.
    r : int
        Remainder ``n - m N``, absorbed by the last bin.
    T : float
        Time horizon.
    edges : ndarray
        ``N + 1`` bin edges, ``edges[0] = 0`` and ``edges[-1] = T``.
    """

    n: int
    m: int
    n_bins: int
    r: int
    T: float
    edges: NDArray[np.float64] = field(repr=False)

    @property
    def counts(self) -> NDArray[np.int64]:
        """Increments per bin, ``m`` except ``m + r`` for the last bin."""
        counts = np.full(self.n_bins, self.m, dtype=np.int64)
        counts[-1] += self.r
        return counts

    @property
    def widths(self) -> NDArray[np.float64]:
        return np.diff(self.edges)

    def bin_of_increment(self) -> NDArray[np.int64]:
        """Bin index (0-based) of each increment ``Y_1..Y_n``."""
        return np.minimum(np.arange(self.n) // self.m, self.n_bins - 1)

    def bin_of_time(self, t: ArrayLike) -> NDArray[np.int64]:
        """Bin containing time ``t``; bins are right-open except the last."""
        t = np.asarray(t, dtype=float)
        if np.any((t < 0) | (t > self.T)):
            raise DomainError(f"times must lie in [0, {self.T}]")
        idx = np.searchsorted(self.edges, t, side="right") - 1
        return np.minimum(idx, self.n_bins - 1)

    def step_function(self, heights: ArrayLike, t: ArrayLike) -> NDArray[np.float64]:
        """Evaluate the step function with per-bin ``heights`` at ``t``."""
        heights = np.asarray(heights, dtype=float)
        if heights.shape != (self.n_bins,):
            raise DimensionError(f"expected {self.n_bins} heights, got {heights.shape}")
        return heights[self.bin_of_time(t)]


def build_bin_layout(n: int, T: float, m: int) -> BinLayout:
    """Partition ``n`` equidistant increments on ``[0, T]`` into bins of ``m``."""
    if not (1 <= m < n):
        raise InvalidPartitionError(f"need 1 <= m < n, got m={m}, n={n}")
    if not T > 0:
        raise InvalidPartitionError(f"horizon must be positive, got {T}")
    n_bins = n // m
    r = n - m * n_bins
    edges = np.arange(n_bins + 1, dtype=float) * m * T / n
    edges[-1] = T
    return BinLayout(n=n, m=m, n_bins=n_bins, r=r, T=float(T), edges=edges)


def layout_from_bin_count(n: int, T: float, n_bins: int) -> BinLayout:
    """Layout targeting ``n_bins`` bins: ``m = floor(n / N)``, then ``N = floor(n / m)``."""
    if not (1 <= n_bins <= n):
        raise InvalidPartitionError(f"cannot split {n} increments into {n_bins} bins")
    # a single bin would need m = n, but the partition requires m < n
    m = min(n // n_bins, n - 1)
    return build_bin_layout(n, T, m)


@dataclass(frozen=True)
class IncrementSet:
    """Increments ``Y_i`` and per-bin sums of squares ``Z_k``."""

    increments: NDArray[np.float64]
    bin_sums: NDArray[np.float64]
    equidistant: bool = True


def compute_increments(obs: ObservationRecord, layout: BinLayout) -> IncrementSet:
    if layout.n != obs.n:
        raise DimensionError(
            f"layout has {layout.n} increments but observations give {obs.n}"
        )
    if not np.isclose(layout.T, obs.T, rtol=EQUIDISTANT_RTOL, atol=0.0):
        raise DimensionError(f"layout horizon {layout.T} != observation horizon {obs.T}")
    y = np.diff(obs.values)
    z = np.bincount(layout.bin_of_increment(), weights=y * y, minlength=layout.n_bins)
    return IncrementSet(increments=y, bin_sums=z, equidistant=obs.equidistant)


def _check_theta(theta: ArrayLike, layout: BinLayout) -> NDArray[np.float64]:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (layout.n_bins,):
        raise DimensionError(f"expected {layout.n_bins} coefficients, got {theta.shape}")
    if not np.all(np.isfinite(theta) & (theta > 0)):
        raise DomainError("all theta entries must be finite and positive")
    return theta


def _check_grid(inc: IncrementSet, layout: BinLayout) -> None:
    if not inc.equidistant:
        raise DomainError("the pseudo-likelihood requires equidistant observation times")
    if inc.increments.size != layout.n or inc.bin_sums.size != layout.n_bins:
        raise DimensionError("increment set does not match the bin layout")


def log_pseudo_likelihood(theta: ArrayLike, inc: IncrementSet, layout: BinLayout) -> float:
    """Gaussian log pseudo-likelihood, summed increment by increment."""
    theta = _check_theta(theta, layout)
    _check_grid(inc, layout)
    var = theta[layout.bin_of_increment()] * layout.T / layout.n
    y = inc.increments
    return float(np.sum(-0.5 * np.log(2 * np.pi * var) - y * y / (2 * var)))


def binned_log_likelihood(theta: ArrayLike, inc: IncrementSet, layout: BinLayout) -> float:
    """The theta-dependent part of the log pseudo-likelihood, from bin sums only.

    ``log_pseudo_likelihood = binned_log_likelihood + likelihood_constant``.
    """
    theta = _check_theta(theta, layout)
    _check_grid(inc, layout)
    m_k = layout.counts
    return float(
        -np.sum(0.5 * m_k * np.log(theta) + layout.n * inc.bin_sums / (2 * layout.T * theta))
    )


def likelihood_constant(layout: BinLayout) -> float:
    return -0.5 * layout.n * np.log(2 * np.pi * layout.T / layout.n)
