"""Euler-Maruyama simulation of ``dX = b(t, X) dt + s(t, X) dW`` and the
synthetic scenarios used to exercise the estimator.
"""

from __future__ import annotations

import warnings
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionError, DomainError, NumericalError
from .model import ObservationRecord

Coefficient = Callable[[float, "float | NDArray[np.float64]"], "float | NDArray[np.float64]"]

BLOCKS_TIMES = (0.1, 0.13, 0.15, 0.23, 0.25, 0.4, 0.44, 0.65, 0.76, 0.78, 0.81)
BLOCKS_HEIGHTS = (4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2)
BLOCKS_SCALE = 3.655606
BLOCKS_SHIFT = 10.0
_BLOCKS_CUMSUM = tuple(np.cumsum((0.0,) + BLOCKS_HEIGHTS))


@dataclass(frozen=True)
class SdeSpec:
    drift: Coefficient
    dispersion: Coefficient
    x0: float
    T: float = 1.0

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError(f"horizon must be positive, got {self.T}")


def euler_maruyama(
    spec: SdeSpec,
    grid_points: int,
    rng: np.random.Generator,
    paths: int | None = None,
) -> ObservationRecord | NDArray[np.float64]:
    """Explicit Euler scheme on ``grid_points`` equidistant points of ``[0, T]``.

    With ``paths=None`` a single path is returned as an
    :class:`ObservationRecord`.  With ``paths=P`` the coefficients are called
    on arrays of shape ``(P,)`` and the ``(P, grid_points)`` value matrix is
    returned.
    """
    if grid_points < 2:
        raise DomainError(f"need at least 2 grid points, got {grid_points}")
    steps = grid_points - 1
    dt = spec.T / steps
    sqdt = np.sqrt(dt)
    times = np.arange(grid_points) * spec.T / steps

    if paths is None:
        noise = rng.standard_normal(steps) * sqdt
        x = np.empty(grid_points)
        x[0] = xj = float(spec.x0)
        b, s = spec.drift, spec.dispersion
        for j in range(steps):
            t = times[j]
            try:
                xj = xj + b(t, xj) * dt + s(t, xj) * noise[j]
            except OverflowError:
                xj = np.inf
            if not np.isfinite(xj):
                raise NumericalError(f"non-finite state at step {j + 1}", step=j + 1)
            x[j + 1] = xj
        return ObservationRecord(times, x)

    x = np.empty((paths, grid_points))
    x[:, 0] = spec.x0
    for j in range(steps):
        t = times[j]
        xj = x[:, j]
        x[:, j + 1] = xj + spec.drift(t, xj) * dt + spec.dispersion(t, xj) * sqdt * rng.standard_normal(paths)
        if not np.all(np.isfinite(x[:, j + 1])):
            raise NumericalError(f"non-finite state at step {j + 1}", step=j + 1)
    return x


def subsample(path: ObservationRecord, n: int) -> ObservationRecord:
    """Keep every ``(grid_points - 1) / n``-th point, ``n + 1`` points in total."""
    steps = path.n
    if n < 1 or steps % n:
        raise DimensionError(f"{steps} grid intervals are not divisible into n={n}")
    stride = steps // n
    return ObservationRecord(path.times[::stride], path.values[::stride])


def subsample_indices(grid_points: int, n: int) -> NDArray[np.int64]:
    steps = grid_points - 1
    if n < 1 or steps % n:
        raise DimensionError(f"{steps} grid intervals are not divisible into n={n}")
    return np.arange(0, grid_points, steps // n)


def blocks_volatility(t: ArrayLike) -> float | NDArray[np.float64]:
    """Vertically shifted blocks function; ``K(0) = 1/2`` at the jump times."""
    if np.ndim(t) == 0:
        t = float(t)
        lo = bisect_left(BLOCKS_TIMES, t)
        hi = bisect_right(BLOCKS_TIMES, t)
        total = _BLOCKS_CUMSUM[lo] + 0.5 * (_BLOCKS_CUMSUM[hi] - _BLOCKS_CUMSUM[lo])
        return BLOCKS_SHIFT + BLOCKS_SCALE * total
    t = np.asarray(t, dtype=float)
    jumps = np.asarray(BLOCKS_TIMES)
    heights = np.asarray(BLOCKS_HEIGHTS)
    kernel = (1 + np.sign(t[..., None] - jumps)) / 2
    return BLOCKS_SHIFT + BLOCKS_SCALE * (kernel * heights).sum(axis=-1)


def blocks_spec(x0: float = 2.0, T: float = 1.0) -> SdeSpec:
    """Blocks volatility with the strong linear drift ``-10 x + 20``."""
    return SdeSpec(
        drift=lambda t, x: -10.0 * x + 20.0,
        dispersion=lambda t, x: blocks_volatility(t),
        x0=x0,
        T=T,
    )


def constant_spec(s: float, x0: float = 0.0, T: float = 1.0) -> SdeSpec:
    return SdeSpec(drift=lambda t, x: 0.0 * x, dispersion=lambda t, x: s + 0.0 * x, x0=x0, T=T)


def cir_spec(eta1: float, eta2: float, eta3: float, x0: float, T: float = 1.0) -> SdeSpec:
    """Square-root process with the full-truncation guard ``sqrt(max(x, 0))``."""
    return SdeSpec(
        drift=lambda t, x: eta1 - eta2 * x,
        dispersion=lambda t, x: eta3 * np.sqrt(np.maximum(x, 0.0)),
        x0=x0,
        T=T,
    )


def simulate_cir(
    eta1: float,
    eta2: float,
    eta3: float,
    x0: float,
    T: float,
    grid_points: int,
    rng: np.random.Generator,
    n: int | None = None,
) -> tuple[ObservationRecord, NDArray[np.float64]]:
    """Simulate a CIR path and its realised volatility ``eta3 * sqrt(X_t)``.

    Both are returned on the fine grid, or on the ``n``-interval subsample
    when ``n`` is given.
    """
    if not x0 > 0:
        raise DomainError(f"CIR needs x0 > 0, got {x0}")
    if min(eta1, eta2, eta3) < 0:
        raise DomainError("CIR parameters must be nonnegative")
    if not 2 * eta1 > eta3**2:
        warnings.warn(
            f"Feller condition 2*eta1 > eta3^2 violated ({2 * eta1} <= {eta3 ** 2})",
            RuntimeWarning,
            stacklevel=2,
        )
    path = euler_maruyama(cir_spec(eta1, eta2, eta3, x0, T), grid_points, rng)
    if n is not None:
        path = subsample(path, n)
    vol = eta3 * np.sqrt(np.maximum(path.values, 0.0))
    return path, vol


def cir_mean(eta1: float, eta2: float, x0: float, t: ArrayLike) -> NDArray[np.float64]:
    """Exact ``E[X_t]`` of the CIR process (also the noise-free path)."""
    t = np.asarray(t, dtype=float)
    return x0 * np.exp(-eta2 * t) + (eta1 / eta2) * (1 - np.exp(-eta2 * t))


def _values(obs) -> NDArray[np.float64]:
    return obs.values if isinstance(obs, ObservationRecord) else np.asarray(obs, dtype=float)


def log_transform(obs):
    """``Z_i = log(X_i / X_0)``.

    Accepts an :class:`ObservationRecord` (returning a record on the same
    times) or a bare sequence of values (returning an array).
    """
    values = _values(obs)
    if np.any(values <= 0):
        raise DomainError("log transform needs strictly positive values")
    z = np.log(values / values[0])
    return ObservationRecord(obs.times, z) if isinstance(obs, ObservationRecord) else z


def to_returns(obs) -> NDArray[np.float64]:
    """Simple returns ``(X_i - X_{i-1}) / X_{i-1}`` of a record or value sequence."""
    values = _values(obs)
    if np.any(values == 0):
        raise DomainError("returns need nonzero values")
    return np.diff(values) / values[:-1]


def returns_path(obs: ObservationRecord) -> ObservationRecord:
    """Cumulated returns, a path starting at 0 whose increments are the returns."""
    return ObservationRecord(obs.times, np.concatenate(([0.0], np.cumsum(to_returns(obs)))))
