"""Point estimates, marginal credible bands and chain diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionError
from .model import BinLayout
from .sampler import ChainOutput

MIN_SAMPLES = 100


@dataclass
class PosteriorSummary:
    """Per-bin posterior summaries of ``s = sqrt(theta)`` and ``s^2 = theta``.

    Bands are central marginal intervals at ``level``.  The ``s`` band is the
    square root of the ``theta`` band, so both come from the same order
    statistics.
    """

    bin_edges: NDArray[np.float64]
    level: float
    s_mean: NDArray[np.float64]
    s_median: NDArray[np.float64]
    s_lo: NDArray[np.float64]
    s_hi: NDArray[np.float64]
    theta_mean: NDArray[np.float64]
    theta_median: NDArray[np.float64]
    theta_lo: NDArray[np.float64]
    theta_hi: NDArray[np.float64]
    n_samples: int
    acceptance_rate: float | None = None
    ess: NDArray[np.float64] | None = None
    alpha_summary: dict | None = None
    warnings: dict = field(default_factory=dict)

    @property
    def bin_left(self) -> NDArray[np.float64]:
        return self.bin_edges[:-1]

    @property
    def bin_right(self) -> NDArray[np.float64]:
        return self.bin_edges[1:]

    def band_table(self) -> dict[str, NDArray[np.float64]]:
        """Columns of the band CSV, in output order."""
        return {
            "bin_left": self.bin_left,
            "bin_right": self.bin_right,
            "s_mean": self.s_mean,
            "s_lo": self.s_lo,
            "s_hi": self.s_hi,
            "theta_mean": self.theta_mean,
            "theta_lo": self.theta_lo,
            "theta_hi": self.theta_hi,
        }

    def diagnostics(self) -> dict:
        return {
            "level": self.level,
            "n_samples": self.n_samples,
            "acceptance_rate": self.acceptance_rate,
            "ess_min": None if self.ess is None else float(np.min(self.ess)),
            "ess_median": None if self.ess is None else float(np.median(self.ess)),
            "ess": None if self.ess is None else [float(e) for e in self.ess],
            "alpha": self.alpha_summary,
            "warnings": dict(self.warnings),
        }


def credible_band(samples: ArrayLike, level: float) -> tuple[NDArray, NDArray]:
    """Central interval from linearly interpolated order statistics (axis 0)."""
    if not 0 < level < 1:
        raise ValueError(f"band level must lie in (0, 1), got {level}")
    samples = np.asarray(samples, dtype=float)
    lo, hi = np.quantile(samples, [(1 - level) / 2, (1 + level) / 2], axis=0, method="linear")
    return lo, hi


def summarize(
    chain: ChainOutput | ArrayLike,
    layout: BinLayout,
    level: float = 0.95,
    with_ess: bool = True,
) -> PosteriorSummary:
    """Summarize kept theta samples (``chain.theta`` or a bare sample matrix)."""
    theta = np.asarray(chain.theta if isinstance(chain, ChainOutput) else chain, dtype=float)
    if theta.ndim != 2 or theta.shape[1] != layout.n_bins:
        raise DimensionError(f"expected samples of shape (L, {layout.n_bins}), got {theta.shape}")
    if theta.shape[0] < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} kept samples, got {theta.shape[0]}")
    th_lo, th_hi = credible_band(theta, level)
    th_med = np.median(theta, axis=0)
    s = np.sqrt(theta)

    acc = alpha = None
    warnings: dict = {}
    if isinstance(chain, ChainOutput):
        acc = chain.acceptance_rate
        warnings = chain.warnings
        if chain.alpha_trace.size:
            alpha = alpha_trace_summary(chain.alpha_trace)
    ess = np.array([effective_sample_size(col) for col in theta.T]) if with_ess else None

    return PosteriorSummary(
        bin_edges=layout.edges.copy(),
        level=level,
        s_mean=s.mean(axis=0),
        s_median=np.sqrt(th_med),
        s_lo=np.sqrt(th_lo),
        s_hi=np.sqrt(th_hi),
        theta_mean=theta.mean(axis=0),
        theta_median=th_med,
        theta_lo=th_lo,
        theta_hi=th_hi,
        n_samples=theta.shape[0],
        acceptance_rate=acc,
        ess=ess,
        alpha_summary=alpha,
        warnings=warnings,
    )


def alpha_trace_summary(trace: ArrayLike) -> dict:
    trace = np.asarray(trace, dtype=float)
    q05, q50, q95 = np.quantile(trace, [0.05, 0.5, 0.95])
    out = {
        "mean": float(trace.mean()),
        "sd": float(trace.std(ddof=1)) if trace.size > 1 else 0.0,
        "q05": float(q05),
        "median": float(q50),
        "q95": float(q95),
    }
    if trace.size >= MIN_SAMPLES:
        out["ess"] = effective_sample_size(trace)
    return out


def autocorrelation(x: ArrayLike) -> NDArray[np.float64]:
    """Sample autocorrelation at all lags via FFT (biased, normalized to 1 at lag 0)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    x = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n]
    return acov / acov[0]


def effective_sample_size(trace: ArrayLike) -> float:
    """ESS with Geyer's initial positive sequence truncation.

    Autocorrelations are summed in adjacent pairs until the first pair with a
    nonpositive sum.  A constant trace has ESS 1 by convention.
    """
    x = np.asarray(trace, dtype=float)
    n = x.size
    if n < 2 or np.all(x == x[0]):
        return 1.0
    rho = autocorrelation(x)
    pairs = rho[: 2 * (n // 2)].reshape(-1, 2).sum(axis=1)
    nonpos = np.flatnonzero(pairs <= 0)
    stop = nonpos[0] if nonpos.size else pairs.size
    # sum_{lag >= 1} rho = (sum of positive pairs) - rho_0
    tau = -1.0 + 2.0 * pairs[:stop].sum()
    return float(n / max(tau, 1.0 / n))
