"""Inverse Gamma Markov chain (IGMC) prior and its full conditionals.

The chain runs in the order ``theta_1, zeta_2, theta_2, ..., zeta_N, theta_N``::

    theta_1             ~ IG(alpha_1, alpha_1)
    zeta_{k+1} | theta_k ~ IG(alpha_zeta, alpha_zeta / theta_k)
    theta_{k+1} | zeta_{k+1} ~ IG(alpha, alpha / zeta_{k+1})

Bins are 0-based in this module.  ``zeta`` has length ``N - 1`` and
``zeta[j]`` is the latent variable linking bin ``j`` to bin ``j + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammaln

from .errors import DimensionError, DomainError
from .model import BinLayout, IncrementSet

TINY = np.finfo(float).tiny
HUGE = np.finfo(float).max


@dataclass(frozen=True)
class HyperParams:
    """IGMC hyperparameters.  ``tied`` records that ``alpha == alpha_zeta``."""

    alpha1: float
    alpha: float
    alpha_zeta: float

    def __post_init__(self):
        for name in ("alpha1", "alpha", "alpha_zeta"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")

    @property
    def tied(self) -> bool:
        return self.alpha == self.alpha_zeta

    @classmethod
    def tied_at(cls, alpha1: float, alpha: float) -> "HyperParams":
        return cls(alpha1=alpha1, alpha=alpha, alpha_zeta=alpha)


@dataclass
class IGMCState:
    theta: NDArray[np.float64]
    zeta: NDArray[np.float64]
    alpha: float

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.zeta = np.asarray(self.zeta, dtype=float)
        if self.zeta.size != max(self.theta.size - 1, 0):
            raise DimensionError(
                f"{self.theta.size} bins need {self.theta.size - 1} zetas, got {self.zeta.size}"
            )

    @property
    def n_bins(self) -> int:
        return self.theta.size

    def copy(self) -> "IGMCState":
        return IGMCState(self.theta.copy(), self.zeta.copy(), self.alpha)


def sample_inverse_gamma(shape, scale, rng: np.random.Generator, size=None):
    """Draw from ``IG(shape, scale)`` as ``scale / Gamma(shape, 1)``.

    Broadcasts over array-valued ``shape`` and ``scale``.
    """
    shape = np.asarray(shape, dtype=float)
    scale = np.asarray(scale, dtype=float)
    if np.any(~(shape > 0)) or np.any(~(scale > 0)):
        raise DomainError("inverse gamma shape and scale must be positive")
    if size is None:
        size = np.broadcast(shape, scale).shape or None
    draw = scale / rng.standard_gamma(shape, size=size)
    return draw if np.ndim(draw) else float(draw)


def clip_positive(x, counter: dict | None = None, name: str = "value"):
    """Clip to the positive normal floats, counting every clipped entry."""
    x = np.asarray(x, dtype=float)
    low = x < TINY
    high = x > HUGE
    if counter is not None:
        if low.any():
            counter[f"{name}_floor"] = counter.get(f"{name}_floor", 0) + int(low.sum())
        if high.any():
            counter[f"{name}_ceil"] = counter.get(f"{name}_ceil", 0) + int(high.sum())
    if low.any() or high.any():
        x = np.clip(x, TINY, HUGE)
    return x


def sample_prior_chain(
    h: HyperParams, n_bins: int, rng: np.random.Generator, theta1: float | None = None
) -> IGMCState:
    """Forward-simulate the IGMC prior.  ``theta1`` pins the first value if given."""
    if n_bins < 1:
        raise DomainError(f"need at least one bin, got {n_bins}")
    theta = np.empty(n_bins)
    zeta = np.empty(n_bins - 1)
    theta[0] = sample_inverse_gamma(h.alpha1, h.alpha1, rng) if theta1 is None else theta1
    for k in range(n_bins - 1):
        zeta[k] = sample_inverse_gamma(h.alpha_zeta, h.alpha_zeta / theta[k], rng)
        zeta[k] = clip_positive(zeta[k])
        theta[k + 1] = clip_positive(sample_inverse_gamma(h.alpha, h.alpha / zeta[k], rng))
    return IGMCState(theta=theta, zeta=zeta, alpha=h.alpha)


def one_step_prior_draws(
    theta: float, h: HyperParams, rng: np.random.Generator, size: int
) -> NDArray[np.float64]:
    """``size`` independent draws of ``theta_{k+1}`` given ``theta_k = theta``."""
    zeta = sample_inverse_gamma(h.alpha_zeta, h.alpha_zeta / theta, rng, size=size)
    return sample_inverse_gamma(h.alpha, h.alpha / zeta, rng)


def theta_conditional_params_all(
    state: IGMCState,
    h: HyperParams,
    inc: IncrementSet | None,
    layout: BinLayout,
    with_data: bool = True,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Shapes and scales of the inverse gamma full conditionals of every theta.

    With ``with_data=False`` (or ``inc=None``) the likelihood terms are dropped
    and the prior full conditionals are returned.
    """
    N = layout.n_bins
    if state.n_bins != N:
        raise DimensionError(f"state has {state.n_bins} bins, layout has {N}")
    shape = np.full(N, h.alpha)
    scale = np.empty(N)
    shape[0] = h.alpha1
    scale[0] = h.alpha1
    scale[1:] = h.alpha / state.zeta
    # every bin except the last also feeds the following zeta
    shape[:-1] += h.alpha_zeta
    scale[:-1] += h.alpha_zeta / state.zeta
    if with_data and inc is not None:
        if inc.bin_sums.size != N:
            raise DimensionError("increment set does not match the bin layout")
        shape += layout.counts / 2.0
        scale += layout.n * inc.bin_sums / (2.0 * layout.T)
    return shape, scale


def theta_full_conditional_params(
    k: int,
    state: IGMCState,
    h: HyperParams,
    inc: IncrementSet | None,
    layout: BinLayout,
    with_data: bool = True,
) -> tuple[float, float]:
    """``(shape, scale)`` of the full conditional of ``theta_k`` (0-based ``k``)."""
    if not 0 <= k < layout.n_bins:
        raise IndexError(f"bin index {k} out of range for {layout.n_bins} bins")
    shape, scale = theta_conditional_params_all(state, h, inc, layout, with_data)
    return float(shape[k]), float(scale[k])


def zeta_conditional_params_all(
    state: IGMCState, h: HyperParams
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    shape = np.full(state.zeta.size, h.alpha_zeta + h.alpha)
    scale = h.alpha_zeta / state.theta[:-1] + h.alpha / state.theta[1:]
    return shape, scale


def zeta_full_conditional_params(j: int, state: IGMCState, h: HyperParams) -> tuple[float, float]:
    """``(shape, scale)`` for ``zeta[j]``, the link between bins ``j`` and ``j + 1``."""
    if not 0 <= j < state.zeta.size:
        raise IndexError(f"zeta index {j} out of range for {state.zeta.size} links")
    return h.alpha_zeta + h.alpha, h.alpha_zeta / state.theta[j] + h.alpha / state.theta[j + 1]


def inverse_gamma_logpdf(x: ArrayLike, shape, scale) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=float)
    return shape * np.log(scale) - gammaln(shape) - (shape + 1) * np.log(x) - scale / x
