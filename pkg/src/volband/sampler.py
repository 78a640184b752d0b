"""Gibbs sampler for the IGMC posterior, with a Metropolis-within-Gibbs step
for the tied hyperparameter ``alpha = alpha_zeta``, and the exact sampler for
the independent inverse gamma (IIG) baseline prior.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln, log_ndtr

from .errors import DimensionError, DomainError, NumericalError
from .model import BinLayout, IncrementSet
from .prior import (
    HyperParams,
    IGMCState,
    clip_positive,
    inverse_gamma_logpdf,
    sample_inverse_gamma,
    theta_conditional_params_all,
    zeta_conditional_params_all,
)

logger = logging.getLogger(__name__)

MAX_PROPOSAL_REDRAWS = 1000


@dataclass(frozen=True)
class SamplerConfig:
    """Run settings for the IGMC Gibbs sampler.

    ``iterations`` counts all sweeps including the ``burn_in`` ones.  When
    ``alpha_prior`` is set, ``alpha = alpha_zeta`` carries an
    ``IG(*alpha_prior)`` hyperprior and is updated by a random-walk
    Metropolis step; otherwise ``alpha`` (and ``alpha_zeta``, defaulting to
    ``alpha``) are held fixed.
    """

    iterations: int = 200_000
    burn_in: int = 1_000
    thinning: int = 1
    alpha1: float = 0.1
    alpha_prior: tuple[float, float] | None = (0.3, 0.3)
    alpha: float | None = None
    alpha_zeta: float | None = None
    sigma: float = 1.0
    target_accept: float = 0.5
    adapt_window: int = 50
    seed: int = 0
    keep_zeta: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be positive, got {self.iterations}")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError(f"need 0 <= burn_in < iterations, got {self.burn_in}")
        if self.thinning < 1:
            raise ValueError(f"thinning must be positive, got {self.thinning}")
        if not self.alpha1 > 0:
            raise DomainError(f"alpha1 must be positive, got {self.alpha1}")
        if self.alpha_prior is not None:
            a, b = self.alpha_prior
            if not (a > 0 and b > 0):
                raise DomainError(f"hyperprior shape/scale must be positive, got {self.alpha_prior}")
        elif self.alpha is None or not self.alpha > 0:
            raise DomainError("fixed mode needs a positive alpha")
        if self.alpha_zeta is not None and not self.alpha_zeta > 0:
            raise DomainError(f"alpha_zeta must be positive, got {self.alpha_zeta}")
        if not self.sigma > 0:
            raise DomainError(f"proposal scale must be positive, got {self.sigma}")
        if not 0 < self.target_accept < 1:
            raise ValueError(f"target acceptance must lie in (0, 1), got {self.target_accept}")
        if self.adapt_window < 1:
            raise ValueError(f"adaptation window must be positive, got {self.adapt_window}")

    @property
    def hyperprior(self) -> bool:
        return self.alpha_prior is not None

    @property
    def kept(self) -> int:
        return (self.iterations - self.burn_in) // self.thinning

    def initial_hyperparams(self) -> HyperParams:
        if self.hyperprior:
            a, b = self.alpha_prior
            alpha = b / (a - 1) if a > 1 else 1.0
            return HyperParams.tied_at(self.alpha1, alpha)
        alpha_zeta = self.alpha if self.alpha_zeta is None else self.alpha_zeta
        return HyperParams(self.alpha1, self.alpha, alpha_zeta)


@dataclass
class ChainOutput:
    theta: NDArray[np.float64]
    alpha_trace: NDArray[np.float64]
    zeta: NDArray[np.float64] | None = None
    accepted: int = 0
    proposals: int = 0
    proposal_draws: int = 0
    sigma: float | None = None
    burn_in_acceptance_rate: float | None = None
    warnings: dict = field(default_factory=dict)

    @property
    def n_kept(self) -> int:
        return self.theta.shape[0]

    @property
    def acceptance_rate(self) -> float | None:
        """Post-burn-in Metropolis acceptance rate (None if alpha was fixed)."""
        return self.accepted / self.proposals if self.proposals else None


def gibbs_sweep(
    state: IGMCState,
    inc: IncrementSet | None,
    layout: BinLayout,
    h: HyperParams,
    rng: np.random.Generator,
    with_data: bool = True,
    warnings: dict | None = None,
) -> IGMCState:
    """One systematic scan: all thetas (ascending), then all zetas.

    Given the zetas the thetas are conditionally independent, so the theta
    block is drawn in one vectorized call; likewise the zeta block.
    """
    shape, scale = theta_conditional_params_all(state, h, inc, layout, with_data)
    theta = clip_positive(sample_inverse_gamma(shape, scale, rng), warnings, "theta")
    new = IGMCState(theta=theta, zeta=state.zeta, alpha=state.alpha)
    if new.zeta.size:
        zshape, zscale = zeta_conditional_params_all(new, h)
        new.zeta = clip_positive(sample_inverse_gamma(zshape, zscale, rng), warnings, "zeta")
    return new


def _alpha_stats(state: IGMCState) -> tuple[int, float, float]:
    """Alpha-free sums entering the conditional of ``alpha``."""
    th_prev, th_next, z = state.theta[:-1], state.theta[1:], state.zeta
    log_sum = float(np.sum(np.log(th_prev) + np.log(th_next) + 2 * np.log(z)))
    inv_sum = float(np.sum((1 / z) * (1 / th_prev + 1 / th_next)))
    return state.zeta.size, log_sum, inv_sum


def _log_q(alpha: float, stats: tuple[int, float, float], prior: tuple[float, float]) -> float:
    links, log_sum, inv_sum = stats
    return float(
        inverse_gamma_logpdf(alpha, *prior)
        + 2 * links * (alpha * np.log(alpha) - gammaln(alpha))
        - alpha * log_sum
        - alpha * inv_sum
    )


def log_q_alpha(alpha: float, state: IGMCState, prior: tuple[float, float]) -> float:
    """Log of the unnormalised full conditional of tied ``alpha = alpha_zeta``.

    ``prior`` is ``(shape, scale)`` of the inverse gamma hyperprior on alpha.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    return _log_q(alpha, _alpha_stats(state), prior)


def mh_log_acceptance(
    alpha: float, proposal: float, state: IGMCState, prior: tuple[float, float], sigma: float
) -> float:
    """Log acceptance probability for a positive-truncated Gaussian random walk."""
    stats = _alpha_stats(state)
    return _mh_log_acceptance(alpha, proposal, stats, prior, sigma)


def _mh_log_acceptance(alpha, proposal, stats, prior, sigma) -> float:
    log_ratio = _log_q(proposal, stats, prior) - _log_q(alpha, stats, prior)
    log_ratio += log_ndtr(alpha / sigma) - log_ndtr(proposal / sigma)
    return min(0.0, float(log_ratio))


def mh_update_alpha(
    state: IGMCState,
    prior: tuple[float, float],
    sigma: float,
    rng: np.random.Generator,
    max_redraws: int = MAX_PROPOSAL_REDRAWS,
) -> tuple[float, bool, int]:
    """Metropolis step for ``alpha``; returns ``(alpha, accepted, proposals_drawn)``.

    Proposals ``alpha + N(0, sigma^2)`` are redrawn until positive.
    """
    if not sigma > 0:
        raise DomainError(f"proposal scale must be positive, got {sigma}")
    alpha = state.alpha
    for draws in range(1, max_redraws + 1):
        proposal = alpha + sigma * rng.standard_normal()
        if proposal > 0:
            break
    else:
        raise NumericalError(
            f"no positive alpha proposal in {max_redraws} draws (alpha={alpha}, sigma={sigma})"
        )
    log_a = _mh_log_acceptance(alpha, proposal, _alpha_stats(state), prior, sigma)
    if np.log(rng.random()) < log_a:
        return proposal, True, draws
    return alpha, False, draws


def adapt_sigma(history, sigma: float, target: float, c: float = 1.0) -> float:
    """Multiplicative proposal-scale update from a window of accept flags."""
    if len(history) == 0:
        return sigma
    rate = float(np.mean(history))
    return sigma * float(np.exp(c * (rate - target)))


def _check_inputs(inc: IncrementSet, layout: BinLayout) -> None:
    if inc.bin_sums.size != layout.n_bins or inc.increments.size != layout.n:
        raise DimensionError("increment set does not match the bin layout")
    if not inc.equidistant:
        raise DomainError("the sampler requires equidistant observation times")


def initial_state(
    inc: IncrementSet,
    layout: BinLayout,
    h: HyperParams,
    rng: np.random.Generator,
    warnings: dict | None = None,
) -> IGMCState:
    """Start at the per-bin estimates ``n Z_k / (T m_k)``, zetas from their conditional.

    Bins whose increments are all zero take the pooled estimate (or 1 for an
    entirely flat path).  Starting from a prior draw instead is fragile: with
    a vague ``alpha1`` the first theta overflows.
    """
    counts = layout.counts
    theta = layout.n * inc.bin_sums / (layout.T * counts)
    pooled = layout.n * inc.bin_sums.sum() / (layout.T * layout.n)
    theta = np.where(theta > 0, theta, pooled if pooled > 0 else 1.0)
    state = IGMCState(theta=clip_positive(theta, warnings, "theta"), zeta=np.ones(layout.n_bins - 1), alpha=h.alpha)
    if state.zeta.size:
        zshape, zscale = zeta_conditional_params_all(state, h)
        state.zeta = clip_positive(sample_inverse_gamma(zshape, zscale, rng), warnings, "zeta")
    return state


def run_igmc_sampler(
    config: SamplerConfig,
    inc: IncrementSet,
    layout: BinLayout,
    rng: np.random.Generator | None = None,
) -> ChainOutput:
    """Run the IGMC Gibbs sampler.

    The chain starts from :func:`initial_state`; each iteration is a Gibbs sweep followed, in hyperprior mode, by a Metropolis
    update of ``alpha``.  The proposal scale is adapted in windows during
    burn-in only.  With ``rng=None`` the generator is seeded from
    ``config.seed``.
    """
    _check_inputs(inc, layout)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    N = layout.n_bins
    h = config.initial_hyperparams()
    warnings: dict = {}
    state = initial_state(inc, layout, h, rng, warnings)

    kept = config.kept
    theta_out = np.empty((kept, N))
    alpha_out = np.empty(kept)
    zeta_out = np.empty((kept, N - 1)) if config.keep_zeta else None
    update_alpha = config.hyperprior and N > 1
    sigma = config.sigma
    window: list[bool] = []
    burn_accepts = burn_props = 0
    accepted = proposals = draws_total = 0
    slot = 0

    for it in range(config.iterations):
        state = gibbs_sweep(state, inc, layout, h, rng, warnings=warnings)
        if update_alpha:
            alpha, ok, draws = mh_update_alpha(state, config.alpha_prior, sigma, rng)
            if ok:
                state.alpha = alpha
                h = HyperParams.tied_at(config.alpha1, alpha)
            if it < config.burn_in:
                burn_accepts += ok
                burn_props += 1
                window.append(ok)
                if len(window) == config.adapt_window:
                    sigma = adapt_sigma(window, sigma, config.target_accept)
                    window.clear()
            else:
                accepted += ok
                proposals += 1
                draws_total += draws
        if it >= config.burn_in and (it - config.burn_in + 1) % config.thinning == 0:
            if slot < kept:
                theta_out[slot] = state.theta
                alpha_out[slot] = state.alpha
                if zeta_out is not None:
                    zeta_out[slot] = state.zeta
                slot += 1

    if warnings:
        logger.warning("values clipped to the positive float range: %s", warnings)
    return ChainOutput(
        theta=theta_out,
        alpha_trace=alpha_out,
        zeta=zeta_out,
        accepted=accepted,
        proposals=proposals,
        proposal_draws=draws_total,
        sigma=sigma if update_alpha else None,
        burn_in_acceptance_rate=burn_accepts / burn_props if burn_props else None,
        warnings=warnings,
    )


def run_iig_sampler(
    config: SamplerConfig,
    inc: IncrementSet,
    layout: BinLayout,
    a0: float = 0.1,
    b0: float = 0.1,
    rng: np.random.Generator | None = None,
) -> ChainOutput:
    """Exact posterior draws under independent ``IG(a0, b0)`` priors per bin.

    The posterior factorizes into ``IG(a0 + m_k / 2, b0 + n Z_k / (2T))``; the
    number of draws is ``config.kept`` so the output lines up with an IGMC
    run of the same configuration.
    """
    if not (a0 > 0 and b0 > 0):
        raise DomainError(f"IIG prior needs a0, b0 > 0, got ({a0}, {b0})")
    _check_inputs(inc, layout)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    shape, scale = iig_posterior_params(inc, layout, a0, b0)
    warnings: dict = {}
    theta = sample_inverse_gamma(shape, scale, rng, size=(config.kept, layout.n_bins))
    theta = clip_positive(theta, warnings, "theta")
    return ChainOutput(theta=theta, alpha_trace=np.empty(0), warnings=warnings)


def iig_posterior_params(
    inc: IncrementSet, layout: BinLayout, a0: float, b0: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    shape = a0 + layout.counts / 2.0
    scale = b0 + layout.n * inc.bin_sums / (2.0 * layout.T)
    return shape, scale
