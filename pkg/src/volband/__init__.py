"""Nonparametric Bayesian estimation of a time-dependent volatility function
from discrete observations of a one-dimensional SDE, using a histogram prior
whose bin heights follow an inverse Gamma Markov chain."""

from .errors import (
    DataError,
    DimensionError,
    DomainError,
    InvalidPartitionError,
    NumericalError,
    VolbandError,
)
from .model import (
    BinLayout,
    IncrementSet,
    ObservationRecord,
    binned_log_likelihood,
    build_bin_layout,
    compute_increments,
    layout_from_bin_count,
    likelihood_constant,
    log_pseudo_likelihood,
)
from .prior import (
    HyperParams,
    IGMCState,
    sample_inverse_gamma,
    sample_prior_chain,
    theta_full_conditional_params,
    zeta_full_conditional_params,
)
from .sampler import (
    ChainOutput,
    SamplerConfig,
    adapt_sigma,
    gibbs_sweep,
    log_q_alpha,
    mh_update_alpha,
    run_igmc_sampler,
    run_iig_sampler,
)
from .sde import (
    SdeSpec,
    blocks_volatility,
    euler_maruyama,
    log_transform,
    simulate_cir,
    subsample,
    to_returns,
)
from .pipeline import FitResult, fit
from .summary import PosteriorSummary, effective_sample_size, summarize

__version__ = "0.1.0"
