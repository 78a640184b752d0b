"""End-to-end fitting: transform, bin, sample (one or more chains), summarize."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import (
    BinLayout,
    IncrementSet,
    ObservationRecord,
    build_bin_layout,
    compute_increments,
    layout_from_bin_count,
)
from .sampler import ChainOutput, SamplerConfig, run_igmc_sampler, run_iig_sampler
from .sde import log_transform, returns_path
from .summary import PosteriorSummary, summarize

TRANSFORMS = ("none", "log", "returns")
VAGUE_ALPHA1 = 1e-6


def apply_transform(record: ObservationRecord, transform: str) -> ObservationRecord:
    if transform == "none":
        return record
    if transform == "log":
        return log_transform(record)
    if transform == "returns":
        return returns_path(record)
    raise ValueError(f"unknown transform {transform!r}; choose from {TRANSFORMS}")


def make_layout(n: int, T: float, bins: int | None = None, bin_width: int | None = None) -> BinLayout:
    if (bins is None) == (bin_width is None):
        raise ValueError("give exactly one of bins or bin_width")
    if bins is not None:
        return layout_from_bin_count(n, T, bins)
    return build_bin_layout(n, T, bin_width)


def chain_rngs(seed: int, chains: int) -> list[np.random.Generator]:
    """One independent stream per chain, split from a single seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(chains)]


def _run_one(args):
    prior, config, inc, layout, a0, b0, rng = args
    if prior == "iig":
        return run_iig_sampler(config, inc, layout, a0=a0, b0=b0, rng=rng)
    return run_igmc_sampler(config, inc, layout, rng=rng)


def run_chains(
    config: SamplerConfig,
    inc: IncrementSet,
    layout: BinLayout,
    prior: str = "igmc",
    chains: int = 1,
    a0: float = 0.1,
    b0: float = 0.1,
) -> list[ChainOutput]:
    """Run ``chains`` independent chains; results come back in chain order."""
    if prior not in ("igmc", "iig"):
        raise ValueError(f"unknown prior {prior!r}")
    if chains < 1:
        raise ValueError(f"need at least one chain, got {chains}")
    jobs = [(prior, config, inc, layout, a0, b0, rng) for rng in chain_rngs(config.seed, chains)]
    workers = min(chains, os.cpu_count() or 1)
    if workers == 1:
        return [_run_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def merge_chains(outputs: list[ChainOutput]) -> ChainOutput:
    if len(outputs) == 1:
        return outputs[0]
    warnings: dict = {}
    for out in outputs:
        for key, count in out.warnings.items():
            warnings[key] = warnings.get(key, 0) + count
    zetas = [o.zeta for o in outputs]
    return ChainOutput(
        theta=np.concatenate([o.theta for o in outputs]),
        alpha_trace=np.concatenate([o.alpha_trace for o in outputs]),
        zeta=None if any(z is None for z in zetas) else np.concatenate(zetas),
        accepted=sum(o.accepted for o in outputs),
        proposals=sum(o.proposals for o in outputs),
        proposal_draws=sum(o.proposal_draws for o in outputs),
        warnings=warnings,
    )


@dataclass
class FitResult:
    record: ObservationRecord
    layout: BinLayout
    increments: IncrementSet
    chains: list[ChainOutput]
    summary: PosteriorSummary


def fit(
    record: ObservationRecord,
    config: SamplerConfig,
    bins: int | None = None,
    bin_width: int | None = None,
    prior: str = "igmc",
    a0: float = 0.1,
    b0: float = 0.1,
    level: float = 0.95,
    transform: str = "none",
    chains: int = 1,
) -> FitResult:
    record = apply_transform(record, transform)
    if not record.equidistant:
        raise DomainError("fitting requires equidistant observation times")
    layout = make_layout(record.n, record.T, bins, bin_width)
    inc = compute_increments(record, layout)
    outputs = run_chains(config, inc, layout, prior=prior, chains=chains, a0=a0, b0=b0)
    summary = summarize(merge_chains(outputs), layout, level)
    return FitResult(record, layout, inc, outputs, summary)
