"""Command-line interface: ``volband simulate`` and ``volband fit``.

Every flag can also come from a flat ``key = value`` file given with
``--config`` or from ``VOLBAND_<COMMAND>_<FLAG>`` environment variables.
Precedence: command line, environment, config file, built-in default.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import functools
import logging
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .errors import DataError, DimensionError, DomainError, InvalidPartitionError, NumericalError
from .io import file_digest, ingest_csv, read_config_file, write_columns_csv, write_json, write_observations_csv
from .pipeline import TRANSFORMS, VAGUE_ALPHA1, fit as fit_pipeline
from .sampler import SamplerConfig
from .sde import (
    SdeSpec,
    blocks_spec,
    blocks_volatility,
    constant_spec,
    euler_maruyama,
    simulate_cir,
    subsample,
)

EXIT_DATA = 3
EXIT_NUMERIC = 4

log = logging.getLogger("volband")


def _load_config(ctx, param, value):
    if value is None:
        return value
    try:
        cfg = read_config_file(value)
    except (OSError, DataError) as exc:
        raise click.BadParameter(str(exc), ctx=ctx, param=param)
    # config keys are flag names; click's default_map is keyed by parameter name
    aliases = {}
    for p in ctx.command.params:
        for opt in p.opts:
            aliases[opt.lstrip("-").replace("-", "_").lower()] = p.name
    unknown = sorted(k for k in cfg if k.lower() not in aliases)
    if unknown:
        raise click.BadParameter(f"unknown keys in {value}: {', '.join(unknown)}", ctx=ctx, param=param)
    mapped = {aliases[k.lower()]: v for k, v in cfg.items()}
    ctx.default_map = {**(ctx.default_map or {}), **mapped}
    return value


config_option = click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    callback=_load_config,
    is_eager=True,
    expose_value=False,
    help="Flat 'key = value' file supplying defaults for any flag.",
)


def _exit_codes(func):
    """Map library exceptions onto the documented exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except InvalidPartitionError as exc:
            raise click.UsageError(str(exc))
        except (DataError, DomainError, DimensionError) as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(EXIT_DATA)
        except (NumericalError, FloatingPointError) as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(EXIT_NUMERIC)

    return wrapper


@click.group()
@click.version_option(__version__, prog_name="volband")
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose):
    """Bayesian volatility estimation with an inverse Gamma Markov chain prior."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(name)s: %(message)s")


def _custom_coefficient(expr: str, name: str):
    namespace = {"np": np, "sqrt": np.sqrt, "exp": np.exp, "log": np.log, "sin": np.sin,
                 "cos": np.cos, "abs": np.abs, "maximum": np.maximum, "minimum": np.minimum,
                 "pi": np.pi}
    try:
        code = compile(expr, f"<{name}>", "eval")
    except SyntaxError as exc:
        raise click.BadParameter(f"cannot parse {name} expression {expr!r}: {exc}")

    def coefficient(t, x):
        return eval(code, {"__builtins__": {}}, {**namespace, "t": t, "x": x})

    return coefficient


@main.command()
@config_option
@click.option("--scenario", type=click.Choice(["blocks", "cir", "constant", "custom"]), required=True)
@click.option("--grid", "grid_points", type=click.IntRange(min=2), default=800_001, show_default=True,
              help="Number of Euler grid points on [0, T].")
@click.option("--n", "n", type=click.IntRange(min=2), default=4000, show_default=True,
              help="Increments kept after subsampling.")
@click.option("--T", "horizon", type=float, default=1.0, show_default=True)
@click.option("--x0", type=float, default=None, help="Initial value (scenario default if omitted).")
@click.option("--s", "s_const", type=float, default=1.0, show_default=True, help="Constant volatility.")
@click.option("--eta1", type=float, default=6.0, show_default=True)
@click.option("--eta2", type=float, default=3.0, show_default=True)
@click.option("--eta3", type=float, default=2.0, show_default=True)
@click.option("--drift", "drift_expr", default="0", show_default=True,
              help="Custom drift expression in t and x.")
@click.option("--dispersion", "dispersion_expr", default="1", show_default=True,
              help="Custom dispersion expression in t and x.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--name", default=None, help="File stem for outputs (default: scenario).")
@_exit_codes
def simulate(scenario, grid_points, n, horizon, x0, s_const, eta1, eta2, eta3,
             drift_expr, dispersion_expr, seed, out_dir, name):
    """Simulate an Euler path and write path, truth and manifest files."""
    if (grid_points - 1) % n:
        raise click.UsageError(f"--grid minus one ({grid_points - 1}) must be divisible by --n ({n})")
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = name or scenario

    if scenario == "cir":
        x0 = 1.0 if x0 is None else x0
        path, vol = simulate_cir(eta1, eta2, eta3, x0, horizon, grid_points, rng, n=n)
    else:
        if scenario == "blocks":
            spec = blocks_spec(x0=2.0 if x0 is None else x0, T=horizon)
        elif scenario == "constant":
            spec = constant_spec(s_const, x0=0.0 if x0 is None else x0, T=horizon)
        else:
            spec = SdeSpec(
                drift=_custom_coefficient(drift_expr, "drift"),
                dispersion=_custom_coefficient(dispersion_expr, "dispersion"),
                x0=0.0 if x0 is None else x0,
                T=horizon,
            )
        path = subsample(euler_maruyama(spec, grid_points, rng), n)
        if scenario == "blocks":
            vol = blocks_volatility(path.times / horizon)
        elif scenario == "constant":
            vol = np.full(path.values.size, s_const)
        else:
            vol = np.abs([spec.dispersion(t, x) for t, x in zip(path.times, path.values)])

    path_file = write_observations_csv(out / f"{stem}_path.csv", path)
    truth_file = write_columns_csv(out / f"{stem}_truth.csv", {"time": path.times, "volatility": vol})
    params = click.get_current_context().params
    write_json(out / f"{stem}_manifest.json", {
        "command": "simulate",
        "version": __version__,
        "config": params,
        "seed": seed,
        "artifacts": {"path": path_file.name, "truth": truth_file.name},
        "wall_clock_seconds": round(time.perf_counter() - started, 3),
    })
    click.echo(f"wrote {path_file} ({path.values.size} rows) and {truth_file}")


@main.command()
@config_option
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--name", default="fit", show_default=True, help="File stem for outputs.")
@click.option("--bins", type=click.IntRange(min=1), default=None, help="Target number of bins N.")
@click.option("--bin-width", type=click.IntRange(min=1), default=None, help="Observations per bin m.")
@click.option("--prior", type=click.Choice(["igmc", "iig"]), default="igmc", show_default=True)
@click.option("--a0", type=float, default=0.1, show_default=True, help="IIG prior shape.")
@click.option("--b0", type=float, default=0.1, show_default=True, help="IIG prior scale.")
@click.option("--alpha1", type=float, default=0.1, show_default=True,
              help="Initial-distribution hyperparameter; 0 means the vague limit.")
@click.option("--hyperprior", nargs=2, type=float, default=(0.3, 0.3), show_default=True,
              help="IG shape and scale of the prior on alpha = alpha_zeta.")
@click.option("--alpha", "alpha_fixed", type=float, default=None,
              help="Fix alpha instead of sampling it (disables --hyperprior).")
@click.option("--alpha-zeta", type=float, default=None, help="Fixed alpha_zeta (default: --alpha).")
@click.option("--iters", type=click.IntRange(min=1), default=200_000, show_default=True)
@click.option("--burnin", type=click.IntRange(min=0), default=1000, show_default=True)
@click.option("--thin", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--sigma", type=float, default=1.0, show_default=True, help="Initial proposal scale.")
@click.option("--target-accept", type=float, default=0.5, show_default=True)
@click.option("--adapt-window", type=click.IntRange(min=1), default=50, show_default=True)
@click.option("--level", type=float, default=0.95, show_default=True, help="Credible band level.")
@click.option("--transform", type=click.Choice(TRANSFORMS), default="none", show_default=True)
@click.option("--horizon", type=float, default=None, help="Rescale times to [0, horizon] (default 1).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--chains", type=click.IntRange(min=1), default=1, show_default=True)
@_exit_codes
def fit(input_path, out_dir, name, bins, bin_width, prior, a0, b0, alpha1, hyperprior,
        alpha_fixed, alpha_zeta, iters, burnin, thin, sigma, target_accept, adapt_window,
        level, transform, horizon, seed, chains):
    """Fit the volatility of a CSV series and write bands, traces and reports."""
    if (bins is None) == (bin_width is None):
        raise click.UsageError("give exactly one of --bins or --bin-width")
    if not 0 < level < 1:
        raise click.UsageError("--level must lie in (0, 1)")
    started = time.perf_counter()
    record, meta = ingest_csv(input_path, horizon=horizon)
    try:
        config = SamplerConfig(
            iterations=iters,
            burn_in=burnin,
            thinning=thin,
            alpha1=VAGUE_ALPHA1 if alpha1 == 0 else alpha1,
            alpha_prior=None if alpha_fixed is not None else tuple(hyperprior),
            alpha=alpha_fixed,
            alpha_zeta=alpha_zeta,
            sigma=sigma,
            target_accept=target_accept,
            adapt_window=adapt_window,
            seed=seed,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))
    if config.kept < 100:
        raise click.UsageError(f"only {config.kept} kept samples; need at least 100")

    result = fit_pipeline(record, config, bins=bins, bin_width=bin_width, prior=prior,
                          a0=a0, b0=b0, level=level, transform=transform, chains=chains)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    band_file = write_columns_csv(out / f"{name}_bands.csv", result.summary.band_table())
    artifacts = {"bands": band_file.name}
    if prior == "igmc":
        trace = {"chain": [], "iteration": [], "alpha": []}
        for c, chain in enumerate(result.chains):
            k = chain.alpha_trace.size
            trace["chain"].extend([c] * k)
            trace["iteration"].extend(range(k))
            trace["alpha"].extend(chain.alpha_trace.tolist())
        artifacts["alpha_trace"] = write_columns_csv(out / f"{name}_alpha_trace.csv", trace).name
    diagnostics = result.summary.diagnostics()
    diagnostics.update({
        "n": result.layout.n,
        "bins": result.layout.n_bins,
        "bin_width": result.layout.m,
        "remainder": result.layout.r,
        "chains": [
            {"acceptance_rate": ch.acceptance_rate, "final_sigma": ch.sigma,
             "burn_in_acceptance_rate": ch.burn_in_acceptance_rate, "warnings": ch.warnings}
            for ch in result.chains
        ],
    })
    artifacts["diagnostics"] = write_json(out / f"{name}_diagnostics.json", diagnostics).name
    params = click.get_current_context().params
    write_json(out / f"{name}_manifest.json", {
        "command": "fit",
        "version": __version__,
        "config": params,
        "seed": seed,
        "seed_scheme": "numpy SeedSequence(seed).spawn(chains), one PCG64 stream per chain",
        "input": {"path": str(input_path), "sha256": file_digest(input_path), **meta},
        "artifacts": artifacts,
        "wall_clock_seconds": round(time.perf_counter() - started, 3),
    })
    click.echo(f"wrote {band_file} ({result.layout.n_bins} bins, {result.summary.n_samples} samples)")


def run():
    main(auto_envvar_prefix="VOLBAND")


if __name__ == "__main__":
    run()
