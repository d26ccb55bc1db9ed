import contextlib
import sys
from collections.abc import Iterator
from pathlib import Path
from typing import Any, Optional

import click
import numpy as np
from typing_extensions import Literal

from ._util import logging
from ._util.io import read_json, write_csv, write_json, write_text
from ._version import __version__
from .config import PROFILES, RunConfig, load_run_config
from .errors import ClimdynError, ConfigError, ModeMisuse

_LOGGER = logging.getLogger(__name__)

MODEL_MODES: tuple[str, ...] = ("averaged", "ensemble-mean", "ensemble-max")

################################################################################
# Climdyn CLI
################################################################################


@click.group(name="climdyn")
@click.version_option(
    prog_name="climdyn",
    version=__version__,
)
@click.option(
    "--log-level",
    type=click.Choice(["ERROR", "WARNING", "INFO", "DEBUG"], case_sensitive=False),
    default="INFO",
)
@click.pass_context
def climdyn(
    ctx: click.Context,
    *,
    log_level: Literal["ERROR", "WARNING", "INFO", "DEBUG"],
) -> None:
    if ctx.obj is None:
        ctx.obj = {}
    ctx.obj["log_level"] = log_level
    level = {
        "ERROR": logging.ERROR,
        "WARNING": logging.WARNING,
        "INFO": logging.INFO,
        "DEBUG": logging.DEBUG,
    }.get(log_level.upper(), logging.INFO)
    logging.basicConfig(level=level)
    logging.setLevel(level)


@contextlib.contextmanager
def _exit_on_error() -> Iterator[None]:
    try:
        yield
    except ClimdynError as e:
        _LOGGER.error(str(e))
        sys.exit(e.exit_code)


def _resolve_config(
    config_path: Optional[str],
    profile: Optional[str],
    **overrides: Any,
) -> RunConfig:
    return load_run_config(config_path, profile=profile, overrides=overrides)


def _load_dataset(config: RunConfig, dataset_path: Optional[str]) -> Any:
    from .ingest import AlignedDataset, build_aligned_dataset, load_manifest

    if dataset_path is not None:
        try:
            return AlignedDataset.from_dict(read_json(dataset_path))
        except FileNotFoundError:
            raise ConfigError("file not found", location=dataset_path)
        except (TypeError, KeyError, ValueError) as e:
            raise ConfigError(f"not a dataset file: {e}", location=dataset_path)
    if config.manifest is None:
        raise ConfigError("pass --manifest, --dataset, or set 'manifest' in --config")
    observed, models = load_manifest(config.manifest)
    return build_aligned_dataset(observed, models)


def _out_dir(out_dir: str) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _common_options(func: Any) -> Any:
    options = [
        click.option("--manifest", type=click.Path(), default=None),
        click.option("--dataset", "dataset_path", type=click.Path(), default=None),
        click.option("--config", "config_path", type=click.Path(), default=None),
        click.option("--profile", type=click.Choice(PROFILES), default=None),
        click.option("--seed", type=int, default=None),
        click.option("-o", "--out-dir", type=click.Path(), default="."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


################################################################################
# Climdyn CLI - Ingest
################################################################################


@climdyn.command(name="ingest")
@click.option("--manifest", type=click.Path(), required=True)
@click.option("-o", "--out-dir", type=click.Path(), default=".")
def _ingest(manifest: str, out_dir: str) -> None:
    from .ingest import build_aligned_dataset, load_manifest

    with _exit_on_error():
        observed, models = load_manifest(manifest)
        dataset = build_aligned_dataset(observed, models)
        _LOGGER.info(
            f"Ingested '{dataset.observed.label}' and {dataset.K} models "
            f"with T0 = {dataset.T0}, T = {dataset.T}"
        )
        write_json(_out_dir(out_dir) / "dataset.json", dataset.to_dict())


################################################################################
# Climdyn CLI - Select
################################################################################


@climdyn.command(name="select")
@_common_options
@click.option(
    "--measure", type=click.Choice(["s1", "s2", "both"]), default="both"
)
@click.option("--workers", type=int, default=None)
def _select(
    manifest: Optional[str],
    dataset_path: Optional[str],
    config_path: Optional[str],
    profile: Optional[str],
    seed: Optional[int],
    out_dir: str,
    measure: str,
    workers: Optional[int],
) -> None:
    from ._report import render_gof_table, render_selection
    from .posterior import MEASURES
    from .selection import run_selection

    with _exit_on_error():
        config = _resolve_config(
            config_path, profile, manifest=manifest, seed=seed, workers=workers
        )
        dataset = _load_dataset(config, dataset_path)
        measures = MEASURES if measure == "both" else (measure,)
        report = run_selection(dataset, config, measures=measures, show_progress=True)
        out = _out_dir(out_dir)
        write_json(out / "selection.json", report.to_dict())
        write_csv(out / "curves.csv", report.curves_frame())
        write_text(out / "selection.md", render_selection(report))
        write_text(
            out / "gof.md",
            render_gof_table([result.gof for result in report.models]),
        )


################################################################################
# Climdyn CLI - Invert
################################################################################


def _parse_model(value: str, K: int) -> str:
    if value in MODEL_MODES:
        return value
    try:
        k = int(value)
    except ValueError:
        raise ConfigError(
            f"--model must be a model index or one of {', '.join(MODEL_MODES)}, "
            f"found '{value}'"
        )
    if not 1 <= k <= K:
        raise ConfigError(f"--model must lie in 1..{K}, found {k}")
    return str(k)


@climdyn.command(name="invert")
@_common_options
@click.option("--model", "model_mode", type=str, default="averaged")
@click.option("--prior-from", type=int, default=None)
@click.option("--chain", "chain_path", type=click.Path(), default=None)
@click.option("--dump-chain", type=click.Path(), default=None)
def _invert(
    manifest: Optional[str],
    dataset_path: Optional[str],
    config_path: Optional[str],
    profile: Optional[str],
    seed: Optional[int],
    out_dir: str,
    model_mode: str,
    prior_from: Optional[int],
    chain_path: Optional[str],
    dump_chain: Optional[str],
) -> None:
    from ._report import render_gof_table
    from .emulator import build_design_grid, derive_prior_config
    from .multivariate import MvChainOutput, ensemble_inverse_posterior, mv_future_segment
    from .posterior import (
        future_segment,
        goodness_of_fit,
        sample_inverse_posterior,
        summarize_paths,
    )
    from .sampler import TmcmcConfig, run_chain

    with _exit_on_error():
        config = _resolve_config(config_path, profile, manifest=manifest, seed=seed)
        dataset = _load_dataset(config, dataset_path)
        mode = _parse_model(model_mode, dataset.K)
        chain_seed, path_seed = np.random.SeedSequence(config.seed).spawn(2)
        out = _out_dir(out_dir)
        result: dict[str, Any] = {"scenario": config.scenario, "model": mode}

        if mode.startswith("ensemble-"):
            if chain_path is None:
                raise ModeMisuse(
                    mode, "requires a multivariate chain; run mv-fit and pass --chain"
                )
            if prior_from is not None:
                raise ModeMisuse(mode, "takes its priors from the multivariate chain")
            try:
                mv_chain = MvChainOutput.from_dict(read_json(chain_path))
            except FileNotFoundError:
                raise ConfigError("file not found", location=chain_path)
            except (TypeError, KeyError, ValueError) as e:
                raise ConfigError(f"not a multivariate chain dump: {e}", location=chain_path)
            # mv-fit may have kept only the leading models.
            dataset = dataset.restrict_models(mv_chain.K)
            paths = ensemble_inverse_posterior(
                mv_future_segment(dataset),
                mv_chain,
                dataset.x0,
                mode.split("-", 1)[1],
                config.n_paths,
                path_seed,
                origin_year=dataset.origin_year,
            )
            result["chain"] = mv_chain.summary()
        else:
            if mode == "averaged":
                series = dataset.averaged
                prior_series = series
                if prior_from is not None:
                    if not 1 <= prior_from <= dataset.K:
                        raise ConfigError(
                            f"--prior-from must lie in 1..{dataset.K}, found {prior_from}"
                        )
                    prior_series = dataset.models[prior_from - 1]
            else:
                if prior_from is not None:
                    raise ModeMisuse(mode, "always uses the priors of its own model")
                series = dataset.models[int(mode) - 1]
                prior_series = series
            prior = derive_prior_config(prior_series, stride=config.prior_stride)
            future = future_segment(dataset, series)
            chain = run_chain(
                future,
                prior,
                build_design_grid(config.grid_size, config.value_range, config.seed),
                config.n_total,
                config.n_burnin,
                TmcmcConfig(np.array(config.tmcmc_scales), config.epsilon_law),
                chain_seed,
                label=series.label,
                show_progress=True,
            )
            if dump_chain is not None:
                write_csv(dump_chain, chain.to_frame())
            paths = sample_inverse_posterior(
                future,
                chain,
                dataset.x0,
                config.n_paths,
                path_seed,
                origin_year=dataset.origin_year,
            )
            result["prior"] = prior.to_dict()
            result["chain"] = chain.summary()

        summary = summarize_paths(paths, alpha=config.alpha)
        gof = goodness_of_fit(
            paths,
            dataset.observed_current(),
            config.alpha,
            c=config.c,
            summary=summary,
            label=mode,
        )
        for name, report in gof.measures.items():
            _LOGGER.info(
                f"{name.upper()} = {report.observed:.4f}, "
                f"interval [{report.lower:.4f}, {report.upper:.4f}]: {report.verdict}"
            )
        result["paths"] = paths.to_dict()
        result["summary"] = summary.to_dict()
        result["gof"] = gof.to_dict()
        result["config"] = config.to_dict()
        write_csv(out / "density.csv", summary.to_frame())
        write_json(out / "invert.json", result)
        write_text(out / "gof.md", render_gof_table([gof]))


################################################################################
# Climdyn CLI - Forecast
################################################################################


@climdyn.command(name="forecast")
@_common_options
@click.option("--best-model", type=int, default=None)
@click.option("--dump-chain", type=click.Path(), default=None)
def _forecast(
    manifest: Optional[str],
    dataset_path: Optional[str],
    config_path: Optional[str],
    profile: Optional[str],
    seed: Optional[int],
    out_dir: str,
    best_model: Optional[int],
    dump_chain: Optional[str],
) -> None:
    from .emulator import build_design_grid, derive_prior_config
    from .posterior import (
        benchmark_band,
        forecast_table,
        observed_segment,
        sample_forward_posterior,
        summarize_paths,
    )
    from .sampler import TmcmcConfig, run_chain

    with _exit_on_error():
        config = _resolve_config(config_path, profile, manifest=manifest, seed=seed)
        dataset = _load_dataset(config, dataset_path)
        if best_model is not None and not 1 <= best_model <= dataset.K:
            raise ConfigError(f"--best-model must lie in 1..{dataset.K}, found {best_model}")
        chain_seed, path_seed = np.random.SeedSequence(config.seed).spawn(2)
        prior = derive_prior_config(dataset.observed, stride=config.prior_stride)
        observed = observed_segment(dataset)
        chain = run_chain(
            observed,
            prior,
            build_design_grid(config.grid_size, config.value_range, config.seed),
            config.n_total,
            config.n_burnin,
            TmcmcConfig(np.array(config.tmcmc_scales), config.epsilon_law),
            chain_seed,
            label=dataset.observed.label,
            show_progress=True,
        )
        if dump_chain is not None:
            write_csv(dump_chain, chain.to_frame())
        paths = sample_forward_posterior(
            observed,
            chain,
            dataset.T,
            config.n_paths,
            path_seed,
            origin_year=dataset.origin_year,
        )
        wide = summarize_paths(paths, alpha=config.alpha)
        narrow = summarize_paths(paths, mesh=wide.edges, alpha=0.5)
        band = benchmark_band(
            dataset.observed, config.benchmark_year, config.benchmark_halfwidth
        )
        model_values = None
        if best_model is not None:
            _, model_values = dataset.future(dataset.models[best_model - 1])
        table = forecast_table(
            wide, narrow, band, dataset.future(dataset.averaged)[1], model_values
        )
        inside = int(table["band_in_50"].sum())
        _LOGGER.info(
            f"Benchmark band lies inside the 50% interval in {inside} "
            f"of {len(table)} forecast years"
        )
        out = _out_dir(out_dir)
        write_csv(out / "forecast.csv", table)
        write_csv(out / "density.csv", wide.to_frame())
        write_json(
            out / "forecast.json",
            {
                "scenario": config.scenario,
                "band": band.to_dict(),
                "band_in_50": inside,
                "paths": paths.to_dict(),
                "summary": wide.to_dict(),
                "prior": prior.to_dict(),
                "chain": chain.summary(),
                "config": config.to_dict(),
            },
        )


################################################################################
# Climdyn CLI - Multivariate Fit
################################################################################


@climdyn.command(name="mv-fit")
@_common_options
@click.option("--dump-chain", type=click.Path(), default=None)
def _mv_fit(
    manifest: Optional[str],
    dataset_path: Optional[str],
    config_path: Optional[str],
    profile: Optional[str],
    seed: Optional[int],
    out_dir: str,
    dump_chain: Optional[str],
) -> None:
    from ._report import render_gof_table
    from .emulator import build_design_grid
    from .multivariate import (
        FUNCTIONALS,
        MvChainConfig,
        derive_mv_prior_config,
        ensemble_inverse_posterior,
        mv_future_segment,
        mv_run_chain,
    )
    from .posterior import goodness_of_fit, summarize_paths

    with _exit_on_error():
        config = _resolve_config(config_path, profile, manifest=manifest, seed=seed)
        dataset = _load_dataset(config, dataset_path)
        if config.max_models is not None and dataset.K > config.max_models:
            _LOGGER.warning(
                f"Keeping the first {config.max_models} of {dataset.K} models "
                f"under the '{config.profile}' profile"
            )
            dataset = dataset.restrict_models(config.max_models)
        chain_seed, *path_seeds = np.random.SeedSequence(config.seed).spawn(
            1 + len(FUNCTIONALS)
        )
        prior = derive_mv_prior_config(dataset.ensemble(), stride=config.prior_stride)
        future = mv_future_segment(dataset)
        chain = mv_run_chain(
            future,
            prior,
            build_design_grid(
                config.mv_grid_size, config.mv_value_range, config.seed, dim=dataset.K
            ),
            MvChainConfig(
                n_total=config.mv_n_total,
                n_burnin=config.mv_n_burnin,
                d_block_size=config.mv_d_block_size,
                scales=dict(config.mv_tmcmc_scales),
                epsilon_law=config.epsilon_law,
            ),
            chain_seed,
            labels=dataset.labels,
            show_progress=True,
        )
        out = _out_dir(out_dir)
        write_json(Path(dump_chain) if dump_chain else out / "mv_chain.json", chain.to_dict())
        reports = []
        result: dict[str, Any] = {
            "scenario": config.scenario,
            "chain": chain.summary(),
            "prior": prior.to_dict(),
        }
        for functional, path_seed in zip(FUNCTIONALS, path_seeds):
            origin = f"ensemble-{functional}"
            paths = ensemble_inverse_posterior(
                future,
                chain,
                dataset.x0,
                functional,
                config.n_paths,
                path_seed,
                origin_year=dataset.origin_year,
            )
            summary = summarize_paths(paths, alpha=config.alpha)
            gof = goodness_of_fit(
                paths,
                dataset.observed_current(),
                config.alpha,
                c=config.c,
                summary=summary,
                label=origin,
            )
            reports.append(gof)
            write_csv(out / f"density-{origin}.csv", summary.to_frame())
            result[origin] = {
                "paths": paths.to_dict(),
                "summary": summary.to_dict(),
                "gof": gof.to_dict(),
            }
        result["config"] = config.to_dict()
        write_json(out / "mv_fit.json", result)
        write_text(out / "gof.md", render_gof_table(reports))


if __name__ == "__main__":
    climdyn()
