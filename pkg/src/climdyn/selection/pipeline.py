import os
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np
import pandas as pd
from typing_extensions import final

from .._util.logging import getLogger
from .._util.serialise import JsonValue, asdict_array, asdict_float
from ..config import RunConfig
from ..emulator import DesignGrid, build_design_grid, derive_prior_config
from ..errors import ClimdynError, ConfigError, ModelPipelineFailure
from ..ingest import AlignedDataset
from ..posterior import (
    MEASURES,
    GofReport,
    MeasureReport,
    future_segment,
    goodness_of_fit,
    sample_inverse_posterior,
    summarize_paths,
)
from ..sampler import TmcmcConfig, run_chain
from .decision import DecisionCurve, alternative_probability, decision_curve, penalty_grid
from .marginal import estimate_log_marginal
from .mixture import ZetaPosterior, gibbs_zeta_p

_LOGGER = getLogger(__name__)


@final
@dataclass(frozen=True)
class HypothesisSpec:
    """The null for one model and discrepancy: its reference interval and inclusion."""

    measure: str
    lower: float
    upper: float
    observed: float
    inclusion: float

    def to_dict(self) -> JsonValue:
        return {
            "measure": self.measure,
            "lower": asdict_float(self.lower),
            "upper": asdict_float(self.upper),
            "observed": asdict_float(self.observed),
            "inclusion": asdict_float(self.inclusion),
        }


def inclusion_probability(report: MeasureReport, rule: str = "difference") -> float:
    """
    Posterior probability that S(reference) - S(observed) lies in [lower, upper].

    The "reference" rule drops the observed series and counts reference
    discrepancies inside their own interval, which is about 1 - alpha for
    every model; selection then rests on the marginal densities alone.
    """
    values = report.reference
    if rule == "difference":
        values = values - report.observed
    elif rule != "reference":
        raise ConfigError(f"unknown inclusion rule '{rule}'")
    return float(np.mean((values >= report.lower) & (values <= report.upper)))


def hypothesis_spec(measure: str, report: MeasureReport, rule: str) -> HypothesisSpec:
    return HypothesisSpec(
        measure=measure,
        lower=report.lower,
        upper=report.upper,
        observed=report.observed,
        inclusion=inclusion_probability(report, rule),
    )


##############################################################################
# Per-model pipeline
##############################################################################


@final
@dataclass(frozen=True)
class ModelTask:
    index: int
    dataset: AlignedDataset
    grid: DesignGrid
    config: RunConfig
    seed: np.random.SeedSequence
    show_progress: bool = False


@final
@dataclass(frozen=True)
class ModelResult:
    index: int
    label: str
    log_marginal: float
    gof: GofReport
    hypotheses: dict[str, HypothesisSpec]
    chain_summary: JsonValue = field(compare=False)


def run_model_pipeline(task: ModelTask) -> ModelResult:
    """
    Fit one model to the averaged future series and score it.

    The chain runs under priors from the model's own series; the inverse
    posterior it implies is checked against the observed series.
    """
    dataset, config = task.dataset, task.config
    model = dataset.models[task.index]
    try:
        chain_seed, marginal_seed, path_seed = task.seed.spawn(3)
        prior = derive_prior_config(model, stride=config.prior_stride)
        future = future_segment(dataset, dataset.averaged)
        chain = run_chain(
            future,
            prior,
            task.grid,
            config.n_total,
            config.n_burnin,
            TmcmcConfig(np.array(config.tmcmc_scales), config.epsilon_law),
            chain_seed,
            label=model.label,
            show_progress=task.show_progress,
        )
        log_marginal = estimate_log_marginal(
            chain,
            future,
            n_draws=config.marginal_draws,
            estimator=config.marginal_estimator,  # type: ignore[arg-type]
            prior=prior,
            seed=marginal_seed,
        )
        paths = sample_inverse_posterior(
            future,
            chain,
            dataset.x0,
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
            label=model.label,
        )
    except ClimdynError as e:
        raise ModelPipelineFailure(model.label, str(e))
    return ModelResult(
        index=task.index + 1,
        label=model.label,
        log_marginal=log_marginal,
        gof=gof,
        hypotheses={
            name: hypothesis_spec(name, gof[name], config.inclusion_rule)
            for name in MEASURES
        },
        chain_summary=chain.summary(),
    )


##############################################################################
# Selection
##############################################################################


@final
@dataclass(frozen=True)
class SelectionReport:
    scenario: str
    models: list[ModelResult]
    zeta: ZetaPosterior
    curves: dict[str, DecisionCurve]
    config: RunConfig
    timestamp: str = field(compare=False, default="")

    @property
    def K(self) -> int:
        return len(self.models)

    @property
    def best_model(self) -> dict[str, int]:
        return {name: curve.best_model for name, curve in self.curves.items()}

    def gof_table(self) -> list[dict[str, object]]:
        return [result.gof.table_row() for result in self.models]

    def curves_frame(self) -> pd.DataFrame:
        return pd.concat(
            [curve.to_frame() for curve in self.curves.values()], ignore_index=True
        )

    def to_dict(self) -> JsonValue:
        return {
            "scenario": self.scenario,
            "K": self.K,
            "labels": [result.label for result in self.models],
            "log_marginals": [asdict_float(result.log_marginal) for result in self.models],
            "zeta": self.zeta.to_dict(),
            "v": {name: asdict_array(curve.v) for name, curve in self.curves.items()},
            "curves": {name: curve.to_dict() for name, curve in self.curves.items()},
            "best_model": {
                name: {
                    "index": curve.best_model,
                    "label": self.models[curve.best_model - 1].label,
                    "threshold": asdict_float(curve.threshold)
                    if curve.threshold is not None
                    else None,
                    "tied": curve.tied,
                    "ambiguous_models": curve.ambiguous_models,
                }
                for name, curve in self.curves.items()
            },
            "hypotheses": [
                {name: spec.to_dict() for name, spec in result.hypotheses.items()}
                for result in self.models
            ],
            "gof_table": [result.gof.to_dict() for result in self.models],
            "chains": [result.chain_summary for result in self.models],
            "config": self.config.to_dict(),
            "timestamp": self.timestamp,
        }


def default_workers(K: int, workers: Optional[int] = None) -> int:
    return max(1, min(workers or os.cpu_count() or 1, K))


def run_selection(
    dataset: AlignedDataset,
    config: RunConfig,
    *,
    measures: Sequence[str] = MEASURES,
    workers: Optional[int] = None,
    show_progress: bool = False,
) -> SelectionReport:
    """
    Select the best of K models for the averaged series.

    Per-model pipelines run on a process pool and are seeded from
    SeedSequence(config.seed), so results do not depend on the pool size.
    """
    if config.max_models is not None and dataset.K > config.max_models:
        _LOGGER.warning(
            f"Keeping the first {config.max_models} of {dataset.K} models "
            f"under the '{config.profile}' profile"
        )
        dataset = dataset.restrict_models(config.max_models)
    if dataset.K < 2:
        raise ConfigError(f"model selection needs at least two models, found {dataset.K}")
    grid = build_design_grid(config.grid_size, config.value_range, config.seed)
    *model_seeds, mixture_seed = np.random.SeedSequence(config.seed).spawn(dataset.K + 1)
    n_workers = default_workers(dataset.K, workers or config.workers)
    tasks = [
        ModelTask(
            index=k,
            dataset=dataset,
            grid=grid,
            config=config,
            seed=model_seeds[k],
            show_progress=show_progress and n_workers == 1,
        )
        for k in range(dataset.K)
    ]
    _LOGGER.info(f"Running {dataset.K} model pipelines on {n_workers} worker(s)")
    if n_workers == 1:
        results = [run_model_pipeline(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run_model_pipeline, tasks))

    zeta = gibbs_zeta_p(
        [result.log_marginal for result in results],
        n_iter=config.gibbs_iter,
        n_burn=config.gibbs_burn,
        seed=mixture_seed,
    )
    grid_beta = penalty_grid(config.penalty_grid_size)
    curves: dict[str, DecisionCurve] = {}
    for name in measures:
        v = np.array(
            [
                alternative_probability(
                    float(zeta.zeta_prob[k]), result.hypotheses[name].inclusion
                )
                for k, result in enumerate(results)
            ]
        )
        curves[name] = decision_curve(v, grid_beta, measure=name)
        curve = curves[name]
        _LOGGER.info(
            f"Best model under {name.upper()}: {curve.best_model} "
            f"('{results[curve.best_model - 1].label}'), v = {curve.v.min():.4f}"
        )
        if len(curve.ambiguous_models) > 1:
            _LOGGER.warning(
                f"Models {curve.ambiguous_models} are indistinguishable under "
                f"{name.upper()} on this penalty grid"
            )
    return SelectionReport(
        scenario=config.scenario,
        models=results,
        zeta=zeta,
        curves=curves,
        config=config,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
