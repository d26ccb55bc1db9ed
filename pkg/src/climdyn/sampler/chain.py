from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from typing_extensions import final

from .._util.logging import getLogger
from .._util.progress_bar import ChainProgress
from .._util.serialise import JsonValue, asdict_array, asdict_float
from ..emulator import (
    DataSegment,
    DesignGrid,
    GpParams,
    LookupTable,
    PriorConfig,
    Seed,
    as_generator,
)
from ..errors import ChainMismatch, ConfigError, EmptyChain, SingularCorrelation
from .gibbs import gibbs_update_beta, gibbs_update_lookup
from .state import ChainState, make_state
from .tmcmc import TmcmcConfig, tmcmc_update_positive_params

_LOGGER = getLogger(__name__)

DEFAULT_N_TOTAL = 60000
DEFAULT_N_BURNIN = 10000

# Prior draws whose correlation matrix is numerically singular are redrawn.
MAX_PRIOR_REDRAWS = 100


@final
@dataclass(frozen=True)
class ChainOutput:
    """Retained draws of (beta, sigma2_f, sigma2_eps, r, D) after burn-in."""

    grid: DesignGrid
    beta: np.ndarray
    sigma2_f: np.ndarray
    sigma2_eps: np.ndarray
    r: np.ndarray
    d: np.ndarray
    log_post: np.ndarray
    n_total: int
    n_burnin: int
    acceptance_rates: dict[str, float] = field(default_factory=dict)
    fingerprint: str = ""
    label: str = ""

    def __len__(self) -> int:
        return int(self.sigma2_f.shape[0])

    def params(self, i: int) -> GpParams:
        return GpParams(
            beta=self.beta[i],
            sigma2_f=float(self.sigma2_f[i]),
            r=self.r[i],
            sigma2_eps=float(self.sigma2_eps[i]),
        )

    def draw(self, i: int) -> tuple[GpParams, LookupTable]:
        params = self.params(i)
        return params, LookupTable.build(self.grid, self.d[i], params.r)

    def positions(self, m: int) -> np.ndarray:
        """m evenly spaced draw positions; positions repeat when m > len(self)."""
        if len(self) == 0:
            raise EmptyChain(self.label or "chain")
        return np.rint(np.linspace(0, len(self) - 1, m)).astype(int)

    def require_segment(self, segment: DataSegment) -> None:
        if self.fingerprint != segment.fingerprint:
            raise ChainMismatch(
                expected=f"segment {segment.label or segment.fingerprint}",
                found=f"segment {self.fingerprint or 'unknown'}",
            )

    def summary(self) -> JsonValue:
        columns = {
            "sigma2_f": self.sigma2_f,
            "sigma2_eps": self.sigma2_eps,
            **{f"r_{i + 1}": self.r[:, i] for i in range(self.r.shape[1])},
            **{f"beta_{i}": self.beta[:, i] for i in range(self.beta.shape[1])},
        }
        parameters: dict[str, JsonValue] = {}
        if len(self) > 0:
            for name, values in columns.items():
                low, high = np.quantile(values, [0.025, 0.975])
                parameters[name] = {
                    "mean": asdict_float(np.mean(values)),
                    "lower": asdict_float(low),
                    "upper": asdict_float(high),
                }
        return {
            "label": self.label,
            "draws": len(self),
            "n_total": self.n_total,
            "n_burnin": self.n_burnin,
            "acceptance_rates": {
                name: asdict_float(rate) for name, rate in self.acceptance_rates.items()
            },
            "parameters": parameters,
        }

    def to_frame(self) -> pd.DataFrame:
        """One row per retained draw."""
        frame = {
            "draw": np.arange(len(self)),
            **{f"beta_{i}": self.beta[:, i] for i in range(self.beta.shape[1])},
            "sigma2_f": self.sigma2_f,
            "sigma2_eps": self.sigma2_eps,
            **{f"r_{i + 1}": self.r[:, i] for i in range(self.r.shape[1])},
            **{f"d_{j + 1}": self.d[:, j] for j in range(self.d.shape[1])},
            "log_post": self.log_post,
        }
        return pd.DataFrame(frame)

    def to_dict(self) -> JsonValue:
        return {
            "label": self.label,
            "fingerprint": self.fingerprint,
            "grid": self.grid.to_dict(),
            "summary": self.summary(),
            "mean_d": asdict_array(self.d.mean(axis=0)) if len(self) else None,
        }


def _empty_output(
    grid: DesignGrid, n: int, r_dim: int = 2, beta_dim: int = 3
) -> dict[str, np.ndarray]:
    return {
        "beta": np.empty((n, beta_dim)),
        "sigma2_f": np.empty(n),
        "sigma2_eps": np.empty(n),
        "r": np.empty((n, r_dim)),
        "d": np.empty((n, grid.n)),
        "log_post": np.empty(n),
    }


def initial_state(
    segment: DataSegment,
    prior: PriorConfig,
    grid: DesignGrid,
    rng: np.random.Generator,
) -> ChainState:
    """beta and the variances at their prior means, r at 1, D from its prior."""
    params = prior.initial_params()
    table = LookupTable.build(grid, np.zeros(grid.n), params.r)
    d = grid.H @ params.beta + np.sqrt(params.sigma2_f) * (
        table.chol @ rng.standard_normal(grid.n)
    )
    return make_state(params, table.with_d(d), segment, prior)


def run_chain(
    segment: DataSegment,
    prior: PriorConfig,
    grid: DesignGrid,
    n_total: int = DEFAULT_N_TOTAL,
    n_burnin: int = DEFAULT_N_BURNIN,
    cfg: Optional[TmcmcConfig] = None,
    seed: Seed = None,
    *,
    label: str = "",
    show_progress: bool = False,
) -> ChainOutput:
    """
    Sample (D, theta) given a data segment.

    Each iteration updates beta and D from their Gaussian full conditionals
    and then moves (sigma2_f, sigma2_eps, r) in one TMCMC block.
    """
    if n_total < 0 or not 0 <= n_burnin <= n_total:
        raise ConfigError(
            f"chain needs 0 <= n_burnin <= n_total, found {n_burnin} and {n_total}"
        )
    cfg = cfg or TmcmcConfig()
    rng = as_generator(seed)
    state = initial_state(segment, prior, grid, rng)
    out = _empty_output(grid, n_total - n_burnin)
    accepted = 0
    _LOGGER.debug(f"Starting chain '{label}' with {n_total} iterations")
    bar = ChainProgress(n_total, n_burnin, show=show_progress, prefix=label)
    for it in range(n_total):
        state = gibbs_update_beta(state, segment, prior, rng)
        state = gibbs_update_lookup(state, segment, prior, rng)
        state, moved = tmcmc_update_positive_params(state, segment, prior, cfg, rng)
        accepted += moved
        if it >= n_burnin:
            i = it - n_burnin
            out["beta"][i] = state.params.beta
            out["sigma2_f"][i] = state.params.sigma2_f
            out["sigma2_eps"][i] = state.params.sigma2_eps
            out["r"][i] = state.params.r
            out["d"][i] = state.table.d
            out["log_post"][i] = state.log_post
        bar.step(accepted)
    rates = {
        "beta": 1.0,
        "lookup": 1.0,
        "tmcmc": accepted / n_total if n_total > 0 else 0.0,
    }
    _LOGGER.info(
        f"Chain '{label}': {n_total - n_burnin} draws kept, "
        f"TMCMC acceptance {rates['tmcmc']:.3f}"
    )
    return ChainOutput(
        grid=grid,
        n_total=n_total,
        n_burnin=n_burnin,
        acceptance_rates=rates,
        fingerprint=segment.fingerprint,
        label=label,
        **out,
    )


def sample_prior_draws(
    prior: PriorConfig,
    grid: DesignGrid,
    n_draws: int,
    seed: Seed = None,
) -> ChainOutput:
    """Independent draws of (theta, D) from the prior, as a chain without burn-in."""
    rng = as_generator(seed)
    out = _empty_output(grid, n_draws)
    for i in range(n_draws):
        for _ in range(MAX_PRIOR_REDRAWS):
            params = prior.sample(rng)
            try:
                table = LookupTable.build(grid, np.zeros(grid.n), params.r)
            except SingularCorrelation:
                continue
            break
        else:
            raise SingularCorrelation(grid.n, params.r.tolist())
        d = grid.H @ params.beta + np.sqrt(params.sigma2_f) * (
            table.chol @ rng.standard_normal(grid.n)
        )
        out["beta"][i] = params.beta
        out["sigma2_f"][i] = params.sigma2_f
        out["sigma2_eps"][i] = params.sigma2_eps
        out["r"][i] = params.r
        out["d"][i] = d
        out["log_post"][i] = np.nan
    return ChainOutput(grid=grid, n_total=n_draws, n_burnin=0, label="prior", **out)
