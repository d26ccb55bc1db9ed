from typing import Optional

import numpy as np
from scipy.special import logsumexp
from typing_extensions import Literal, TypeAlias

from .._util.logging import getLogger
from ..emulator import DataSegment, PriorConfig, Seed, path_log_likelihood
from ..errors import ConfigError, EmptyChain
from ..sampler import ChainOutput, sample_prior_draws

_LOGGER = getLogger(__name__)

MarginalEstimator: TypeAlias = Literal["posterior", "prior"]


def draw_log_likelihoods(
    chain: ChainOutput,
    segment: DataSegment,
    n_draws: Optional[int] = None,
) -> np.ndarray:
    """Log likelihood of the segment under each of n_draws evenly spaced draws."""
    if len(chain) == 0:
        raise EmptyChain(chain.label or "chain")
    positions = chain.positions(n_draws) if n_draws else np.arange(len(chain))
    values = np.empty(len(positions))
    for i, position in enumerate(positions):
        params, table = chain.draw(int(position))
        values[i] = path_log_likelihood(segment, table, params)
    return values


def estimate_log_marginal(
    chain: ChainOutput,
    segment: DataSegment,
    *,
    n_draws: Optional[int] = None,
    estimator: MarginalEstimator = "posterior",
    prior: Optional[PriorConfig] = None,
    seed: Seed = None,
) -> float:
    """
    Log of the Monte Carlo average of the segment likelihood.

    The posterior estimator averages over the draws of a chain conditioned
    on the segment itself. The prior estimator averages over independent
    prior draws on the same design grid and needs the prior configuration.
    """
    if estimator == "prior":
        if prior is None:
            raise ConfigError("the prior marginal estimator needs a prior configuration")
        n = n_draws or len(chain)
        if n == 0:
            raise EmptyChain(chain.label or "chain")
        chain = sample_prior_draws(prior, chain.grid, n, seed)
        n_draws = None
    elif estimator == "posterior":
        chain.require_segment(segment)
    else:
        raise ConfigError(f"unknown marginal estimator '{estimator}'")
    values = draw_log_likelihoods(chain, segment, n_draws)
    result = float(logsumexp(values) - np.log(len(values)))
    _LOGGER.debug(f"Log marginal ({estimator}, {len(values)} draws): {result:.6g}")
    return result
