from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import stats
from typing_extensions import final

from .._util.serialise import JsonValue, asdict_array
from ..emulator import (
    DataSegment,
    GpParams,
    PriorConfig,
    segment_terms,
)
from ..errors import (
    CholeskyFailure,
    ConfigError,
    NonFiniteLikelihood,
    SingularCorrelation,
)
from .state import ChainState, log_posterior

EPSILON_LAWS: tuple[str, ...] = ("half-normal", "uniform")

DEFAULT_SCALE = 0.05

# Proposals that raise these are rejected rather than aborting the chain.
REJECTED_ERRORS = (SingularCorrelation, CholeskyFailure, NonFiniteLikelihood)


@final
@dataclass(frozen=True)
class TmcmcConfig:
    scales: np.ndarray = field(default_factory=lambda: np.full(4, DEFAULT_SCALE))
    epsilon_law: str = "half-normal"

    def __post_init__(self) -> None:
        scales = np.atleast_1d(np.asarray(self.scales, dtype=float))
        if np.any(~(scales > 0)):
            raise ConfigError(f"TMCMC scales must be positive, found {scales.tolist()}")
        if self.epsilon_law not in EPSILON_LAWS:
            raise ConfigError(
                f"unknown epsilon law '{self.epsilon_law}', "
                f"expected one of {', '.join(EPSILON_LAWS)}"
            )
        object.__setattr__(self, "scales", scales)

    def draw_epsilon(self, rng: np.random.Generator) -> float:
        return draw_epsilon(self.epsilon_law, rng)

    def to_dict(self) -> JsonValue:
        return {"scales": asdict_array(self.scales), "epsilon_law": self.epsilon_law}


def draw_epsilon(law: str, rng: np.random.Generator) -> float:
    if law == "half-normal":
        return float(stats.halfnorm.rvs(random_state=rng))
    return float(rng.uniform())


def additive_proposal(
    x: np.ndarray,
    scales: Union[float, Sequence[float], np.ndarray],
    rng: np.random.Generator,
    law: str = "half-normal",
) -> np.ndarray:
    """Move every coordinate by +/- a_i * epsilon with one shared epsilon."""
    x = np.asarray(x, dtype=float)
    signs = rng.choice(np.array([-1.0, 1.0]), size=x.shape)
    return x + signs * np.asarray(scales) * draw_epsilon(law, rng)


def tmcmc_step(
    x: np.ndarray,
    log_target_x: float,
    log_target: Callable[[np.ndarray], float],
    scales: Union[float, Sequence[float], np.ndarray],
    rng: np.random.Generator,
    law: str = "half-normal",
    *,
    positive: bool = False,
) -> tuple[np.ndarray, float, bool]:
    """
    One additive TMCMC move.

    With positive set, x is strictly positive and moves on the log scale,
    and the acceptance ratio carries the Jacobian of the log transform.
    """
    x = np.asarray(x, dtype=float)
    if positive:
        log_x = np.log(x)
        log_proposal = additive_proposal(log_x, scales, rng, law)
        proposal = np.exp(log_proposal)
        log_jacobian = float(np.sum(log_proposal - log_x))
    else:
        proposal = additive_proposal(x, scales, rng, law)
        log_jacobian = 0.0
    try:
        log_target_proposal = float(log_target(proposal))
    except REJECTED_ERRORS:
        return x, log_target_x, False
    log_ratio = log_target_proposal - log_target_x + log_jacobian
    if np.isfinite(log_ratio) and np.log(rng.uniform()) < log_ratio:
        return proposal, log_target_proposal, True
    return x, log_target_x, False


def tmcmc_update_positive_params(
    state: ChainState,
    segment: DataSegment,
    prior: PriorConfig,
    cfg: TmcmcConfig,
    rng: np.random.Generator,
) -> tuple[ChainState, bool]:
    """Block move of (sigma2_f, sigma2_eps, r_1, r_2) on the log scale."""
    params = state.params
    theta = np.concatenate([[params.sigma2_f, params.sigma2_eps], params.r])
    candidates: dict[bytes, ChainState] = {}

    def _log_target(proposal: np.ndarray) -> float:
        new_params = GpParams(
            beta=params.beta,
            sigma2_f=float(proposal[0]),
            r=proposal[2:],
            sigma2_eps=float(proposal[1]),
        )
        table = state.table.with_r(new_params.r)
        terms = segment_terms(segment, table)
        log_post = log_posterior(new_params, table, terms, segment, prior)
        candidates[proposal.tobytes()] = ChainState(new_params, table, terms, log_post)
        return log_post

    theta, _, accepted = tmcmc_step(
        theta,
        state.log_post,
        _log_target,
        cfg.scales,
        rng,
        cfg.epsilon_law,
        positive=True,
    )
    if accepted:
        return candidates[theta.tobytes()], True
    return state, False
