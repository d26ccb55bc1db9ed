from .chain import (
    DEFAULT_N_BURNIN,
    DEFAULT_N_TOTAL,
    ChainOutput,
    initial_state,
    run_chain,
    sample_prior_draws,
)
from .gibbs import (
    beta_full_conditional,
    gibbs_update_beta,
    gibbs_update_lookup,
    lookup_full_conditional,
)
from .state import ChainState, log_posterior, lookup_log_density, make_state
from .tmcmc import (
    DEFAULT_SCALE,
    EPSILON_LAWS,
    TmcmcConfig,
    additive_proposal,
    draw_epsilon,
    tmcmc_step,
    tmcmc_update_positive_params,
)

__all__: list[str] = [
    "DEFAULT_N_BURNIN",
    "DEFAULT_N_TOTAL",
    "DEFAULT_SCALE",
    "EPSILON_LAWS",
    "ChainOutput",
    "ChainState",
    "TmcmcConfig",
    "additive_proposal",
    "beta_full_conditional",
    "draw_epsilon",
    "gibbs_update_beta",
    "gibbs_update_lookup",
    "initial_state",
    "log_posterior",
    "lookup_full_conditional",
    "lookup_log_density",
    "make_state",
    "run_chain",
    "sample_prior_draws",
    "tmcmc_step",
    "tmcmc_update_positive_params",
]
