from .chain import (
    BLOCKS,
    MvChainConfig,
    MvChainOutput,
    MvState,
    chol_log_jacobian,
    chol_to_theta,
    mv_initial_state,
    mv_log_posterior,
    mv_run_chain,
    theta_to_chol,
)
from .dynamics import (
    MvLookupTable,
    batched_normal_logpdf,
    kronecker_moments,
    mv_conditional_moments,
    mv_lookup_conditional_on_first_step,
    mv_lookup_log_density,
    mv_lookup_prior,
    mv_moments_from_terms,
    mv_one_step_conditional,
    mv_path_log_likelihood,
    mv_simulate_path,
)
from .ensemble import FUNCTIONALS, ensemble_inverse_posterior, mv_future_segment
from .params import (
    MvGpParams,
    MvPriorConfig,
    cholesky,
    derive_mv_prior_config,
    matrix_normal_logpdf,
    sample_matrix_normal,
)

__all__: list[str] = [
    "BLOCKS",
    "FUNCTIONALS",
    "MvChainConfig",
    "MvChainOutput",
    "MvGpParams",
    "MvLookupTable",
    "MvPriorConfig",
    "MvState",
    "batched_normal_logpdf",
    "chol_log_jacobian",
    "chol_to_theta",
    "cholesky",
    "derive_mv_prior_config",
    "ensemble_inverse_posterior",
    "kronecker_moments",
    "matrix_normal_logpdf",
    "mv_conditional_moments",
    "mv_future_segment",
    "mv_initial_state",
    "mv_log_posterior",
    "mv_lookup_conditional_on_first_step",
    "mv_lookup_log_density",
    "mv_lookup_prior",
    "mv_moments_from_terms",
    "mv_one_step_conditional",
    "mv_path_log_likelihood",
    "mv_run_chain",
    "mv_simulate_path",
    "sample_matrix_normal",
    "theta_to_chol",
]
