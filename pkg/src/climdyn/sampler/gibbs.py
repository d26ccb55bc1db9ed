import numpy as np
import scipy.linalg

from ..emulator import DataSegment, PriorConfig, moments_from_terms
from ..errors import SingularPrecision
from .state import ChainState, log_posterior


def _cholesky(matrix: np.ndarray, block: str) -> np.ndarray:
    try:
        return scipy.linalg.cholesky(0.5 * (matrix + matrix.T), lower=True)
    except np.linalg.LinAlgError:
        raise SingularPrecision(block)


def _step_variances(state: ChainState) -> np.ndarray:
    _, variance = moments_from_terms(state.terms, state.table.d, state.params)
    return variance


##############################################################################
# Coefficients
##############################################################################


def beta_full_conditional(
    state: ChainState, segment: DataSegment, prior: PriorConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Precision, lower Cholesky factor of it, and mean of beta's conditional."""
    table, params, terms = state.table, state.params, state.terms
    H = table.H
    Ainv_H = table.solve(H)
    v = _step_variances(state)
    G = terms.G
    y = segment.values - terms.W @ table.d
    prior_precision = np.linalg.inv(prior.Sigma_beta0)
    precision = (
        prior_precision
        + H.T @ Ainv_H / params.sigma2_f
        + G.T @ (G / v[:, np.newaxis])
    )
    rhs = (
        prior_precision @ prior.beta0
        + Ainv_H.T @ table.d / params.sigma2_f
        + G.T @ (y / v)
    )
    chol = _cholesky(precision, "beta")
    mean = scipy.linalg.cho_solve((chol, True), rhs)
    return precision, chol, mean


def gibbs_update_beta(
    state: ChainState,
    segment: DataSegment,
    prior: PriorConfig,
    rng: np.random.Generator,
) -> ChainState:
    _, chol, mean = beta_full_conditional(state, segment, prior)
    z = rng.standard_normal(len(mean))
    beta = mean + scipy.linalg.solve_triangular(chol.T, z, lower=False)
    params = state.params.replace(beta=beta)
    return ChainState(
        params=params,
        table=state.table,
        terms=state.terms,
        log_post=log_posterior(params, state.table, state.terms, segment, prior),
    )


##############################################################################
# Look-up table
##############################################################################


def _lookup_system(
    state: ChainState, segment: DataSegment
) -> tuple[np.ndarray, np.ndarray]:
    """Lower Cholesky factor of M = A / sigma2_f + S' diag(1/v) S, and the mean."""
    table, params, terms = state.table, state.params, state.terms
    A = table.corr
    v = _step_variances(state)
    y = segment.values - terms.G @ params.beta
    M = A / params.sigma2_f + terms.S.T @ (terms.S / v[:, np.newaxis])
    chol = _cholesky(M, "lookup table")
    rhs = table.H @ params.beta / params.sigma2_f + terms.S.T @ (y / v)
    return chol, A @ scipy.linalg.cho_solve((chol, True), rhs)


def lookup_full_conditional(
    state: ChainState, segment: DataSegment
) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance A M^-1 A of the grid values given everything else."""
    chol, mean = _lookup_system(state, segment)
    A = state.table.corr
    cov = A @ scipy.linalg.cho_solve((chol, True), A)
    return mean, 0.5 * (cov + cov.T)


def gibbs_update_lookup(
    state: ChainState,
    segment: DataSegment,
    prior: PriorConfig,
    rng: np.random.Generator,
) -> ChainState:
    chol, mean = _lookup_system(state, segment)
    z = rng.standard_normal(state.table.grid.n)
    d = mean + state.table.corr @ scipy.linalg.solve_triangular(chol.T, z, lower=False)
    table = state.table.with_d(d)
    return ChainState(
        params=state.params,
        table=table,
        terms=state.terms,
        log_post=log_posterior(state.params, table, state.terms, segment, prior),
    )
