from typing import Optional

import numpy as np
from typing_extensions import TypeAlias

from ..emulator import (
    DataSegment,
    DesignGrid,
    LookupTable,
    Seed,
    SegmentTerms,
    as_generator,
    basis,
    corr_matrix,
    factor_correlation,
    first_input,
    input_matrix,
    segment_terms,
)
from ..errors import CholeskyFailure, NonFiniteLikelihood
from .params import MvGpParams, cholesky, matrix_normal_logpdf

# The univariate table stores a value matrix D (n x K) just as well as a vector.
MvLookupTable: TypeAlias = LookupTable


def mv_lookup_prior(
    grid: DesignGrid, params: MvGpParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean H B, row covariance A and column covariance Sigma_f of D."""
    corr, _ = factor_correlation(grid, params.r)
    return grid.H @ params.B, corr, params.Sigma_f


def kronecker_moments(
    mean: np.ndarray, row_cov: np.ndarray, col_cov: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Moments of the rows of a matrix normal stacked into one vector."""
    return mean.ravel(), np.kron(row_cov, col_cov)


def mv_lookup_conditional_on_first_step(
    grid: DesignGrid, params: MvGpParams, x0: np.ndarray, f10: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    corr, _ = factor_correlation(grid, params.r)
    z = first_input(np.asarray(x0, dtype=float))
    s = corr_matrix(z, grid.points, params.r)[0]
    h = basis(z)[0]
    mean = grid.H @ params.B + np.outer(s, np.asarray(f10, dtype=float) - h @ params.B)
    return mean, corr - np.outer(s, s), params.Sigma_f


def mv_moments_from_terms(
    terms: SegmentTerms, D: np.ndarray, params: MvGpParams
) -> tuple[np.ndarray, np.ndarray]:
    """Means (L x K) and the factor c_t with covariance c_t Sigma_f + Sigma_eps."""
    means = terms.Hz @ params.B + terms.W @ (D - terms.H @ params.B)
    return means, np.maximum(0.0, 1.0 - terms.reduction)


def mv_conditional_moments(
    table: MvLookupTable, params: MvGpParams, z: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised one-step means and covariances (L x K x K) at inputs z."""
    table.check(params)  # type: ignore[arg-type]
    z = np.atleast_2d(z)
    S = table.cross(z)
    W = S @ table.corr_inv
    means = basis(z) @ params.B + W @ (table.d - table.H @ params.B)
    scale = np.maximum(0.0, 1.0 - np.einsum("ij,ij->i", W, S))
    covs = scale[:, np.newaxis, np.newaxis] * params.Sigma_f + params.Sigma_eps
    return means, covs


def mv_one_step_conditional(
    x_prev: np.ndarray, t_next: int, table: MvLookupTable, params: MvGpParams
) -> tuple[np.ndarray, np.ndarray]:
    z = input_matrix(np.array([t_next]), np.asarray(x_prev, dtype=float)[np.newaxis, :])
    means, covs = mv_conditional_moments(table, params, z)
    return means[0], covs[0]


def batched_normal_logpdf(x: np.ndarray, means: np.ndarray, covs: np.ndarray) -> np.ndarray:
    """Log densities of each row of x under N(means_t, covs_t)."""
    try:
        chols = np.linalg.cholesky(covs)
    except np.linalg.LinAlgError:
        raise CholeskyFailure("one-step covariance")
    resid = (x - means)[..., np.newaxis]
    white = np.linalg.solve(chols, resid)[..., 0]
    K = x.shape[-1]
    log_det = 2.0 * np.sum(np.log(np.diagonal(chols, axis1=-2, axis2=-1)), axis=-1)
    return -0.5 * (K * np.log(2 * np.pi) + log_det + np.sum(white**2, axis=-1))


def mv_path_log_likelihood(
    segment: DataSegment,
    table: MvLookupTable,
    params: MvGpParams,
    *,
    terms: Optional[SegmentTerms] = None,
) -> float:
    table.check(params)  # type: ignore[arg-type]
    if len(segment) == 0:
        return 0.0
    if terms is None:
        terms = segment_terms(segment, table)
    means, scale = mv_moments_from_terms(terms, table.d, params)
    covs = scale[:, np.newaxis, np.newaxis] * params.Sigma_f + params.Sigma_eps
    values = batched_normal_logpdf(segment.values, means, covs)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise NonFiniteLikelihood(segment.start_index + int(bad[0]), float("nan"))
    return float(np.sum(values))


def mv_lookup_log_density(table: MvLookupTable, params: MvGpParams) -> float:
    """Log density of D under the matrix normal MN(H B, A, Sigma_f)."""
    return matrix_normal_logpdf(
        table.d, table.H @ params.B, table.chol, cholesky(params.Sigma_f, "Sigma_f")
    )


def mv_simulate_path(
    x0: np.ndarray,
    t_range: tuple[int, int],
    table: MvLookupTable,
    params: MvGpParams,
    seed: Seed = None,
) -> np.ndarray:
    """Simulate K-dimensional x_first..x_last forward from x_(first - 1) = x0."""
    first, last = t_range
    if last < first:
        raise ValueError(f"Empty time range {first}..{last}")
    table.check(params)  # type: ignore[arg-type]
    rng = as_generator(seed)
    resid = table.solve(table.d - table.H @ params.B)
    path = np.empty((last - first + 1, params.K))
    prev = np.asarray(x0, dtype=float)
    for i, t in enumerate(range(first, last + 1)):
        z = input_matrix(np.array([t]), prev[np.newaxis, :])
        s = table.cross(z)[0]
        scale = max(0.0, 1.0 - float(table.corr_inv @ s @ s))
        mean = basis(z)[0] @ params.B + s @ resid
        chol = cholesky(scale * params.Sigma_f + params.Sigma_eps, "one-step covariance")
        prev = mean + chol @ rng.standard_normal(params.K)
        path[i] = prev
    return path
