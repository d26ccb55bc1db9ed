from dataclasses import dataclass

import numpy as np
import scipy.linalg
from typing_extensions import final

from ..emulator import (
    DataSegment,
    GpParams,
    LookupTable,
    PriorConfig,
    SegmentTerms,
    path_log_likelihood,
    segment_terms,
)


@final
@dataclass(frozen=True)
class ChainState:
    params: GpParams
    table: LookupTable
    terms: SegmentTerms
    log_post: float


def lookup_log_density(table: LookupTable, params: GpParams) -> float:
    """Log density of the grid values under N(H beta, sigma2_f A)."""
    resid = table.d - table.H @ params.beta
    white = scipy.linalg.solve_triangular(table.chol, resid, lower=True)
    n = table.grid.n
    return float(
        -0.5 * n * np.log(2 * np.pi * params.sigma2_f)
        - 0.5 * table.log_det()
        - 0.5 * (white @ white) / params.sigma2_f
    )


def log_posterior(
    params: GpParams,
    table: LookupTable,
    terms: SegmentTerms,
    segment: DataSegment,
    prior: PriorConfig,
) -> float:
    """Unnormalised log posterior of (D, theta) given the segment."""
    return (
        prior.log_prior(params)
        + lookup_log_density(table, params)
        + path_log_likelihood(segment, table, params, terms=terms)
    )


def make_state(
    params: GpParams,
    table: LookupTable,
    segment: DataSegment,
    prior: PriorConfig,
) -> ChainState:
    terms = segment_terms(segment, table)
    return ChainState(
        params=params,
        table=table,
        terms=terms,
        log_post=log_posterior(params, table, terms, segment, prior),
    )
