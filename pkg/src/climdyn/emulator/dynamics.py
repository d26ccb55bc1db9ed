import hashlib
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import stats
from typing_extensions import TypeAlias, final

from .._util.serialise import JsonValue, asdict_array
from ..errors import NonFiniteLikelihood
from .grid import basis, input_matrix
from .lookup import GpParams, LookupTable

Seed: TypeAlias = Union[None, int, np.random.SeedSequence, np.random.Generator]


def as_generator(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


##############################################################################
# Data segments
##############################################################################


@final
@dataclass(frozen=True)
class DataSegment:
    """
    Consecutive values x_a..x_b of a series together with the known x_(a-1).

    When first_step_marginal is set and the segment starts at index 1, the
    first value is scored under the marginal law of the emulator rather than
    under the look-up-table conditional.
    """

    start_index: int
    known_prev: Union[float, np.ndarray]
    values: np.ndarray
    first_step_marginal: bool = False
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def end_index(self) -> int:
        return self.start_index + len(self) - 1

    @property
    def dim(self) -> int:
        return 1 if self.values.ndim == 1 else int(self.values.shape[1])

    @property
    def uses_marginal_first_step(self) -> bool:
        return self.first_step_marginal and self.start_index == 1 and len(self) > 0

    @property
    def t_index(self) -> np.ndarray:
        return np.arange(self.start_index, self.start_index + len(self))

    @property
    def previous(self) -> np.ndarray:
        """x_(t-1) for every x_t in the segment."""
        known = np.asarray(self.known_prev, dtype=float)[np.newaxis, ...]
        return np.concatenate([known, self.values[:-1]], axis=0)

    def inputs(self) -> np.ndarray:
        return input_matrix(self.t_index, self.previous)

    @property
    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        digest.update(f"{self.start_index}:{self.first_step_marginal}:".encode())
        digest.update(np.ascontiguousarray(self.known_prev, dtype=float).tobytes())
        digest.update(np.ascontiguousarray(self.values).tobytes())
        return digest.hexdigest()[:16]

    def to_dict(self) -> JsonValue:
        return {
            "label": self.label,
            "start_index": self.start_index,
            "known_prev": asdict_array(self.known_prev),
            "values": asdict_array(self.values),
            "first_step_marginal": self.first_step_marginal,
            "fingerprint": self.fingerprint,
        }


##############################################################################
# Conditional moments
##############################################################################


@final
@dataclass(frozen=True)
class SegmentTerms:
    """The parts of the one-step moments of a segment that depend on r only."""

    H: np.ndarray
    Hz: np.ndarray
    S: np.ndarray
    W: np.ndarray
    reduction: np.ndarray
    marginal_first: bool

    @property
    def G(self) -> np.ndarray:
        """Rows h(z_t)' - s_t' A^-1 H, the coefficient of beta in each mean."""
        return self.Hz - self.W @ self.H


def segment_terms(segment: DataSegment, table: LookupTable) -> SegmentTerms:
    z = segment.inputs()
    S = table.cross(z)
    W = S @ table.corr_inv
    reduction = np.einsum("ij,ij->i", W, S)
    Hz = basis(z)
    marginal_first = segment.uses_marginal_first_step
    if marginal_first:
        # Zero correlations turn the first row into the marginal law.
        S[0] = 0.0
        W[0] = 0.0
        reduction[0] = 0.0
    return SegmentTerms(
        H=table.H,
        Hz=Hz,
        S=S,
        W=W,
        reduction=reduction,
        marginal_first=marginal_first,
    )


def moments_from_terms(
    terms: SegmentTerms,
    d: np.ndarray,
    params: GpParams,
    *,
    include_noise: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    resid = d - terms.H @ params.beta
    mean = terms.Hz @ params.beta + terms.W @ resid
    variance = params.sigma2_f * np.maximum(0.0, 1.0 - terms.reduction)
    if include_noise:
        variance = variance + params.sigma2_eps
    return mean, variance


def conditional_moments(
    table: LookupTable,
    params: GpParams,
    z: np.ndarray,
    *,
    include_noise: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised one-step moments at each row of inputs z."""
    table.check(params)
    z = np.atleast_2d(z)
    S = table.cross(z)
    W = S @ table.corr_inv
    mean = basis(z) @ params.beta + W @ (table.d - table.H @ params.beta)
    variance = params.sigma2_f * np.maximum(0.0, 1.0 - np.einsum("ij,ij->i", W, S))
    if include_noise:
        variance = variance + params.sigma2_eps
    return mean, variance


def one_step_conditional(
    x_prev: float,
    t_next: int,
    table: LookupTable,
    params: GpParams,
    include_noise: bool = True,
) -> tuple[float, float]:
    """Mean and variance of x_(t_next) given x_(t_next - 1) = x_prev."""
    z = input_matrix(np.array([t_next]), np.array([x_prev]))
    mean, variance = conditional_moments(table, params, z, include_noise=include_noise)
    return float(mean[0]), float(variance[0])


def marginal_first_step(x0: float, params: GpParams) -> tuple[float, float]:
    """Moments of x_1 given x_0 before any look-up-table conditioning."""
    z = input_matrix(np.array([1]), np.array([x0]))
    return float(basis(z)[0] @ params.beta), params.sigma2_f + params.sigma2_eps


##############################################################################
# Paths
##############################################################################


def simulate_path(
    x0: float,
    t_range: tuple[int, int],
    table: LookupTable,
    params: GpParams,
    seed: Seed = None,
    *,
    first_step_marginal: bool = False,
) -> np.ndarray:
    """
    Simulate x_first..x_last forward from the known x_(first - 1) = x0.

    The bounds of t_range are inclusive.
    """
    first, last = t_range
    if last < first:
        raise ValueError(f"Empty time range {first}..{last}")
    table.check(params)
    rng = as_generator(seed)
    resid = table.solve(table.d - table.H @ params.beta)
    path = np.empty(last - first + 1)
    prev = float(x0)
    for i, t in enumerate(range(first, last + 1)):
        if i == 0 and first_step_marginal and first == 1:
            mean, variance = marginal_first_step(prev, params)
        else:
            z = input_matrix(np.array([t]), np.array([prev]))
            s = table.cross(z)[0]
            w = table.corr_inv @ s
            mean = float(basis(z)[0] @ params.beta + s @ resid)
            variance = params.sigma2_f * max(0.0, 1.0 - float(w @ s)) + params.sigma2_eps
        prev = float(rng.normal(mean, np.sqrt(variance)))
        path[i] = prev
    return path


def path_log_likelihood(
    segment: DataSegment,
    table: LookupTable,
    params: GpParams,
    *,
    terms: Optional[SegmentTerms] = None,
) -> float:
    table.check(params)
    if len(segment) == 0:
        return 0.0
    if terms is None:
        terms = segment_terms(segment, table)
    mean, variance = moments_from_terms(terms, table.d, params)
    bad = np.flatnonzero(~(variance > 0) | ~np.isfinite(variance))
    if bad.size > 0:
        index = int(bad[0])
        raise NonFiniteLikelihood(segment.start_index + index, float(variance[index]))
    return float(np.sum(stats.norm.logpdf(segment.values, mean, np.sqrt(variance))))
