from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
import scipy.linalg
from typing_extensions import final

from .._util.serialise import JsonValue, asdict_array, asdict_float
from ..errors import SingularCorrelation, StaleCache
from .grid import DesignGrid, basis, input_matrix
from .kernel import check_smoothness, corr_matrix


@final
@dataclass(frozen=True)
class GpParams:
    beta: np.ndarray
    sigma2_f: float
    r: np.ndarray
    sigma2_eps: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float))
        object.__setattr__(self, "r", check_smoothness(self.r))

    def replace(self, **changes: object) -> "GpParams":
        return replace(self, **changes)  # type: ignore[arg-type]

    def to_dict(self) -> JsonValue:
        return {
            "beta": asdict_array(self.beta),
            "sigma2_f": asdict_float(self.sigma2_f),
            "r": asdict_array(self.r),
            "sigma2_eps": asdict_float(self.sigma2_eps),
        }


def factor_correlation(
    grid: DesignGrid, r: Union[Sequence[float], np.ndarray]
) -> tuple[np.ndarray, np.ndarray]:
    """The correlation matrix A of the grid and its lower Cholesky factor."""
    corr = corr_matrix(grid.points, grid.points, r)
    try:
        chol = scipy.linalg.cholesky(corr, lower=True)
    except np.linalg.LinAlgError:
        raise SingularCorrelation(grid.n, np.asarray(r).tolist())
    return corr, chol


@final
@dataclass(frozen=True)
class LookupTable:
    """
    A realisation of the emulated function on the design grid, together with
    the correlation matrix A, its Cholesky factor and its inverse for one r.
    """

    grid: DesignGrid
    d: np.ndarray
    r: np.ndarray
    corr: np.ndarray = field(repr=False)
    chol: np.ndarray = field(repr=False)
    corr_inv: np.ndarray = field(repr=False)

    @property
    def H(self) -> np.ndarray:
        return self.grid.H

    @staticmethod
    def build(
        grid: DesignGrid,
        d: Union[Sequence[float], np.ndarray],
        r: Union[Sequence[float], np.ndarray],
    ) -> "LookupTable":
        r = check_smoothness(r)
        corr, chol = factor_correlation(grid, r)
        corr_inv = scipy.linalg.cho_solve((chol, True), np.eye(grid.n))
        # Keep the cached inverse exactly symmetric.
        corr_inv = 0.5 * (corr_inv + corr_inv.T)
        return LookupTable(
            grid=grid,
            d=np.asarray(d, dtype=float),
            r=r,
            corr=corr,
            chol=chol,
            corr_inv=corr_inv,
        )

    def with_d(self, d: np.ndarray) -> "LookupTable":
        return replace(self, d=np.asarray(d, dtype=float))

    def with_r(self, r: Union[Sequence[float], np.ndarray]) -> "LookupTable":
        return LookupTable.build(self.grid, self.d, r)

    def check(self, params: GpParams) -> None:
        if not np.array_equal(self.r, params.r):
            raise StaleCache(self.r.tolist(), params.r.tolist())

    def cross(self, z: np.ndarray) -> np.ndarray:
        """Correlations s(z) between each row of z and every grid point."""
        return corr_matrix(z, self.grid.points, self.r)

    def solve(self, b: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve((self.chol, True), b)

    def log_det(self) -> float:
        return float(2.0 * np.sum(np.log(np.diag(self.chol))))

    def to_dict(self) -> JsonValue:
        return {"d": asdict_array(self.d), "r": asdict_array(self.r)}


def lookup_prior_moments(
    grid: DesignGrid, params: GpParams
) -> tuple[np.ndarray, np.ndarray]:
    corr, _ = factor_correlation(grid, params.r)
    return grid.H @ params.beta, params.sigma2_f * corr


def first_input(x0: Union[float, np.ndarray]) -> np.ndarray:
    """The input (1, x0) that predicts the first value after a known x0."""
    return input_matrix(np.array([1]), np.atleast_1d(np.asarray(x0, dtype=float))[np.newaxis, :])[0]


def lookup_conditional_on_first_step(
    grid: DesignGrid, params: GpParams, x0: float, f10: float
) -> tuple[np.ndarray, np.ndarray]:
    """Moments of the grid values given the function value f10 at (1, x0)."""
    corr, _ = factor_correlation(grid, params.r)
    z = first_input(x0)
    s = corr_matrix(z, grid.points, params.r)[0]
    h = basis(z)[0]
    mean = grid.H @ params.beta + s * (f10 - h @ params.beta)
    cov = params.sigma2_f * (corr - np.outer(s, s))
    return mean, cov
