from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np
import scipy.linalg
from scipy import stats
from typing_extensions import final

from .._util.logging import getLogger
from .._util.serialise import (
    JsonValue,
    asdict_array,
    asdict_float,
    parse_array,
    parse_field,
)
from ..emulator import check_smoothness, thinned_moments
from ..emulator.prior import DEFAULT_MU_R, DEFAULT_SIGMA2_R, DEFAULT_STRIDE, VARIANCE_FLOOR
from ..errors import CholeskyFailure

_LOGGER = getLogger(__name__)


def cholesky(matrix: np.ndarray, name: str) -> np.ndarray:
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        raise CholeskyFailure(name)


@final
@dataclass(frozen=True)
class MvGpParams:
    """Coefficients B (m x K, m = K + 2), covariances and K + 1 smoothness values."""

    B: np.ndarray
    Sigma_f: np.ndarray
    Sigma_eps: np.ndarray
    r: np.ndarray

    def __post_init__(self) -> None:
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        K = B.shape[1]
        if B.shape[0] != K + 2:
            raise ValueError(f"B must have K + 2 = {K + 2} rows, found {B.shape[0]}")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "Sigma_f", np.atleast_2d(np.asarray(self.Sigma_f, dtype=float)))
        object.__setattr__(
            self, "Sigma_eps", np.atleast_2d(np.asarray(self.Sigma_eps, dtype=float))
        )
        object.__setattr__(self, "r", check_smoothness(self.r))

    @property
    def K(self) -> int:
        return int(self.B.shape[1])

    @property
    def m(self) -> int:
        return int(self.B.shape[0])

    def replace(self, **changes: object) -> "MvGpParams":
        return replace(self, **changes)  # type: ignore[arg-type]

    def to_dict(self) -> JsonValue:
        return {
            "B": asdict_array(self.B),
            "Sigma_f": asdict_array(self.Sigma_f),
            "Sigma_eps": asdict_array(self.Sigma_eps),
            "r": asdict_array(self.r),
        }

    @staticmethod
    def from_dict(value: JsonValue) -> "MvGpParams":
        return MvGpParams(
            B=parse_field("B", parse_array)(value),
            Sigma_f=parse_field("Sigma_f", parse_array)(value),
            Sigma_eps=parse_field("Sigma_eps", parse_array)(value),
            r=parse_field("r", parse_array)(value),
        )


def matrix_normal_logpdf(
    X: np.ndarray, mean: np.ndarray, row_chol: np.ndarray, col_chol: np.ndarray
) -> float:
    """Matrix normal log density from lower Cholesky factors of both covariances."""
    n, K = X.shape
    Z = scipy.linalg.solve_triangular(row_chol, X - mean, lower=True)
    Z = scipy.linalg.solve_triangular(col_chol, Z.T, lower=True).T
    return float(
        -0.5 * n * K * np.log(2 * np.pi)
        - K * np.sum(np.log(np.diag(row_chol)))
        - n * np.sum(np.log(np.diag(col_chol)))
        - 0.5 * np.sum(Z**2)
    )


def sample_matrix_normal(
    mean: np.ndarray,
    row_chol: np.ndarray,
    col_chol: np.ndarray,
    rng: np.random.Generator,
    size: Optional[int] = None,
) -> np.ndarray:
    """M + L_row Z L_col' for standard normal Z; a leading axis of draws when size is set."""
    shape = mean.shape if size is None else (size, *mean.shape)
    return mean + row_chol @ rng.standard_normal(shape) @ col_chol.T


@final
@dataclass(frozen=True)
class MvPriorConfig:
    B0: np.ndarray
    row_cov: np.ndarray
    psi: float
    nu_f: float
    nu_eps: float
    Sigma_f0: np.ndarray
    Sigma_eps0: np.ndarray
    mu_r: float = DEFAULT_MU_R
    sigma2_r: float = DEFAULT_SIGMA2_R

    @property
    def K(self) -> int:
        return int(self.B0.shape[1])

    def log_prior(self, params: MvGpParams) -> float:
        """Inverse-Wishart covariances, B | Sigma_f matrix normal, log-normal r."""
        try:
            log_sigma = float(
                stats.invwishart.logpdf(params.Sigma_f, df=self.nu_f, scale=self.Sigma_f0)
                + stats.invwishart.logpdf(
                    params.Sigma_eps, df=self.nu_eps, scale=self.Sigma_eps0
                )
            )
        except (np.linalg.LinAlgError, ValueError):
            raise CholeskyFailure("covariance")
        log_B = matrix_normal_logpdf(
            params.B,
            self.B0,
            np.linalg.cholesky(self.row_cov),
            cholesky(self.psi * params.Sigma_f, "Sigma_f"),
        )
        log_r = np.log(params.r)
        log_prior_r = float(
            np.sum(stats.norm.logpdf(log_r, self.mu_r, np.sqrt(self.sigma2_r)) - log_r)
        )
        return log_sigma + log_B + log_prior_r

    def initial_params(self) -> MvGpParams:
        """B at its prior mean, both covariances at the inverse-Wishart scales, r at 1."""
        return MvGpParams(
            B=self.B0.copy(),
            Sigma_f=self.Sigma_f0.copy(),
            Sigma_eps=self.Sigma_eps0.copy(),
            r=np.ones(self.K + 1),
        )

    def to_dict(self) -> JsonValue:
        return {
            "B0": asdict_array(self.B0),
            "row_cov": asdict_array(self.row_cov),
            "psi": asdict_float(self.psi),
            "nu_f": asdict_float(self.nu_f),
            "nu_eps": asdict_float(self.nu_eps),
            "Sigma_f0": asdict_array(self.Sigma_f0),
            "Sigma_eps0": asdict_array(self.Sigma_eps0),
            "mu_r": asdict_float(self.mu_r),
            "sigma2_r": asdict_float(self.sigma2_r),
        }


def derive_mv_prior_config(
    ensemble: Union[np.ndarray, list[list[float]]],
    *,
    stride: int = DEFAULT_STRIDE,
    psi: float = 1.0,
) -> MvPriorConfig:
    """
    Priors from the thinned ensemble, a (years x K) matrix.

    The intercept row of B0 holds the thinned means; the scale matrices of
    both inverse-Wishart priors are half the thinned covariance.
    """
    ensemble = np.asarray(ensemble, dtype=float)
    if ensemble.ndim == 1:
        ensemble = ensemble[:, np.newaxis]
    K = ensemble.shape[1]
    mean, cov = thinned_moments(ensemble, stride)
    floor = VARIANCE_FLOOR * max(1.0, float(np.max(np.diag(cov))))
    if np.linalg.eigvalsh(cov).min() <= floor:
        _LOGGER.warning("Thinned ensemble covariance is singular; adding a small ridge")
        cov = cov + floor * np.eye(K)
    B0 = np.zeros((K + 2, K))
    B0[0] = np.atleast_1d(mean)
    return MvPriorConfig(
        B0=B0,
        row_cov=np.eye(K + 2),
        psi=psi,
        nu_f=float(K),
        nu_eps=float(K),
        Sigma_f0=cov / 2,
        Sigma_eps0=cov / 2,
    )
