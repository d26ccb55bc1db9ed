from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import stats
from typing_extensions import final

from .._util.logging import getLogger
from .._util.serialise import JsonValue, asdict_array, asdict_float
from ..errors import SeriesTooShort
from ..ingest import LogTempSeries, thin_series
from .lookup import GpParams

_LOGGER = getLogger(__name__)

DEFAULT_STRIDE = 5
DEFAULT_ALPHA = 4.01
DEFAULT_MU_R = -0.5
DEFAULT_SIGMA2_R = 1.0

# Constant series would give a degenerate inverse-gamma prior.
VARIANCE_FLOOR = 1e-10


@final
@dataclass(frozen=True)
class PriorConfig:
    beta0: np.ndarray
    Sigma_beta0: np.ndarray
    alpha_f: float
    gamma_f: float
    alpha_eps: float
    gamma_eps: float
    mu_r: float = DEFAULT_MU_R
    sigma2_r: float = DEFAULT_SIGMA2_R

    ##########################################################################
    # Densities
    ##########################################################################

    def log_prior_beta(self, beta: np.ndarray) -> float:
        return float(
            stats.multivariate_normal.logpdf(beta, mean=self.beta0, cov=self.Sigma_beta0)
        )

    def log_prior_r(self, r: np.ndarray) -> float:
        """Log-normal density of each smoothness parameter."""
        log_r = np.log(r)
        return float(
            np.sum(stats.norm.logpdf(log_r, self.mu_r, np.sqrt(self.sigma2_r)) - log_r)
        )

    def log_prior(self, params: GpParams) -> float:
        return (
            self.log_prior_beta(params.beta)
            + log_inverse_gamma(params.sigma2_f, self.alpha_f, self.gamma_f)
            + log_inverse_gamma(params.sigma2_eps, self.alpha_eps, self.gamma_eps)
            + self.log_prior_r(params.r)
        )

    ##########################################################################
    # Moments and draws
    ##########################################################################

    @property
    def mean_sigma2_f(self) -> float:
        return self.gamma_f / (self.alpha_f - 2)

    @property
    def mean_sigma2_eps(self) -> float:
        return self.gamma_eps / (self.alpha_eps - 2)

    def initial_params(self, r_dim: int = 2) -> GpParams:
        return GpParams(
            beta=self.beta0.copy(),
            sigma2_f=self.mean_sigma2_f,
            r=np.ones(r_dim),
            sigma2_eps=self.mean_sigma2_eps,
        )

    def sample(self, rng: np.random.Generator, r_dim: int = 2) -> GpParams:
        return GpParams(
            beta=rng.multivariate_normal(self.beta0, self.Sigma_beta0),
            sigma2_f=float(inverse_gamma(self.alpha_f, self.gamma_f).rvs(random_state=rng)),
            r=np.exp(rng.normal(self.mu_r, np.sqrt(self.sigma2_r), size=r_dim)),
            sigma2_eps=float(
                inverse_gamma(self.alpha_eps, self.gamma_eps).rvs(random_state=rng)
            ),
        )

    def to_dict(self) -> JsonValue:
        return {
            "beta0": asdict_array(self.beta0),
            "Sigma_beta0": asdict_array(self.Sigma_beta0),
            "alpha_f": asdict_float(self.alpha_f),
            "gamma_f": asdict_float(self.gamma_f),
            "alpha_eps": asdict_float(self.alpha_eps),
            "gamma_eps": asdict_float(self.gamma_eps),
            "mu_r": asdict_float(self.mu_r),
            "sigma2_r": asdict_float(self.sigma2_r),
        }


def inverse_gamma(alpha: float, gamma: float) -> "stats.rv_continuous":
    """The law with density proportional to s^(-(alpha+2)/2) exp(-gamma/(2s))."""
    return stats.invgamma(a=alpha / 2, scale=gamma / 2)


def log_inverse_gamma(value: float, alpha: float, gamma: float) -> float:
    return float(stats.invgamma.logpdf(value, alpha / 2, scale=gamma / 2))


def thinned_moments(
    series: Union[LogTempSeries, np.ndarray], stride: int = DEFAULT_STRIDE
) -> tuple[np.ndarray, np.ndarray]:
    """Mean and sample variance (or covariance, for columns) after thinning."""
    if isinstance(series, LogTempSeries):
        values = thin_series(series, stride).x
        length = len(series)
    else:
        values = np.asarray(series, dtype=float)[::stride]
        length = len(series)
    if len(values) < 2:
        raise SeriesTooShort(length, stride)
    return np.mean(values, axis=0), np.atleast_2d(np.cov(values, rowvar=False, ddof=1))


def derive_prior_config(
    series_for_hyperparams: LogTempSeries,
    *,
    stride: int = DEFAULT_STRIDE,
    alpha: float = DEFAULT_ALPHA,
) -> PriorConfig:
    mean, cov = thinned_moments(series_for_hyperparams, stride)
    variance = float(cov[0, 0])
    if not variance > VARIANCE_FLOOR:
        _LOGGER.warning(
            f"Series '{series_for_hyperparams.label}' is nearly constant; "
            f"flooring its variance at {VARIANCE_FLOOR:g}"
        )
        variance = VARIANCE_FLOOR
    a = variance / 2
    gamma = a * (alpha - 2)
    return PriorConfig(
        beta0=np.array([float(mean), 0.0, 0.0]),
        Sigma_beta0=np.eye(3),
        alpha_f=alpha,
        gamma_f=gamma,
        alpha_eps=alpha,
        gamma_eps=gamma,
    )
