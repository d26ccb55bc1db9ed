from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import softmax
from typing_extensions import final

from .._util.logging import getLogger
from .._util.serialise import JsonValue, asdict_array
from ..emulator import Seed, as_generator
from ..errors import ConfigError, NonFiniteMarginal

_LOGGER = getLogger(__name__)

DEFAULT_GIBBS_ITER = 100000
DEFAULT_GIBBS_BURN = 10000


@final
@dataclass(frozen=True)
class MixtureState:
    zeta: int
    p: np.ndarray
    alpha_dir: np.ndarray

    def to_dict(self) -> JsonValue:
        return {
            "zeta": self.zeta,
            "p": asdict_array(self.p),
            "alpha_dir": asdict_array(self.alpha_dir),
        }


@final
@dataclass(frozen=True)
class ZetaPosterior:
    """Retained draws of the model indicator (1-based) and the weights p."""

    zeta_draws: np.ndarray
    p_draws: np.ndarray
    final: MixtureState

    @property
    def K(self) -> int:
        return int(self.p_draws.shape[1])

    @property
    def zeta_prob(self) -> np.ndarray:
        counts = np.bincount(self.zeta_draws - 1, minlength=self.K)
        return counts / float(len(self.zeta_draws))

    def to_dict(self) -> JsonValue:
        return {
            "zeta_prob": asdict_array(self.zeta_prob),
            "p_mean": asdict_array(self.p_draws.mean(axis=0)),
            "draws": len(self.zeta_draws),
        }


def gibbs_zeta_p(
    log_marginals: Union[list[float], np.ndarray],
    alpha_dir: Optional[np.ndarray] = None,
    n_iter: int = DEFAULT_GIBBS_ITER,
    n_burn: int = DEFAULT_GIBBS_BURN,
    seed: Seed = None,
) -> ZetaPosterior:
    """
    Gibbs sampler for the mixture indicator and weights.

    zeta | p is categorical with weights p_k m_k, and p | zeta is
    Dirichlet(alpha + e_zeta).
    """
    log_m = np.asarray(log_marginals, dtype=float)
    if log_m.ndim != 1 or log_m.size == 0 or not np.all(np.isfinite(log_m)):
        raise NonFiniteMarginal(log_m.tolist())
    K = log_m.size
    alpha = np.ones(K) if alpha_dir is None else np.asarray(alpha_dir, dtype=float)
    if alpha.shape != (K,) or np.any(~(alpha > 0)):
        raise ConfigError(f"Dirichlet parameters must be {K} positive values")
    if not 0 <= n_burn < n_iter:
        raise ConfigError(f"need 0 <= n_burn < n_iter, found {n_burn} and {n_iter}")
    rng = as_generator(seed)
    p = alpha / alpha.sum()
    zeta = 0
    zeta_draws = np.empty(n_iter - n_burn, dtype=int)
    p_draws = np.empty((n_iter - n_burn, K))
    for it in range(n_iter):
        with np.errstate(divide="ignore"):
            weights = softmax(np.log(p) + log_m)
        zeta = int(rng.choice(K, p=weights))
        posterior = alpha.copy()
        posterior[zeta] += 1
        p = rng.dirichlet(posterior)
        if it >= n_burn:
            zeta_draws[it - n_burn] = zeta + 1
            p_draws[it - n_burn] = p
    result = ZetaPosterior(
        zeta_draws=zeta_draws,
        p_draws=p_draws,
        final=MixtureState(zeta=zeta + 1, p=p, alpha_dir=alpha),
    )
    _LOGGER.info(
        "Posterior model probabilities: "
        + ", ".join(f"{k + 1}: {prob:.4f}" for k, prob in enumerate(result.zeta_prob))
    )
    return result
