from dataclasses import dataclass
import numpy as np
from typing_extensions import Literal, TypeAlias, final

from .._util.logging import getLogger
from .._util.serialise import JsonValue, asdict_array
from ..emulator import DataSegment, Seed, as_generator, simulate_path
from ..errors import EmptyChain, NonFinitePaths
from ..sampler import ChainOutput

_LOGGER = getLogger(__name__)

Origin: TypeAlias = Literal["inverse", "forward", "ensemble-mean", "ensemble-max"]

DEFAULT_N_PATHS = 1000


@final
@dataclass(frozen=True)
class PosteriorPathDraws:
    """M sampled trajectories (rows) over L consecutive calendar years."""

    draws: np.ndarray
    years: np.ndarray
    origin: str

    def __post_init__(self) -> None:
        draws = np.atleast_2d(np.asarray(self.draws, dtype=float))
        if draws.shape[0] < 1:
            raise EmptyChain(f"{self.origin} posterior")
        if not np.all(np.isfinite(draws)):
            raise NonFinitePaths(self.origin)
        object.__setattr__(self, "draws", draws)
        object.__setattr__(self, "years", np.asarray(self.years, dtype=int))

    @property
    def M(self) -> int:
        return int(self.draws.shape[0])

    @property
    def L(self) -> int:
        return int(self.draws.shape[1])

    def mean_path(self) -> np.ndarray:
        return self.draws.mean(axis=0)

    def to_dict(self) -> JsonValue:
        return {
            "origin": self.origin,
            "years": asdict_array(self.years),
            "mean_path": asdict_array(self.mean_path()),
            "draws": self.M,
        }


def simulate_from_chain(
    chain: ChainOutput,
    x_start: float,
    t_range: tuple[int, int],
    M: int,
    seed: Seed = None,
) -> np.ndarray:
    """Simulate one trajectory for each of M evenly spaced retained draws."""
    rng = as_generator(seed)
    positions = chain.positions(M)
    first, last = t_range
    paths = np.empty((M, last - first + 1))
    last_position = -1
    for i, position in enumerate(positions):
        if position != last_position:
            params, table = chain.draw(int(position))
            last_position = position
        paths[i] = simulate_path(x_start, t_range, table, params, rng)
    return paths


def sample_inverse_posterior(
    future: DataSegment,
    chain: ChainOutput,
    x0: float,
    M: int = DEFAULT_N_PATHS,
    seed: Seed = None,
    *,
    origin_year: int = 1850,
) -> PosteriorPathDraws:
    """
    Reconstruct x_1..x_T0 given x_(T0+1)..x_T.

    The chain must have been conditioned on the future segment. Paths are
    simulated forward from the known x_0, treating the past as conditionally
    independent of the future given (D, theta).
    """
    chain.require_segment(future)
    T0 = future.start_index - 1
    paths = simulate_from_chain(chain, x0, (1, T0), M, seed)
    _LOGGER.debug(f"Simulated {M} inverse-posterior paths over indices 1..{T0}")
    return PosteriorPathDraws(
        draws=paths,
        years=origin_year + np.arange(1, T0 + 1),
        origin="inverse",
    )


def sample_forward_posterior(
    observed: DataSegment,
    chain: ChainOutput,
    T: int,
    M: int = DEFAULT_N_PATHS,
    seed: Seed = None,
    *,
    origin_year: int = 1850,
) -> PosteriorPathDraws:
    """Forecast x_(T0+1)..x_T given the observed x_1..x_T0."""
    chain.require_segment(observed)
    T0 = observed.end_index
    x_start = float(observed.values[-1]) if len(observed) else float(observed.known_prev)
    paths = simulate_from_chain(chain, x_start, (T0 + 1, T), M, seed)
    _LOGGER.debug(f"Simulated {M} forward-posterior paths over indices {T0 + 1}..{T}")
    return PosteriorPathDraws(
        draws=paths,
        years=origin_year + np.arange(T0 + 1, T + 1),
        origin="forward",
    )
