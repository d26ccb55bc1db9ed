from collections.abc import Callable

import numpy as np
from typing_extensions import Literal, TypeAlias

from .._util.logging import getLogger
from ..emulator import DataSegment, Seed, as_generator
from ..errors import ConfigError
from ..ingest import AlignedDataset
from ..posterior import PosteriorPathDraws
from .chain import MvChainOutput
from .dynamics import mv_simulate_path

_LOGGER = getLogger(__name__)

Functional: TypeAlias = Literal["mean", "max"]

FUNCTIONALS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "mean": lambda path: path.mean(axis=1),
    "max": lambda path: path.max(axis=1),
}


def mv_future_segment(dataset: AlignedDataset) -> DataSegment:
    """The K model series over T0+1..T, with their values at T0 as known row."""
    known, values = zip(*(dataset.future(model) for model in dataset.models))
    return DataSegment(
        start_index=dataset.T0 + 1,
        known_prev=np.asarray(known, dtype=float),
        values=np.column_stack(values),
        label=f"ensemble {dataset.year(dataset.T0 + 1)}-{dataset.year(dataset.T)}",
    )


def ensemble_inverse_posterior(
    future: DataSegment,
    chain: MvChainOutput,
    x0: float,
    functional: str = "mean",
    M: int = 1000,
    seed: Seed = None,
    *,
    origin_year: int = 1850,
) -> PosteriorPathDraws:
    """
    Reconstruct a functional of the K model series over 1..T0.

    Each trajectory starts from x0 in every coordinate and is reduced to one
    value per step by the ensemble mean or the ensemble maximum.
    """
    if functional not in FUNCTIONALS:
        raise ConfigError(
            f"unknown ensemble functional '{functional}', "
            f"expected one of {', '.join(FUNCTIONALS)}"
        )
    chain.require_segment(future)
    reduce = FUNCTIONALS[functional]
    rng = as_generator(seed)
    T0 = future.start_index - 1
    start = np.full(chain.K, float(x0))
    paths = np.empty((M, T0))
    last_position = -1
    for i, position in enumerate(chain.positions(M)):
        if position != last_position:
            params, table = chain.draw(int(position))
            last_position = position
        paths[i] = reduce(mv_simulate_path(start, (1, T0), table, params, rng))
    _LOGGER.debug(f"Simulated {M} ensemble-{functional} paths over indices 1..{T0}")
    return PosteriorPathDraws(
        draws=paths,
        years=origin_year + np.arange(1, T0 + 1),
        origin=f"ensemble-{functional}",
    )
