from collections.abc import Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.stats import qmc
from typing_extensions import final

from .._util.logging import getLogger
from .._util.serialise import JsonValue, asdict_array
from ..errors import ConfigError, DegenerateRange

_LOGGER = getLogger(__name__)

# Calendar indices 0..249 are mapped into [0, 1) by this divisor.
TIME_SCALE = 250.0

DEFAULT_GRID_SIZE = 50
DEFAULT_VALUE_RANGE = (0.0, 5.0)
DEFAULT_MV_VALUE_RANGE = (-5.0, 5.0)


@final
@dataclass(frozen=True)
class InputPoint:
    """An emulator input (t_scaled, value) with value of dimension one or K."""

    t_scaled: float
    value: Union[float, np.ndarray]

    @staticmethod
    def at(t_index: int, value: Union[float, Sequence[float], np.ndarray]) -> "InputPoint":
        if np.ndim(value) == 0:
            return InputPoint(t_scaled=t_index / TIME_SCALE, value=float(value))  # type: ignore[arg-type]
        return InputPoint(t_scaled=t_index / TIME_SCALE, value=np.asarray(value, dtype=float))

    def as_array(self) -> np.ndarray:
        return np.concatenate([[self.t_scaled], np.atleast_1d(self.value)])


def input_matrix(t_index: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Stack time indices and values into rows of emulator inputs."""
    t_scaled = np.asarray(t_index, dtype=float) / TIME_SCALE
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, np.newaxis]
    return np.column_stack([t_scaled, values])


def basis(z: np.ndarray) -> np.ndarray:
    """Rows h(z)' = (1, z') for each row of z."""
    z = np.atleast_2d(z)
    return np.column_stack([np.ones(len(z)), z])


@final
@dataclass(frozen=True)
class DesignGrid:
    points: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        """Number of value coordinates, excluding time."""
        return int(self.points.shape[1]) - 1

    @property
    def H(self) -> np.ndarray:
        return basis(self.points)

    def __getitem__(self, i: int) -> InputPoint:
        row = self.points[i]
        value = float(row[1]) if self.dim == 1 else row[1:].copy()
        return InputPoint(t_scaled=float(row[0]), value=value)

    def to_dict(self) -> JsonValue:
        return {"points": asdict_array(self.points), "seed": self.seed}


def build_design_grid(
    n: int = DEFAULT_GRID_SIZE,
    value_range: tuple[float, float] = DEFAULT_VALUE_RANGE,
    seed: int = 0,
    *,
    dim: int = 1,
) -> DesignGrid:
    """
    Latin hypercube design over [0, 1) x value_range^dim.

    Each coordinate places exactly one point in each of n equal sub-intervals.
    """
    if n < 2:
        raise ConfigError(f"grid size must be at least 2, found {n}")
    low, high = float(value_range[0]), float(value_range[1])
    if not (np.isfinite(low) and np.isfinite(high) and low < high):
        raise DegenerateRange(low, high)
    engine = qmc.LatinHypercube(d=1 + dim, seed=np.random.default_rng(seed))
    sample = engine.random(n)
    points = qmc.scale(sample, [0.0] + [low] * dim, [1.0] + [high] * dim)
    _LOGGER.debug(f"Built {n}-point design grid over [{low}, {high}]^{dim}")
    return DesignGrid(points=points, seed=seed)
