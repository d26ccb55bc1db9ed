from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from typing_extensions import final

from .._util.serialise import JsonValue, asdict_array, asdict_float
from ..errors import MeshTooNarrow, OutOfRange
from .paths import PosteriorPathDraws

DEFAULT_ALPHA = 0.05
DEFAULT_MESH_CELLS = 512
DEFAULT_MESH_PAD = 0.01


def value_mesh(
    draws: PosteriorPathDraws,
    cells: int = DEFAULT_MESH_CELLS,
    pad: float = DEFAULT_MESH_PAD,
) -> np.ndarray:
    """Cell edges spanning the range of all draws, widened by pad on each side."""
    low, high = float(draws.draws.min()), float(draws.draws.max())
    width = high - low
    if width == 0:
        width = max(abs(low), 1.0)
    return np.linspace(low - pad * width, high + pad * width, cells + 1)


@final
@dataclass(frozen=True)
class DensitySummary:
    years: np.ndarray
    edges: np.ndarray
    mass: np.ndarray
    mode: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    alpha: float

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def to_dict(self) -> JsonValue:
        return {
            "alpha": asdict_float(self.alpha),
            "years": asdict_array(self.years),
            "mode": asdict_array(self.mode),
            "mean": asdict_array(self.mean),
            "variance": asdict_array(self.variance),
            "lower": asdict_array(self.lower),
            "upper": asdict_array(self.upper),
        }

    def to_frame(self) -> pd.DataFrame:
        """Density grid in long format, one row per (year, mesh cell)."""
        L, cells = self.mass.shape
        return pd.DataFrame(
            {
                "year": np.repeat(self.years, cells),
                "value": np.tile(self.centers, L),
                "mass": self.mass.ravel(),
            }
        )


def summarize_paths(
    draws: PosteriorPathDraws,
    mesh: Optional[np.ndarray] = None,
    alpha: float = DEFAULT_ALPHA,
) -> DensitySummary:
    if not 0 < alpha < 1:
        raise OutOfRange("alpha", alpha)
    values = draws.draws
    edges = value_mesh(draws) if mesh is None else np.asarray(mesh, dtype=float)
    low, high = float(values.min()), float(values.max())
    if low < edges[0] or high > edges[-1]:
        raise MeshTooNarrow(float(edges[0]), float(edges[-1]), low, high)
    cells = len(edges) - 1
    index = np.clip(np.searchsorted(edges, values, side="right") - 1, 0, cells - 1)
    mass = np.stack(
        [np.bincount(index[:, t], minlength=cells) for t in range(draws.L)]
    ) / float(draws.M)
    centers = 0.5 * (edges[:-1] + edges[1:])
    # argmax keeps the lowest cell among ties.
    mode = centers[np.argmax(mass, axis=1)]
    lower, upper = np.quantile(values, [alpha / 2, 1 - alpha / 2], axis=0)
    return DensitySummary(
        years=draws.years,
        edges=edges,
        mass=mass,
        mode=mode,
        mean=values.mean(axis=0),
        variance=values.var(axis=0),
        lower=lower,
        upper=upper,
        alpha=alpha,
    )
