from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import pandas as pd
from typing_extensions import final

from .._util.serialise import JsonValue, asdict_array, asdict_float, asdict_opt
from ..errors import EmptyGrid, OutOfRange

DEFAULT_PENALTY_GRID_SIZE = 199

ArrayLike = Union[list[float], np.ndarray]


def penalty_grid(size: int = DEFAULT_PENALTY_GRID_SIZE) -> np.ndarray:
    """Equally spaced penalties with the same margin inside (0, 1) as the step."""
    if size < 1:
        raise EmptyGrid()
    step = 1.0 / (size + 1)
    return np.linspace(step, 1 - step, size)


def _check_unit(name: str, values: np.ndarray) -> None:
    bad = np.flatnonzero(~((values >= 0) & (values <= 1)))
    if bad.size:
        raise OutOfRange(name, float(values[bad[0]]))


def alternative_probability(zeta_prob_k: float, inclusion_prob_k: float) -> float:
    """Posterior probability of the alternative for one model."""
    _check_unit("zeta probability", np.array([zeta_prob_k], dtype=float))
    _check_unit("inclusion probability", np.array([inclusion_prob_k], dtype=float))
    return 1.0 - zeta_prob_k * inclusion_prob_k


def optimal_decision(v: ArrayLike, beta: float) -> np.ndarray:
    """Reject the null of model k, d_k = 1, exactly when v_k > beta."""
    v = np.asarray(v, dtype=float)
    _check_unit("v", v)
    return (v > beta).astype(int)


def cfdr_cfnr(d: ArrayLike, v: ArrayLike) -> tuple[float, float]:
    d = np.asarray(d, dtype=int)
    v = np.asarray(v, dtype=float)
    if d.shape != v.shape:
        raise ValueError(f"Decision and v differ in shape: {d.shape} and {v.shape}")
    cfdr = float(np.sum(d * (1 - v)) / max(int(np.sum(d)), 1))
    cfnr = float(np.sum((1 - d) * v) / max(int(np.sum(1 - d)), 1))
    return cfdr, cfnr


@final
@dataclass(frozen=True)
class DecisionCurve:
    measure: str
    beta_grid: np.ndarray
    decisions: np.ndarray
    cfdr: np.ndarray
    cfnr: np.ndarray
    v: np.ndarray
    best_model: int
    threshold: Optional[float]
    first_jump: Optional[float]
    tied: bool

    @property
    def jump_at_threshold(self) -> bool:
        return self.first_jump == self.threshold

    @property
    def ambiguous_models(self) -> list[int]:
        """Models, 1-based, whose nulls are accepted at the first jump."""
        if self.first_jump is None:
            return []
        row = int(np.searchsorted(self.beta_grid, self.first_jump))
        return [int(k) + 1 for k in np.flatnonzero(self.decisions[row] == 0)]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "beta": self.beta_grid,
                "cfdr": self.cfdr,
                "cfnr": self.cfnr,
                "measure": self.measure,
            }
        )

    def to_dict(self) -> JsonValue:
        return {
            "measure": self.measure,
            "v": asdict_array(self.v),
            "best_model": self.best_model,
            "threshold": asdict_opt(asdict_float)(self.threshold),
            "first_jump": asdict_opt(asdict_float)(self.first_jump),
            "tied": self.tied,
            "ambiguous_models": list(self.ambiguous_models),
            "points": [
                {
                    "beta": asdict_float(beta),
                    "decision": asdict_array(decision),
                    "cfdr": asdict_float(cfdr),
                    "cfnr": asdict_float(cfnr),
                }
                for beta, decision, cfdr, cfnr in zip(
                    self.beta_grid, self.decisions, self.cfdr, self.cfnr
                )
            ],
        }


def decision_curve(
    v: ArrayLike,
    beta_grid: Optional[np.ndarray] = None,
    *,
    measure: str = "",
) -> DecisionCurve:
    """
    Optimal decisions and their error rates along a grid of penalties.

    The best model has the smallest v; it is first accepted at the smallest
    grid penalty at or above that v.
    """
    v = np.asarray(v, dtype=float)
    _check_unit("v", v)
    grid = penalty_grid() if beta_grid is None else np.asarray(beta_grid, dtype=float)
    if (
        grid.ndim != 1
        or grid.size == 0
        or np.any(grid <= 0)
        or np.any(grid >= 1)
        or np.any(np.diff(grid) <= 0)
    ):
        raise EmptyGrid()
    decisions = np.stack([optimal_decision(v, beta) for beta in grid])
    errors = np.array([cfdr_cfnr(d, v) for d in decisions])
    best = int(np.argmin(v))
    above = np.flatnonzero(grid >= v[best])
    threshold = float(grid[above[0]]) if above.size else None
    jumps = np.flatnonzero(np.any(decisions == 0, axis=1))
    first_jump = float(grid[jumps[0]]) if jumps.size else None
    return DecisionCurve(
        measure=measure,
        beta_grid=grid,
        decisions=decisions,
        cfdr=errors[:, 0],
        cfnr=errors[:, 1],
        v=v,
        best_model=best + 1,
        threshold=threshold,
        first_jump=first_jump,
        tied=bool(np.sum(v == v[best]) > 1),
    )
