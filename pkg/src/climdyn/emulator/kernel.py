from collections.abc import Sequence
from typing import Union

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import NonPositiveSmoothness
from .grid import InputPoint

Point = Union[InputPoint, Sequence[float], np.ndarray]


def check_smoothness(r: Union[Sequence[float], np.ndarray]) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise NonPositiveSmoothness(r.tolist())
    return r


def _as_array(z: Point) -> np.ndarray:
    if isinstance(z, InputPoint):
        return z.as_array()
    return np.asarray(z, dtype=float)


def corr_kernel(z1: Point, z2: Point, r: Union[Sequence[float], np.ndarray]) -> float:
    """exp(-sum_i r_i (z1_i - z2_i)^2)"""
    r = check_smoothness(r)
    delta = _as_array(z1) - _as_array(z2)
    return float(np.exp(-np.sum(r * delta**2)))


def corr_matrix(
    z1: np.ndarray, z2: np.ndarray, r: Union[Sequence[float], np.ndarray]
) -> np.ndarray:
    """Kernel values between every row of z1 and every row of z2."""
    r = check_smoothness(r)
    root = np.sqrt(r)
    return np.exp(-cdist(np.atleast_2d(z1) * root, np.atleast_2d(z2) * root, "sqeuclidean"))
