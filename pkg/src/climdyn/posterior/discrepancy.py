from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from typing_extensions import Literal, TypeAlias, final

from .._util.serialise import JsonValue, asdict_float
from ..errors import AxisMismatch, NonPositiveC
from .paths import PosteriorPathDraws
from .summary import DEFAULT_ALPHA, DensitySummary, summarize_paths

DEFAULT_C = 0.01

Measure: TypeAlias = Literal["s1", "s2"]
MEASURES: tuple[Measure, ...] = ("s1", "s2")

Verdict: TypeAlias = Literal["fits", "underfits", "overfits"]


def _standardised(
    v: np.ndarray, modes: np.ndarray, variances: np.ndarray, c: float
) -> tuple[np.ndarray, np.ndarray]:
    if not c > 0:
        raise NonPositiveC(c)
    v = np.asarray(v, dtype=float)
    modes = np.asarray(modes, dtype=float)
    variances = np.asarray(variances, dtype=float)
    if v.shape[-1] != modes.shape[-1]:
        raise AxisMismatch(modes.shape[-1], v.shape[-1])
    if variances.shape[-1] != modes.shape[-1]:
        raise AxisMismatch(modes.shape[-1], variances.shape[-1])
    return v - modes, variances + c


def discrepancy_s1(
    v: np.ndarray, modes: np.ndarray, variances: np.ndarray, c: float = DEFAULT_C
) -> np.ndarray:
    """Mean of |v_t - mode_t| / sqrt(var_t + c), per row when v is a matrix."""
    delta, scale = _standardised(v, modes, variances, c)
    return np.mean(np.abs(delta) / np.sqrt(scale), axis=-1)


def discrepancy_s2(
    v: np.ndarray, modes: np.ndarray, variances: np.ndarray, c: float = DEFAULT_C
) -> np.ndarray:
    """Mean of (v_t - mode_t)^2 / (var_t + c), per row when v is a matrix."""
    delta, scale = _standardised(v, modes, variances, c)
    return np.mean(delta**2 / scale, axis=-1)


DISCREPANCIES = {"s1": discrepancy_s1, "s2": discrepancy_s2}


def verdict(observed: float, lower: float, upper: float) -> Verdict:
    if observed < lower:
        return "overfits"
    if observed > upper:
        return "underfits"
    return "fits"


@final
@dataclass(frozen=True)
class MeasureReport:
    observed: float
    lower: float
    upper: float
    verdict: Verdict
    reference: np.ndarray = field(repr=False, compare=False)

    def to_dict(self) -> JsonValue:
        return {
            "observed": asdict_float(self.observed),
            "lower": asdict_float(self.lower),
            "upper": asdict_float(self.upper),
            "verdict": self.verdict,
        }


@final
@dataclass(frozen=True)
class GofReport:
    label: str
    measures: dict[str, MeasureReport]
    alpha: float
    c: float

    def __getitem__(self, measure: str) -> MeasureReport:
        return self.measures[measure]

    def table_row(self) -> dict[str, object]:
        """One row in the layout model, S1, BCI of S1, S2, BCI of S2."""
        row: dict[str, object] = {"model": self.label}
        for name, report in self.measures.items():
            row[name] = report.observed
            row[f"{name}_lower"] = report.lower
            row[f"{name}_upper"] = report.upper
            row[f"{name}_verdict"] = report.verdict
        return row

    def to_dict(self) -> JsonValue:
        return {
            "label": self.label,
            "alpha": asdict_float(self.alpha),
            "c": asdict_float(self.c),
            "measures": {name: report.to_dict() for name, report in self.measures.items()},
        }


def goodness_of_fit(
    draws: PosteriorPathDraws,
    observed: np.ndarray,
    alpha: float = DEFAULT_ALPHA,
    *,
    c: float = DEFAULT_C,
    summary: Optional[DensitySummary] = None,
    label: str = "",
) -> GofReport:
    """
    Compare the observed series with the reference distribution of each
    discrepancy, computed from the posterior modes and variances.
    """
    observed = np.asarray(observed, dtype=float)
    if observed.shape != (draws.L,):
        raise AxisMismatch(draws.L, int(observed.shape[-1]) if observed.ndim else 0)
    summary = summary or summarize_paths(draws, alpha=alpha)
    measures: dict[str, MeasureReport] = {}
    for name in MEASURES:
        discrepancy = DISCREPANCIES[name]
        reference = discrepancy(draws.draws, summary.mode, summary.variance, c)
        value = float(discrepancy(observed, summary.mode, summary.variance, c))
        lower, upper = np.quantile(reference, [alpha / 2, 1 - alpha / 2])
        measures[name] = MeasureReport(
            observed=value,
            lower=float(lower),
            upper=float(upper),
            verdict=verdict(value, float(lower), float(upper)),
            reference=reference,
        )
    return GofReport(label=label, measures=measures, alpha=alpha, c=c)
