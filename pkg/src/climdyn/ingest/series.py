from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np
from typing_extensions import Literal, TypeAlias, final

from .._util.logging import getLogger
from .._util.serialise import (
    JsonValue,
    asdict_array,
    parse_array,
    parse_field,
    parse_int,
    parse_list_of,
    parse_str,
)
from ..errors import (
    EmptySeries,
    MisalignedModels,
    NonPositiveTemperature,
    NoOverlap,
    UnknownUnit,
    ZeroStride,
)

_LOGGER = getLogger(__name__)

Unit: TypeAlias = Literal["anomaly-celsius", "absolute-celsius", "kelvin"]

UNITS: tuple[str, ...] = ("anomaly-celsius", "absolute-celsius", "kelvin")

# Offset that turns a global-mean anomaly into an absolute temperature.
ANOMALY_OFFSET_CELSIUS = 14.0
KELVIN_OFFSET = 273.15


##############################################################################
# Series
##############################################################################


@final
@dataclass(frozen=True)
class RawTemperatureSeries:
    start_year: int
    values: np.ndarray
    unit: str
    label: str

    @property
    def end_year(self) -> int:
        return self.start_year + len(self.values) - 1

    def to_celsius(self) -> np.ndarray:
        values = np.asarray(self.values, dtype=float)
        if self.unit == "anomaly-celsius":
            return values + ANOMALY_OFFSET_CELSIUS
        if self.unit == "kelvin":
            return values - KELVIN_OFFSET
        if self.unit == "absolute-celsius":
            return values.copy()
        raise UnknownUnit(self.unit, UNITS)


@final
@dataclass(frozen=True)
class LogTempSeries:
    """Natural log of temperature in °C; position t is year start_year + t."""

    start_year: int
    x: np.ndarray
    label: str

    def __len__(self) -> int:
        return len(self.x)

    @property
    def end_year(self) -> int:
        return self.start_year + len(self.x) - 1

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.start_year, self.end_year + 1)

    def at(self, year: int) -> float:
        return float(self.x[year - self.start_year])

    def between(self, first_year: int, last_year: int) -> np.ndarray:
        return np.asarray(
            self.x[first_year - self.start_year : last_year - self.start_year + 1]
        )

    def covers(self, year: int) -> bool:
        return self.start_year <= year <= self.end_year

    def to_dict(self) -> JsonValue:
        return {
            "label": self.label,
            "start_year": self.start_year,
            "x": asdict_array(self.x),
        }

    @staticmethod
    def from_dict(value: JsonValue) -> "LogTempSeries":
        return LogTempSeries(
            start_year=parse_field("start_year", parse_int)(value),
            x=parse_field("x", parse_array)(value),
            label=parse_field("label", parse_str)(value),
        )


def convert_to_log_celsius(raw: RawTemperatureSeries) -> LogTempSeries:
    if len(raw.values) == 0:
        raise EmptySeries(raw.label)
    celsius = raw.to_celsius()
    nonpositive = np.flatnonzero(~(celsius > 0))
    if nonpositive.size > 0:
        index = int(nonpositive[0])
        raise NonPositiveTemperature(
            raw.label, raw.start_year + index, float(celsius[index])
        )
    return LogTempSeries(start_year=raw.start_year, x=np.log(celsius), label=raw.label)


def thin_series(x: LogTempSeries, stride: int) -> LogTempSeries:
    if stride < 1:
        raise ZeroStride(stride)
    # The year labels of a thinned series only matter for its first entry.
    return LogTempSeries(start_year=x.start_year, x=np.asarray(x.x)[::stride], label=x.label)


##############################################################################
# Aligned Dataset
##############################################################################


@final
@dataclass(frozen=True)
class AlignedDataset:
    observed: LogTempSeries
    models: tuple[LogTempSeries, ...]
    averaged: LogTempSeries
    T0: int
    T: int

    @property
    def origin_year(self) -> int:
        return self.observed.start_year

    @property
    def K(self) -> int:
        return len(self.models)

    @property
    def labels(self) -> list[str]:
        return [model.label for model in self.models]

    @property
    def x0(self) -> float:
        return float(self.observed.x[0])

    def year(self, t: int) -> int:
        return self.origin_year + t

    def index(self, year: int) -> int:
        return year - self.origin_year

    def observed_current(self) -> np.ndarray:
        """Observed x_1..x_T0."""
        return np.asarray(self.observed.x[1 : self.T0 + 1])

    def future(self, series: LogTempSeries) -> tuple[float, np.ndarray]:
        """Known x_T0 and the values x_T0+1..x_T of a model-axis series."""
        known = series.at(self.year(self.T0))
        values = series.between(self.year(self.T0 + 1), self.year(self.T))
        return known, values

    def ensemble(self) -> np.ndarray:
        """Model series stacked as a (years, K) matrix on the model axis."""
        return np.column_stack([model.x for model in self.models])

    def restrict_models(self, keep: int) -> "AlignedDataset":
        if keep >= self.K:
            return self
        models = self.models[:keep]
        return AlignedDataset(
            observed=self.observed,
            models=models,
            averaged=_average(models),
            T0=self.T0,
            T=self.T,
        )

    def to_dict(self) -> JsonValue:
        return {
            "observed": self.observed.to_dict(),
            "models": [model.to_dict() for model in self.models],
            "averaged": self.averaged.to_dict(),
            "T0": self.T0,
            "T": self.T,
        }

    @staticmethod
    def from_dict(value: JsonValue) -> "AlignedDataset":
        return AlignedDataset(
            observed=parse_field("observed", LogTempSeries.from_dict)(value),
            models=tuple(
                parse_field("models", parse_list_of(LogTempSeries.from_dict))(value)
            ),
            averaged=parse_field("averaged", LogTempSeries.from_dict)(value),
            T0=parse_field("T0", parse_int)(value),
            T=parse_field("T", parse_int)(value),
        )


def _average(models: Sequence[LogTempSeries], label: Optional[str] = None) -> LogTempSeries:
    stacked = np.vstack([model.x for model in models])
    return LogTempSeries(
        start_year=models[0].start_year,
        x=stacked.mean(axis=0),
        label=label or "average",
    )


def build_aligned_dataset(
    observed: RawTemperatureSeries,
    models: Sequence[RawTemperatureSeries],
) -> AlignedDataset:
    if not models:
        raise EmptySeries("models")
    ranges = [(model.label, model.start_year, model.end_year) for model in models]
    if len({(start, end) for _, start, end in ranges}) > 1:
        raise MisalignedModels(ranges)
    model_start, model_end = ranges[0][1], ranges[0][2]
    if observed.start_year > model_start or observed.end_year < model_start:
        raise NoOverlap(
            (observed.start_year, observed.end_year), (model_start, model_end)
        )
    if observed.end_year >= model_end:
        raise NoOverlap(
            (observed.start_year, observed.end_year), (model_start, model_end)
        )
    log_observed = convert_to_log_celsius(observed)
    log_models = tuple(convert_to_log_celsius(model) for model in models)
    T0 = observed.end_year - observed.start_year
    T = model_end - observed.start_year
    _LOGGER.debug(
        f"Aligned {len(models)} models on {observed.start_year}-{model_end} "
        f"with T0 = {T0}, T = {T}"
    )
    return AlignedDataset(
        observed=log_observed,
        models=log_models,
        averaged=_average(log_models),
        T0=T0,
        T=T,
    )
