from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from typing_extensions import final

from .._util.logging import getLogger
from .._util.serialise import JsonValue, asdict_float
from ..ingest import LogTempSeries
from .summary import DensitySummary

_LOGGER = getLogger(__name__)

DEFAULT_BENCHMARK_YEAR = 2008
DEFAULT_BENCHMARK_HALFWIDTH = 0.5
FALLBACK_BAND_CELSIUS = (13.895, 14.895)


@final
@dataclass(frozen=True)
class BenchmarkBand:
    """A no-change band in log °C around a reference year's temperature."""

    lower: float
    upper: float
    year: Optional[int]

    @property
    def celsius(self) -> tuple[float, float]:
        return float(np.exp(self.lower)), float(np.exp(self.upper))

    def to_dict(self) -> JsonValue:
        low, high = self.celsius
        return {
            "year": self.year,
            "lower": asdict_float(self.lower),
            "upper": asdict_float(self.upper),
            "lower_celsius": asdict_float(low),
            "upper_celsius": asdict_float(high),
        }


def benchmark_band(
    observed: LogTempSeries,
    year: int = DEFAULT_BENCHMARK_YEAR,
    halfwidth: float = DEFAULT_BENCHMARK_HALFWIDTH,
) -> BenchmarkBand:
    if observed.covers(year):
        centre = float(np.exp(observed.at(year)))
        low, high = centre - halfwidth, centre + halfwidth
        if low > 0:
            return BenchmarkBand(float(np.log(low)), float(np.log(high)), year)
    _LOGGER.warning(
        f"Observed series does not cover {year}; using the band "
        f"[{FALLBACK_BAND_CELSIUS[0]}, {FALLBACK_BAND_CELSIUS[1]}] °C"
    )
    return BenchmarkBand(
        float(np.log(FALLBACK_BAND_CELSIUS[0])),
        float(np.log(FALLBACK_BAND_CELSIUS[1])),
        None,
    )


def forecast_table(
    wide: DensitySummary,
    narrow: DensitySummary,
    band: BenchmarkBand,
    averaged: np.ndarray,
    model: Optional[np.ndarray] = None,
) -> pd.DataFrame:
    """
    Per-year comparison of the emulator forecast with model forecasts.

    Temperatures are reported in °C. `narrow` holds the 50% intervals and
    `wide` the 95% intervals; both summarise the same draws.
    """
    frame = pd.DataFrame(
        {
            "year": wide.years,
            "gpfgt": np.exp(wide.mode),
            "lower50": np.exp(narrow.lower),
            "upper50": np.exp(narrow.upper),
            "lower95": np.exp(wide.lower),
            "upper95": np.exp(wide.upper),
            "ambfgt": np.exp(averaged),
            "mbfgt": np.exp(model) if model is not None else np.nan,
            "band_lower": band.celsius[0],
            "band_upper": band.celsius[1],
            "band_in_50": (narrow.lower <= band.lower) & (band.upper <= narrow.upper),
        }
    )
    return frame
