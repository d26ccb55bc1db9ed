from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from typing_extensions import NotRequired, Required, TypedDict

from .._util.io import read_json
from .._util.logging import getLogger
from .._util.serialise import (
    JsonValue,
    check_known_keys,
    parse_dict,
    parse_field,
    parse_int,
    parse_list,
    parse_optfield,
    parse_str,
)
from ..errors import ManifestError, MissingValues, UnknownRole, UnknownUnit
from .series import UNITS, RawTemperatureSeries

_LOGGER = getLogger(__name__)

ROLES: tuple[str, ...] = ("observed", "model")

ManifestEntry = TypedDict(
    "ManifestEntry",
    {
        "path": Required[str],
        "unit": Required[str],
        "role": Required[str],
        "label": NotRequired[str],
        "start_year": NotRequired[int],
        "end_year": NotRequired[int],
    },
)


def read_series_csv(
    path: Union[str, Path],
    *,
    unit: str,
    label: str,
    start_year: Optional[int] = None,
    end_year: Optional[int] = None,
) -> RawTemperatureSeries:
    """Read a `year,value` CSV, optionally truncated to [start_year, end_year]."""
    path = Path(path)
    if unit not in UNITS:
        raise UnknownUnit(unit, UNITS, location=str(path))
    try:
        frame = pd.read_csv(path, skipinitialspace=True)
    except FileNotFoundError:
        raise ManifestError(str(path), "file not found")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ManifestError(str(path), f"could not parse CSV: {e}")
    frame.columns = [str(column).strip().lower() for column in frame.columns]
    if list(frame.columns) != ["year", "value"]:
        raise ManifestError(
            str(path), f"expected header 'year,value', found '{','.join(frame.columns)}'"
        )
    values = pd.to_numeric(frame["value"], errors="coerce")
    years = pd.to_numeric(frame["year"], errors="coerce")
    if years.isna().any() or not np.all(np.mod(years, 1) == 0):
        # Spreadsheet rows are 1-based and the header occupies row 1.
        row = int(np.flatnonzero(years.isna() | (np.mod(years, 1) != 0))[0]) + 2
        raise ManifestError(f"{path}:{row}", "year is not an integer")
    frame = pd.DataFrame({"year": years.astype(int), "value": values})
    frame = frame.sort_values("year")
    if start_year is not None:
        frame = frame[frame["year"] >= start_year]
    if end_year is not None:
        frame = frame[frame["year"] <= end_year]
    if frame["year"].duplicated().any():
        year = int(frame["year"][frame["year"].duplicated()].iloc[0])
        raise ManifestError(str(path), f"year {year} appears more than once")
    missing = frame["year"][frame["value"].isna()].tolist()
    if not frame.empty:
        expected = range(int(frame["year"].iloc[0]), int(frame["year"].iloc[-1]) + 1)
        missing += sorted(set(expected) - set(frame["year"]))
    if missing:
        raise MissingValues(label, str(path), sorted(missing))
    first = int(frame["year"].iloc[0]) if not frame.empty else (start_year or 0)
    _LOGGER.debug(f"Read {len(frame)} values for '{label}' from {path}")
    return RawTemperatureSeries(
        start_year=first,
        values=frame["value"].to_numpy(dtype=float),
        unit=unit,
        label=label,
    )


def parse_manifest_entry(value: JsonValue, *, location: str) -> ManifestEntry:
    check_known_keys(parse_dict(value), ManifestEntry.__annotations__, location=location)
    unit = parse_field("unit", parse_str)(value)
    if unit not in UNITS:
        raise UnknownUnit(unit, UNITS, location=location)
    role = parse_field("role", parse_str)(value)
    if role not in ROLES:
        raise UnknownRole(role, ROLES, location=location)
    entry: ManifestEntry = {
        "path": parse_field("path", parse_str)(value),
        "unit": unit,
        "role": role,
    }
    label = parse_optfield("label", parse_str)(value)
    if label is not None:
        entry["label"] = label
    start_year = parse_optfield("start_year", parse_int)(value)
    if start_year is not None:
        entry["start_year"] = start_year
    end_year = parse_optfield("end_year", parse_int)(value)
    if end_year is not None:
        entry["end_year"] = end_year
    return entry


def load_manifest(
    path: Union[str, Path],
) -> tuple[RawTemperatureSeries, list[RawTemperatureSeries]]:
    """
    Load the series named by a JSON manifest.

    Returns the observed series and the model series, in manifest order.
    Relative paths are resolved against the directory of the manifest.
    """
    path = Path(path)
    try:
        document = read_json(path)
    except FileNotFoundError:
        raise ManifestError(str(path), "file not found")
    except ValueError as e:
        raise ManifestError(str(path), f"invalid JSON: {e}")
    try:
        check_known_keys(parse_dict(document), ("series",), location=str(path))
        raw_entries = parse_field("series", parse_list)(document)
        entries = [
            parse_manifest_entry(item, location=f"{path}: series[{i}]")
            for i, item in enumerate(raw_entries)
        ]
    except (KeyError, TypeError) as e:
        raise ManifestError(str(path), f"malformed manifest: {e}")

    observed: list[RawTemperatureSeries] = []
    models: list[RawTemperatureSeries] = []
    for entry in entries:
        series_path = path.parent / entry["path"]
        series = read_series_csv(
            series_path,
            unit=entry["unit"],
            label=entry.get("label", series_path.stem),
            start_year=entry.get("start_year"),
            end_year=entry.get("end_year"),
        )
        (observed if entry["role"] == "observed" else models).append(series)
    if len(observed) != 1:
        raise ManifestError(
            str(path), f"expected exactly one observed series, found {len(observed)}"
        )
    if not models:
        raise ManifestError(str(path), "expected at least one model series")
    _LOGGER.info(
        f"Loaded observed series '{observed[0].label}' and {len(models)} model series"
    )
    return observed[0], models

