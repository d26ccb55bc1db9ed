from .manifest import ROLES, ManifestEntry, load_manifest, read_series_csv
from .series import (
    UNITS,
    AlignedDataset,
    LogTempSeries,
    RawTemperatureSeries,
    Unit,
    build_aligned_dataset,
    convert_to_log_celsius,
    thin_series,
)

__all__: list[str] = [
    "ROLES",
    "UNITS",
    "AlignedDataset",
    "LogTempSeries",
    "ManifestEntry",
    "RawTemperatureSeries",
    "Unit",
    "build_aligned_dataset",
    "convert_to_log_celsius",
    "load_manifest",
    "read_series_csv",
    "thin_series",
]
