from ..emulator import DataSegment
from ..ingest import AlignedDataset, LogTempSeries


def future_segment(dataset: AlignedDataset, series: LogTempSeries) -> DataSegment:
    """x_(T0+1)..x_T of a model-axis series, with its own x_T0 as known value."""
    known, values = dataset.future(series)
    return DataSegment(
        start_index=dataset.T0 + 1,
        known_prev=known,
        values=values,
        label=f"{series.label} {dataset.year(dataset.T0 + 1)}-{dataset.year(dataset.T)}",
    )


def observed_segment(dataset: AlignedDataset) -> DataSegment:
    """The observed x_1..x_T0 given x_0; its first value is scored marginally."""
    return DataSegment(
        start_index=1,
        known_prev=dataset.x0,
        values=dataset.observed_current(),
        first_step_marginal=True,
        label=f"{dataset.observed.label} {dataset.year(1)}-{dataset.year(dataset.T0)}",
    )
