from .discrepancy import (
    DEFAULT_C,
    DISCREPANCIES,
    MEASURES,
    GofReport,
    Measure,
    MeasureReport,
    Verdict,
    discrepancy_s1,
    discrepancy_s2,
    goodness_of_fit,
    verdict,
)
from .forecast import BenchmarkBand, benchmark_band, forecast_table
from .paths import (
    DEFAULT_N_PATHS,
    Origin,
    PosteriorPathDraws,
    sample_forward_posterior,
    sample_inverse_posterior,
    simulate_from_chain,
)
from .segments import future_segment, observed_segment
from .summary import (
    DEFAULT_ALPHA,
    DEFAULT_MESH_CELLS,
    DensitySummary,
    summarize_paths,
    value_mesh,
)

__all__: list[str] = [
    "DEFAULT_ALPHA",
    "DEFAULT_C",
    "DEFAULT_MESH_CELLS",
    "DEFAULT_N_PATHS",
    "DISCREPANCIES",
    "MEASURES",
    "BenchmarkBand",
    "DensitySummary",
    "GofReport",
    "Measure",
    "MeasureReport",
    "Origin",
    "PosteriorPathDraws",
    "Verdict",
    "benchmark_band",
    "discrepancy_s1",
    "discrepancy_s2",
    "forecast_table",
    "future_segment",
    "goodness_of_fit",
    "observed_segment",
    "sample_forward_posterior",
    "sample_inverse_posterior",
    "simulate_from_chain",
    "summarize_paths",
    "value_mesh",
    "verdict",
]
