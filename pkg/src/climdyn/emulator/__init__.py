from .dynamics import (
    DataSegment,
    Seed,
    SegmentTerms,
    as_generator,
    conditional_moments,
    marginal_first_step,
    moments_from_terms,
    one_step_conditional,
    path_log_likelihood,
    segment_terms,
    simulate_path,
)
from .grid import (
    DEFAULT_GRID_SIZE,
    DEFAULT_MV_VALUE_RANGE,
    DEFAULT_VALUE_RANGE,
    TIME_SCALE,
    DesignGrid,
    InputPoint,
    basis,
    build_design_grid,
    input_matrix,
)
from .kernel import check_smoothness, corr_kernel, corr_matrix
from .lookup import (
    GpParams,
    LookupTable,
    factor_correlation,
    first_input,
    lookup_conditional_on_first_step,
    lookup_prior_moments,
)
from .prior import (
    PriorConfig,
    derive_prior_config,
    inverse_gamma,
    log_inverse_gamma,
    thinned_moments,
)

__all__: list[str] = [
    "DEFAULT_GRID_SIZE",
    "DEFAULT_MV_VALUE_RANGE",
    "DEFAULT_VALUE_RANGE",
    "TIME_SCALE",
    "DataSegment",
    "DesignGrid",
    "GpParams",
    "InputPoint",
    "LookupTable",
    "PriorConfig",
    "Seed",
    "SegmentTerms",
    "as_generator",
    "basis",
    "build_design_grid",
    "check_smoothness",
    "conditional_moments",
    "corr_kernel",
    "corr_matrix",
    "derive_prior_config",
    "factor_correlation",
    "first_input",
    "input_matrix",
    "inverse_gamma",
    "log_inverse_gamma",
    "lookup_conditional_on_first_step",
    "lookup_prior_moments",
    "marginal_first_step",
    "moments_from_terms",
    "one_step_conditional",
    "path_log_likelihood",
    "segment_terms",
    "simulate_path",
    "thinned_moments",
]
