from .decision import (
    DEFAULT_PENALTY_GRID_SIZE,
    DecisionCurve,
    alternative_probability,
    cfdr_cfnr,
    decision_curve,
    optimal_decision,
    penalty_grid,
)
from .marginal import MarginalEstimator, draw_log_likelihoods, estimate_log_marginal
from .mixture import (
    DEFAULT_GIBBS_BURN,
    DEFAULT_GIBBS_ITER,
    MixtureState,
    ZetaPosterior,
    gibbs_zeta_p,
)
from .pipeline import (
    HypothesisSpec,
    ModelResult,
    ModelTask,
    SelectionReport,
    default_workers,
    hypothesis_spec,
    inclusion_probability,
    run_model_pipeline,
    run_selection,
)

__all__: list[str] = [
    "DEFAULT_GIBBS_BURN",
    "DEFAULT_GIBBS_ITER",
    "DEFAULT_PENALTY_GRID_SIZE",
    "DecisionCurve",
    "HypothesisSpec",
    "MarginalEstimator",
    "MixtureState",
    "ModelResult",
    "ModelTask",
    "SelectionReport",
    "ZetaPosterior",
    "alternative_probability",
    "cfdr_cfnr",
    "decision_curve",
    "default_workers",
    "draw_log_likelihoods",
    "estimate_log_marginal",
    "gibbs_zeta_p",
    "hypothesis_spec",
    "inclusion_probability",
    "optimal_decision",
    "penalty_grid",
    "run_model_pipeline",
    "run_selection",
]
