"""Online multi-target tracking by greedy sequential inference in a
temporally dependent Dirichlet process mixture, with per-track Kalman
filtering.

The package ships a compiled assignment kernel for the hot per-frame loop
and a pure-Python reference backend selected automatically at import.
"""

from .backends import available_backends, default_backend
from .dynamics import (
    MeasurementModel,
    MotionModel,
    birth_state,
    cv_model,
    gaussian_density,
    kf_predict,
    kf_update,
    models_from_hyper,
    position_measurement_model,
)
from .filter import (
    TrackEstimate,
    apply_assignment,
    choose_best_label,
    estimates,
    predict_frame,
    process_frame,
    prune_components,
)
from .priors import (
    NEW_LABEL,
    LinkContext,
    ScoreRow,
    assignment_posterior,
    bbox_link_prior,
    box_signed_distance,
    car_prior_likelihood,
    crp_weight,
    ddcrp_prior,
    grid_link_prior,
    transition_prior,
)
from .types import (
    Cluster,
    DegenerateScoreRow,
    FilterError,
    FilterState,
    FrameReport,
    Hyperparameters,
    LinkMode,
    Measurement,
    NumericError,
    SingularInnovation,
    audit_filter_state,
    new_filter_state,
    validate_hyperparameters,
)

__version__ = "0.1.0"

__all__ = [
    "available_backends",
    "default_backend",
    "MeasurementModel",
    "MotionModel",
    "birth_state",
    "cv_model",
    "gaussian_density",
    "kf_predict",
    "kf_update",
    "models_from_hyper",
    "position_measurement_model",
    "TrackEstimate",
    "apply_assignment",
    "choose_best_label",
    "estimates",
    "predict_frame",
    "process_frame",
    "prune_components",
    "NEW_LABEL",
    "LinkContext",
    "ScoreRow",
    "assignment_posterior",
    "bbox_link_prior",
    "box_signed_distance",
    "car_prior_likelihood",
    "crp_weight",
    "ddcrp_prior",
    "grid_link_prior",
    "transition_prior",
    "Cluster",
    "DegenerateScoreRow",
    "FilterError",
    "FilterState",
    "FrameReport",
    "Hyperparameters",
    "LinkMode",
    "Measurement",
    "NumericError",
    "SingularInnovation",
    "audit_filter_state",
    "new_filter_state",
    "validate_hyperparameters",
    "__version__",
]
