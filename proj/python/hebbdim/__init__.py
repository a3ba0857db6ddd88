"""Python bindings for the hebbdim simulation library."""

from ._hebbdim import (
    Error,
    InsufficientData,
    InsufficientSignal,
    InvalidArgument,
    __version__,
    census,
    fit_scaling,
    gradient_stats,
    measured_max_overlap,
    optimal_eta,
    predict_learning_time,
    predicted_max_overlap,
    run_experiment,
    simulate,
)

__all__ = [
    "Error",
    "InsufficientData",
    "InsufficientSignal",
    "InvalidArgument",
    "__version__",
    "census",
    "fit_scaling",
    "gradient_stats",
    "measured_max_overlap",
    "optimal_eta",
    "predict_learning_time",
    "predicted_max_overlap",
    "run_experiment",
    "simulate",
]
