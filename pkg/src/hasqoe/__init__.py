"""Histogram-based QoE modeling for HTTP adaptive streaming sessions."""

from .baselines import (
    MODEL_STATISTICS,
    BaselineCoefficients,
    BaselineFeatures,
    baseline_predict,
    baseline_runner,
    extract_baseline_features,
    fit_baseline_coefficients,
)
from .errors import DegenerateMetricError, HasQoEError, UsageError, ValidationError
from .evaluation import (
    EvaluationReport,
    SplitMetrics,
    SplitProtocol,
    evaluate_predictions,
    fixed_weights_runner,
    linear_compensate,
    pcc,
    refit_runner,
    rmse,
    run_split_protocol,
)
from .fitting import FitReport, LabeledDataset, design_matrix, fit
from .model import (
    DEFAULT_BINNING,
    DEFAULT_INTERRUPTION_EDGES,
    DOWN_SWITCH_BINS,
    N_PARAMETERS,
    BinningConfig,
    FeatureVector,
    InterruptionEvent,
    ModelWeights,
    SessionTrace,
    SwitchEvent,
    bin_interruption,
    bin_quality,
    classify_switch,
    extract_features,
    interruption_degradation,
    paper_weights,
    perceptual_quality,
    predict,
)
from .synth import (
    GeneratorConfig,
    QualityWalk,
    StallDurations,
    generate_labeled_dataset,
    generate_session,
    generate_sessions,
)

__version__ = "0.1.0"

__all__ = [
    "MODEL_STATISTICS",
    "BaselineCoefficients",
    "BaselineFeatures",
    "baseline_predict",
    "baseline_runner",
    "extract_baseline_features",
    "fit_baseline_coefficients",
    "DegenerateMetricError",
    "HasQoEError",
    "UsageError",
    "ValidationError",
    "EvaluationReport",
    "SplitMetrics",
    "SplitProtocol",
    "evaluate_predictions",
    "fixed_weights_runner",
    "linear_compensate",
    "pcc",
    "refit_runner",
    "rmse",
    "run_split_protocol",
    "FitReport",
    "LabeledDataset",
    "design_matrix",
    "fit",
    "DEFAULT_BINNING",
    "DEFAULT_INTERRUPTION_EDGES",
    "DOWN_SWITCH_BINS",
    "N_PARAMETERS",
    "BinningConfig",
    "FeatureVector",
    "InterruptionEvent",
    "ModelWeights",
    "SessionTrace",
    "SwitchEvent",
    "bin_interruption",
    "bin_quality",
    "classify_switch",
    "extract_features",
    "interruption_degradation",
    "paper_weights",
    "perceptual_quality",
    "predict",
    "GeneratorConfig",
    "QualityWalk",
    "StallDurations",
    "generate_labeled_dataset",
    "generate_session",
    "generate_sessions",
]
