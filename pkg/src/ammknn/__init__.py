"""Adaptive minimum-match KNN score prediction for tabular cohorts.

End-to-end toolkit: cohort CSV ingestion, joint standardization,
correlation-threshold variable selection, adaptive nearest-neighbor score
prediction, leave-one-out cross-validation, tiered risk classification,
and confusion-matrix reporting.
"""

from .config import PipelineConfig, config_from_json_dict, load_config
from .evaluation import (
    ConfusionMatrix2,
    ConfusionMatrix3,
    Metrics,
    TierBoundaries,
    accuracy_3x3,
    classify_binary,
    classify_tier,
    confusion_2x2,
    confusion_3x3,
    loocv,
    metrics_from_cm,
    sweep_sensitivity_monotone_check,
    threshold_sweep,
)
from .frame import (
    AggregationSpec,
    CohortSummary,
    Frame,
    aggregate_means,
    drop_incomplete,
    drop_missing_target,
    filter_by_cutoff,
    load_csv,
    summarize_cohorts,
    write_csv,
)
from .knn import (
    AmmknnConfig,
    PredictionRecord,
    ammknn_predict_batch,
    ammknn_predict_one,
    cumulative_means,
    euclidean_distance,
    knn_regress,
    rank_neighbors,
)
from .preprocess import (
    SelectionResult,
    StandardizationStats,
    pearson_correlation,
    select_by_correlation,
    standardize_joint,
)
from .synth import SplitMix64, SynthSpec, assign_cohort_years, generate_cohort, split_cohorts

__version__ = "0.1.0"

__all__ = [
    "AggregationSpec",
    "AmmknnConfig",
    "CohortSummary",
    "ConfusionMatrix2",
    "ConfusionMatrix3",
    "Frame",
    "Metrics",
    "PipelineConfig",
    "PredictionRecord",
    "SelectionResult",
    "SplitMix64",
    "StandardizationStats",
    "SynthSpec",
    "TierBoundaries",
    "accuracy_3x3",
    "aggregate_means",
    "ammknn_predict_batch",
    "ammknn_predict_one",
    "assign_cohort_years",
    "classify_binary",
    "classify_tier",
    "config_from_json_dict",
    "confusion_2x2",
    "confusion_3x3",
    "cumulative_means",
    "drop_incomplete",
    "drop_missing_target",
    "euclidean_distance",
    "filter_by_cutoff",
    "generate_cohort",
    "knn_regress",
    "load_config",
    "load_csv",
    "loocv",
    "metrics_from_cm",
    "pearson_correlation",
    "rank_neighbors",
    "select_by_correlation",
    "split_cohorts",
    "standardize_joint",
    "summarize_cohorts",
    "sweep_sensitivity_monotone_check",
    "threshold_sweep",
    "write_csv",
]
