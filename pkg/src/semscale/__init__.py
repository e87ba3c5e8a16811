"""semscale: per-class semantic scale measurement and scale-balanced training.

The semantic scale of a class is the log-volume of the subspace spanned by
its centered feature vectors; classes with a smaller scale carry less
feature diversity and tend to be under-served by a plain loss. This package
measures those scales, reports the imbalance between them, derives inverse
scale loss weights, and demonstrates the three-stage dynamic re-weighting
training loop on desk-scale data.
"""

from ._kernels import active_backend
from .applications import (
    CurvePoint,
    HierarchyMatchResult,
    MarginalCurve,
    StopDecision,
    collection_stop,
    hierarchy_match,
    long_tail_counts,
    marginal_curve,
    pizza_select,
    subsample_balanced,
)
from .geometry import (
    EffectiveNumberParams,
    LabeledFeatureSet,
    VolumeParams,
    center,
    effective_sample_number,
    feature_volume,
    gram_parallelotope_volume,
    sample_volume,
)
from .imbalance import (
    ClassCenters,
    SemanticScaleReport,
    class_centers,
    combined_scale,
    imbalance_report,
    interference_weights,
    pearson,
)
from .pool import REDUCED_DIM, StageSchedule, StoragePool, pool_scales, reduce_features
from .reweight import DsbWeights, LossParams, dsb_ce, dsb_focal, dsb_nsm, dsb_soft_triple, dsb_weights
from .trainer import (
    EvalResult,
    ToyClassifier,
    TraceEvent,
    TrainConfig,
    TrainResult,
    benchmark_config,
    evaluate,
    gaussian_benchmark,
    stage_of_epoch,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "active_backend",
    "benchmark_config",
    "center",
    "class_centers",
    "collection_stop",
    "combined_scale",
    "dsb_ce",
    "dsb_focal",
    "dsb_nsm",
    "dsb_soft_triple",
    "dsb_weights",
    "effective_sample_number",
    "evaluate",
    "feature_volume",
    "gaussian_benchmark",
    "gram_parallelotope_volume",
    "hierarchy_match",
    "imbalance_report",
    "interference_weights",
    "long_tail_counts",
    "marginal_curve",
    "pearson",
    "pizza_select",
    "pool_scales",
    "reduce_features",
    "sample_volume",
    "stage_of_epoch",
    "subsample_balanced",
    "train",
    "CurvePoint",
    "ClassCenters",
    "DsbWeights",
    "EffectiveNumberParams",
    "EvalResult",
    "HierarchyMatchResult",
    "LabeledFeatureSet",
    "LossParams",
    "MarginalCurve",
    "REDUCED_DIM",
    "SemanticScaleReport",
    "StageSchedule",
    "StopDecision",
    "StoragePool",
    "ToyClassifier",
    "TraceEvent",
    "TrainConfig",
    "TrainResult",
    "VolumeParams",
]
