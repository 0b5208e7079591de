"""Visual realism assessment: pooling, MOS head inference, ensembling and scoring."""

from ._vra import (
    ConfigError,
    DataError,
    Error,
    Model,
    NumericError,
    TooFewFrames,
    average_predictions,
    ensemble,
    final_score,
    fractional_ranks,
    pairwise_consistency_rmse,
    plcc,
    pool,
    read_feature_file,
    rmse,
    scale_bbox,
    srcc,
    write_feature_file,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Error",
    "Model",
    "NumericError",
    "TooFewFrames",
    "average_predictions",
    "ensemble",
    "final_score",
    "fractional_ranks",
    "pairwise_consistency_rmse",
    "plcc",
    "pool",
    "read_feature_file",
    "rmse",
    "scale_bbox",
    "srcc",
    "write_feature_file",
]
