"""Early event detection for multivariate spatiotemporal count streams.

Daily Space x Feature count windows are matched against a dynamic baseline
tensor built from history conditioned on the day's environmental setting;
shifts in the leading eigenvalue or eigenvectors of the match turn into
per-day p-values, and an alarm-scoring harness sweeps thresholds into
false-alarm/delay trade-off curves.
"""

from .baseline import BaselineTensor, History, baseline_update, dominant_count
from .data import DailyWindow, Record, Schema, aggregate_day, citybn_schema, env_of_day
from .detector import (
    DetectionResult,
    Detector,
    IndicatorConfig,
    detect_stream,
    eigen_distances,
    pvalue,
    zscore,
)
from .evaluate import AmocPoint, EvalConfig, amoc, auamoc, classify, compare_baselines
from .simulate import ReleaseProfile, SimConfig, SimDataset, generate
from .tensor import EigenSummary, hosvd_rank1, leading_singular_triplet, mode_unfold

__version__ = "0.1.0"

__all__ = [
    "AmocPoint",
    "BaselineTensor",
    "DailyWindow",
    "DetectionResult",
    "Detector",
    "EigenSummary",
    "EvalConfig",
    "History",
    "IndicatorConfig",
    "Record",
    "ReleaseProfile",
    "Schema",
    "SimConfig",
    "SimDataset",
    "aggregate_day",
    "amoc",
    "auamoc",
    "baseline_update",
    "citybn_schema",
    "classify",
    "compare_baselines",
    "detect_stream",
    "dominant_count",
    "eigen_distances",
    "env_of_day",
    "generate",
    "hosvd_rank1",
    "leading_singular_triplet",
    "mode_unfold",
    "pvalue",
    "zscore",
]
