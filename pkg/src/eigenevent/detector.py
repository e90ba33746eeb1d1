"""Daily eigenspace matching between a count window and its baseline tensor.

Each day the detector rebuilds the baseline, decomposes baseline (rank-1
HOSVD) and window (leading singular triplet), and turns the match into up
to three indicators:

* ``eigenvalue``  ratio of window to baseline principal eigenvalue,
* ``spatial``     Euclidean distance between the spatial eigenvectors,
* ``feature``     Euclidean distance between the feature eigenvectors.

Each indicator's distance is z-scored against its own history of past
distances and mapped to an upper-tail normal p-value; the day's output is
the minimum p over the enabled indicators.  Distance histories only grow
on days whose environmental setting was seen before, so approximate
matches for novel settings never contaminate the reference distribution.
Days without enough history emit p = 1 with a cold-start flag instead of
failing.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .baseline import (
    BaselineTensor,
    History,
    baseline_update,
    env_match_baseline,
    fixed_history_baseline,
)
from .data import DailyWindow
from .tensor import DEFAULT_MAX_ITER, DEFAULT_TOL, EigenSummary, hosvd_rank1, matrix_summary

_SQRT2 = math.sqrt(2.0)

MIN_HISTORY_DEFAULT = 5

INDICATORS = ("eigenvalue", "spatial", "feature")

BASELINE_MODES = ("dynamic", "fixed-history", "env-match-only")

FIXED_HISTORY_DEFAULT = 56


class InsufficientHistory(ValueError):
    """Distance history too short to z-score against."""


class DegenerateBaseline(ValueError):
    """Baseline tensor decomposed to a zero eigenvalue; no ratio exists."""


@dataclass(frozen=True)
class IndicatorConfig:
    """Which eigenspace elements participate in the minimum-p fusion.

    The feature eigenvector is tracked but excluded by default; feature
    signals are noisy and mostly add false alarms.
    """

    use_eigenvalue: bool = True
    use_spatial_vector: bool = True
    use_feature_vector: bool = False

    def __post_init__(self):
        if not (self.use_eigenvalue or self.use_spatial_vector or self.use_feature_vector):
            raise ValueError("at least one indicator must be enabled")

    def enabled(self) -> tuple[str, ...]:
        names = []
        if self.use_eigenvalue:
            names.append("eigenvalue")
        if self.use_spatial_vector:
            names.append("spatial")
        if self.use_feature_vector:
            names.append("feature")
        return tuple(names)


class IndicatorReading(NamedTuple):
    distance: float | None
    z: float | None
    p: float | None


@dataclass(frozen=True)
class DetectionResult:
    day: int
    p_value: float
    components: dict[str, IndicatorReading]
    cold_start: bool


def pvalue(z: float) -> float:
    """Upper-tail standard normal probability, 0.5 * erfc(z / sqrt(2))."""
    return 0.5 * math.erfc(z / _SQRT2)


def zscore(d: float, vd: Sequence[float], min_history: int = MIN_HISTORY_DEFAULT) -> float:
    """Standardize ``d`` against its history using the sample (n-1) deviation.

    A constant history is a defined case: z = 0 when d equals the constant,
    +/-inf otherwise (any deviation from a perfectly constant history is
    maximally surprising).
    """
    if len(vd) < min_history:
        raise InsufficientHistory(f"need {min_history} distances, have {len(vd)}")
    arr = np.asarray(vd, dtype=float)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1))
    if std == 0.0:
        if d == mean:
            return 0.0
        return math.inf if d > mean else -math.inf
    return (d - mean) / std


def eigen_distances(
    window_summary: EigenSummary, baseline_summary: EigenSummary
) -> tuple[float, float, float]:
    """Eigenvalue ratio and per-mode eigenvector distances of a match.

    The ratio is window over baseline, so outbreak-driven growth pushes it
    up and the upper-tail p-value down.
    """
    if baseline_summary.eigenvalue == 0.0:
        raise DegenerateBaseline("baseline eigenvalue is zero")
    if window_summary.space_vector.shape != baseline_summary.space_vector.shape:
        raise ValueError("spatial vector lengths differ between window and baseline")
    if window_summary.feature_vector.shape != baseline_summary.feature_vector.shape:
        raise ValueError("feature vector lengths differ between window and baseline")
    d1 = window_summary.eigenvalue / baseline_summary.eigenvalue
    d2 = float(np.linalg.norm(window_summary.space_vector - baseline_summary.space_vector))
    d3 = float(np.linalg.norm(window_summary.feature_vector - baseline_summary.feature_vector))
    return d1, d2, d3


@dataclass
class Detector:
    """Sequential per-stream state: history, baseline, and distance vectors.

    One detector instance owns one stream; step days in increasing order.
    Independent streams can run in parallel with no shared state.
    """

    indicators: IndicatorConfig = field(default_factory=IndicatorConfig)
    min_history: int = MIN_HISTORY_DEFAULT
    baseline_mode: str = "dynamic"
    fixed_history_len: int = FIXED_HISTORY_DEFAULT
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if self.baseline_mode not in BASELINE_MODES:
            raise ValueError(f"baseline_mode must be one of {BASELINE_MODES}")
        self.history = History()
        self.baseline: BaselineTensor | None = None
        self.vd1: list[float] = []
        self.vd2: list[float] = []
        self.vd3: list[float] = []

    def _build_baseline(self, window: DailyWindow) -> BaselineTensor | None:
        if not self.history.windows:
            return BaselineTensor([window], 1)
        if self.baseline_mode == "dynamic":
            return baseline_update(
                self.baseline, self.history, len(self.history) + 1, window.env, window
            )
        if self.baseline_mode == "fixed-history":
            return fixed_history_baseline(self.history, self.fixed_history_len)
        return env_match_baseline(self.history, window.env)

    def step(self, window: DailyWindow) -> DetectionResult:
        if self.history.windows and window.day <= self.history.windows[-1].day:
            raise ValueError(
                f"day {window.day} is not after the last processed day "
                f"{self.history.windows[-1].day}"
            )
        env_seen = window.env in self.history.env_counts

        baseline = self._build_baseline(window)
        distances: tuple[float, float, float] | None = None
        if baseline is not None:
            self.baseline = baseline
            baseline_summary = hosvd_rank1(baseline.as_array(), self.tol, self.max_iter)
            window_summary = matrix_summary(window.counts, self.tol, self.max_iter)
            try:
                distances = eigen_distances(window_summary, baseline_summary)
            except DegenerateBaseline:
                distances = None

        components: dict[str, IndicatorReading] = {}
        cold = distances is None
        if distances is not None:
            histories = (self.vd1, self.vd2, self.vd3)
            for name, d, vd in zip(INDICATORS, distances, histories):
                try:
                    z = zscore(d, vd, self.min_history)
                except InsufficientHistory:
                    components[name] = IndicatorReading(d, None, None)
                    cold = True
                else:
                    components[name] = IndicatorReading(d, z, pvalue(z))
        if cold:
            p_value = 1.0
        else:
            p_value = min(components[name].p for name in self.indicators.enabled())

        if distances is not None and env_seen:
            self.vd1.append(distances[0])
            self.vd2.append(distances[1])
            self.vd3.append(distances[2])
        self.history.append(window)
        return DetectionResult(window.day, p_value, components, cold)


def detect_stream(windows: Iterable[DailyWindow], **detector_kwargs) -> list[DetectionResult]:
    """Run a fresh detector over an ordered stream of daily windows."""
    detector = Detector(**detector_kwargs)
    return [detector.step(window) for window in windows]


def write_detection_csv(path, results: Iterable[DetectionResult]) -> None:
    """Per-day output: day,p_value,p_eigenvalue,p_spatial,p_feature,d1,d2,d3,cold_start."""

    def cell(value: float | None) -> str:
        return "" if value is None else f"{value:.12g}"

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["day", "p_value", "p_eigenvalue", "p_spatial", "p_feature", "d1", "d2", "d3", "cold_start"]
        )
        for result in results:
            readings = [result.components.get(name) for name in INDICATORS]
            writer.writerow(
                [
                    result.day,
                    f"{result.p_value:.12g}",
                    *(cell(r.p) if r else "" for r in readings),
                    *(cell(r.distance) if r else "" for r in readings),
                    int(result.cold_start),
                ]
            )
