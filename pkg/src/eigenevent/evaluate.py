"""Alarm scoring: detection delay, false alarms, threshold sweeps, and the
trade-off curve of false alarms per month against mean detection delay.

An alarm inside the 14 days after the release is true; everything else is
false.  Delay is the gap between the release and the first true alarm,
capped at 14 when the release is missed.  Sweeping the alarm threshold
over a grid turns one p-value stream into a curve; multiple datasets are
averaged pointwise, and the area under the curve (trapezoidal, over the
realized false-alarm range) summarizes a run in one number.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .data import DailyWindow
from .detector import BASELINE_MODES, FIXED_HISTORY_DEFAULT, IndicatorConfig, detect_stream

DAYS_PER_MONTH = 30.0

DEFAULT_THRESHOLDS = tuple(round(0.020 + 0.001 * i, 3) for i in range(231))

# Reference results for the 100-dataset CityBN benchmark; reproducible
# only against the original files.
CITYBN_REFERENCE = {"fp_per_month": 1.866439, "mean_delay": 2.839827, "auamoc": 8.027842}
CITYBN_TOLERANCES = {"fp_rel": 0.15, "delay_abs": 0.5, "auamoc_rel": 0.10}


class DegenerateRange(ValueError):
    """All curve points share one false-alarm value; the area is undefined."""


@dataclass(frozen=True)
class AlarmOutcome:
    false_alarms: int
    delay: float
    detected: bool


@dataclass(frozen=True)
class AmocPoint:
    threshold: float
    fp_per_month: float
    mean_delay: float


@dataclass(frozen=True)
class EvalConfig:
    train_days: int = 365
    eval_days: int = 365
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    window_len: int = 14
    baseline_mode: str = "dynamic"
    fixed_history_len: int = FIXED_HISTORY_DEFAULT
    indicators: IndicatorConfig = field(default_factory=IndicatorConfig)
    min_history: int = 5

    def __post_init__(self):
        if self.train_days < 0 or self.eval_days < 1:
            raise ValueError("need a nonnegative training span and a positive evaluation span")
        if self.window_len < 1:
            raise ValueError("window_len must be positive")
        if self.baseline_mode not in BASELINE_MODES:
            raise ValueError(f"baseline_mode must be one of {BASELINE_MODES}")
        if not self.thresholds:
            raise ValueError("threshold list is empty")
        if any(not 0.0 < t < 1.0 for t in self.thresholds):
            raise ValueError("thresholds must lie strictly inside (0, 1)")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly increasing")

    @property
    def eval_start(self) -> int:
        return self.train_days + 1

    @property
    def eval_end(self) -> int:
        return self.train_days + self.eval_days


def classify(
    alarm_days: Sequence[int],
    release_day: int,
    eval_start: int,
    eval_end: int,
    window_len: int = 14,
) -> AlarmOutcome:
    """Split alarms into true and false around one release.

    True alarms land in [release+1, release+window_len]; the delay is the
    first of them minus the release day, or window_len when there is none.
    """
    if not eval_start <= release_day <= eval_end:
        raise ValueError("release day must lie inside the evaluation span")
    window_start = release_day + 1
    window_end = release_day + window_len
    false_alarms = 0
    first_true: int | None = None
    for day in alarm_days:
        if window_start <= day <= window_end:
            if first_true is None:
                first_true = day
        else:
            false_alarms += 1
    if first_true is None:
        return AlarmOutcome(false_alarms, float(window_len), False)
    return AlarmOutcome(false_alarms, float(first_true - release_day), True)


def amoc(p_per_day: Sequence[float], release_day: int, cfg: EvalConfig) -> list[AmocPoint]:
    """One curve point per threshold for a single p-value stream.

    ``p_per_day`` is indexed by day (entry ``i`` is day ``i + 1``) and must
    cover the whole evaluation span.
    """
    if len(p_per_day) < cfg.eval_end:
        raise ValueError(f"p-value stream covers {len(p_per_day)} days, need {cfg.eval_end}")
    eval_days = range(cfg.eval_start, cfg.eval_end + 1)
    pairs = [(day, p_per_day[day - 1]) for day in eval_days]
    months = cfg.eval_days / DAYS_PER_MONTH
    points = []
    for threshold in cfg.thresholds:
        alarms = [day for day, p in pairs if p < threshold]
        outcome = classify(alarms, release_day, cfg.eval_start, cfg.eval_end, cfg.window_len)
        points.append(AmocPoint(threshold, outcome.false_alarms / months, outcome.delay))
    return points


def average_amoc(curves: Sequence[Sequence[AmocPoint]]) -> list[AmocPoint]:
    """Pointwise mean of per-dataset curves sharing one threshold grid."""
    if not curves:
        raise ValueError("no curves to average")
    thresholds = [p.threshold for p in curves[0]]
    for curve in curves[1:]:
        if [p.threshold for p in curve] != thresholds:
            raise ValueError("curves use different threshold grids")
    fp = np.mean([[p.fp_per_month for p in curve] for curve in curves], axis=0)
    delay = np.mean([[p.mean_delay for p in curve] for curve in curves], axis=0)
    return [AmocPoint(t, float(f), float(d)) for t, f, d in zip(thresholds, fp, delay)]


def auamoc(points: Sequence[AmocPoint]) -> float:
    """Trapezoidal area of mean delay over false alarms per month.

    Duplicate false-alarm values collapse to their mean delay first, so
    inserting a copy of an existing point never changes the area.
    """
    if len(points) < 2:
        raise ValueError("need at least two curve points")
    by_fp: dict[float, list[float]] = {}
    for p in points:
        by_fp.setdefault(p.fp_per_month, []).append(p.mean_delay)
    if len(by_fp) < 2:
        raise DegenerateRange("all points share one false-alarm value")
    fps = np.array(sorted(by_fp))
    delays = np.array([np.mean(by_fp[f]) for f in fps])
    return float(np.trapezoid(delays, fps))


def summarize_curve(points: Sequence[AmocPoint]) -> dict:
    """Threshold-averaged false alarms and delay plus the area under the curve."""
    fps = [p.fp_per_month for p in points]
    delays = [p.mean_delay for p in points]
    summary = {
        "fp_per_month": float(np.mean(fps)),
        "mean_delay": float(np.mean(delays)),
        "fp_range": [float(min(fps)), float(max(fps))],
        "auamoc_degenerate": False,
    }
    try:
        summary["auamoc"] = auamoc(points)
    except (DegenerateRange, ValueError):
        summary["auamoc"] = summary["mean_delay"]
        summary["auamoc_degenerate"] = True
    return summary


@dataclass(frozen=True)
class DatasetRun:
    dataset_id: str
    curve: list[AmocPoint]
    p_per_day: list[float]


def run_dataset(
    dataset_id: str,
    windows: Sequence[DailyWindow],
    release_day: int,
    cfg: EvalConfig,
) -> DatasetRun:
    """Detector pass plus threshold sweep for one dataset."""
    results = detect_stream(
        windows,
        indicators=cfg.indicators,
        min_history=cfg.min_history,
        baseline_mode=cfg.baseline_mode,
        fixed_history_len=cfg.fixed_history_len,
    )
    p_per_day = [r.p_value for r in results]
    return DatasetRun(dataset_id, amoc(p_per_day, release_day, cfg), p_per_day)


def _run_dataset_star(args) -> DatasetRun:
    return run_dataset(*args)


def evaluate_datasets(
    datasets: Sequence[tuple[str, Sequence[DailyWindow], int]],
    cfg: EvalConfig,
    workers: int = 1,
) -> tuple[list[AmocPoint], dict, list[DatasetRun]]:
    """Averaged curve and summary over many datasets.

    Dataset runs are independent; results are keyed and sorted by dataset
    id before aggregation, so the outcome does not depend on ``workers``.
    """
    jobs = [(dataset_id, windows, release, cfg) for dataset_id, windows, release in datasets]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_dataset_star, jobs))
    else:
        runs = [_run_dataset_star(job) for job in jobs]
    runs.sort(key=lambda r: r.dataset_id)
    averaged = average_amoc([r.curve for r in runs])
    summary = summarize_curve(averaged)
    summary["n_datasets"] = len(runs)
    summary["baseline_mode"] = cfg.baseline_mode
    return averaged, summary, runs


def compare_baselines(
    datasets: Sequence[tuple[str, Sequence[DailyWindow], int]],
    cfg: EvalConfig,
    modes: Sequence[str] = BASELINE_MODES,
    workers: int = 1,
) -> dict[str, dict]:
    """Side-by-side summaries for several baseline strategies."""
    if not modes:
        raise ValueError("no baseline modes requested")
    out: dict[str, dict] = {}
    for mode in modes:
        mode_cfg = replace(cfg, baseline_mode=mode)
        curve, summary, _ = evaluate_datasets(datasets, mode_cfg, workers=workers)
        out[mode] = {"summary": summary, "curve": curve}
    return out


def reference_comparison(summary: Mapping[str, float]) -> dict:
    """How a run compares to the benchmark's reference row."""
    fp, delay, area = summary["fp_per_month"], summary["mean_delay"], summary["auamoc"]
    ref = CITYBN_REFERENCE
    return {
        "reference": dict(ref),
        "fp_within_tolerance": abs(fp - ref["fp_per_month"]) <= CITYBN_TOLERANCES["fp_rel"] * ref["fp_per_month"],
        "delay_within_tolerance": abs(delay - ref["mean_delay"]) <= CITYBN_TOLERANCES["delay_abs"],
        "auamoc_within_tolerance": abs(area - ref["auamoc"]) <= CITYBN_TOLERANCES["auamoc_rel"] * ref["auamoc"],
    }


def write_amoc_csv(path, points: Iterable[AmocPoint]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "fp_per_month", "mean_delay"])
        for p in points:
            writer.writerow([f"{p.threshold:.3f}", f"{p.fp_per_month:.12g}", f"{p.mean_delay:.12g}"])


def write_summary_json(path, summary: Mapping) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
