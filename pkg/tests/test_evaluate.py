from __future__ import annotations

import numpy as np
import pytest

from eigenevent.data import DailyWindow
from eigenevent.evaluate import (
    AmocPoint,
    DegenerateRange,
    EvalConfig,
    amoc,
    auamoc,
    average_amoc,
    classify,
    compare_baselines,
    evaluate_datasets,
    reference_comparison,
    summarize_curve,
    write_amoc_csv,
)

CFG = EvalConfig(train_days=365, eval_days=365)


def test_classify_next_day_detection():
    outcome = classify([401], release_day=400, eval_start=366, eval_end=730)
    assert outcome.false_alarms == 0
    assert outcome.delay == 1.0
    assert outcome.detected


def test_classify_counts_out_of_window_alarms_as_false():
    outcome = classify([380, 401, 430], release_day=400, eval_start=366, eval_end=730)
    assert outcome.false_alarms == 2
    assert outcome.delay == 1.0
    assert outcome.detected


def test_classify_miss_caps_delay_at_window():
    outcome = classify([], release_day=400, eval_start=366, eval_end=730)
    assert outcome.false_alarms == 0
    assert outcome.delay == 14.0
    assert not outcome.detected


def test_classify_counts_each_alarm_once():
    alarms = [390, 402, 403, 500]
    outcome = classify(alarms, release_day=400, eval_start=366, eval_end=730)
    assert outcome.false_alarms + 1 <= len(alarms)
    assert outcome.false_alarms == 2


def test_amoc_with_all_pvalues_one_never_alarms():
    p = [1.0] * 730
    points = amoc(p, release_day=400, cfg=CFG)
    assert len(points) == 231
    assert all(pt.fp_per_month == 0.0 and pt.mean_delay == 14.0 for pt in points)


def test_amoc_perfect_detector_hits_optimal_corner():
    p = [1.0] * 730
    p[400] = 0.0  # day 401
    points = amoc(p, release_day=400, cfg=CFG)
    assert all(pt.fp_per_month == 0.0 and pt.mean_delay == 1.0 for pt in points)


def test_amoc_threshold_just_below_min_p_yields_no_alarms():
    rng = np.random.default_rng(2)
    p = rng.uniform(0.3, 1.0, size=730)
    cfg = EvalConfig(train_days=365, eval_days=365, thresholds=(0.25,))
    points = amoc(list(p), release_day=450, cfg=cfg)
    assert points[0].fp_per_month == 0.0


def test_amoc_monotone_against_bruteforce_sweep():
    rng = np.random.default_rng(7)
    for _ in range(5):
        p = rng.uniform(0.0, 0.4, size=730)
        points = amoc(list(p), release_day=500, cfg=CFG)
        fps = [pt.fp_per_month for pt in points]
        delays = [pt.mean_delay for pt in points]
        assert fps == sorted(fps)
        assert delays == sorted(delays, reverse=True)
        # brute-force re-count at a few thresholds
        for pt in points[:: 57]:
            alarms = [day for day in range(366, 731) if p[day - 1] < pt.threshold]
            false = sum(1 for a in alarms if not 501 <= a <= 514)
            assert pt.fp_per_month == pytest.approx(false / (365 / 30.0))


def test_auamoc_constant_curve():
    assert auamoc([AmocPoint(0.1, 0.0, 14.0), AmocPoint(0.2, 1.0, 14.0)]) == pytest.approx(14.0)


def test_auamoc_rectangle():
    assert auamoc([AmocPoint(0.1, 0.0, 2.0), AmocPoint(0.2, 2.0, 2.0)]) == pytest.approx(4.0)


def test_auamoc_invariant_under_duplicate_points():
    points = [AmocPoint(0.1, 0.0, 5.0), AmocPoint(0.2, 1.0, 3.0), AmocPoint(0.3, 2.0, 1.0)]
    duplicated = points + [AmocPoint(0.4, 1.0, 3.0)]
    assert auamoc(duplicated) == pytest.approx(auamoc(points))


def test_auamoc_degenerate_range():
    with pytest.raises(DegenerateRange):
        auamoc([AmocPoint(0.1, 0.0, 14.0), AmocPoint(0.2, 0.0, 14.0)])
    summary = summarize_curve([AmocPoint(0.1, 0.0, 14.0), AmocPoint(0.2, 0.0, 14.0)])
    assert summary["auamoc_degenerate"]
    assert summary["auamoc"] == 14.0


def test_average_amoc_is_pointwise():
    a = [AmocPoint(0.1, 0.0, 4.0), AmocPoint(0.2, 2.0, 2.0)]
    b = [AmocPoint(0.1, 2.0, 6.0), AmocPoint(0.2, 4.0, 4.0)]
    avg = average_amoc([a, b])
    assert avg[0] == AmocPoint(0.1, 1.0, 5.0)
    assert avg[1] == AmocPoint(0.2, 3.0, 3.0)


def test_reference_comparison_flags():
    on_target = {"fp_per_month": 1.9, "mean_delay": 2.9, "auamoc": 8.0}
    report = reference_comparison(on_target)
    assert report["fp_within_tolerance"]
    assert report["delay_within_tolerance"]
    assert report["auamoc_within_tolerance"]
    off_target = {"fp_per_month": 4.0, "mean_delay": 5.0, "auamoc": 12.0}
    report = reference_comparison(off_target)
    assert not report["fp_within_tolerance"]
    assert not report["delay_within_tolerance"]
    assert not report["auamoc_within_tolerance"]


def test_amoc_csv_shape(tmp_path):
    p = [1.0] * 730
    points = amoc(p, release_day=400, cfg=CFG)
    path = tmp_path / "amoc.csv"
    write_amoc_csv(path, points)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "threshold,fp_per_month,mean_delay"
    assert len(lines) == 1 + 231
    assert lines[1].split(",")[0] == "0.020"
    assert lines[-1].split(",")[0] == "0.250"


PATTERN = np.outer(np.arange(9, 0, -1), np.arange(16, 0, -1)).astype(float)


def _tiny_dataset(seed: int, release_day: int, n_days: int = 140):
    # Small deterministic stream with a strong post-release boost.
    rng = np.random.default_rng(seed)
    windows = []
    for day in range(1, n_days + 1):
        env = (day % 2, 0, 0, 0)
        counts = rng.poisson(PATTERN / 4.0 + 2.0).astype(float)
        if release_day + 1 <= day <= release_day + 14:
            counts[0:2] = counts[0:2] * 6.0
        windows.append(DailyWindow(day, env, counts))
    return windows


def test_evaluate_datasets_workers_do_not_change_results():
    cfg = EvalConfig(train_days=60, eval_days=60, thresholds=(0.01, 0.05, 0.1, 0.2))
    datasets = [(f"ds{i}", _tiny_dataset(i, 80 + 5 * i), 80 + 5 * i) for i in range(3)]
    seq_curve, seq_summary, _ = evaluate_datasets(datasets, cfg, workers=1)
    par_curve, par_summary, _ = evaluate_datasets(datasets, cfg, workers=3)
    assert seq_curve == par_curve
    assert seq_summary == par_summary


def test_evaluated_detector_catches_the_release():
    cfg = EvalConfig(train_days=60, eval_days=60, thresholds=(0.05,))
    curve, summary, runs = evaluate_datasets([("ds0", _tiny_dataset(0, 90), 90)], cfg)
    assert runs[0].curve[0].mean_delay <= 5.0


def test_compare_baselines_runs_each_mode():
    cfg = EvalConfig(train_days=60, eval_days=60, thresholds=(0.02, 0.05, 0.1))
    datasets = [("ds0", _tiny_dataset(3, 85), 85)]
    out = compare_baselines(datasets, cfg, modes=("dynamic", "fixed-history", "env-match-only"))
    assert set(out) == {"dynamic", "fixed-history", "env-match-only"}
    for mode, payload in out.items():
        assert payload["summary"]["baseline_mode"] == mode
        assert len(payload["curve"]) == 3
