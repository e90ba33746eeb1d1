"""Figure rendering for report outputs.

Figures are written straight to files (Agg backend, no display) next to
the delimited outputs.  The PNG metadata is stripped so reruns stay
byte-identical.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .detector import DetectionResult
from .evaluate import AmocPoint

_SAVE_KWARGS = {"dpi": 150, "metadata": {"Software": None}}


def save_amoc_figure(path, curves: Mapping[str, Sequence[AmocPoint]]) -> None:
    """Mean detection delay against false alarms per month, one line per run."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, points in curves.items():
        fps = [p.fp_per_month for p in points]
        delays = [p.mean_delay for p in points]
        ax.plot(fps, delays, marker=".", markersize=3, linewidth=1.0, label=label)
    ax.set_xlabel("false alarms per month")
    ax.set_ylabel("mean detection delay (days)")
    ax.grid(True, alpha=0.3)
    if len(curves) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def save_pvalue_figure(path, results: Sequence[DetectionResult], release_day: int | None = None) -> None:
    """Per-day significance trace on a log scale, with the release marked."""
    fig, ax = plt.subplots(figsize=(8.0, 3.5))
    days = [r.day for r in results]
    pvals = [max(r.p_value, 1e-16) for r in results]
    ax.semilogy(days, pvals, linewidth=0.8)
    ax.axhline(0.05, color="gray", linestyle=":", linewidth=0.8)
    if release_day is not None:
        ax.axvline(release_day, color="red", linestyle="--", linewidth=0.8)
    ax.set_xlabel("day")
    ax.set_ylabel("p-value")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
