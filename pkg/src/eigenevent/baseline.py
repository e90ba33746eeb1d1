"""Dynamic baseline tensor maintenance.

The baseline for a day is a stack of historical windows whose length is
pinned to the occurrence count of the dominant environmental setting.  It
starts from the most recent history as filler and overwrites the leading
positions with the windows that match today's setting, most recent first.
This blends recent data, same-setting data, and dominant-setting sizing,
and never fails on a previously unseen setting.

Two simpler strategies are provided for comparison runs: a fixed-length
recent-history stack and an exact environmental match.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import DailyWindow, EnvSetting


class EmptyHistory(ValueError):
    """Operation needs at least one historical day."""


@dataclass
class History:
    """Ordered past windows with their settings and per-setting counts."""

    windows: list[DailyWindow] = field(default_factory=list)
    env_seq: list[EnvSetting] = field(default_factory=list)
    env_counts: dict[EnvSetting, int] = field(default_factory=dict)

    def append(self, window: DailyWindow) -> None:
        self.windows.append(window)
        self.env_seq.append(window.env)
        self.env_counts[window.env] = self.env_counts.get(window.env, 0) + 1

    def __len__(self) -> int:
        return len(self.windows)


@dataclass
class BaselineTensor:
    """Stack of historical windows forming the Space x Feature x Time reference."""

    slices: list[DailyWindow]
    capacity: int

    def __len__(self) -> int:
        return len(self.slices)

    def as_array(self) -> np.ndarray:
        return np.stack([w.counts for w in self.slices], axis=-1)


def dominant_setting(history: History) -> tuple[EnvSetting, int]:
    """Most frequent setting and its count; ties go to the setting seen first.

    Insertion order of ``env_counts`` is first-seen order, so a strict
    comparison implements the tie-break.
    """
    if not history.windows:
        raise EmptyHistory("dominant setting of an empty history is undefined")
    best: EnvSetting | None = None
    best_count = 0
    for env, count in history.env_counts.items():
        if count > best_count:
            best, best_count = env, count
    assert best is not None
    return best, best_count


def dominant_count(history: History) -> int:
    return dominant_setting(history)[1]


def match_count(history: History, env: EnvSetting) -> int:
    return history.env_counts.get(env, 0)


def baseline_update(
    current: BaselineTensor | None,
    history: History,
    t: int,
    env: EnvSetting,
    window: DailyWindow,
) -> BaselineTensor:
    """Rebuild the dynamic baseline for instant ``t`` (1-based).

    With no history yet, the baseline holds only today's window.  Otherwise
    the result has dominant-count length: the most recent historical slices
    (newest last) with the first k positions overwritten by the k most
    recent same-setting slices (most recent first), k capped at capacity.
    Slices are shared with the history, never copied.
    """
    if t != len(history) + 1:
        raise ValueError(f"instant {t} inconsistent with history of length {len(history)}")
    if current is None or not current.slices:
        if not history.windows:
            return BaselineTensor([window], 1)
    capacity = dominant_count(history)
    slices = list(history.windows[-capacity:])
    matches = [w for w, s in zip(history.windows, history.env_seq) if s == env]
    k = min(len(matches), capacity)
    if k:
        slices[:k] = matches[::-1][:k]
    return BaselineTensor(slices, capacity)


def fixed_history_baseline(history: History, length: int) -> BaselineTensor | None:
    """Most recent ``length`` windows regardless of setting; None when empty."""
    if length < 1:
        raise ValueError("fixed history length must be at least 1")
    if not history.windows:
        return None
    return BaselineTensor(list(history.windows[-length:]), length)


def env_match_baseline(history: History, env: EnvSetting) -> BaselineTensor | None:
    """All historical windows with today's setting, most recent first;
    None when the setting has never been seen."""
    matches = [w for w, s in zip(history.windows, history.env_seq) if s == env]
    if not matches:
        return None
    return BaselineTensor(matches[::-1], len(matches))
