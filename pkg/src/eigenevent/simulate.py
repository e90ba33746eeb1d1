"""Synthetic surveillance streams with seasonal structure and injected releases.

Counts are Poisson draws whose means factor into a region weight, a feature
column weight, and a multiplier derived from the day's environmental
setting.  The setting itself comes from a deterministic calendar: the
season cycles every 91 days, weather follows the season, the flu level is
a lagged function of the season, and the day-of-week class repeats weekly.
A release multiplies the affected cells' means over the 14 days after the
release day, by default ramping linearly up to a peak.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .data import (
    DailyWindow,
    EnvSetting,
    Schema,
    citybn_schema,
    env_of_day,
    write_env_csv,
    write_window_csv,
)

RELEASE_WINDOW_DAYS = 14

_SEASONS = ("winter", "spring", "summer", "fall")
_FLU_BY_SEASON = {"winter": "high", "spring": "decline", "summer": "none", "fall": "low"}
_WEATHER_BY_SEASON = {"winter": "cold", "spring": "hot", "summer": "hot", "fall": "cold"}
_FLU_LAG_DAYS = 30

_ENV_MULTIPLIERS = {
    ("season", "winter"): 1.25,
    ("season", "spring"): 1.0,
    ("season", "summer"): 0.85,
    ("season", "fall"): 1.1,
    ("flu", "none"): 0.9,
    ("flu", "low"): 1.0,
    ("flu", "high"): 1.35,
    ("flu", "decline"): 1.15,
    ("dayofweek", "weekday"): 1.0,
    ("dayofweek", "sat"): 0.75,
    ("dayofweek", "sun"): 0.7,
    ("weather", "cold"): 1.1,
    ("weather", "hot"): 0.95,
}

# The setting does not just rescale activity, it redistributes it: weekends
# move counts between regions, flu level and weather move them between
# feature columns, seasons tilt both.  Phases are distinct per level so
# every setting has its own correlation structure.
_REGION_TILTS = {
    ("dayofweek", "sat"): (0.35, 0.00),
    ("dayofweek", "sun"): (0.35, 0.25),
    ("season", "winter"): (0.15, 0.10),
    ("season", "spring"): (0.15, 0.35),
    ("season", "summer"): (0.15, 0.60),
    ("season", "fall"): (0.15, 0.85),
}
_COLUMN_TILTS = {
    ("flu", "none"): (0.25, 0.00),
    ("flu", "low"): (0.25, 0.25),
    ("flu", "high"): (0.25, 0.50),
    ("flu", "decline"): (0.25, 0.75),
    ("weather", "cold"): (0.20, 0.15),
    ("weather", "hot"): (0.20, 0.65),
}


def _tilt_profile(n: int, strength: float, phase: float) -> np.ndarray:
    idx = np.arange(n)
    return 1.0 + strength * np.cos(2.0 * np.pi * (idx / n + phase))


class InvalidConfig(ValueError):
    """Simulation configuration violates its own constraints."""


def calendar_env(day: int) -> dict[str, str]:
    """Deterministic environmental values for a 1-based day number."""
    if day < 1:
        raise InvalidConfig("days are 1-based")
    season = _SEASONS[((day - 1) // 91) % 4]
    lagged_season = _SEASONS[(((day - 1 - _FLU_LAG_DAYS) % 364) // 91) % 4]
    weekday = (day - 1) % 7
    return {
        "season": season,
        "weather": _WEATHER_BY_SEASON[season],
        "flu": _FLU_BY_SEASON[lagged_season],
        "dayofweek": "sat" if weekday == 5 else "sun" if weekday == 6 else "weekday",
    }


def env_rate_multiplier(env_values: Mapping[str, str]) -> float:
    mult = 1.0
    for attr, level in env_values.items():
        mult *= _ENV_MULTIPLIERS.get((attr, level), 1.0)
    return mult


@dataclass(frozen=True)
class ReleaseProfile:
    """Which cells an outbreak touches and how hard, day by day."""

    regions: tuple[int, ...]
    columns: tuple[int, ...]
    multipliers: tuple[float, ...]

    @staticmethod
    def ramp(peak: float, regions: tuple[int, ...], columns: tuple[int, ...]) -> "ReleaseProfile":
        """Linear ramp reaching ``peak`` on the last of the 14 outbreak days."""
        mults = tuple(
            1.0 + (peak - 1.0) * (k + 1) / RELEASE_WINDOW_DAYS for k in range(RELEASE_WINDOW_DAYS)
        )
        return ReleaseProfile(regions, columns, mults)


@dataclass(frozen=True)
class SimConfig:
    schema: Schema = field(default_factory=citybn_schema)
    n_days: int = 730
    seed: int = 0
    base_rate: float = 3.0
    region_weights: tuple[float, ...] | None = None
    column_weights: tuple[float, ...] | None = None
    release_day: int | None = None
    release: ReleaseProfile | None = None
    noise_level: float = 0.0
    # Explicit per-setting rate tables override the factored defaults.
    base_rates: Mapping[EnvSetting, np.ndarray] | None = None
    # Pin every day to one setting (bypasses the calendar).
    fixed_env: Mapping[str, str] | None = None

    def validate(self) -> None:
        if self.n_days < 1:
            raise InvalidConfig("n_days must be positive")
        if self.base_rate < 0:
            raise InvalidConfig("base_rate must be nonnegative")
        if self.noise_level < 0:
            raise InvalidConfig("noise_level must be nonnegative")
        if (self.release_day is None) != (self.release is None):
            raise InvalidConfig("release_day and release must be given together")
        if self.release_day is not None:
            if not 1 <= self.release_day <= self.n_days - RELEASE_WINDOW_DAYS:
                raise InvalidConfig(
                    f"release_day must lie in [1, {self.n_days - RELEASE_WINDOW_DAYS}]"
                )
            profile = self.release
            if len(profile.multipliers) != RELEASE_WINDOW_DAYS:
                raise InvalidConfig(f"release needs {RELEASE_WINDOW_DAYS} daily multipliers")
            if any(m < 1.0 for m in profile.multipliers):
                raise InvalidConfig("release multipliers must be >= 1")
            if not profile.regions or not profile.columns:
                raise InvalidConfig("release must affect at least one region and column")
            if max(profile.regions) >= self.schema.n_regions or min(profile.regions) < 0:
                raise InvalidConfig("release region index out of range")
            if max(profile.columns) >= self.schema.n_feature_columns or min(profile.columns) < 0:
                raise InvalidConfig("release column index out of range")


@dataclass(frozen=True)
class SimDataset:
    windows: list[DailyWindow]
    env_per_day: list[EnvSetting]
    release_day: int | None


def default_region_weights(n_regions: int) -> tuple[float, ...]:
    return tuple(np.linspace(1.5, 0.5, n_regions))


def default_column_weights(schema: Schema) -> tuple[float, ...]:
    weights = []
    for _, levels in schema.feature_attrs:
        k = len(levels)
        weights.extend(1.4 - 0.8 * i / max(k - 1, 1) for i in range(k))
    return tuple(weights)


def _rate_matrix(config: SimConfig, env: EnvSetting, env_values: Mapping[str, str]) -> np.ndarray:
    if config.base_rates is not None:
        try:
            return np.asarray(config.base_rates[env], dtype=float)
        except KeyError:
            raise InvalidConfig(f"no base rate table for setting {env}") from None
    region_w = np.asarray(config.region_weights or default_region_weights(config.schema.n_regions))
    column_w = np.asarray(config.column_weights or default_column_weights(config.schema))
    if region_w.shape != (config.schema.n_regions,):
        raise InvalidConfig("region_weights length does not match schema")
    if column_w.shape != (config.schema.n_feature_columns,):
        raise InvalidConfig("column_weights length does not match schema")
    region_w = region_w.copy()
    column_w = column_w.copy()
    for key, level in env_values.items():
        if (key, level) in _REGION_TILTS:
            strength, phase = _REGION_TILTS[(key, level)]
            region_w = region_w * _tilt_profile(region_w.size, strength, phase)
        if (key, level) in _COLUMN_TILTS:
            strength, phase = _COLUMN_TILTS[(key, level)]
            column_w = column_w * _tilt_profile(column_w.size, strength, phase)
    return config.base_rate * env_rate_multiplier(env_values) * np.outer(region_w, column_w)


def generate(config: SimConfig) -> SimDataset:
    """Draw one dataset; identical configs (same seed) give identical output."""
    config.validate()
    schema = config.schema
    rng = np.random.default_rng(config.seed)
    windows: list[DailyWindow] = []
    env_per_day: list[EnvSetting] = []
    for day in range(1, config.n_days + 1):
        env_values = dict(config.fixed_env) if config.fixed_env is not None else calendar_env(day)
        env = env_of_day(env_values, schema)
        rate = _rate_matrix(config, env, env_values)
        if config.release_day is not None:
            offset = day - config.release_day
            if 1 <= offset <= RELEASE_WINDOW_DAYS:
                rate = rate.copy()
                boost = config.release.multipliers[offset - 1]
                rows = np.asarray(config.release.regions)[:, None]
                cols = np.asarray(config.release.columns)[None, :]
                rate[rows, cols] *= boost
        if config.noise_level > 0.0:
            rate = rate * np.exp(config.noise_level * rng.standard_normal())
        counts = rng.poisson(rate).astype(float)
        windows.append(DailyWindow(day, env, counts))
        env_per_day.append(env)
    return SimDataset(windows, env_per_day, config.release_day)


def write_dataset(directory, dataset_id: str, dataset: SimDataset, schema: Schema) -> None:
    """Window CSV plus environment CSV for one dataset."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_window_csv(directory / f"{dataset_id}.windows.csv", dataset.windows, schema)
    env_by_day = {w.day: w.env for w in dataset.windows}
    write_env_csv(directory / f"{dataset_id}.env.csv", env_by_day, schema)


def write_truth_csv(path, release_days: Mapping[str, int]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("dataset_id,release_day\n")
        for dataset_id in sorted(release_days):
            fh.write(f"{dataset_id},{release_days[dataset_id]}\n")


def read_truth_csv(path) -> dict[str, int]:
    from .data import DataError

    releases: dict[str, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "dataset_id,release_day":
            raise DataError(f"{path}:1: expected header dataset_id,release_day")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected dataset_id,release_day")
            dataset_id, raw_day = parts
            if dataset_id in releases:
                raise DataError(f"{path}:{lineno}: duplicate dataset {dataset_id!r}; one release per dataset")
            try:
                releases[dataset_id] = int(raw_day)
            except ValueError:
                raise DataError(f"{path}:{lineno}: release_day {raw_day!r} is not an integer") from None
    return releases


def benchmark_config(
    seed: int,
    n_days: int = 730,
    release_day: int | None = None,
    peak: float = 5.0,
    affected_regions: int = 2,
    base_rate: float = 3.0,
    noise_level: float = 0.0,
) -> SimConfig:
    """Default end-to-end configuration: a release in year two boosting all
    feature columns of ``affected_regions`` regions up to ``peak``."""
    schema = citybn_schema()
    config = SimConfig(schema=schema, n_days=n_days, seed=seed, base_rate=base_rate, noise_level=noise_level)
    if release_day is not None:
        regions = tuple(range(affected_regions))
        columns = tuple(range(schema.n_feature_columns))
        config = replace(
            config,
            release_day=release_day,
            release=ReleaseProfile.ramp(peak, regions, columns),
        )
    return config
