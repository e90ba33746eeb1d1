"""Surveillance records, daily count windows, and environmental settings.

A day of raw records is flattened into one Space x Feature count matrix:
each region is a row, and every level of every feature attribute owns one
column (so one record increments exactly one column per attribute).  The
canonical column order is schema order, which keeps eigenvectors comparable
across days.  Environmental settings are tuples of per-attribute level
indices and hash/compare exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

EnvSetting = tuple[int, ...]


class DataError(ValueError):
    """Malformed input data; message carries file and line context when known."""


class UnknownLevel(DataError):
    """A record or setting uses a level the schema does not declare."""


@dataclass(frozen=True)
class Schema:
    regions: tuple[str, ...]
    feature_attrs: tuple[tuple[str, tuple[str, ...]], ...]
    env_attrs: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        for name, levels in (("regions", self.regions),):
            if not levels or len(set(levels)) != len(levels):
                raise ValueError(f"{name} must be non-empty and duplicate-free")
        for kind in (self.feature_attrs, self.env_attrs):
            for attr, levels in kind:
                if not levels or len(set(levels)) != len(levels):
                    raise ValueError(f"attribute {attr!r} needs a non-empty, duplicate-free level list")

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    @property
    def n_feature_columns(self) -> int:
        return sum(len(levels) for _, levels in self.feature_attrs)

    def feature_column_names(self) -> list[str]:
        return [f"{attr}_{level}" for attr, levels in self.feature_attrs for level in levels]

    def region_index(self, region: str) -> int:
        try:
            return self.regions.index(region)
        except ValueError:
            raise UnknownLevel(f"unknown region {region!r}") from None

    def feature_column(self, attr_pos: int, level: str) -> int:
        attr, levels = self.feature_attrs[attr_pos]
        try:
            offset = levels.index(level)
        except ValueError:
            raise UnknownLevel(f"unknown level {level!r} for attribute {attr!r}") from None
        base = sum(len(lv) for _, lv in self.feature_attrs[:attr_pos])
        return base + offset

    def n_env_settings(self) -> int:
        n = 1
        for _, levels in self.env_attrs:
            n *= len(levels)
        return n

    def env_values(self, setting: EnvSetting) -> dict[str, str]:
        """Decode a setting tuple back to attribute -> level names."""
        if len(setting) != len(self.env_attrs):
            raise ValueError("setting length does not match environmental attributes")
        return {attr: levels[idx] for (attr, levels), idx in zip(self.env_attrs, setting)}


def citybn_schema() -> Schema:
    """Schema of the public CityBN benchmark: 9 regions, 16 feature columns
    (3+2+3+4+4) and 4x3x2x4 = 96 environmental settings."""
    return Schema(
        regions=("NW", "N", "NE", "W", "C", "E", "SW", "S", "SE"),
        feature_attrs=(
            ("age", ("child", "adult", "senior")),
            ("gender", ("female", "male")),
            ("action", ("purchase", "evisit", "absent")),
            ("symptom", ("none", "respiratory", "nausea", "rash")),
            ("drug", ("none", "aspirin", "nyquil", "vomit-b-gone")),
        ),
        env_attrs=(
            ("flu", ("none", "low", "high", "decline")),
            ("dayofweek", ("weekday", "sat", "sun")),
            ("weather", ("cold", "hot")),
            ("season", ("winter", "spring", "summer", "fall")),
        ),
    )


@dataclass(frozen=True)
class Record:
    """One raw surveillance record: region, day, and one level per feature
    attribute in schema order."""

    region: str
    day: int
    features: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class DailyWindow:
    """One day's Space x Feature count matrix plus its environmental setting."""

    day: int
    env: EnvSetting
    counts: np.ndarray = field(repr=False)

    def same_as(self, other: "DailyWindow") -> bool:
        return (
            self.day == other.day
            and self.env == other.env
            and np.array_equal(self.counts, other.counts)
        )


def env_of_day(env_values: Mapping[str, str], schema: Schema) -> EnvSetting:
    """Encode attribute -> level names as the canonical setting tuple."""
    setting = []
    for attr, levels in schema.env_attrs:
        if attr not in env_values:
            raise UnknownLevel(f"missing environmental attribute {attr!r}")
        level = env_values[attr]
        try:
            setting.append(levels.index(level))
        except ValueError:
            raise UnknownLevel(f"unknown level {level!r} for attribute {attr!r}") from None
    return tuple(setting)


def aggregate_day(
    records: Iterable[Record], day: int, env: EnvSetting, schema: Schema
) -> DailyWindow:
    """Tally one day's records into a count window.

    Every record increments one column inside each feature attribute's
    block, so any single block sums to the region's record count.
    """
    counts = np.zeros((schema.n_regions, schema.n_feature_columns))
    for rec in records:
        if rec.day != day:
            raise ValueError(f"record for day {rec.day} passed to aggregate_day(day={day})")
        if len(rec.features) != len(schema.feature_attrs):
            raise UnknownLevel(
                f"record has {len(rec.features)} feature values, schema declares {len(schema.feature_attrs)}"
            )
        row = schema.region_index(rec.region)
        for pos, level in enumerate(rec.features):
            counts[row, schema.feature_column(pos, level)] += 1.0
    return DailyWindow(day, env, counts)


def windows_from_records(
    records: Sequence[Record], env_by_day: Mapping[int, EnvSetting], schema: Schema
) -> list[DailyWindow]:
    """Group records by day (ascending) and aggregate each day."""
    by_day: dict[int, list[Record]] = {}
    for rec in records:
        by_day.setdefault(rec.day, []).append(rec)
    windows = []
    for day in sorted(by_day):
        if day not in env_by_day:
            raise DataError(f"no environmental setting for day {day}")
        windows.append(aggregate_day(by_day[day], day, env_by_day[day], schema))
    return windows


# -- CSV formats ------------------------------------------------------------
#
# Record CSV       header: region,day,<feature attribute names>
# Environment CSV  header: day,<environmental attribute names>
# Window CSV       header: day,env,region,<feature column names>; env is the
#                  setting tuple as dash-joined level indices (e.g. "2-0-0-0").


def _env_token(setting: EnvSetting) -> str:
    return "-".join(str(i) for i in setting)


def _parse_env_token(token: str, schema: Schema, where: str) -> EnvSetting:
    try:
        setting = tuple(int(part) for part in token.split("-"))
    except ValueError:
        raise DataError(f"{where}: malformed env token {token!r}") from None
    if len(setting) != len(schema.env_attrs):
        raise DataError(f"{where}: env token {token!r} has wrong arity")
    for idx, (attr, levels) in zip(setting, schema.env_attrs):
        if not 0 <= idx < len(levels):
            raise DataError(f"{where}: env index {idx} out of range for {attr!r}")
    return setting


def read_records_csv(path, schema: Schema) -> list[Record]:
    expected = ["region", "day"] + [attr for attr, _ in schema.feature_attrs]
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected:
            raise DataError(f"{path}:1: expected header {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                raise DataError(f"{path}:{lineno}: expected {len(expected)} fields, got {len(row)}")
            try:
                day = int(row[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: day {row[1]!r} is not an integer") from None
            if day < 1:
                raise DataError(f"{path}:{lineno}: day must be >= 1")
            records.append(Record(row[0], day, tuple(row[2:])))
    return records


def write_records_csv(path, records: Iterable[Record], schema: Schema) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["region", "day"] + [attr for attr, _ in schema.feature_attrs])
        for rec in records:
            writer.writerow([rec.region, rec.day, *rec.features])


def read_env_csv(path, schema: Schema) -> dict[int, EnvSetting]:
    expected = ["day"] + [attr for attr, _ in schema.env_attrs]
    env_by_day: dict[int, EnvSetting] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected:
            raise DataError(f"{path}:1: expected header {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                raise DataError(f"{path}:{lineno}: expected {len(expected)} fields, got {len(row)}")
            try:
                day = int(row[0])
            except ValueError:
                raise DataError(f"{path}:{lineno}: day {row[0]!r} is not an integer") from None
            values = dict(zip((attr for attr, _ in schema.env_attrs), row[1:]))
            try:
                env_by_day[day] = env_of_day(values, schema)
            except UnknownLevel as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    return env_by_day


def write_env_csv(path, env_by_day: Mapping[int, EnvSetting], schema: Schema) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day"] + [attr for attr, _ in schema.env_attrs])
        for day in sorted(env_by_day):
            values = schema.env_values(env_by_day[day])
            writer.writerow([day] + [values[attr] for attr, _ in schema.env_attrs])


def read_window_csv(path, schema: Schema) -> list[DailyWindow]:
    expected = ["day", "env", "region"] + schema.feature_column_names()
    rows: dict[int, tuple[EnvSetting, np.ndarray, np.ndarray]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected:
            raise DataError(f"{path}:1: expected header {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                raise DataError(f"{path}:{lineno}: expected {len(expected)} fields, got {len(row)}")
            where = f"{path}:{lineno}"
            try:
                day = int(row[0])
            except ValueError:
                raise DataError(f"{where}: day {row[0]!r} is not an integer") from None
            env = _parse_env_token(row[1], schema, where)
            try:
                region = schema.region_index(row[2])
            except UnknownLevel as exc:
                raise DataError(f"{where}: {exc}") from None
            try:
                values = [float(cell) for cell in row[3:]]
            except ValueError:
                raise DataError(f"{where}: non-numeric count") from None
            for value in values:
                if value < 0 or value != int(value):
                    raise DataError(f"{where}: counts must be nonnegative integers, got {value}")
            if day not in rows:
                rows[day] = (env, np.zeros((schema.n_regions, schema.n_feature_columns)), np.zeros(schema.n_regions, dtype=bool))
            stored_env, counts, seen = rows[day]
            if stored_env != env:
                raise DataError(f"{where}: conflicting env for day {day}")
            if seen[region]:
                raise DataError(f"{where}: duplicate region row for day {day}")
            counts[region] = values
            seen[region] = True
    windows = []
    for day in sorted(rows):
        env, counts, seen = rows[day]
        if not seen.all():
            missing = schema.regions[int(np.argmin(seen))]
            raise DataError(f"{path}: day {day} is missing region {missing}")
        windows.append(DailyWindow(day, env, counts))
    return windows


def write_window_csv(path, windows: Iterable[DailyWindow], schema: Schema) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day", "env", "region"] + schema.feature_column_names())
        for window in windows:
            token = _env_token(window.env)
            for r, region in enumerate(schema.regions):
                cells = [str(int(c)) for c in window.counts[r]]
                writer.writerow([window.day, token, region] + cells)
