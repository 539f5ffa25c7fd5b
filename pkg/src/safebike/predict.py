"""Weekday/weekend availability profiles and short-horizon delta forecasts.

A station's history is averaged per (weekday-or-weekend flag, 10-minute bucket).
A forecast then shifts the current reading by the profile's movement between
the current bucket and each future bucket, clamped to [0, capacity].
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from zoneinfo import ZoneInfo

from .model import (
    BUCKET_MINUTES,
    BUCKETS_PER_DAY,
    SnapshotStore,
    StationStatus,
    bucket_of,
    bucket_start,
    weekday_flag,
)

DEFAULT_HORIZON = 6

Buckets = tuple[float | None, ...]


@dataclass(frozen=True)
class AvgProfile:
    """Per-flag, per-bucket average bikes/docks; None where no date contributed."""

    station_id: str
    timezone: str
    avg_bikes: tuple[Buckets, Buckets]
    avg_docks: tuple[Buckets, Buckets]
    counts: tuple[tuple[int, ...], tuple[int, ...]]

    def __post_init__(self) -> None:
        for table in (self.avg_bikes, self.avg_docks, self.counts):
            if len(table) != 2 or any(len(row) != BUCKETS_PER_DAY for row in table):
                raise ValueError("profile tables must be 2 x 144")
        for w in range(2):
            for t in range(BUCKETS_PER_DAY):
                defined = self.avg_bikes[w][t] is not None
                if defined != (self.counts[w][t] > 0) or defined != (
                    self.avg_docks[w][t] is not None
                ):
                    raise ValueError(f"inconsistent profile slot w={w} t={t}")

    def is_empty(self, w: int) -> bool:
        return all(v is None for v in self.avg_bikes[w])


@dataclass(frozen=True)
class PredictionVector:
    """Forecast for the next `horizon` buckets after the anchor reading.

    predicted_* are clamped to [0, capacity]; raw_* keep the unclamped values.
    degraded means at least one step fell back to a zero delta for lack of
    profile data.
    """

    station_id: str
    anchor_time: dt.datetime
    horizon: int
    capacity: int
    predicted_bikes: tuple[float, ...]
    predicted_docks: tuple[float, ...]
    raw_bikes: tuple[float, ...]
    raw_docks: tuple[float, ...]
    degraded: bool

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        for series in (self.predicted_bikes, self.predicted_docks,
                       self.raw_bikes, self.raw_docks):
            if len(series) != self.horizon:
                raise ValueError("prediction length must equal horizon")
        for series in (self.predicted_bikes, self.predicted_docks):
            for v in series:
                if not 0.0 <= v <= self.capacity:
                    raise ValueError(f"clamped prediction out of range: {v}")


def build_profile(
    store: SnapshotStore,
    station_id: str,
    date_window: tuple[dt.date, dt.date] | None = None,
) -> AvgProfile:
    """Average a station's snapshots per (flag, bucket) over the date window.

    A bucket's average uses only the dates that actually recorded that bucket;
    an unknown station yields an entirely undefined profile.
    """
    sums_b = [[0] * BUCKETS_PER_DAY for _ in range(2)]
    sums_d = [[0] * BUCKETS_PER_DAY for _ in range(2)]
    counts = [[0] * BUCKETS_PER_DAY for _ in range(2)]
    series = store.get(station_id)
    if series is not None:
        for day, buckets in series.days.items():
            if date_window is not None and not date_window[0] <= day <= date_window[1]:
                continue
            w = weekday_flag(day)
            for t in range(BUCKETS_PER_DAY):
                value = buckets[t]
                if value is None:
                    continue
                sums_b[w][t] += value[0]
                sums_d[w][t] += value[1]
                counts[w][t] += 1

    def averages(sums: list[list[int]]) -> tuple[Buckets, Buckets]:
        return tuple(
            tuple(
                sums[w][t] / counts[w][t] if counts[w][t] else None
                for t in range(BUCKETS_PER_DAY)
            )
            for w in range(2)
        )  # type: ignore[return-value]

    return AvgProfile(
        station_id,
        store.timezone,
        averages(sums_b),
        averages(sums_d),
        tuple(tuple(row) for row in counts),  # type: ignore[arg-type]
    )


def build_all_profiles(store: SnapshotStore) -> dict[str, AvgProfile]:
    return {sid: build_profile(store, sid) for sid in store.station_ids()}


def _circular_interpolate(values: Buckets, bucket: int) -> float | None:
    """Value at an undefined bucket from the nearest defined neighbours, wrapping."""
    n = len(values)
    back = fwd = None
    for k in range(1, n):
        if back is None and values[(bucket - k) % n] is not None:
            back = k
        if fwd is None and values[(bucket + k) % n] is not None:
            fwd = k
        if back is not None and fwd is not None:
            break
    if back is None or fwd is None:
        return None
    v_back = values[(bucket - back) % n]
    v_fwd = values[(bucket + fwd) % n]
    assert v_back is not None and v_fwd is not None
    return v_back + (v_fwd - v_back) * back / (back + fwd)


def profile_value(
    profile: AvgProfile, w: int, bucket: int, series: str = "bikes"
) -> float | None:
    """Profile average at (flag, bucket), interpolated over gaps.

    Returns None only when the flag has no data at all (the no-profile signal).
    """
    if w not in (0, 1):
        raise ValueError(f"weekday flag must be 0 or 1, got {w}")
    if not 0 <= bucket < BUCKETS_PER_DAY:
        raise ValueError(f"bucket out of range: {bucket}")
    if series not in ("bikes", "docks"):
        raise ValueError(f"series must be 'bikes' or 'docks', got {series!r}")
    values = profile.avg_bikes[w] if series == "bikes" else profile.avg_docks[w]
    stored = values[bucket]
    if stored is not None:
        return stored
    return _circular_interpolate(values, bucket)


def predict(
    profile: AvgProfile, current: StationStatus, n: int, capacity: int
) -> PredictionVector:
    """Forecast bikes/docks for the n buckets after the current reading.

    Each step adds the profile delta between the future bucket and the current
    bucket to the current counts. Future instants that cross midnight use the
    flag of their own calendar date. A step with no usable profile keeps the
    current value (zero delta) and marks the vector degraded.
    """
    if n < 1:
        raise ValueError(f"horizon must be >= 1, got {n}")
    if capacity < 0:
        raise ValueError(f"capacity must be >= 0, got {capacity}")
    tz = ZoneInfo(profile.timezone)
    local = current.timestamp.astimezone(tz)
    day_c = local.date()
    t_c = bucket_of(local)
    w_c = weekday_flag(day_c)
    avg_b_now = profile_value(profile, w_c, t_c, "bikes")
    avg_d_now = profile_value(profile, w_c, t_c, "docks")

    base_b, base_d = float(current.bikes), float(current.docks)
    raw_b: list[float] = []
    raw_d: list[float] = []
    degraded = False
    for i in range(1, n + 1):
        step = t_c + i
        bucket_i = step % BUCKETS_PER_DAY
        day_i = day_c + dt.timedelta(days=step // BUCKETS_PER_DAY)
        w_i = weekday_flag(day_i)
        avg_b_i = profile_value(profile, w_i, bucket_i, "bikes")
        avg_d_i = profile_value(profile, w_i, bucket_i, "docks")
        if avg_b_now is None or avg_b_i is None:
            raw_b.append(base_b)
            degraded = True
        else:
            raw_b.append(base_b + (avg_b_i - avg_b_now))
        if avg_d_now is None or avg_d_i is None:
            raw_d.append(base_d)
            degraded = True
        else:
            raw_d.append(base_d + (avg_d_i - avg_d_now))

    clamp = lambda v: min(max(v, 0.0), float(capacity))  # noqa: E731
    return PredictionVector(
        station_id=profile.station_id,
        anchor_time=current.timestamp,
        horizon=n,
        capacity=capacity,
        predicted_bikes=tuple(clamp(v) for v in raw_b),
        predicted_docks=tuple(clamp(v) for v in raw_d),
        raw_bikes=tuple(raw_b),
        raw_docks=tuple(raw_d),
        degraded=degraded,
    )


def predict_at(
    profile: AvgProfile,
    current: StationStatus,
    target_time: dt.datetime,
    capacity: int,
) -> tuple[float, float]:
    """Clamped (bikes, docks) forecast at an instant, from the nearest bucket step.

    The step index counts 10-minute intervals from the start of the anchor's
    bucket, rounded to nearest (ties upward). Step 0 returns the current counts.
    """
    if target_time.tzinfo is None:
        raise ValueError("target time must be timezone-aware")
    if target_time < current.timestamp:
        raise ValueError("target time precedes the current status")
    if target_time - current.timestamp > dt.timedelta(hours=24):
        raise ValueError("target time is more than 24 hours ahead")
    tz = ZoneInfo(profile.timezone)
    local = current.timestamp.astimezone(tz)
    anchor = bucket_start(local.date(), bucket_of(local), tz)
    minutes = (target_time - anchor).total_seconds() / 60.0
    i = math.floor(minutes / BUCKET_MINUTES + 0.5)
    if i <= 0:
        return float(current.bikes), float(current.docks)
    vector = predict(profile, current, i, capacity)
    return vector.predicted_bikes[-1], vector.predicted_docks[-1]
