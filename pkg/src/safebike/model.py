"""Domain types shared by every subsystem: stations, snapshots, crime, roads, routes."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field, replace
from typing import Iterator
from zoneinfo import ZoneInfo

from .geo import GeoPoint, Polyline, haversine, polyline_length

BUCKET_MINUTES = 10
BUCKETS_PER_DAY = 144
# Road edge geometry must terminate within this distance of its graph nodes.
ENDPOINT_TOLERANCE_M = 1.0

DEFAULT_TIMEZONE = "America/New_York"


def weekday_flag(d: dt.date) -> int:
    """0 for Monday through Friday, 1 for Saturday and Sunday."""
    return 1 if d.weekday() >= 5 else 0


def bucket_of(t: dt.datetime | dt.time) -> int:
    """Ten-minute bucket index (0..143) of a local timestamp."""
    return (t.hour * 60 + t.minute) // BUCKET_MINUTES


def bucket_start(day: dt.date, bucket: int, tz: ZoneInfo) -> dt.datetime:
    """Timezone-aware local start instant of a (date, bucket) slot."""
    if not 0 <= bucket < BUCKETS_PER_DAY:
        raise ValueError(f"bucket out of range: {bucket}")
    minutes = bucket * BUCKET_MINUTES
    return dt.datetime.combine(day, dt.time(minutes // 60, minutes % 60), tzinfo=tz)


@dataclass(frozen=True)
class Station:
    id: str
    name: str
    location: GeoPoint
    capacity: int

    def __post_init__(self) -> None:
        if self.capacity < 0:
            raise ValueError(f"station {self.id}: negative capacity {self.capacity}")


class StationRegistry:
    """Stations keyed by id; re-adding an id replaces the previous entry."""

    def __init__(self) -> None:
        self._stations: dict[str, Station] = {}

    def add(self, station: Station) -> bool:
        """Insert a station. Returns True when an existing id was replaced."""
        replaced = station.id in self._stations
        self._stations[station.id] = station
        return replaced

    def get(self, station_id: str) -> Station | None:
        return self._stations.get(station_id)

    def ids(self) -> list[str]:
        return sorted(self._stations)

    def all(self) -> list[Station]:
        return [self._stations[sid] for sid in self.ids()]

    def __contains__(self, station_id: str) -> bool:
        return station_id in self._stations

    def __len__(self) -> int:
        return len(self._stations)

    def __iter__(self) -> Iterator[Station]:
        return iter(self.all())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StationRegistry):
            return NotImplemented
        return self._stations == other._stations


@dataclass(frozen=True)
class StationStatus:
    """One (bikes, docks) reading for a station at a UTC instant."""

    station_id: str
    bikes: int
    docks: int
    timestamp: dt.datetime

    def __post_init__(self) -> None:
        if self.bikes < 0:
            raise ValueError(f"station {self.station_id}: negative bike count")
        if self.docks < 0:
            raise ValueError(f"station {self.station_id}: negative dock count")
        if self.timestamp.tzinfo is None:
            raise ValueError("status timestamp must be timezone-aware")


@dataclass
class SnapshotSeries:
    """Per-station history: 144 optional (bikes, docks) buckets per local date."""

    station_id: str
    days: dict[dt.date, list[tuple[int, int] | None]] = field(default_factory=dict)

    def set(self, day: dt.date, bucket: int, bikes: int, docks: int) -> bool:
        """Store a bucket value, overwriting any previous one. Returns True on overwrite."""
        if not 0 <= bucket < BUCKETS_PER_DAY:
            raise ValueError(f"bucket out of range: {bucket}")
        buckets = self.days.setdefault(day, [None] * BUCKETS_PER_DAY)
        overwrote = buckets[bucket] is not None
        buckets[bucket] = (bikes, docks)
        return overwrote

    def get(self, day: dt.date, bucket: int) -> tuple[int, int] | None:
        buckets = self.days.get(day)
        return buckets[bucket] if buckets else None

    def latest(self) -> tuple[dt.date, int, int, int] | None:
        """Most recent filled (date, bucket, bikes, docks), or None if empty."""
        for day in sorted(self.days, reverse=True):
            buckets = self.days[day]
            for bucket in range(BUCKETS_PER_DAY - 1, -1, -1):
                value = buckets[bucket]
                if value is not None:
                    return day, bucket, value[0], value[1]
        return None

    def record_count(self) -> int:
        return sum(1 for buckets in self.days.values() for v in buckets if v is not None)


class SnapshotStore:
    """All stations' snapshot series, bucketed in one local timezone."""

    def __init__(self, timezone: str = DEFAULT_TIMEZONE) -> None:
        self.timezone = timezone
        self.tz = ZoneInfo(timezone)
        self.series: dict[str, SnapshotSeries] = {}

    def series_for(self, station_id: str) -> SnapshotSeries:
        if station_id not in self.series:
            self.series[station_id] = SnapshotSeries(station_id)
        return self.series[station_id]

    def get(self, station_id: str) -> SnapshotSeries | None:
        return self.series.get(station_id)

    def add_status(self, status: StationStatus) -> bool:
        """Bucket a status by its local date and time. Returns True on overwrite."""
        local = status.timestamp.astimezone(self.tz)
        return self.series_for(status.station_id).set(
            local.date(), bucket_of(local), status.bikes, status.docks
        )

    def latest_status(self, station_id: str) -> StationStatus | None:
        """Reconstruct the latest reading as a status stamped at its bucket start."""
        series = self.series.get(station_id)
        if series is None:
            return None
        latest = series.latest()
        if latest is None:
            return None
        day, bucket, bikes, docks = latest
        ts = bucket_start(day, bucket, self.tz).astimezone(dt.timezone.utc)
        return StationStatus(station_id, bikes, docks, ts)

    def station_ids(self) -> list[str]:
        return sorted(self.series)

    def record_count(self) -> int:
        return sum(s.record_count() for s in self.series.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SnapshotStore):
            return NotImplemented
        return self.timezone == other.timezone and self.series == other.series


@dataclass(frozen=True)
class CrimeRecord:
    id: str
    location: GeoPoint
    occurred_at: dt.date
    category: str


class NetworkError(ValueError):
    """Raised when a road network violates its structural invariants."""


@dataclass(frozen=True)
class RoadEdge:
    """Undirected road segment between two graph nodes."""

    id: str
    u: str
    v: str
    geometry: Polyline
    length: float
    crime_count: int = 0

    def other(self, node_id: str) -> str:
        return self.v if node_id == self.u else self.u

    def oriented_points(self, from_node: str) -> tuple[GeoPoint, ...]:
        """Geometry points ordered for traversal starting at from_node."""
        if from_node == self.u:
            return self.geometry.points
        return tuple(reversed(self.geometry.points))


class RoadNetwork:
    """Undirected geospatial graph; immutable once constructed."""

    def __init__(self, nodes: dict[str, GeoPoint], edges: list[RoadEdge]) -> None:
        for edge in edges:
            for endpoint in (edge.u, edge.v):
                if endpoint not in nodes:
                    raise NetworkError(f"edge {edge.id} references missing node {endpoint}")
            if haversine(edge.geometry.points[0], nodes[edge.u]) > ENDPOINT_TOLERANCE_M:
                raise NetworkError(f"edge {edge.id}: geometry start is not at node {edge.u}")
            if haversine(edge.geometry.points[-1], nodes[edge.v]) > ENDPOINT_TOLERANCE_M:
                raise NetworkError(f"edge {edge.id}: geometry end is not at node {edge.v}")
            if edge.length != polyline_length(edge.geometry):
                raise NetworkError(f"edge {edge.id}: length does not match its geometry")
            if edge.crime_count < 0:
                raise NetworkError(f"edge {edge.id}: negative crime count")
        self.nodes = dict(nodes)
        self.edges = list(edges)
        self._adjacency: dict[str, list[tuple[str, RoadEdge]]] = {nid: [] for nid in nodes}
        for edge in edges:
            if edge.u == edge.v:
                continue  # self-loops are never useful for routing
            self._adjacency[edge.u].append((edge.v, edge))
            self._adjacency[edge.v].append((edge.u, edge))
        for neighbors in self._adjacency.values():
            neighbors.sort(key=lambda pair: (pair[0], pair[1].id))

    def neighbors(self, node_id: str) -> list[tuple[str, RoadEdge]]:
        return self._adjacency[node_id]

    def node_count(self) -> int:
        return len(self.nodes)

    def edge_count(self) -> int:
        return len(self.edges)

    def with_crime_counts(self, counts: dict[str, int]) -> "RoadNetwork":
        """Copy of the network with per-edge crime counts replaced."""
        edges = [replace(e, crime_count=counts.get(e.id, 0)) for e in self.edges]
        return RoadNetwork(self.nodes, edges)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RoadNetwork):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges


WEIGHT_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class FactorWeights:
    """Unit-sum blend over route length, crime exposure, and station availability."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        for name, value in (("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]: {value}")
        total = self.alpha + self.beta + self.gamma
        if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise ValueError(f"weights must sum to 1 (got {total})")

    @classmethod
    def normalized(cls, alpha: float, beta: float, gamma: float) -> "FactorWeights":
        """Scale a non-negative triple to unit sum; the all-zero triple is rejected."""
        for name, value in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
            if value < 0:
                raise ValueError(f"{name} must be non-negative: {value}")
        total = alpha + beta + gamma
        if total <= 0:
            raise ValueError("at least one weight must be positive")
        return cls(alpha / total, beta / total, gamma / total)


@dataclass(frozen=True)
class RouteLeg:
    """One walking or biking segment of a composed route."""

    mode: str
    node_path: tuple[str, ...]
    geometry: Polyline
    length: float
    crime_total: int
    duration: float

    def __post_init__(self) -> None:
        if self.mode not in ("walk", "bike"):
            raise ValueError(f"unknown leg mode: {self.mode}")


@dataclass
class CandidateRoute:
    """A scored walk-bike-walk route through one station pair."""

    origin_station_id: str
    destination_station_id: str
    legs: tuple[RouteLeg, RouteLeg, RouteLeg]
    total_length: float
    total_crime: int
    avl: float
    pred_bikes_out: float
    pred_docks_in: float
    t_out: dt.datetime
    t_in: dt.datetime
    score: float | None = None
