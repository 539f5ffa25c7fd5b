"""Buffer queries: per-edge crime counts and near-origin candidate stations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .geo import GeoPoint, build_index, haversine, point_to_segment_distance
from .model import CrimeRecord, RoadNetwork, StationRegistry, StationStatus

DEFAULT_CRIME_BUFFER_M = 50.0
DEFAULT_STATION_BUFFER_M = 500.0
DEFAULT_MAX_CANDIDATES = 5


@dataclass(frozen=True)
class BufferConfig:
    """Radii for crime aggregation (d) and station candidacy (k), plus the cap m."""

    crime_buffer_d: float = DEFAULT_CRIME_BUFFER_M
    station_buffer_k: float = DEFAULT_STATION_BUFFER_M
    max_candidate_stations: int = DEFAULT_MAX_CANDIDATES

    def __post_init__(self) -> None:
        if self.crime_buffer_d <= 0:
            raise ValueError("crime_buffer_d must be > 0")
        if self.station_buffer_k <= 0:
            raise ValueError("station_buffer_k must be > 0")
        if self.max_candidate_stations < 1:
            raise ValueError("max_candidate_stations must be >= 1")


def annotate_crime(
    network: RoadNetwork, crimes: list[CrimeRecord], cfg: BufferConfig
) -> RoadNetwork:
    """Count, per edge, the crimes within distance d of its polyline.

    One incident may count toward several edges but at most once per edge.
    A grid index prunes candidates; the decision itself is the exact
    point-to-segment distance, so results match a brute-force double loop.
    """
    d = cfg.crime_buffer_d
    index = build_index([(c.location, i) for i, c in enumerate(crimes)])
    counts: dict[str, int] = {}
    for edge in network.edges:
        found: set[int] = set()
        points = edge.geometry.points
        for a, b in zip(points, points[1:]):
            # Generous radius: exact filter below removes false positives,
            # and no true hit can fall outside it at city scale.
            radius = (d + haversine(a, b)) * 1.01 + 2.0
            for crime_idx in index.query_radius(a, radius):
                if crime_idx in found:
                    continue
                if point_to_segment_distance(crimes[crime_idx].location, a, b) <= d:
                    found.add(crime_idx)
        counts[edge.id] = len(found)
    return network.with_crime_counts(counts)


def candidate_stations(
    p: GeoPoint,
    registry: StationRegistry,
    statuses: Mapping[str, StationStatus] | None,
    cfg: BufferConfig,
) -> list[str]:
    """Station ids within k metres of p, nearest first, at most m of them.

    Stations without a current status are skipped when statuses is given:
    availability cannot be predicted for them, so they cannot anchor a route.
    """
    ranked: list[tuple[float, str]] = []
    for station in registry.all():
        if statuses is not None and station.id not in statuses:
            continue
        distance = haversine(p, station.location)
        if distance <= cfg.station_buffer_k:
            ranked.append((distance, station.id))
    ranked.sort()
    return [sid for _, sid in ranked[: cfg.max_candidate_stations]]
