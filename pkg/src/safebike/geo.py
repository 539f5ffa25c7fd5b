"""Coordinate primitives, geodesic measurement, and a uniform-grid spatial index."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

# Mean Earth radius in meters (spherical model).
EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class GeoPoint:
    """A WGS-style latitude/longitude pair in degrees."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude out of range [-90, 90]: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude out of range [-180, 180]: {self.lon}")


def haversine(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters between two points.

    Symmetric and non-negative; exactly 0 for identical inputs.
    """
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def _local_xy(p: GeoPoint, origin: GeoPoint, cos_lat0: float) -> tuple[float, float]:
    """Equirectangular projection of p into a meter plane centered at origin."""
    x = EARTH_RADIUS_M * math.radians(p.lon - origin.lon) * cos_lat0
    y = EARTH_RADIUS_M * math.radians(p.lat - origin.lat)
    return x, y


def point_to_segment_distance(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> float:
    """Distance in meters from p to the segment (a, b).

    All three points are projected into a local equirectangular plane centered
    at a; the planar point-to-segment distance is then computed. Valid for
    segments short relative to the Earth radius (city-scale geometry).
    """
    if a == b:
        return haversine(p, a)
    cos_lat0 = math.cos(math.radians(a.lat))
    px, py = _local_xy(p, a, cos_lat0)
    bx, by = _local_xy(b, a, cos_lat0)
    seg2 = bx * bx + by * by
    if seg2 == 0.0:
        return haversine(p, a)
    t = (px * bx + py * by) / seg2
    t = max(0.0, min(1.0, t))
    planar = math.hypot(px - t * bx, py - t * by)
    # The planar estimate can drift a hair above the true endpoint distance;
    # never report more than the distance to either endpoint.
    return min(planar, haversine(p, a), haversine(p, b))


@dataclass(frozen=True)
class Polyline:
    """An ordered sequence of at least two geographic points."""

    points: tuple[GeoPoint, ...]

    def __init__(self, points: Iterable[GeoPoint]) -> None:
        object.__setattr__(self, "points", tuple(points))
        if len(self.points) < 2:
            raise ValueError("polyline requires at least 2 points")

    def reversed(self) -> "Polyline":
        return Polyline(reversed(self.points))


def polyline_length(pl: Polyline) -> float:
    """Total length in meters: the sum of consecutive haversine distances."""
    return sum(haversine(a, b) for a, b in zip(pl.points, pl.points[1:]))


class GridIndex:
    """Uniform grid over an equirectangular plane centered at the dataset centroid.

    Immutable after build. Radius queries expand the grid window conservatively
    and post-filter with exact haversine distances, so results never miss a
    stored point within the query radius. Longitude wrap-around (datasets
    spanning the antimeridian) is not supported.
    """

    def __init__(self, cell_size: float) -> None:
        if cell_size <= 0:
            raise ValueError(f"cell_size must be positive: {cell_size}")
        self.cell_size = cell_size
        self._origin: GeoPoint | None = None
        self._cos_lat0 = 1.0
        self._cells: dict[tuple[int, int], list[tuple[GeoPoint, Hashable]]] = {}
        self._count = 0

    def __len__(self) -> int:
        return self._count

    def _cell_of(self, p: GeoPoint) -> tuple[int, int]:
        assert self._origin is not None
        x, y = _local_xy(p, self._origin, self._cos_lat0)
        return math.floor(x / self.cell_size), math.floor(y / self.cell_size)

    def query_radius(self, center: GeoPoint, r: float) -> list[Hashable]:
        """Ids of all stored points within haversine distance r of center."""
        if r < 0:
            raise ValueError(f"radius must be non-negative: {r}")
        if self._origin is None:
            return []

        # Conservative lat/lon window containing the haversine ball.
        dlat = math.degrees(r / EARTH_RADIUS_M)
        phi_max = min(89.999999, max(abs(center.lat - dlat), abs(center.lat + dlat)))
        cos_max = math.cos(math.radians(phi_max))
        if cos_max > 0.0:
            s = min(1.0, r / (2.0 * EARTH_RADIUS_M * cos_max))
            dlon = math.degrees(2.0 * math.asin(s))
        else:
            dlon = 360.0

        cx0, cy0 = self._window_cell(center.lon - dlon, center.lat - dlat)
        cx1, cy1 = self._window_cell(center.lon + dlon, center.lat + dlat)
        span = (cx1 - cx0 + 1) * (cy1 - cy0 + 1)

        hits: list[Hashable] = []
        if span > len(self._cells):
            candidates: Iterable[list[tuple[GeoPoint, Hashable]]] = self._cells.values()
        else:
            candidates = (
                self._cells[(cx, cy)]
                for cx in range(cx0, cx1 + 1)
                for cy in range(cy0, cy1 + 1)
                if (cx, cy) in self._cells
            )
        for bucket in candidates:
            for point, payload in bucket:
                if haversine(center, point) <= r:
                    hits.append(payload)
        return hits

    def _window_cell(self, lon: float, lat: float) -> tuple[int, int]:
        # Window corners may fall outside valid coordinate ranges; project the
        # raw values with the same linear map used for stored points.
        assert self._origin is not None
        x = EARTH_RADIUS_M * math.radians(lon - self._origin.lon) * self._cos_lat0
        y = EARTH_RADIUS_M * math.radians(lat - self._origin.lat)
        return math.floor(x / self.cell_size), math.floor(y / self.cell_size)


def build_index(points: Sequence[tuple[GeoPoint, Hashable]], cell_size: float = 100.0) -> GridIndex:
    """Build a GridIndex from (point, id) pairs; the projection is centered at the centroid."""
    idx = GridIndex(cell_size)
    if not points:
        return idx
    lat0 = sum(p.lat for p, _ in points) / len(points)
    lon0 = sum(p.lon for p, _ in points) / len(points)
    idx._origin = GeoPoint(lat0, lon0)
    idx._cos_lat0 = math.cos(math.radians(lat0))
    for point, payload in points:
        idx._cells.setdefault(idx._cell_of(point), []).append((point, payload))
        idx._count += 1
    return idx
