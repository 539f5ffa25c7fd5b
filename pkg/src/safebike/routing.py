"""Route search: Dijkstra core, walk-bike-walk composition, and blended scoring.

A query snaps origin and destination to road nodes, picks nearby candidate
stations at both ends, builds three legs per station pair under one blended
edge cost, predicts availability at the check-out/check-in instants, and
scores every candidate by weighted normalized length, crime, and availability.
"""

from __future__ import annotations

import datetime as dt
import heapq
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .geo import GeoPoint, Polyline, haversine
from .model import (
    CandidateRoute,
    FactorWeights,
    RoadEdge,
    RoadNetwork,
    RouteLeg,
    StationRegistry,
    StationStatus,
)
from .predict import AvgProfile, predict_at
from .spatial import BufferConfig, candidate_stations

DEFAULT_WALK_KMH = 5.0
DEFAULT_BIKE_KMH = 15.0

SCHEMES = ("shortest", "safest", "optimal")

# Lexicographic path weight: (blended cost, length, crime count).
_Weight = tuple[float, float, float]
_ZERO: _Weight = (0.0, 0.0, 0.0)

EdgeCostFn = Callable[[RoadEdge], float]


class RoutingError(ValueError):
    """Base class for route-search failures that map to structured responses."""


class NoStationInRange(RoutingError):
    def __init__(self, where: str):
        super().__init__(f"no station in range of the {where}")
        self.where = where


class NoRouteFound(RoutingError):
    def __init__(self) -> None:
        super().__init__("no route between any candidate station pair")


@dataclass(frozen=True)
class Speeds:
    """Assumed travel speeds, km/h."""

    walk_kmh: float = DEFAULT_WALK_KMH
    bike_kmh: float = DEFAULT_BIKE_KMH

    def __post_init__(self) -> None:
        if self.walk_kmh <= 0 or self.bike_kmh <= 0:
            raise ValueError("speeds must be positive")

    def metres_per_second(self, mode: str) -> float:
        kmh = self.walk_kmh if mode == "walk" else self.bike_kmh
        return kmh * 1000.0 / 3600.0


@dataclass(frozen=True)
class RouteQuery:
    origin: GeoPoint
    destination: GeoPoint
    departure_time: dt.datetime
    weights: FactorWeights
    scheme: str = "optimal"

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme: {self.scheme!r}")
        if self.departure_time.tzinfo is None:
            raise ValueError("departure_time must be timezone-aware")


@dataclass(frozen=True)
class RoutingContext:
    """Immutable engine state a route query runs against."""

    network: RoadNetwork
    registry: StationRegistry
    profiles: Mapping[str, AvgProfile]
    statuses: Mapping[str, StationStatus]
    buffers: BufferConfig = field(default_factory=BufferConfig)
    speeds: Speeds = field(default_factory=Speeds)


@dataclass
class RouteResult:
    chosen: CandidateRoute
    alternatives: list[CandidateRoute]
    max_length: float
    max_crime: int
    max_avl: float


def snap_to_node(network: RoadNetwork, p: GeoPoint) -> str:
    """Nearest graph node by great-circle distance; ties go to the lower id."""
    if not network.nodes:
        raise RoutingError("cannot snap to an empty network")
    return min(network.nodes, key=lambda nid: (haversine(p, network.nodes[nid]), nid))


def _add(a: _Weight, b: _Weight) -> _Weight:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _shortest_path(
    network: RoadNetwork,
    src: str,
    dst: str,
    weight_of: Callable[[RoadEdge], _Weight],
) -> tuple[list[str], list[RoadEdge]] | None:
    """Deterministic lexicographic Dijkstra.

    Path weights are (cost, length, crime) tuples accumulated left-to-right
    from src, so equal-cost paths are settled by shorter length, then fewer
    crimes. Remaining ties resolve to the lexicographically smallest node
    path (and the smallest edge id between a tied node pair).
    """
    dist: dict[str, _Weight] = {src: _ZERO}
    heap: list[tuple[_Weight, str]] = [(_ZERO, src)]
    settled: set[str] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        for v, edge in network.neighbors(u):
            candidate = _add(d, weight_of(edge))
            if v not in dist or candidate < dist[v]:
                dist[v] = candidate
                heapq.heappush(heap, (candidate, v))
    if dst not in dist:
        return None

    # Edges on some optimal path form a DAG (exact float equality is safe:
    # the relaxation above produced these very sums).
    successors: dict[str, list[tuple[str, RoadEdge]]] = {}
    predecessors: dict[str, list[str]] = {}
    for u in dist:
        for v, edge in network.neighbors(u):
            if _add(dist[u], weight_of(edge)) == dist[v]:
                successors.setdefault(u, []).append((v, edge))
                predecessors.setdefault(v, []).append(u)

    reaches_dst = {dst}
    stack = [dst]
    while stack:
        node = stack.pop()
        for u in predecessors.get(node, []):
            if u not in reaches_dst:
                reaches_dst.add(u)
                stack.append(u)

    path = [src]
    edges: list[RoadEdge] = []
    visited = {src}
    u = src
    while u != dst:
        best: tuple[str, RoadEdge] | None = None
        for v, edge in successors.get(u, []):
            if v in reaches_dst and v not in visited:
                if best is None or (v, edge.id) < (best[0], best[1].id):
                    best = (v, edge)
        if best is None:
            raise RuntimeError("optimal-path extraction stalled (degenerate zero-weight cycle)")
        u = best[0]
        visited.add(u)
        path.append(u)
        edges.append(best[1])
    return path, edges


def dijkstra(
    network: RoadNetwork, src: str, dst: str, cost: EdgeCostFn
) -> list[str] | None:
    """Minimum-total-cost node path, or None when dst is unreachable."""
    for node in (src, dst):
        if node not in network.nodes:
            raise ValueError(f"unknown node: {node}")
    found = _shortest_path(
        network, src, dst, lambda e: (cost(e), e.length, float(e.crime_count))
    )
    return None if found is None else found[0]


def _edge_normalizers(network: RoadNetwork) -> tuple[float, float]:
    max_length = max((e.length for e in network.edges), default=0.0)
    max_crime = max((e.crime_count for e in network.edges), default=0)
    return (max_length if max_length > 0 else 1.0, float(max_crime) if max_crime > 0 else 1.0)


def blended_edge_cost(network: RoadNetwork, weights: FactorWeights) -> EdgeCostFn:
    """Per-edge cost alpha_hat*length/Lmax + beta_hat*crime/Cmax.

    alpha and beta are renormalized to sum 1 so gamma (an availability weight,
    meaningless per edge) does not dilute path choice; a pure-availability
    query falls back to length-only edges.
    """
    max_length, max_crime = _edge_normalizers(network)
    total = weights.alpha + weights.beta
    if total == 0:
        return lambda e: e.length / max_length
    alpha_hat = weights.alpha / total
    beta_hat = weights.beta / total
    return lambda e: alpha_hat * (e.length / max_length) + beta_hat * (e.crime_count / max_crime)


def _concatenate_geometry(
    network: RoadNetwork, path: list[str], edges: list[RoadEdge]
) -> Polyline:
    if not edges:
        point = network.nodes[path[0]]
        return Polyline((point, point))
    points: list[GeoPoint] = []
    for start_node, edge in zip(path, edges):
        oriented = edge.oriented_points(start_node)
        points.extend(oriented if not points else oriented[1:])
    return Polyline(points)


def leg_route(
    network: RoadNetwork,
    src: str,
    dst: str,
    weights: FactorWeights,
    mode: str,
    speeds: Speeds | None = None,
) -> RouteLeg | None:
    """One leg under the blended edge cost; None when dst is unreachable."""
    speeds = speeds or Speeds()
    cost = blended_edge_cost(network, weights)
    found = _shortest_path(
        network, src, dst, lambda e: (cost(e), e.length, float(e.crime_count))
    )
    if found is None:
        return None
    path, edges = found
    length = 0.0
    crime = 0
    for edge in edges:
        length += edge.length
        crime += edge.crime_count
    return RouteLeg(
        mode=mode,
        node_path=tuple(path),
        geometry=_concatenate_geometry(network, path, edges),
        length=length,
        crime_total=crime,
        duration=length / speeds.metres_per_second(mode),
    )


def _availability(
    ctx: RoutingContext, station_id: str, at: dt.datetime
) -> tuple[float, float]:
    """Predicted (bikes, docks) for a station at an instant.

    Instants before the station's latest reading use the reading itself
    (a stale clock must not abort routing).
    """
    status = ctx.statuses[station_id]
    station = ctx.registry.get(station_id)
    assert station is not None
    target = max(at, status.timestamp)
    return predict_at(ctx.profiles[station_id], status, target, station.capacity)


def generate_candidates(query: RouteQuery, ctx: RoutingContext) -> list[CandidateRoute]:
    """All walk-bike-walk candidates over admissible station pairs.

    Origin and destination candidates come from the distance-k buffer; a pair
    must use two distinct stations and have all three legs reachable.
    """
    origin_ids = candidate_stations(query.origin, ctx.registry, ctx.statuses, ctx.buffers)
    if not origin_ids:
        raise NoStationInRange("origin")
    dest_ids = candidate_stations(query.destination, ctx.registry, ctx.statuses, ctx.buffers)
    if not dest_ids:
        raise NoStationInRange("destination")

    origin_node = snap_to_node(ctx.network, query.origin)
    dest_node = snap_to_node(ctx.network, query.destination)
    station_node = {
        sid: snap_to_node(ctx.network, ctx.registry.get(sid).location)  # type: ignore[union-attr]
        for sid in set(origin_ids) | set(dest_ids)
    }

    candidates: list[CandidateRoute] = []
    for i in origin_ids:
        for j in dest_ids:
            if i == j:
                continue
            walk_out = leg_route(
                ctx.network, origin_node, station_node[i], query.weights, "walk", ctx.speeds
            )
            ride = leg_route(
                ctx.network, station_node[i], station_node[j], query.weights, "bike", ctx.speeds
            )
            walk_in = leg_route(
                ctx.network, station_node[j], dest_node, query.weights, "walk", ctx.speeds
            )
            if walk_out is None or ride is None or walk_in is None:
                continue
            t_out = query.departure_time + dt.timedelta(seconds=walk_out.duration)
            t_in = t_out + dt.timedelta(seconds=ride.duration)
            bikes_out, _ = _availability(ctx, i, t_out)
            _, docks_in = _availability(ctx, j, t_in)
            legs = (walk_out, ride, walk_in)
            total_length = 0.0
            total_crime = 0
            for leg in legs:
                total_length += leg.length
                total_crime += leg.crime_total
            candidates.append(
                CandidateRoute(
                    origin_station_id=i,
                    destination_station_id=j,
                    legs=legs,
                    total_length=total_length,
                    total_crime=total_crime,
                    avl=bikes_out * docks_in,
                    pred_bikes_out=bikes_out,
                    pred_docks_in=docks_in,
                    t_out=t_out,
                    t_in=t_in,
                )
            )
    if not candidates:
        raise NoRouteFound()
    return candidates


def score_candidates(
    candidates: list[CandidateRoute], weights: FactorWeights
) -> RouteResult:
    """Score each candidate over the set's own maxima and pick the argmin.

    score = alpha*(length/maxL) + beta*(crime/maxC) + gamma*(1 - avl/maxA),
    where a zero maximum makes that term 0 for every candidate. Ties fall to
    shorter total length, then origin then destination station id.
    """
    if not candidates:
        raise RoutingError("no candidates to score")
    max_length = max(c.total_length for c in candidates)
    max_crime = max(c.total_crime for c in candidates)
    max_avl = max(c.avl for c in candidates)
    for c in candidates:
        nlength = c.total_length / max_length if max_length > 0 else 0.0
        ncrime = c.total_crime / max_crime if max_crime > 0 else 0.0
        navl = c.avl / max_avl if max_avl > 0 else 0.0
        c.score = weights.alpha * nlength + weights.beta * ncrime + weights.gamma * (1.0 - navl)
    chosen = min(
        candidates,
        key=lambda c: (c.score, c.total_length, c.origin_station_id, c.destination_station_id),
    )
    return RouteResult(chosen, candidates, max_length, max_crime, max_avl)


def route(query: RouteQuery, ctx: RoutingContext) -> RouteResult:
    """Full pipeline for one query; shortest/safest force the corner weights."""
    if query.scheme == "shortest":
        weights = FactorWeights(1.0, 0.0, 0.0)
    elif query.scheme == "safest":
        weights = FactorWeights(0.0, 1.0, 0.0)
    else:
        weights = query.weights
    effective = RouteQuery(
        query.origin, query.destination, query.departure_time, weights, "optimal"
    )
    return score_candidates(generate_candidates(effective, ctx), weights)
