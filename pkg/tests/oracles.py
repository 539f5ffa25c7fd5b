"""Independent reference implementations the engine is checked against.

Everything here favours brute force over cleverness: exhaustive loops and
simple-path enumeration, written from the definitions rather than shared
with the engine code.
"""

from __future__ import annotations

import datetime as dt

from safebike.geo import GeoPoint, haversine, point_to_segment_distance
from safebike.model import RoadNetwork
from safebike.predict import predict_at
from safebike.routing import RoutingContext


def brute_force_radius(points, center: GeoPoint, r: float) -> set:
    """All ids within r of center, by direct all-pairs distance."""
    return {pid for p, pid in points if haversine(center, p) <= r}


def brute_force_crime_counts(network: RoadNetwork, crimes, d: float) -> dict[str, int]:
    """Double loop over (edge, crime): counted when any segment is within d."""
    counts = {}
    for edge in network.edges:
        n = 0
        for crime in crimes:
            pts = edge.geometry.points
            if any(
                point_to_segment_distance(crime.location, a, b) <= d
                for a, b in zip(pts, pts[1:])
            ):
                n += 1
        counts[edge.id] = n
    return counts


def brute_force_nearest_node(network: RoadNetwork, p: GeoPoint) -> str:
    best = None
    for nid, location in network.nodes.items():
        key = (haversine(p, location), nid)
        if best is None or key < best:
            best = key
    return best[1]


def all_simple_paths(network: RoadNetwork, src: str, dst: str):
    """Yield every simple node path src..dst (depth-first)."""
    path = [src]
    on_path = {src}

    def walk(u):
        if u == dst:
            yield list(path)
            return
        for v, _ in network.neighbors(u):
            if v in on_path:
                continue
            path.append(v)
            on_path.add(v)
            yield from walk(v)
            path.pop()
            on_path.remove(v)

    yield from walk(src)


def path_weight(network: RoadNetwork, path, weight_of):
    """Left fold of per-edge (cost, length, crime) triples along a node path.

    Parallel edges between a node pair resolve to the smallest (weight, id).
    """
    total = (0.0, 0.0, 0.0)
    edges = []
    for u, v in zip(path, path[1:]):
        best = None
        for neighbor, edge in network.neighbors(u):
            if neighbor != v:
                continue
            key = (weight_of(edge), edge.id)
            if best is None or key < best:
                best = key
        if best is None:
            return None
        w = best[0]
        total = (total[0] + w[0], total[1] + w[1], total[2] + w[2])
        edges.append(next(e for nb, e in network.neighbors(u) if nb == v and e.id == best[1]))
    return total, edges


def best_path(network: RoadNetwork, src: str, dst: str, weight_of, path_cache=None):
    """Enumeration argmin over simple paths by (weight triple, node path).

    path_cache, when given, memoizes the (src, dst) path list so repeated
    scoring under different weight vectors skips the DFS.
    """
    if path_cache is not None:
        if (src, dst) not in path_cache:
            path_cache[(src, dst)] = [list(p) for p in all_simple_paths(network, src, dst)]
        paths = path_cache[(src, dst)]
    else:
        paths = all_simple_paths(network, src, dst)
    best = None
    for path in paths:
        weighed = path_weight(network, path, weight_of)
        if weighed is None:
            continue
        key = (weighed[0], path)
        if best is None or key < best[0]:
            best = (key, weighed[1])
    if best is None:
        return None
    (weight, path), edges = best
    return weight, path, edges


def blended_weight_of(network: RoadNetwork, alpha: float, beta: float):
    """Per-edge (cost, length, crime) triple under the normalized blend."""
    max_length = max((e.length for e in network.edges), default=0.0) or 1.0
    max_crime = float(max((e.crime_count for e in network.edges), default=0)) or 1.0
    total = alpha + beta
    if total == 0:
        return lambda e: (e.length / max_length, e.length, float(e.crime_count))
    a_hat, b_hat = alpha / total, beta / total

    def weight(e):
        cost = a_hat * (e.length / max_length) + b_hat * (e.crime_count / max_crime)
        return (cost, e.length, float(e.crime_count))

    return weight


def oracle_candidate_stations(p: GeoPoint, ctx: RoutingContext) -> list[str]:
    ranked = []
    for station in ctx.registry.all():
        if station.id not in ctx.statuses:
            continue
        d = haversine(p, station.location)
        if d <= ctx.buffers.station_buffer_k:
            ranked.append((d, station.id))
    ranked.sort()
    return [sid for _, sid in ranked[: ctx.buffers.max_candidate_stations]]


def oracle_route(origin: GeoPoint, destination: GeoPoint, departure: dt.datetime,
                 weights, ctx: RoutingContext, path_cache=None):
    """Full reference pipeline: enumerate paths per pair, score, argmin.

    Returns (chosen dict, all candidate dicts) or None when no pair works.
    """
    origin_ids = oracle_candidate_stations(origin, ctx)
    dest_ids = oracle_candidate_stations(destination, ctx)
    if not origin_ids or not dest_ids:
        return None
    weight_of = blended_weight_of(ctx.network, weights.alpha, weights.beta)
    origin_node = brute_force_nearest_node(ctx.network, origin)
    dest_node = brute_force_nearest_node(ctx.network, destination)
    node_of = {
        sid: brute_force_nearest_node(ctx.network, ctx.registry.get(sid).location)
        for sid in set(origin_ids) | set(dest_ids)
    }

    candidates = []
    for i in origin_ids:
        for j in dest_ids:
            if i == j:
                continue
            walk_out = best_path(ctx.network, origin_node, node_of[i], weight_of, path_cache)
            ride = best_path(ctx.network, node_of[i], node_of[j], weight_of, path_cache)
            walk_in = best_path(ctx.network, node_of[j], dest_node, weight_of, path_cache)
            if walk_out is None or ride is None or walk_in is None:
                continue
            legs = (walk_out, ride, walk_in)
            # Same association order as the engine: fold each leg, then legs.
            leg_lengths = []
            leg_crimes = []
            for _, _, edges in legs:
                length = 0.0
                crime = 0
                for edge in edges:
                    length += edge.length
                    crime += edge.crime_count
                leg_lengths.append(length)
                leg_crimes.append(crime)
            durations = [
                leg_lengths[0] / (ctx.speeds.walk_kmh * 1000.0 / 3600.0),
                leg_lengths[1] / (ctx.speeds.bike_kmh * 1000.0 / 3600.0),
                leg_lengths[2] / (ctx.speeds.walk_kmh * 1000.0 / 3600.0),
            ]
            t_out = departure + dt.timedelta(seconds=durations[0])
            t_in = t_out + dt.timedelta(seconds=durations[1])
            status_i = ctx.statuses[i]
            status_j = ctx.statuses[j]
            bikes_out, _ = predict_at(
                ctx.profiles[i], status_i, max(t_out, status_i.timestamp),
                ctx.registry.get(i).capacity,
            )
            _, docks_in = predict_at(
                ctx.profiles[j], status_j, max(t_in, status_j.timestamp),
                ctx.registry.get(j).capacity,
            )
            total_length = 0.0
            for length in leg_lengths:
                total_length += length
            total_crime = sum(leg_crimes)
            candidates.append({
                "origin": i,
                "destination": j,
                "paths": tuple(tuple(leg[1]) for leg in legs),
                "total_length": total_length,
                "total_crime": total_crime,
                "avl": bikes_out * docks_in,
                "pred_bikes_out": bikes_out,
                "pred_docks_in": docks_in,
                "t_out": t_out,
                "t_in": t_in,
            })
    if not candidates:
        return None

    max_length = max(c["total_length"] for c in candidates)
    max_crime = max(c["total_crime"] for c in candidates)
    max_avl = max(c["avl"] for c in candidates)
    for c in candidates:
        nlength = c["total_length"] / max_length if max_length > 0 else 0.0
        ncrime = c["total_crime"] / max_crime if max_crime > 0 else 0.0
        navl = c["avl"] / max_avl if max_avl > 0 else 0.0
        c["score"] = (
            weights.alpha * nlength + weights.beta * ncrime + weights.gamma * (1.0 - navl)
        )
    chosen = min(
        candidates,
        key=lambda c: (c["score"], c["total_length"], c["origin"], c["destination"]),
    )
    return chosen, candidates
