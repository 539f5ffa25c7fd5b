"""Shared fixture builders: grid road networks, stations, histories, configs."""

from __future__ import annotations

import datetime as dt
import json
from pathlib import Path

from safebike.geo import GeoPoint
from safebike.ingest import parse_road_geojson, parse_station_info
from safebike.model import SnapshotStore, Station, StationRegistry, StationStatus

UTC = dt.timezone.utc

# Around lower Manhattan; ~0.002 deg is ~200 m north-south.
DEFAULT_ORIGIN = (40.7300, -73.9900)
DEFAULT_SPACING = 0.002


def grid_nodes(rows, cols, origin=DEFAULT_ORIGIN, spacing=DEFAULT_SPACING,
               jitter=0.0, rng=None):
    """(lat, lon) per grid position, optionally jittered to avoid exact ties."""
    lat0, lon0 = origin
    nodes = []
    for r in range(rows):
        row = []
        for c in range(cols):
            dlat = rng.uniform(-jitter, jitter) if rng and jitter else 0.0
            dlon = rng.uniform(-jitter, jitter) if rng and jitter else 0.0
            row.append((lat0 + r * spacing + dlat, lon0 + c * spacing + dlon))
        nodes.append(row)
    return nodes


def grid_edge_pairs(rows, cols):
    """Horizontal then vertical neighbours, row-major; same order as grid_geojson."""
    pairs = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                pairs.append(((r, c), (r, c + 1)))
            if r + 1 < rows:
                pairs.append(((r, c), (r + 1, c)))
    return pairs


def grid_geojson(nodes, skip=(), extra_features=()):
    """GeoJSON bytes for the 4-neighbour grid over a node lattice.

    skip: edge indexes (into grid_edge_pairs order) to omit.
    """
    rows, cols = len(nodes), len(nodes[0])
    features = []
    for idx, ((r1, c1), (r2, c2)) in enumerate(grid_edge_pairs(rows, cols)):
        if idx in skip:
            continue
        lat_a, lon_a = nodes[r1][c1]
        lat_b, lon_b = nodes[r2][c2]
        features.append({
            "type": "Feature",
            "geometry": {
                "type": "LineString",
                "coordinates": [[lon_a, lat_a], [lon_b, lat_b]],
            },
            "properties": {"edge_id": f"e{idx}"},
        })
    features.extend(extra_features)
    return json.dumps({"type": "FeatureCollection", "features": features}).encode()


def grid_network(rows, cols, origin=DEFAULT_ORIGIN, spacing=DEFAULT_SPACING,
                 jitter=0.0, rng=None, skip=()):
    nodes = grid_nodes(rows, cols, origin, spacing, jitter, rng)
    network, report = parse_road_geojson(grid_geojson(nodes, skip=skip))
    assert report.records_rejected == 0
    return network, nodes


def station_info_bytes(stations):
    """stations: iterable of (id, name, lat, lon, capacity)."""
    return json.dumps({
        "stations": [
            {"station_id": s[0], "name": s[1], "lat": s[2], "lon": s[3], "capacity": s[4]}
            for s in stations
        ]
    }).encode()


def registry_of(stations) -> StationRegistry:
    registry = StationRegistry()
    for sid, name, lat, lon, capacity in stations:
        registry.add(Station(sid, name, GeoPoint(lat, lon), capacity))
    return registry


def status_snapshot_bytes(ts: dt.datetime, counts: dict[str, tuple[int, int]]) -> bytes:
    return json.dumps({
        "last_updated": int(ts.timestamp()),
        "stations": [
            {"station_id": sid, "num_bikes_available": b, "num_docks_available": d}
            for sid, (b, d) in sorted(counts.items())
        ],
    }).encode()


def crime_csv_bytes(rows) -> bytes:
    """rows: iterable of (id, lat, lon, iso_date, category)."""
    lines = ["id,latitude,longitude,date,category"]
    for rid, lat, lon, date, category in rows:
        lines.append(f"{rid},{lat!r},{lon!r},{date},{category}")
    return ("\n".join(lines) + "\n").encode()


def fill_days(store: SnapshotStore, station_id: str, start: dt.date, days: int, value_fn):
    """Populate full 144-bucket days; value_fn(day, bucket) -> (bikes, docks) or None."""
    series = store.series_for(station_id)
    for offset in range(days):
        day = start + dt.timedelta(days=offset)
        for bucket in range(144):
            value = value_fn(day, bucket)
            if value is not None:
                series.set(day, bucket, value[0], value[1])


def status_at(station_id: str, bikes: int, docks: int, ts: dt.datetime) -> StationStatus:
    return StationStatus(station_id, bikes, docks, ts)


def write_engine_dir(tmp_path: Path, *, stations, road_geojson: bytes, crimes,
                     snapshots, config_extra: str = "") -> Path:
    """Materialize a full engine input tree; returns the config path.

    snapshots: iterable of (timestamp, {station_id: (bikes, docks)}).
    """
    tmp_path.mkdir(parents=True, exist_ok=True)
    (tmp_path / "stations.json").write_bytes(station_info_bytes(stations))
    (tmp_path / "roads.geojson").write_bytes(road_geojson)
    (tmp_path / "crime.csv").write_bytes(crime_csv_bytes(crimes))
    status_dir = tmp_path / "status"
    status_dir.mkdir(exist_ok=True)
    for ts, counts in snapshots:
        name = f"{int(ts.timestamp())}.json"
        (status_dir / name).write_bytes(status_snapshot_bytes(ts, counts))
    config = (
        "station_info_path = stations.json\n"
        "crime_csv_path = crime.csv\n"
        "road_geojson_path = roads.geojson\n"
        "status_dir = status\n"
        "store_path = store.txt\n"
        + config_extra
    )
    config_path = tmp_path / "engine.conf"
    config_path.write_text(config)
    return config_path


def parse_stations(stations):
    registry, report = parse_station_info(station_info_bytes(stations))
    assert report.records_rejected == 0
    return registry
