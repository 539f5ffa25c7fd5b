"""Parsers, serializers, and persistence for the four input formats.

Formats handled here:
  * station information JSON ({"stations": [...]})
  * station status snapshot JSON ({"last_updated": ..., "stations": [...]})
  * crime incident CSV (id, latitude, longitude, date, category)
  * road network GeoJSON (FeatureCollection of LineString features)
  * the snapshot store file ("SAFEBIKE-STORE v1" header, sorted records)
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .geo import GeoPoint, Polyline, haversine, polyline_length
from .model import (
    BUCKETS_PER_DAY,
    CrimeRecord,
    RoadEdge,
    RoadNetwork,
    SnapshotStore,
    Station,
    StationRegistry,
    StationStatus,
)

STORE_HEADER = "SAFEBIKE-STORE v1"
# Endpoints closer than this collapse into one graph node.
SNAP_TOLERANCE_M = 1.0

CRIME_COLUMNS = ("id", "latitude", "longitude", "date", "category")
CRIME_DATE_FORMATS = ("%Y-%m-%d", "%m/%d/%Y")


class IngestError(ValueError):
    """Hard failure: structurally unusable input (not a per-record rejection)."""


@dataclass
class IngestReport:
    """Per-parse accounting; records_read == records_kept + records_rejected."""

    records_read: int = 0
    records_kept: int = 0
    records_rejected: int = 0
    rejection_reasons: dict[str, int] = field(default_factory=dict)
    details: list[str] = field(default_factory=list)

    def keep(self) -> None:
        self.records_read += 1
        self.records_kept += 1

    def reject(self, reason: str, detail: str | None = None) -> None:
        self.records_read += 1
        self.records_rejected += 1
        self.rejection_reasons[reason] = self.rejection_reasons.get(reason, 0) + 1
        if detail:
            self.details.append(detail)

    def demote(self, reason: str) -> None:
        """Move one previously kept record to rejected (e.g. overwritten duplicate)."""
        self.records_kept -= 1
        self.records_rejected += 1
        self.rejection_reasons[reason] = self.rejection_reasons.get(reason, 0) + 1

    def summary(self) -> str:
        parts = [
            f"read={self.records_read}",
            f"kept={self.records_kept}",
            f"rejected={self.records_rejected}",
        ]
        if self.rejection_reasons:
            reasons = ", ".join(f"{k}: {v}" for k, v in sorted(self.rejection_reasons.items()))
            parts.append(f"({reasons})")
        return " ".join(parts)


def _load_json(data: bytes) -> object:
    try:
        return json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise IngestError(f"input is not valid UTF-8 at byte {exc.start}") from exc
    except json.JSONDecodeError as exc:
        raise IngestError(f"malformed JSON at byte {exc.pos}: {exc.msg}") from exc


def _opt_id(value: object) -> str | None:
    """Station/edge ids may arrive as JSON strings or numbers."""
    if isinstance(value, str) and value:
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    return None


def _opt_count(value: object) -> int | None:
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    return None


def parse_station_info(data: bytes) -> tuple[StationRegistry, IngestReport]:
    """Parse station information JSON into a registry (duplicate ids: last wins)."""
    doc = _load_json(data)
    if not isinstance(doc, dict) or not isinstance(doc.get("stations"), list):
        raise IngestError('station info must be an object with a "stations" array')

    registry = StationRegistry()
    report = IngestReport()
    for record in doc["stations"]:
        if not isinstance(record, dict):
            report.reject("not an object")
            continue
        missing = [k for k in ("station_id", "name", "lat", "lon", "capacity") if k not in record]
        if missing:
            report.reject(f"missing field: {missing[0]}")
            continue
        sid = _opt_id(record["station_id"])
        if sid is None:
            report.reject("invalid station_id")
            continue
        lat, lon = record["lat"], record["lon"]
        if not isinstance(lat, (int, float)) or not -90.0 <= lat <= 90.0:
            report.reject("lat out of range")
            continue
        if not isinstance(lon, (int, float)) or not -180.0 <= lon <= 180.0:
            report.reject("lon out of range")
            continue
        capacity = _opt_count(record["capacity"])
        if capacity is None or capacity < 0:
            report.reject("invalid capacity")
            continue
        station = Station(sid, str(record["name"]), GeoPoint(float(lat), float(lon)), capacity)
        report.keep()
        if registry.add(station):
            report.demote("duplicate station_id")
    return registry, report


def parse_status_snapshot(data: bytes) -> tuple[list[StationStatus], IngestReport]:
    """Parse one status snapshot; every entry is stamped with the feed's last_updated."""
    doc = _load_json(data)
    if not isinstance(doc, dict) or not isinstance(doc.get("stations"), list):
        raise IngestError('status snapshot must be an object with a "stations" array')
    last_updated = doc.get("last_updated")
    if not isinstance(last_updated, (int, float)) or isinstance(last_updated, bool):
        raise IngestError("status snapshot is missing a numeric last_updated")
    timestamp = dt.datetime.fromtimestamp(last_updated, tz=dt.timezone.utc)

    statuses: list[StationStatus] = []
    report = IngestReport()
    for record in doc["stations"]:
        if not isinstance(record, dict):
            report.reject("not an object")
            continue
        sid = _opt_id(record.get("station_id"))
        if sid is None:
            report.reject("missing field: station_id")
            continue
        bikes = _opt_count(record.get("num_bikes_available"))
        docks = _opt_count(record.get("num_docks_available"))
        if bikes is None or docks is None:
            report.reject("invalid count")
            continue
        if bikes < 0 or docks < 0:
            report.reject("negative count")
            continue
        statuses.append(StationStatus(sid, bikes, docks, timestamp))
        report.keep()
    return statuses, report


def _parse_crime_date(text: str) -> dt.date | None:
    for fmt in CRIME_DATE_FORMATS:
        try:
            return dt.datetime.strptime(text, fmt).date()
        except ValueError:
            continue
    return None


def parse_crime_csv(data: bytes) -> tuple[list[CrimeRecord], IngestReport]:
    """Parse crime incidents from CSV; extra columns are ignored."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IngestError(f"input is not valid UTF-8 at byte {exc.start}") from exc
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise IngestError("crime CSV has no header row")
    for column in CRIME_COLUMNS:
        if column not in reader.fieldnames:
            raise IngestError(f"crime CSV is missing required column: {column}")

    records: list[CrimeRecord] = []
    report = IngestReport()
    for row_num, row in enumerate(reader, start=2):
        lat_text = (row.get("latitude") or "").strip()
        lon_text = (row.get("longitude") or "").strip()
        if not lat_text or not lon_text:
            report.reject("missing coordinate", f"row {row_num}: missing coordinate")
            continue
        try:
            lat, lon = float(lat_text), float(lon_text)
        except ValueError:
            report.reject("invalid coordinate", f"row {row_num}: invalid coordinate")
            continue
        if not (math.isfinite(lat) and math.isfinite(lon)):
            report.reject("invalid coordinate", f"row {row_num}: invalid coordinate")
            continue
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            report.reject("coordinate out of range", f"row {row_num}: coordinate out of range")
            continue
        occurred = _parse_crime_date((row.get("date") or "").strip())
        if occurred is None:
            report.reject("invalid date", f"row {row_num}: invalid date")
            continue
        rid = (row.get("id") or "").strip()
        if not rid:
            report.reject("missing id", f"row {row_num}: missing id")
            continue
        category = (row.get("category") or "").strip()
        records.append(CrimeRecord(rid, GeoPoint(lat, lon), occurred, category))
        report.keep()
    return records, report


class _NodeSnapper:
    """Assigns synthetic node ids, merging endpoints within SNAP_TOLERANCE_M."""

    _CELL_M = 10.0

    def __init__(self) -> None:
        self.nodes: dict[str, GeoPoint] = {}
        self._grid: dict[tuple[int, int], list[str]] = {}
        self._origin: GeoPoint | None = None
        self._cos_lat0 = 1.0

    def _cell(self, p: GeoPoint) -> tuple[int, int]:
        assert self._origin is not None
        x = (p.lon - self._origin.lon) * math.cos(math.radians(self._origin.lat))
        y = p.lat - self._origin.lat
        scale = math.radians(1.0) * 6_371_000.0
        return math.floor(x * scale / self._CELL_M), math.floor(y * scale / self._CELL_M)

    def node_for(self, p: GeoPoint) -> str:
        if self._origin is None:
            self._origin = p
        cx, cy = self._cell(p)
        best: tuple[float, str] | None = None
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for nid in self._grid.get((cx + dx, cy + dy), []):
                    d = haversine(p, self.nodes[nid])
                    if d <= SNAP_TOLERANCE_M and (best is None or (d, nid) < best):
                        best = (d, nid)
        if best is not None:
            return best[1]
        nid = f"n{len(self.nodes)}"
        self.nodes[nid] = p
        self._grid.setdefault((cx, cy), []).append(nid)
        return nid


def _coords_to_points(coords: object) -> list[GeoPoint] | None:
    if not isinstance(coords, list) or len(coords) < 2:
        return None
    points = []
    for pair in coords:
        if (
            not isinstance(pair, list)
            or len(pair) < 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in pair[:2])
        ):
            return None
        lon, lat = float(pair[0]), float(pair[1])
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            return None
        points.append(GeoPoint(lat, lon))
    return points


def parse_road_geojson(data: bytes) -> tuple[RoadNetwork, IngestReport]:
    """Build an undirected road graph from a GeoJSON FeatureCollection of LineStrings.

    Node ids are synthesized in feature order by snapping endpoints within 1 m.
    A crime_count property, when present, is carried into the edge (so a
    previously annotated network round-trips); otherwise counts start at 0.
    Duplicate edge_ids keep the first occurrence.
    """
    doc = _load_json(data)
    if not isinstance(doc, dict) or not isinstance(doc.get("features"), list):
        raise IngestError('road GeoJSON must be a FeatureCollection with a "features" array')

    snapper = _NodeSnapper()
    edges: list[RoadEdge] = []
    seen_ids: set[str] = set()
    report = IngestReport()
    for feature in doc["features"]:
        if not isinstance(feature, dict):
            report.reject("not an object")
            continue
        geometry = feature.get("geometry")
        if not isinstance(geometry, dict):
            report.reject("missing geometry")
            continue
        if geometry.get("type") != "LineString":
            report.reject("not a LineString")
            continue
        points = _coords_to_points(geometry.get("coordinates"))
        if points is None:
            report.reject("invalid coordinates")
            continue
        properties = feature.get("properties") or {}
        edge_id = _opt_id(properties.get("edge_id")) if isinstance(properties, dict) else None
        if edge_id is None:
            report.reject("missing edge_id")
            continue
        if edge_id in seen_ids:
            report.reject("duplicate edge_id")
            continue
        crime_count = 0
        if isinstance(properties, dict) and "crime_count" in properties:
            count = _opt_count(properties["crime_count"])
            if count is None or count < 0:
                report.reject("invalid crime_count")
                continue
            crime_count = count
        u = snapper.node_for(points[0])
        v = snapper.node_for(points[-1])
        geometry_pl = Polyline(points)
        edges.append(
            RoadEdge(edge_id, u, v, geometry_pl, polyline_length(geometry_pl), crime_count)
        )
        seen_ids.add(edge_id)
        report.keep()
    return RoadNetwork(snapper.nodes, edges), report


def append_snapshots(store: SnapshotStore, statuses: list[StationStatus]) -> IngestReport:
    """File each status into its (station, local date, bucket) slot; later writes win."""
    report = IngestReport()
    for status in statuses:
        overwrote = store.add_status(status)
        report.keep()
        if overwrote:
            report.details.append(
                f"station {status.station_id}: overwrote bucket at {status.timestamp.isoformat()}"
            )
    return report


def _json_bytes(doc: object) -> bytes:
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


def serialize_station_info(registry: StationRegistry) -> bytes:
    stations = [
        {
            "station_id": s.id,
            "name": s.name,
            "lat": s.location.lat,
            "lon": s.location.lon,
            "capacity": s.capacity,
        }
        for s in registry.all()
    ]
    return _json_bytes({"stations": stations})


def serialize_status_snapshot(timestamp: dt.datetime, statuses: list[StationStatus]) -> bytes:
    records = [
        {
            "station_id": s.station_id,
            "num_bikes_available": s.bikes,
            "num_docks_available": s.docks,
        }
        for s in sorted(statuses, key=lambda s: s.station_id)
    ]
    return _json_bytes({"last_updated": int(timestamp.timestamp()), "stations": records})


def serialize_crime_csv(records: list[CrimeRecord]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(CRIME_COLUMNS)
    for r in records:
        writer.writerow([r.id, repr(r.location.lat), repr(r.location.lon),
                         r.occurred_at.isoformat(), r.category])
    return out.getvalue().encode("utf-8")


def serialize_road_geojson(network: RoadNetwork) -> bytes:
    features = [
        {
            "type": "Feature",
            "geometry": {
                "type": "LineString",
                "coordinates": [[p.lon, p.lat] for p in edge.geometry.points],
            },
            "properties": {"edge_id": edge.id, "crime_count": edge.crime_count},
        }
        for edge in network.edges
    ]
    return _json_bytes({"type": "FeatureCollection", "features": features})


def save_store(store: SnapshotStore, path: str | Path) -> None:
    """Write the store as the versioned, sorted, line-oriented text format."""
    lines = [STORE_HEADER]
    for sid in store.station_ids():
        if "\t" in sid or "\n" in sid:
            raise IngestError(f"station id not representable in store file: {sid!r}")
        series = store.series[sid]
        for day in sorted(series.days):
            buckets = series.days[day]
            for bucket in range(BUCKETS_PER_DAY):
                value = buckets[bucket]
                if value is not None:
                    lines.append(f"{sid}\t{day.isoformat()}\t{bucket}\t{value[0]}\t{value[1]}")
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def load_store(path: str | Path, timezone: str = "America/New_York") -> SnapshotStore:
    """Read a store file back; any structural damage is a hard error."""
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IngestError(f"store file is not valid UTF-8 at byte {exc.start}") from exc
    if not text.endswith("\n"):
        raise IngestError("store file is truncated (missing final newline)")
    lines = text.split("\n")[:-1]
    if not lines or lines[0] != STORE_HEADER:
        found = lines[0] if lines else "<empty>"
        raise IngestError(f"unsupported store header: {found!r} (expected {STORE_HEADER!r})")

    store = SnapshotStore(timezone)
    prev_key: tuple[str, str, int] | None = None
    for line_num, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != 5:
            raise IngestError(f"store line {line_num}: expected 5 fields, got {len(fields)}")
        sid, day_text, bucket_text, bikes_text, docks_text = fields
        try:
            day = dt.date.fromisoformat(day_text)
            bucket, bikes, docks = int(bucket_text), int(bikes_text), int(docks_text)
        except ValueError as exc:
            raise IngestError(f"store line {line_num}: {exc}") from exc
        if not 0 <= bucket < BUCKETS_PER_DAY:
            raise IngestError(f"store line {line_num}: bucket out of range: {bucket}")
        if bikes < 0 or docks < 0:
            raise IngestError(f"store line {line_num}: negative count")
        key = (sid, day_text, bucket)
        if prev_key is not None and key <= prev_key:
            raise IngestError(f"store line {line_num}: records out of order")
        prev_key = key
        store.series_for(sid).set(day, bucket, bikes, docks)
    return store
