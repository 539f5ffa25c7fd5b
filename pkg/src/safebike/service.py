"""Engine lifecycle and the HTTP API.

The engine loads every input at startup into one immutable state object;
requests only ever read a state snapshot. An optional poll loop rebuilds the
state on an interval and swaps it atomically.
"""

from __future__ import annotations

import datetime as dt
import logging
import threading
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path
from zoneinfo import ZoneInfo

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .geo import GeoPoint
from .ingest import (
    IngestReport,
    append_snapshots,
    load_store,
    parse_crime_csv,
    parse_road_geojson,
    parse_station_info,
    parse_status_snapshot,
)
from .model import (
    BUCKET_MINUTES,
    DEFAULT_TIMEZONE,
    FactorWeights,
    RoadNetwork,
    SnapshotStore,
    StationRegistry,
    StationStatus,
    bucket_start,
)
from .predict import DEFAULT_HORIZON, AvgProfile, build_all_profiles, predict
from .routing import (
    NoRouteFound,
    NoStationInRange,
    RouteQuery,
    RouteResult,
    RoutingContext,
    Speeds,
    route,
)
from .spatial import BufferConfig, annotate_crime

API_VERSION = 1
# Default factor distribution over (length, crime, availability).
DEFAULT_WEIGHTS = FactorWeights(0.3, 0.3, 0.4)

log = logging.getLogger("safebike")


class EngineError(RuntimeError):
    """Startup-time failure: bad config or unusable input data."""


@dataclass(frozen=True)
class EngineConfig:
    station_info_path: Path
    crime_csv_path: Path
    road_geojson_path: Path
    store_path: Path | None = None
    status_dir: Path | None = None
    annotated_network_path: Path | None = None
    timezone: str = DEFAULT_TIMEZONE
    horizon: int = DEFAULT_HORIZON
    buffers: BufferConfig = field(default_factory=BufferConfig)
    speeds: Speeds = field(default_factory=Speeds)
    listen_host: str = "127.0.0.1"
    listen_port: int = 8787
    now: dt.datetime | None = None
    poll_interval_s: float = 0.0


_CONFIG_KEYS = {
    "station_info_path", "crime_csv_path", "road_geojson_path", "store_path",
    "status_dir", "annotated_network_path", "timezone", "horizon",
    "crime_buffer_d", "station_buffer_k", "max_candidate_stations",
    "walk_kmh", "bike_kmh", "listen_host", "listen_port", "now",
    "poll_interval_s",
}


def parse_config_text(text: str, base_dir: Path) -> EngineConfig:
    """Parse key = value lines; relative paths resolve against base_dir."""
    values: dict[str, str] = {}
    for line_num, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise EngineError(f"config line {line_num}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise EngineError(f"config line {line_num}: unknown key {key!r}")
        values[key] = value

    def path_of(key: str) -> Path | None:
        if key not in values:
            return None
        p = Path(values[key])
        return p if p.is_absolute() else base_dir / p

    def required_path(key: str) -> Path:
        p = path_of(key)
        if p is None:
            raise EngineError(f"config is missing required key {key!r}")
        return p

    def number(key: str, default: float, kind=float):
        if key not in values:
            return kind(default)
        try:
            return kind(values[key])
        except ValueError as exc:
            raise EngineError(f"config key {key!r}: {exc}") from exc

    now = None
    if "now" in values:
        try:
            now = dt.datetime.fromisoformat(values["now"])
        except ValueError as exc:
            raise EngineError(f"config key 'now': {exc}") from exc
        if now.tzinfo is None:
            now = now.replace(tzinfo=ZoneInfo(values.get("timezone", DEFAULT_TIMEZONE)))

    try:
        buffers = BufferConfig(
            crime_buffer_d=number("crime_buffer_d", 50.0),
            station_buffer_k=number("station_buffer_k", 500.0),
            max_candidate_stations=number("max_candidate_stations", 5, int),
        )
        speeds = Speeds(number("walk_kmh", 5.0), number("bike_kmh", 15.0))
    except ValueError as exc:
        raise EngineError(str(exc)) from exc

    return EngineConfig(
        station_info_path=required_path("station_info_path"),
        crime_csv_path=required_path("crime_csv_path"),
        road_geojson_path=required_path("road_geojson_path"),
        store_path=path_of("store_path"),
        status_dir=path_of("status_dir"),
        annotated_network_path=path_of("annotated_network_path"),
        timezone=values.get("timezone", DEFAULT_TIMEZONE),
        horizon=number("horizon", DEFAULT_HORIZON, int),
        buffers=buffers,
        speeds=speeds,
        listen_host=values.get("listen_host", "127.0.0.1"),
        listen_port=number("listen_port", 8787, int),
        now=now,
        poll_interval_s=number("poll_interval_s", 0.0),
    )


def load_config(path: str | Path) -> EngineConfig:
    path = Path(path)
    if not path.exists():
        raise EngineError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"), path.parent.resolve())


@dataclass(frozen=True)
class EngineState:
    """Everything a request needs, built once and never mutated."""

    config: EngineConfig
    registry: StationRegistry
    network: RoadNetwork
    store: SnapshotStore
    profiles: dict[str, AvgProfile]
    statuses: dict[str, StationStatus]
    reports: dict[str, IngestReport]

    def routing_context(self) -> RoutingContext:
        return RoutingContext(
            network=self.network,
            registry=self.registry,
            profiles=self.profiles,
            statuses=self.statuses,
            buffers=self.config.buffers,
            speeds=self.config.speeds,
        )

    def now(self) -> dt.datetime:
        return self.config.now or dt.datetime.now(tz=dt.timezone.utc)


def _read(path: Path, what: str) -> bytes:
    if not path.is_file():
        raise EngineError(f"{what} not found: {path}")
    return path.read_bytes()


def build_snapshot_store(config: EngineConfig) -> tuple[SnapshotStore, dict[str, IngestReport]]:
    """Snapshots from the saved store (if present) overlaid with the archive dir."""
    reports: dict[str, IngestReport] = {}
    if config.store_path is not None and config.store_path.is_file():
        store = load_store(config.store_path, config.timezone)
    else:
        store = SnapshotStore(config.timezone)
    if config.status_dir is not None:
        if not config.status_dir.is_dir():
            raise EngineError(f"status_dir not found: {config.status_dir}")
        for snapshot_path in sorted(config.status_dir.glob("*.json")):
            statuses, report = parse_status_snapshot(snapshot_path.read_bytes())
            append_snapshots(store, statuses)
            reports[f"status:{snapshot_path.name}"] = report
    elif config.store_path is not None and not config.store_path.is_file():
        raise EngineError(f"snapshot store not found: {config.store_path}")
    return store, reports


def load_engine(config: EngineConfig) -> EngineState:
    """Read and validate every input; any problem raises a named diagnostic."""
    try:
        registry, info_report = parse_station_info(
            _read(config.station_info_path, "station info file")
        )
        crimes, crime_report = parse_crime_csv(_read(config.crime_csv_path, "crime CSV"))
        network, road_report = parse_road_geojson(
            _read(config.road_geojson_path, "road GeoJSON")
        )
        store, status_reports = build_snapshot_store(config)
    except (ValueError, OSError) as exc:
        raise EngineError(str(exc)) from exc

    annotated = annotate_crime(network, crimes, config.buffers)
    profiles = build_all_profiles(store)
    statuses: dict[str, StationStatus] = {}
    for sid in store.station_ids():
        latest = store.latest_status(sid)
        if latest is not None and sid in registry:
            statuses[sid] = latest
    reports = {"station_info": info_report, "crime": crime_report, "road": road_report}
    reports.update(status_reports)
    return EngineState(
        config=config,
        registry=registry,
        network=annotated,
        store=store,
        profiles=profiles,
        statuses=statuses,
        reports=reports,
    )


class EngineHolder:
    """Atomic handle on the current EngineState (poll mode swaps it)."""

    def __init__(self, state: EngineState):
        self._state = state
        self._lock = threading.Lock()

    @property
    def state(self) -> EngineState:
        with self._lock:
            return self._state

    def swap(self, state: EngineState) -> None:
        with self._lock:
            self._state = state


def _iso(t: dt.datetime) -> str:
    return t.astimezone(dt.timezone.utc).isoformat()


def stations_document(state: EngineState) -> dict:
    stations = []
    for station in state.registry.all():
        record = {
            "station_id": station.id,
            "name": station.name,
            "lat": station.location.lat,
            "lon": station.location.lon,
            "capacity": station.capacity,
        }
        status = state.statuses.get(station.id)
        if status is None:
            record["status"] = "unknown"
        else:
            record["status"] = "known"
            record["bikes"] = status.bikes
            record["docks"] = status.docks
            record["ratio"] = status.bikes / station.capacity if station.capacity else 0.0
            record["last_reported"] = _iso(status.timestamp)
        stations.append(record)
    return {"api_version": API_VERSION, "stations": stations}


def history_document(state: EngineState, station_id: str, hours: float) -> dict:
    """Bucket-aligned points for the trailing window ending at the engine's now."""
    series = state.store.get(station_id)
    end = state.now()
    start = end - dt.timedelta(hours=hours)
    points = []
    if series is not None:
        tz = ZoneInfo(state.store.timezone)
        for day in sorted(series.days):
            buckets = series.days[day]
            for bucket, value in enumerate(buckets):
                if value is None:
                    continue
                t = bucket_start(day, bucket, tz)
                if start <= t <= end:
                    points.append({"timestamp": _iso(t), "bikes": value[0], "docks": value[1]})
    points.sort(key=lambda p: p["timestamp"])
    return {"api_version": API_VERSION, "station_id": station_id, "points": points}


def prediction_document(state: EngineState, station_id: str, horizon: int) -> dict:
    station = state.registry.get(station_id)
    assert station is not None
    status = state.statuses[station_id]
    vector = predict(state.profiles[station_id], status, horizon, station.capacity)
    anchor = status.timestamp
    times = [
        _iso(anchor + dt.timedelta(minutes=BUCKET_MINUTES * i))
        for i in range(1, horizon + 1)
    ]
    return {
        "api_version": API_VERSION,
        "station_id": station_id,
        "anchor_time": _iso(anchor),
        "horizon": horizon,
        "capacity": station.capacity,
        "current_bikes": status.bikes,
        "current_docks": status.docks,
        "times": times,
        "predicted_bikes": list(vector.predicted_bikes),
        "predicted_docks": list(vector.predicted_docks),
        "degraded": vector.degraded,
    }


def _leg_feature(leg) -> dict:
    return {
        "type": "Feature",
        "geometry": {
            "type": "LineString",
            "coordinates": [[p.lon, p.lat] for p in leg.geometry.points],
        },
        "properties": {
            "kind": "leg",
            "mode": leg.mode,
            "length_m": leg.length,
            "crime_total": leg.crime_total,
            "duration_s": leg.duration,
        },
    }


def _station_feature(state: EngineState, station_id: str, role: str,
                     predicted: float, series: str, at: dt.datetime) -> dict:
    station = state.registry.get(station_id)
    assert station is not None
    return {
        "type": "Feature",
        "geometry": {
            "type": "Point",
            "coordinates": [station.location.lon, station.location.lat],
        },
        "properties": {
            "kind": "station",
            "role": role,
            "station_id": station.id,
            "name": station.name,
            f"predicted_{series}": predicted,
            "at": _iso(at),
        },
    }


def route_document(state: EngineState, result: RouteResult, scheme: str,
                   weights: FactorWeights) -> dict:
    chosen = result.chosen
    features = [_leg_feature(leg) for leg in chosen.legs]
    features.append(
        _station_feature(state, chosen.origin_station_id, "origin",
                         chosen.pred_bikes_out, "bikes", chosen.t_out)
    )
    features.append(
        _station_feature(state, chosen.destination_station_id, "destination",
                         chosen.pred_docks_in, "docks", chosen.t_in)
    )
    alternatives = [
        {
            "origin_station_id": c.origin_station_id,
            "destination_station_id": c.destination_station_id,
            "score": c.score,
            "total_length_m": c.total_length,
            "total_crime": c.total_crime,
            "avl": c.avl,
        }
        for c in result.alternatives
    ]
    return {
        "api_version": API_VERSION,
        "scheme": scheme,
        "weights": {"alpha": weights.alpha, "beta": weights.beta, "gamma": weights.gamma},
        "chosen": {
            "origin_station_id": chosen.origin_station_id,
            "destination_station_id": chosen.destination_station_id,
            "score": chosen.score,
            "total_length_m": chosen.total_length,
            "total_crime": chosen.total_crime,
            "avl": chosen.avl,
            "pred_bikes_out": chosen.pred_bikes_out,
            "pred_docks_in": chosen.pred_docks_in,
            "t_out": _iso(chosen.t_out),
            "t_in": _iso(chosen.t_in),
            "geometry": {"type": "FeatureCollection", "features": features},
        },
        "alternatives": alternatives,
        "normalization": {
            "max_length": result.max_length,
            "max_crime": result.max_crime,
            "max_avl": result.max_avl,
        },
    }


class RoutePayload(BaseModel):
    origin: dict
    destination: dict
    departure_time: str | None = None
    scheme: str = "optimal"
    weights: dict | None = None


def _parse_point(obj: dict, name: str) -> GeoPoint:
    try:
        return GeoPoint(float(obj["lat"]), float(obj["lon"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=f"invalid {name}: {exc}") from exc


def _parse_weights(obj: dict | None) -> FactorWeights:
    if obj is None:
        return DEFAULT_WEIGHTS
    try:
        return FactorWeights.normalized(
            float(obj.get("alpha", 0.0)),
            float(obj.get("beta", 0.0)),
            float(obj.get("gamma", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=f"invalid weights: {exc}") from exc


def run_route_query(state: EngineState, origin: GeoPoint, destination: GeoPoint,
                    departure_time: dt.datetime | None, scheme: str,
                    weights: FactorWeights) -> dict:
    """Shared by POST /route and the offline CLI, so both emit the same document."""
    if scheme not in ("shortest", "safest", "optimal"):
        raise HTTPException(status_code=400, detail=f"unknown scheme: {scheme!r}")
    query = RouteQuery(
        origin=origin,
        destination=destination,
        departure_time=departure_time or state.now(),
        weights=weights,
        scheme=scheme,
    )
    try:
        result = route(query, state.routing_context())
    except NoStationInRange as exc:
        raise HTTPException(
            status_code=409,
            detail={"error": "no-station-in-range", "where": exc.where},
        ) from exc
    except NoRouteFound as exc:
        raise HTTPException(status_code=409, detail={"error": "no-route"}) from exc
    effective = query.weights if scheme == "optimal" else (
        FactorWeights(1.0, 0.0, 0.0) if scheme == "shortest" else FactorWeights(0.0, 1.0, 0.0)
    )
    return route_document(state, result, scheme, effective)


def _parse_departure(value: str | None, state: EngineState) -> dt.datetime | None:
    if value is None:
        return None
    try:
        t = dt.datetime.fromisoformat(value)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=f"invalid departure_time: {exc}") from exc
    if t.tzinfo is None:
        t = t.replace(tzinfo=ZoneInfo(state.config.timezone))
    return t


def create_app(config: EngineConfig) -> FastAPI:
    """Load the engine eagerly (startup fails before serving) and build the API."""
    holder = EngineHolder(load_engine(config))
    stop_polling = threading.Event()

    def poll_loop() -> None:
        while not stop_polling.wait(config.poll_interval_s):
            try:
                holder.swap(load_engine(config))
                log.info("engine state reloaded")
            except EngineError as exc:
                log.error("reload failed, keeping previous state: %s", exc)

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        thread = None
        if config.poll_interval_s > 0:
            thread = threading.Thread(target=poll_loop, daemon=True)
            thread.start()
        yield
        stop_polling.set()
        if thread is not None:
            thread.join(timeout=2.0)

    app = FastAPI(title="bike route recommender", lifespan=lifespan)
    app.state.holder = holder

    @app.get("/health")
    def health() -> dict:
        return {"api_version": API_VERSION, "status": "ok"}

    @app.get("/stations")
    def stations() -> dict:
        return stations_document(holder.state)

    @app.get("/stations/{station_id}/history")
    def history(station_id: str, hours: float = 24.0) -> dict:
        state = holder.state
        if station_id not in state.registry:
            raise HTTPException(status_code=404, detail=f"unknown station: {station_id}")
        if hours <= 0:
            raise HTTPException(status_code=400, detail="hours must be positive")
        return history_document(state, station_id, hours)

    @app.get("/stations/{station_id}/prediction")
    def prediction(station_id: str, horizon: int = DEFAULT_HORIZON) -> dict:
        state = holder.state
        if station_id not in state.registry:
            raise HTTPException(status_code=404, detail=f"unknown station: {station_id}")
        if horizon < 1:
            raise HTTPException(status_code=400, detail="horizon must be >= 1")
        if station_id not in state.statuses:
            raise HTTPException(status_code=409, detail={"error": "no-current-status"})
        return prediction_document(state, station_id, horizon)

    @app.post("/route")
    def route_endpoint(payload: RoutePayload) -> JSONResponse:
        state = holder.state
        document = run_route_query(
            state,
            _parse_point(payload.origin, "origin"),
            _parse_point(payload.destination, "destination"),
            _parse_departure(payload.departure_time, state),
            payload.scheme,
            _parse_weights(payload.weights),
        )
        return JSONResponse(document)

    return app


def run_ingest(config: EngineConfig) -> list[str]:
    """Build and persist the snapshot store and annotated network; report counts."""
    from .ingest import save_store, serialize_road_geojson

    lines: list[str] = []
    registry, info_report = parse_station_info(
        _read(config.station_info_path, "station info file")
    )
    lines.append(f"station info: {info_report.summary()} ({len(registry)} stations)")
    crimes, crime_report = parse_crime_csv(_read(config.crime_csv_path, "crime CSV"))
    lines.append(f"crime CSV: {crime_report.summary()}")
    network, road_report = parse_road_geojson(_read(config.road_geojson_path, "road GeoJSON"))
    lines.append(
        f"road GeoJSON: {road_report.summary()} "
        f"({network.node_count()} nodes, {network.edge_count()} edges)"
    )
    store, status_reports = build_snapshot_store(config)
    for name, report in status_reports.items():
        lines.append(f"{name}: {report.summary()}")
    lines.append(f"snapshot store: {store.record_count()} records")
    if config.store_path is not None:
        save_store(store, config.store_path)
        lines.append(f"wrote snapshot store: {config.store_path}")
    if config.annotated_network_path is not None:
        annotated = annotate_crime(network, crimes, config.buffers)
        config.annotated_network_path.write_bytes(serialize_road_geojson(annotated))
        lines.append(f"wrote annotated network: {config.annotated_network_path}")
    return lines


def serve(config: EngineConfig) -> None:
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="info")
