"""Engine config, state loading, HTTP endpoints, and the CLI."""

import datetime as dt
import json
import random
from pathlib import Path
from zoneinfo import ZoneInfo

import pytest
from fastapi.testclient import TestClient

from helpers import grid_geojson, grid_nodes, write_engine_dir
from safebike.cli import main
from safebike.ingest import STORE_HEADER, load_store, parse_road_geojson
from safebike.model import bucket_start
from safebike.service import (
    API_VERSION,
    EngineConfig,
    EngineError,
    EngineHolder,
    create_app,
    load_config,
    load_engine,
    parse_config_text,
    run_ingest,
)

NY = ZoneInfo("America/New_York")
MONDAY = dt.date(2017, 5, 22)
TUESDAY = dt.date(2017, 5, 23)
NOW = bucket_start(TUESDAY, 60, NY)  # 10:00 local


def build_fixture(tmp_path: Path, *, extra: str = "", with_ghost=True) -> Path:
    rng = random.Random(42)
    nodes = grid_nodes(3, 3, jitter=0.0003, rng=rng)
    stations = [
        ("sA", "Alpha Sq", nodes[0][1][0], nodes[0][1][1], 16),
        ("sB", "Bravo Pl", nodes[2][1][0], nodes[2][1][1], 20),
    ]
    if with_ghost:
        stations.append(("sGhost", "Silent", nodes[2][2][0], nodes[2][2][1], 7))
    edge0_mid = (
        (nodes[0][0][0] + nodes[0][1][0]) / 2,
        (nodes[0][0][1] + nodes[0][1][1]) / 2,
    )
    crimes = [("r1", edge0_mid[0], edge0_mid[1], "2017-05-01", "theft")]
    # Constant counts per station across every snapshot keep the per-bucket
    # averages flat, so predictions reduce to persistence of the last reading.
    snapshots = [
        (bucket_start(MONDAY, 30, NY), {"sA": (8, 4), "sB": (5, 15)}),
        (bucket_start(MONDAY, 90, NY), {"sA": (8, 4), "sB": (5, 15)}),
        (NOW, {"sA": (8, 4), "sB": (5, 15)}),
    ]
    config_extra = f"now = {NOW.isoformat()}\nstation_buffer_k = 300\n" + extra
    return write_engine_dir(
        tmp_path,
        stations=stations,
        road_geojson=grid_geojson(nodes),
        crimes=crimes,
        snapshots=snapshots,
        config_extra=config_extra,
    )


@pytest.fixture()
def fixture_dir(tmp_path):
    return build_fixture(tmp_path)


@pytest.fixture()
def client(fixture_dir):
    app = create_app(load_config(fixture_dir))
    with TestClient(app) as c:
        yield c


class TestConfigParsing:
    MINIMAL = (
        "station_info_path = stations.json\n"
        "crime_csv_path = crime.csv\n"
        "road_geojson_path = roads.geojson\n"
    )

    def test_defaults(self):
        config = parse_config_text(self.MINIMAL, Path("/base"))
        assert config.timezone == "America/New_York"
        assert config.horizon == 6
        assert config.buffers.crime_buffer_d == 50.0
        assert config.buffers.station_buffer_k == 500.0
        assert config.buffers.max_candidate_stations == 5
        assert config.speeds.walk_kmh == 5.0
        assert config.speeds.bike_kmh == 15.0
        assert config.listen_host == "127.0.0.1"
        assert config.listen_port == 8787
        assert config.now is None
        assert config.poll_interval_s == 0.0
        assert config.store_path is None

    def test_relative_paths_resolve_against_base(self):
        config = parse_config_text(self.MINIMAL, Path("/base"))
        assert config.station_info_path == Path("/base/stations.json")

    def test_absolute_path_kept(self):
        text = self.MINIMAL + "store_path = /data/store.txt\n"
        config = parse_config_text(text, Path("/base"))
        assert config.store_path == Path("/data/store.txt")

    def test_comments_and_blanks_ignored(self):
        text = "# top\n\n" + self.MINIMAL + "\n# tail\n"
        parse_config_text(text, Path("/b"))

    def test_unknown_key_names_line(self):
        text = self.MINIMAL + "surprise = 1\n"
        with pytest.raises(EngineError, match="line 4.*surprise"):
            parse_config_text(text, Path("/b"))

    def test_missing_required_key(self):
        with pytest.raises(EngineError, match="station_info_path"):
            parse_config_text("crime_csv_path = a\nroad_geojson_path = b\n", Path("/b"))

    def test_malformed_line(self):
        with pytest.raises(EngineError, match="line 1"):
            parse_config_text("just words\n", Path("/b"))

    def test_numeric_overrides(self):
        text = self.MINIMAL + (
            "crime_buffer_d = 25\nstation_buffer_k = 800\nmax_candidate_stations = 3\n"
            "walk_kmh = 4.5\nbike_kmh = 12\nhorizon = 9\nlisten_port = 9000\n"
            "poll_interval_s = 1.5\n"
        )
        config = parse_config_text(text, Path("/b"))
        assert config.buffers.crime_buffer_d == 25.0
        assert config.buffers.station_buffer_k == 800.0
        assert config.buffers.max_candidate_stations == 3
        assert config.speeds.walk_kmh == 4.5
        assert config.horizon == 9
        assert config.listen_port == 9000
        assert config.poll_interval_s == 1.5

    def test_bad_number_rejected(self):
        with pytest.raises(EngineError, match="horizon"):
            parse_config_text(self.MINIMAL + "horizon = soon\n", Path("/b"))

    def test_naive_now_gets_engine_timezone(self):
        text = self.MINIMAL + "timezone = America/New_York\nnow = 2017-05-23T10:00:00\n"
        config = parse_config_text(text, Path("/b"))
        assert config.now == NOW

    def test_aware_now_kept(self):
        text = self.MINIMAL + "now = 2017-05-23T14:00:00+00:00\n"
        config = parse_config_text(text, Path("/b"))
        assert config.now == NOW

    def test_bad_now_rejected(self):
        with pytest.raises(EngineError, match="now"):
            parse_config_text(self.MINIMAL + "now = later\n", Path("/b"))

    def test_load_config_missing_file(self, tmp_path):
        with pytest.raises(EngineError, match="config file not found"):
            load_config(tmp_path / "none.conf")


class TestLoadEngine:
    def test_full_fixture(self, fixture_dir):
        state = load_engine(load_config(fixture_dir))
        assert sorted(state.registry.ids()) == ["sA", "sB", "sGhost"]
        assert set(state.statuses) == {"sA", "sB"}
        assert state.statuses["sA"].bikes == 8
        assert state.statuses["sA"].timestamp == NOW
        counts = {e.id: e.crime_count for e in state.network.edges}
        assert counts["e0"] == 1
        assert set(state.profiles) == {"sA", "sB"}
        assert state.now() == NOW

    def test_missing_station_file(self, fixture_dir):
        config = load_config(fixture_dir)
        (config.station_info_path).unlink()
        with pytest.raises(EngineError, match="station info file"):
            load_engine(config)

    def test_missing_store_without_status_dir(self, tmp_path):
        build_fixture(tmp_path)
        text = (tmp_path / "engine.conf").read_text()
        text = "\n".join(
            line for line in text.splitlines() if not line.startswith("status_dir")
        )
        bad = tmp_path / "nostatus.conf"
        bad.write_text(text + "\n")
        with pytest.raises(EngineError, match="snapshot store not found"):
            load_engine(load_config(bad))

    def test_snapshot_for_unregistered_station_ignored(self, tmp_path):
        config_path = build_fixture(tmp_path)
        extra = {"sA": (1, 1), "mystery": (9, 9)}
        ts = bucket_start(TUESDAY, 61, NY)
        from helpers import status_snapshot_bytes
        (tmp_path / "status" / "zz-extra.json").write_bytes(
            status_snapshot_bytes(ts, extra)
        )
        state = load_engine(load_config(config_path))
        assert "mystery" not in state.statuses
        assert state.statuses["sA"].bikes == 1

    def test_corrupt_input_wrapped(self, fixture_dir):
        config = load_config(fixture_dir)
        config.crime_csv_path.write_bytes(b"wrong,header\n1,2\n")
        with pytest.raises(EngineError):
            load_engine(config)


class TestEngineHolder:
    def test_swap(self, fixture_dir):
        state = load_engine(load_config(fixture_dir))
        holder = EngineHolder(state)
        assert holder.state is state
        replacement = load_engine(load_config(fixture_dir))
        holder.swap(replacement)
        assert holder.state is replacement


class TestStationsEndpoint:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body == {"api_version": API_VERSION, "status": "ok"}

    def test_stations_known_and_unknown(self, client):
        body = client.get("/stations").json()
        assert body["api_version"] == API_VERSION
        by_id = {s["station_id"]: s for s in body["stations"]}
        assert set(by_id) == {"sA", "sB", "sGhost"}
        a = by_id["sA"]
        assert a["status"] == "known"
        assert (a["bikes"], a["docks"]) == (8, 4)
        assert a["ratio"] == 0.5
        assert a["capacity"] == 16
        assert a["last_reported"] == "2017-05-23T14:00:00+00:00"
        b = by_id["sB"]
        assert b["ratio"] == 0.25
        ghost = by_id["sGhost"]
        assert ghost["status"] == "unknown"
        assert "bikes" not in ghost and "ratio" not in ghost


class TestHistoryEndpoint:
    def test_default_24h_window(self, client):
        body = client.get("/stations/sA/history").json()
        assert body["station_id"] == "sA"
        times = [p["timestamp"] for p in body["points"]]
        # Monday bucket 90 (15:00 local) and the Tuesday 10:00 reading fall in
        # the trailing day; Monday bucket 30 (05:00) is too old.
        assert times == ["2017-05-22T19:00:00+00:00", "2017-05-23T14:00:00+00:00"]
        assert body["points"][0]["bikes"] == 8
        assert body["points"][1]["bikes"] == 8

    def test_one_hour_window(self, client):
        body = client.get("/stations/sA/history", params={"hours": 1}).json()
        assert [p["timestamp"] for p in body["points"]] == ["2017-05-23T14:00:00+00:00"]

    def test_wide_window_includes_everything(self, client):
        body = client.get("/stations/sA/history", params={"hours": 72}).json()
        assert len(body["points"]) == 3

    def test_unknown_station_404(self, client):
        assert client.get("/stations/zz/history").status_code == 404

    def test_nonpositive_hours_400(self, client):
        assert client.get("/stations/sA/history", params={"hours": 0}).status_code == 400

    def test_station_without_data_empty(self, client):
        body = client.get("/stations/sGhost/history").json()
        assert body["points"] == []


class TestPredictionEndpoint:
    def test_flat_profile_prediction(self, client):
        body = client.get("/stations/sA/prediction").json()
        assert body["api_version"] == API_VERSION
        assert body["horizon"] == 6
        assert body["anchor_time"] == "2017-05-23T14:00:00+00:00"
        assert body["current_bikes"] == 8
        assert body["predicted_bikes"] == [8.0] * 6
        assert body["predicted_docks"] == [4.0] * 6
        assert body["degraded"] is False
        assert body["times"][0] == "2017-05-23T14:10:00+00:00"
        assert body["times"][-1] == "2017-05-23T15:00:00+00:00"

    def test_horizon_override(self, client):
        body = client.get("/stations/sB/prediction", params={"horizon": 3}).json()
        assert len(body["predicted_bikes"]) == 3
        assert body["predicted_docks"] == [15.0] * 3

    def test_unknown_station_404(self, client):
        assert client.get("/stations/zz/prediction").status_code == 404

    def test_bad_horizon_400(self, client):
        response = client.get("/stations/sA/prediction", params={"horizon": 0})
        assert response.status_code == 400

    def test_no_current_status_409(self, client):
        response = client.get("/stations/sGhost/prediction")
        assert response.status_code == 409
        assert response.json()["detail"] == {"error": "no-current-status"}


def route_payload(**over):
    rng = random.Random(42)
    nodes = grid_nodes(3, 3, jitter=0.0003, rng=rng)
    payload = {
        "origin": {"lat": nodes[0][0][0], "lon": nodes[0][0][1]},
        "destination": {"lat": nodes[2][2][0], "lon": nodes[2][2][1]},
    }
    payload.update(over)
    return payload


class TestRouteEndpoint:
    def test_structure(self, client):
        response = client.post("/route", json=route_payload())
        assert response.status_code == 200
        body = response.json()
        assert body["api_version"] == API_VERSION
        assert body["scheme"] == "optimal"
        assert body["weights"] == {"alpha": 0.3, "beta": 0.3, "gamma": 0.4}
        chosen = body["chosen"]
        assert chosen["origin_station_id"] == "sA"
        assert chosen["destination_station_id"] == "sB"
        features = chosen["geometry"]["features"]
        assert chosen["geometry"]["type"] == "FeatureCollection"
        assert len(features) == 5
        assert [f["properties"]["mode"] for f in features[:3]] == ["walk", "bike", "walk"]
        assert all(f["geometry"]["type"] == "LineString" for f in features[:3])
        assert features[3]["geometry"]["type"] == "Point"
        assert features[3]["properties"]["role"] == "origin"
        assert features[4]["properties"]["role"] == "destination"
        assert features[3]["properties"]["predicted_bikes"] == chosen["pred_bikes_out"]
        assert features[4]["properties"]["predicted_docks"] == chosen["pred_docks_in"]
        assert body["normalization"]["max_length"] >= chosen["total_length_m"]
        assert any(
            a["origin_station_id"] == chosen["origin_station_id"]
            and a["score"] == chosen["score"]
            for a in body["alternatives"]
        )

    def test_chosen_minimizes_alternative_scores(self, client):
        body = client.post("/route", json=route_payload()).json()
        scores = [a["score"] for a in body["alternatives"]]
        assert body["chosen"]["score"] == min(scores)

    def test_corner_weights_equal_shortest_scheme(self, client):
        by_weights = client.post(
            "/route",
            json=route_payload(weights={"alpha": 1, "beta": 0, "gamma": 0}),
        ).json()
        by_scheme = client.post("/route", json=route_payload(scheme="shortest")).json()
        by_weights.pop("scheme")
        by_scheme.pop("scheme")
        assert json.dumps(by_weights, sort_keys=True) == json.dumps(by_scheme, sort_keys=True)

    def test_safest_scheme_reports_corner_weights(self, client):
        body = client.post("/route", json=route_payload(scheme="safest")).json()
        assert body["scheme"] == "safest"
        assert body["weights"] == {"alpha": 0.0, "beta": 1.0, "gamma": 0.0}

    def test_departure_time_naive_uses_engine_timezone(self, client):
        body = client.post(
            "/route", json=route_payload(departure_time="2017-05-23T10:30:00")
        ).json()
        walk_out = body["chosen"]["geometry"]["features"][0]["properties"]
        departure = dt.datetime(2017, 5, 23, 10, 30, tzinfo=NY)
        expected = departure + dt.timedelta(seconds=walk_out["duration_s"])
        assert body["chosen"]["t_out"] == expected.astimezone(dt.timezone.utc).isoformat()

    def test_default_departure_is_configured_now(self, client):
        body = client.post("/route", json=route_payload()).json()
        walk_out = body["chosen"]["geometry"]["features"][0]["properties"]
        expected = NOW + dt.timedelta(seconds=walk_out["duration_s"])
        assert body["chosen"]["t_out"] == expected.astimezone(dt.timezone.utc).isoformat()

    def test_invalid_weights_400(self, client):
        for weights in ({"alpha": -1, "beta": 0, "gamma": 0},
                        {"alpha": 0, "beta": 0, "gamma": 0}):
            response = client.post("/route", json=route_payload(weights=weights))
            assert response.status_code == 400

    def test_invalid_point_400(self, client):
        response = client.post("/route", json=route_payload(origin={"lat": 1.0}))
        assert response.status_code == 400

    def test_unknown_scheme_400(self, client):
        response = client.post("/route", json=route_payload(scheme="fastest"))
        assert response.status_code == 400

    def test_bad_departure_400(self, client):
        response = client.post("/route", json=route_payload(departure_time="tomorrow"))
        assert response.status_code == 400

    def test_no_station_in_range_409(self, client):
        response = client.post(
            "/route", json=route_payload(origin={"lat": 40.9, "lon": -73.7})
        )
        assert response.status_code == 409
        assert response.json()["detail"] == {"error": "no-station-in-range", "where": "origin"}

    def test_no_route_409(self, client):
        # Both endpoints nearest to the same single station: every pair is i == j.
        rng = random.Random(42)
        nodes = grid_nodes(3, 3, jitter=0.0003, rng=rng)
        payload = {
            "origin": {"lat": nodes[0][1][0], "lon": nodes[0][1][1]},
            "destination": {"lat": nodes[0][1][0], "lon": nodes[0][1][1] + 1e-5},
        }
        response = client.post("/route", json=payload)
        assert response.status_code == 409
        assert response.json()["detail"] == {"error": "no-route"}


class TestIngest:
    def test_run_ingest_writes_store(self, fixture_dir, tmp_path):
        config = load_config(fixture_dir)
        lines = run_ingest(config)
        assert any("wrote snapshot store" in line for line in lines)
        assert config.store_path.read_text().splitlines()[0] == STORE_HEADER
        store = load_store(config.store_path, "America/New_York")
        assert store.record_count() == 6

    def test_store_only_serving_matches_status_dir(self, fixture_dir, tmp_path):
        config = load_config(fixture_dir)
        run_ingest(config)
        text = (fixture_dir).read_text()
        text = "\n".join(
            line for line in text.splitlines() if not line.startswith("status_dir")
        )
        store_only = tmp_path / "store-only.conf"
        store_only.write_text(text + "\n")
        app1 = create_app(load_config(fixture_dir))
        app2 = create_app(load_config(store_only))
        with TestClient(app1) as c1, TestClient(app2) as c2:
            assert c1.get("/stations").json() == c2.get("/stations").json()
            assert (
                c1.get("/stations/sA/prediction").json()
                == c2.get("/stations/sA/prediction").json()
            )

    def test_annotated_network_output(self, tmp_path):
        config_path = build_fixture(
            tmp_path, extra="annotated_network_path = annotated.geojson\n"
        )
        run_ingest(load_config(config_path))
        raw = (tmp_path / "annotated.geojson").read_bytes()
        network, report = parse_road_geojson(raw)
        assert report.records_rejected == 0
        counts = {e.id: e.crime_count for e in network.edges}
        assert counts["e0"] == 1


class TestCli:
    def test_ingest_command(self, fixture_dir, capsys):
        assert main(["ingest", "--config", str(fixture_dir)]) == 0
        out = capsys.readouterr().out
        assert "snapshot store" in out
        assert (fixture_dir.parent / "store.txt").exists()

    def test_route_command_matches_http(self, fixture_dir, capsys):
        code = main([
            "route", "--config", str(fixture_dir),
            "--from-lat", str(route_payload()["origin"]["lat"]),
            "--from-lon", str(route_payload()["origin"]["lon"]),
            "--to-lat", str(route_payload()["destination"]["lat"]),
            "--to-lon", str(route_payload()["destination"]["lon"]),
        ])
        assert code == 0
        document = json.loads(capsys.readouterr().out)
        app = create_app(load_config(fixture_dir))
        with TestClient(app) as client:
            via_http = client.post("/route", json=route_payload()).json()
        assert document == via_http

    def test_predict_command(self, fixture_dir, capsys):
        code = main(["predict", "--config", str(fixture_dir), "--station", "sA"])
        assert code == 0
        document = json.loads(capsys.readouterr().out)
        assert document["predicted_bikes"] == [8.0] * 6

    def test_predict_unknown_station(self, fixture_dir, capsys):
        assert main(["predict", "--config", str(fixture_dir), "--station", "zz"]) == 1
        assert "unknown station" in capsys.readouterr().err

    def test_route_bad_weights(self, fixture_dir, capsys):
        code = main([
            "route", "--config", str(fixture_dir),
            "--from-lat", "40.73", "--from-lon", "-73.99",
            "--to-lat", "40.735", "--to-lon", "-73.985",
            "--alpha", "-1", "--beta", "0", "--gamma", "0",
        ])
        assert code == 1
        assert "invalid weights" in capsys.readouterr().err

    def test_route_out_of_range(self, fixture_dir, capsys):
        code = main([
            "route", "--config", str(fixture_dir),
            "--from-lat", "40.9", "--from-lon", "-73.7",
            "--to-lat", "40.735", "--to-lon", "-73.985",
        ])
        assert code == 1
        assert "no-station-in-range" in capsys.readouterr().err

    def test_missing_config(self, tmp_path, capsys):
        assert main(["ingest", "--config", str(tmp_path / "nope.conf")]) == 1
        assert "not found" in capsys.readouterr().err
