"""Domain types: time bucketing, stations, snapshot store, road graph, weights."""

import datetime as dt
from zoneinfo import ZoneInfo

import pytest

from safebike.geo import GeoPoint, Polyline, polyline_length
from safebike.model import (
    BUCKETS_PER_DAY,
    FactorWeights,
    NetworkError,
    RoadEdge,
    RoadNetwork,
    RouteLeg,
    SnapshotStore,
    Station,
    StationRegistry,
    StationStatus,
    bucket_of,
    bucket_start,
    weekday_flag,
)

UTC = dt.timezone.utc
NY = ZoneInfo("America/New_York")


class TestTimeBucketing:
    def test_weekday_flag(self):
        assert weekday_flag(dt.date(2017, 5, 22)) == 0  # Monday
        assert weekday_flag(dt.date(2017, 5, 26)) == 0  # Friday
        assert weekday_flag(dt.date(2017, 5, 20)) == 1  # Saturday
        assert weekday_flag(dt.date(2017, 5, 21)) == 1  # Sunday

    def test_bucket_of_case_study_time(self):
        # 2:27 PM lands in bucket 86 (867 minutes / 10).
        assert bucket_of(dt.time(14, 27)) == 86

    def test_bucket_of_extremes(self):
        assert bucket_of(dt.time(0, 0)) == 0
        assert bucket_of(dt.time(0, 9)) == 0
        assert bucket_of(dt.time(0, 10)) == 1
        assert bucket_of(dt.time(23, 59)) == BUCKETS_PER_DAY - 1

    def test_bucket_start_round_trip(self):
        day = dt.date(2017, 5, 21)
        for bucket in (0, 1, 86, 143):
            start = bucket_start(day, bucket, NY)
            assert bucket_of(start) == bucket
            assert start.date() == day

    def test_bucket_start_range_check(self):
        with pytest.raises(ValueError):
            bucket_start(dt.date(2017, 5, 21), 144, NY)


class TestStationRegistry:
    def test_add_and_get(self):
        reg = StationRegistry()
        s = Station("a", "A St", GeoPoint(40.73, -73.99), 20)
        assert reg.add(s) is False
        assert reg.get("a") == s
        assert "a" in reg and "b" not in reg

    def test_replacement_flag(self):
        reg = StationRegistry()
        reg.add(Station("a", "old", GeoPoint(40.73, -73.99), 20))
        assert reg.add(Station("a", "new", GeoPoint(40.73, -73.99), 25)) is True
        assert reg.get("a").name == "new"
        assert len(reg) == 1

    def test_ids_sorted(self):
        reg = StationRegistry()
        for sid in ("z", "a", "m"):
            reg.add(Station(sid, sid, GeoPoint(0, 0), 1))
        assert reg.ids() == ["a", "m", "z"]

    def test_negative_capacity_rejected(self):
        with pytest.raises(ValueError):
            Station("a", "A", GeoPoint(0, 0), -1)


class TestStationStatus:
    def test_validation(self):
        ts = dt.datetime(2017, 5, 21, 18, 27, tzinfo=UTC)
        StationStatus("a", 0, 0, ts)
        with pytest.raises(ValueError):
            StationStatus("a", -1, 0, ts)
        with pytest.raises(ValueError):
            StationStatus("a", 0, -1, ts)
        with pytest.raises(ValueError):
            StationStatus("a", 1, 1, dt.datetime(2017, 5, 21, 18, 27))


class TestSnapshotStore:
    def test_bucketing_uses_local_time(self):
        store = SnapshotStore("America/New_York")
        # 18:27 UTC on 2017-05-21 is 14:27 EDT -> bucket 86 of the local Sunday.
        ts = dt.datetime(2017, 5, 21, 18, 27, tzinfo=UTC)
        store.add_status(StationStatus("a", 16, 4, ts))
        series = store.get("a")
        assert series.get(dt.date(2017, 5, 21), 86) == (16, 4)

    def test_overwrite_returns_true(self):
        store = SnapshotStore("America/New_York")
        ts = dt.datetime(2017, 5, 21, 18, 22, tzinfo=UTC)
        assert store.add_status(StationStatus("a", 5, 5, ts)) is False
        later = ts + dt.timedelta(minutes=5)  # same 10-minute bucket
        assert store.add_status(StationStatus("a", 6, 4, later)) is True
        assert store.get("a").get(dt.date(2017, 5, 21), 86) == (6, 4)

    def test_latest_status_aligned_to_bucket_start(self):
        store = SnapshotStore("America/New_York")
        store.add_status(StationStatus("a", 5, 5, dt.datetime(2017, 5, 21, 10, 3, tzinfo=UTC)))
        store.add_status(StationStatus("a", 7, 3, dt.datetime(2017, 5, 21, 18, 27, tzinfo=UTC)))
        latest = store.latest_status("a")
        assert (latest.bikes, latest.docks) == (7, 3)
        assert latest.timestamp == dt.datetime(2017, 5, 21, 18, 20, tzinfo=UTC)

    def test_latest_status_missing(self):
        assert SnapshotStore().latest_status("nope") is None

    def test_record_count(self):
        store = SnapshotStore()
        base = dt.datetime(2017, 5, 21, 10, 0, tzinfo=UTC)
        for i in range(5):
            store.add_status(StationStatus("a", i, i, base + dt.timedelta(minutes=10 * i)))
        assert store.record_count() == 5


def _edge(eid, u, v, nodes, crime=0):
    geometry = Polyline((nodes[u], nodes[v]))
    return RoadEdge(eid, u, v, geometry, polyline_length(geometry), crime)


class TestRoadNetwork:
    def setup_method(self):
        self.nodes = {
            "n0": GeoPoint(40.730, -73.990),
            "n1": GeoPoint(40.732, -73.990),
            "n2": GeoPoint(40.732, -73.988),
        }

    def test_adjacency_sorted_and_undirected(self):
        net = RoadNetwork(self.nodes, [
            _edge("e1", "n0", "n1", self.nodes),
            _edge("e0", "n1", "n2", self.nodes),
        ])
        assert [v for v, _ in net.neighbors("n1")] == ["n0", "n2"]
        assert [v for v, _ in net.neighbors("n2")] == ["n1"]

    def test_missing_node_names_edge(self):
        with pytest.raises(NetworkError, match="e9"):
            RoadNetwork(self.nodes, [RoadEdge(
                "e9", "n0", "zz",
                Polyline((self.nodes["n0"], self.nodes["n1"])),
                polyline_length(Polyline((self.nodes["n0"], self.nodes["n1"]))),
            )])

    def test_geometry_must_touch_nodes(self):
        geometry = Polyline((GeoPoint(40.70, -73.99), self.nodes["n1"]))
        with pytest.raises(NetworkError, match="e9"):
            RoadNetwork(self.nodes, [
                RoadEdge("e9", "n0", "n1", geometry, polyline_length(geometry))
            ])

    def test_length_must_match_geometry(self):
        geometry = Polyline((self.nodes["n0"], self.nodes["n1"]))
        with pytest.raises(NetworkError, match="length"):
            RoadNetwork(self.nodes, [RoadEdge("e9", "n0", "n1", geometry, 1.0)])

    def test_negative_crime_rejected(self):
        with pytest.raises(NetworkError, match="crime"):
            RoadNetwork(self.nodes, [_edge("e9", "n0", "n1", self.nodes, crime=-1)])

    def test_self_loop_excluded_from_adjacency(self):
        loop_geom = Polyline((self.nodes["n0"], GeoPoint(40.7301, -73.9901), self.nodes["n0"]))
        loop = RoadEdge("loop", "n0", "n0", loop_geom, polyline_length(loop_geom))
        net = RoadNetwork(self.nodes, [loop, _edge("e0", "n0", "n1", self.nodes)])
        assert [v for v, _ in net.neighbors("n0")] == ["n1"]
        assert net.edge_count() == 2

    def test_with_crime_counts(self):
        net = RoadNetwork(self.nodes, [_edge("e0", "n0", "n1", self.nodes)])
        annotated = net.with_crime_counts({"e0": 7})
        assert annotated.edges[0].crime_count == 7
        assert net.edges[0].crime_count == 0  # original untouched

    def test_oriented_points(self):
        edge = _edge("e0", "n0", "n1", self.nodes)
        assert edge.oriented_points("n0")[0] == self.nodes["n0"]
        assert edge.oriented_points("n1")[0] == self.nodes["n1"]


class TestFactorWeights:
    def test_valid_default_distribution(self):
        w = FactorWeights(0.3, 0.3, 0.4)
        assert (w.alpha, w.beta, w.gamma) == (0.3, 0.3, 0.4)

    def test_corner_cases(self):
        FactorWeights(1.0, 0.0, 0.0)
        FactorWeights(0.0, 1.0, 0.0)
        FactorWeights(0.0, 0.0, 1.0)

    def test_sum_must_be_one(self):
        with pytest.raises(ValueError):
            FactorWeights(0.5, 0.5, 0.5)

    def test_range_check(self):
        with pytest.raises(ValueError):
            FactorWeights(-0.1, 0.6, 0.5)

    def test_normalized_scales(self):
        w = FactorWeights.normalized(3, 3, 4)
        assert w.alpha == pytest.approx(0.3)
        assert w.gamma == pytest.approx(0.4)

    def test_normalized_rejects_all_zero(self):
        with pytest.raises(ValueError):
            FactorWeights.normalized(0, 0, 0)

    def test_normalized_rejects_negative(self):
        with pytest.raises(ValueError):
            FactorWeights.normalized(-1, 1, 1)


class TestRouteLeg:
    def test_mode_validated(self):
        geometry = Polyline((GeoPoint(0, 0), GeoPoint(0, 0.001)))
        with pytest.raises(ValueError):
            RouteLeg("fly", ("a", "b"), geometry, 1.0, 0, 1.0)
