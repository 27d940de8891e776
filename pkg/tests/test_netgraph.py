import json
import math
import random

import pytest

from savsim.errors import InvalidInputError, NotFoundError
from savsim.netgraph import (
    RoadGraph,
    Stop,
    StopPath,
    build_stop_distance_table,
    edge_weight,
    graph_to_dict,
    load_network,
    path_distance,
    save_network,
    shortest_path,
    stop_distance,
    validate_graph,
)
from savsim.oracle import check_table, split_stop_distances

from randnets import random_connected_graph, scatter_stops


def two_cycle(length: float = 100.0) -> RoadGraph:
    g = RoadGraph()
    g.add_vertex(1, 0.0, 0.0)
    g.add_vertex(2, length, 0.0)
    g.add_edge(10, 1, 2, 13.4, 20)
    g.add_edge(11, 2, 1, 13.4, 20)
    return g


def triangle() -> RoadGraph:
    # A(0,0) -> B(100,0) -> C(100,100) -> A, one-way ring
    g = RoadGraph()
    g.add_vertex(1, 0.0, 0.0)
    g.add_vertex(2, 100.0, 0.0)
    g.add_vertex(3, 100.0, 100.0)
    g.add_edge(10, 1, 2, 15.0, 20)
    g.add_edge(11, 2, 3, 15.0, 20)
    g.add_edge(12, 3, 1, 15.0, 20)
    return g


class TestEdgeWeight:
    def test_three_four_five(self):
        g = RoadGraph()
        a = g.add_vertex(1, 0.0, 0.0)
        b = g.add_vertex(2, 3.0, 4.0)
        assert edge_weight(a, b) == 5.0

    def test_identical_points(self):
        g = RoadGraph()
        a = g.add_vertex(1, 7.0, -2.0)
        b = g.add_vertex(2, 7.0, -2.0)
        assert edge_weight(a, b) == 0.0

    def test_diagonal(self):
        g = RoadGraph()
        a = g.add_vertex(1, 100.0, 0.0)
        b = g.add_vertex(2, 0.0, 100.0)
        # Independent evaluation: (100^2 + 100^2) ** 0.5
        assert edge_weight(a, b) == pytest.approx((100.0 ** 2 + 100.0 ** 2) ** 0.5, abs=1e-12)

    def test_symmetric(self):
        g = RoadGraph()
        a = g.add_vertex(1, 3.0, 9.0)
        b = g.add_vertex(2, -5.0, 2.0)
        assert edge_weight(a, b) == edge_weight(b, a)

    def test_non_finite_rejected(self):
        g = RoadGraph()
        a = g.add_vertex(1, 0.0, 0.0)
        bad = type(a)(2, float("nan"), 0.0)
        with pytest.raises(InvalidInputError):
            edge_weight(a, bad)


class TestValidateGraph:
    def test_minimal_strongly_connected(self):
        assert validate_graph(two_cycle()).ok

    def test_missing_return_path(self):
        g = RoadGraph()
        g.add_vertex(1, 0.0, 0.0)
        g.add_vertex(2, 100.0, 0.0)
        g.add_edge(10, 1, 2, 13.4, 20)
        report = validate_graph(g)
        kinds = [i.kind for i in report.issues]
        assert kinds == ["not_strongly_connected"]
        # vertex 2 cannot reach vertex 1
        assert "from vertex 2 to vertex 1" in report.issues[0].message

    def test_length_mismatch(self):
        g = RoadGraph()
        g.add_vertex(1, 0.0, 0.0)
        g.add_vertex(2, 100.0, 0.0)
        g.add_edge(10, 1, 2, 13.4, 20, length=99.0)
        g.add_edge(11, 2, 1, 13.4, 20)
        report = validate_graph(g)
        assert [i.kind for i in report.issues] == ["length_mismatch"]
        assert "edge 10" in report.issues[0].message

    def test_dangling_self_loop_duplicate(self):
        g = RoadGraph()
        g.add_vertex(1, 0.0, 0.0)
        g.add_vertex(2, 100.0, 0.0)
        g.add_edge(10, 1, 2, 13.4, 20)
        g.add_edge(11, 2, 1, 13.4, 20)
        g.add_edge(12, 1, 9, 13.4, 20, length=5.0)   # dangling sink
        g.add_edge(13, 1, 1, 13.4, 20, length=0.0)   # self-loop
        g.add_edge(14, 1, 2, 13.4, 20)               # duplicate pair
        kinds = {i.kind for i in validate_graph(g).issues}
        assert {"dangling_endpoint", "self_loop", "duplicate_edge"} <= kinds


class TestPlaceStop:
    def test_basic(self):
        g = two_cycle()
        s = g.place_stop(10, 20.0, "other")
        assert s.edge == 10 and s.slack == 20.0
        assert g.stop(s.id) == s

    def test_slack_zero_boundary(self):
        g = two_cycle()
        s = g.place_stop(10, 0.0, "other")
        assert s.slack == 0.0

    def test_slack_exceeds_length(self):
        g = two_cycle()
        with pytest.raises(InvalidInputError):
            g.place_stop(10, 150.0, "other")

    def test_unknown_edge(self):
        g = two_cycle()
        with pytest.raises(NotFoundError):
            g.place_stop(99, 10.0, "other")

    def test_unknown_zone(self):
        g = two_cycle()
        with pytest.raises(InvalidInputError):
            g.place_stop(10, 10.0, "downtown")


class TestShortestPath:
    def test_identity(self):
        g = triangle()
        assert shortest_path(g, 1, 1) == ((), 0.0)

    def test_triangle(self):
        # Exhaustive: the only simple route 1->3 is via vertex 2.
        g = triangle()
        edges, dist = shortest_path(g, 1, 3)
        assert edges == (10, 11)
        assert dist == pytest.approx(200.0, abs=1e-9)

    def test_square_tie_break(self):
        # Two equal-length routes 0->3; the smaller vertex sequence wins.
        g = RoadGraph()
        g.add_vertex(0, 0.0, 0.0)
        g.add_vertex(1, 100.0, 0.0)
        g.add_vertex(2, 0.0, 100.0)
        g.add_vertex(3, 100.0, 100.0)
        eid = 0
        for a, b in ((0, 1), (0, 2), (1, 3), (2, 3)):
            g.add_edge(eid, a, b, 15.0, 20)
            g.add_edge(eid + 1, b, a, 15.0, 20)
            eid += 2
        edges, dist = shortest_path(g, 0, 3)
        assert dist == pytest.approx(200.0)
        # candidates (0,1,3) and (0,2,3); (0,1,3) is lexicographically smaller
        assert edges == (g.edge_between(0, 1).id, g.edge_between(1, 3).id)

    def test_unknown_vertex(self):
        with pytest.raises(NotFoundError):
            shortest_path(triangle(), 1, 99)

    def test_random_tie_break_mode(self):
        g = triangle()
        a = shortest_path(g, 1, 3, rng=random.Random(7))
        b = shortest_path(g, 1, 3, rng=random.Random(7))
        assert a == b
        assert a[1] == pytest.approx(200.0)


class TestStopDistance:
    def test_same_edge_forward(self):
        g = two_cycle()
        s1 = g.place_stop(10, 20.0, "other")
        s2 = g.place_stop(10, 70.0, "other")
        path = stop_distance(g, s1, s2)
        assert path.distance == pytest.approx(50.0, abs=1e-9)
        assert path.edges == (10,)

    def test_same_edge_loop(self):
        g = two_cycle()
        s1 = g.place_stop(10, 70.0, "other")
        s2 = g.place_stop(10, 20.0, "other")
        path = stop_distance(g, s1, s2)
        # finish edge (30), return edge (100), re-enter (20)
        assert path.distance == pytest.approx(150.0, abs=1e-9)
        assert path.edges == (10, 11, 10)

    def test_triangle_forward(self):
        g = triangle()
        b1 = g.place_stop(10, 20.0, "other")
        b2 = g.place_stop(11, 30.0, "other")
        path = stop_distance(g, b1, b2)
        assert path.distance == pytest.approx(110.0, abs=1e-9)
        assert path.edges == (10, 11)

    def test_triangle_reverse(self):
        g = triangle()
        b1 = g.place_stop(10, 20.0, "other")
        b2 = g.place_stop(11, 30.0, "other")
        path = stop_distance(g, b2, b1)
        assert path.distance == pytest.approx(70.0 + 100.0 * math.sqrt(2.0) + 20.0, abs=1e-9)
        assert path.edges == (11, 12, 10)

    def test_self_distance_zero(self):
        g = triangle()
        b1 = g.place_stop(10, 20.0, "other")
        assert stop_distance(g, b1, b1) == StopPath(b1.id, b1.id, (), 0.0)

    def test_unregistered_stop(self):
        g = triangle()
        b1 = g.place_stop(10, 20.0, "other")
        ghost = Stop(99, 10, 5.0, "other")
        with pytest.raises(NotFoundError):
            stop_distance(g, b1, ghost)


class TestStopDistanceTable:
    def test_two_stops(self):
        g = two_cycle()
        g.place_stop(10, 20.0, "other")
        g.place_stop(10, 70.0, "other")
        table = build_stop_distance_table(g)
        assert len(table) == 2

    def test_five_stops(self):
        rng = random.Random(3)
        g = random_connected_graph(rng, max_vertices=12, max_edges=30)
        scatter_stops(rng, g, 5)
        table = build_stop_distance_table(g)
        assert len(table) == 20

    def test_diagonal_absent_but_answered(self):
        g = two_cycle()
        s1 = g.place_stop(10, 20.0, "other")
        g.place_stop(10, 70.0, "other")
        table = build_stop_distance_table(g)
        assert (s1.id, s1.id) not in table.entries
        assert table.distance(s1.id, s1.id) == 0.0
        assert table.path(s1.id, s1.id).edges == ()

    def test_too_few_stops(self):
        g = two_cycle()
        g.place_stop(10, 20.0, "other")
        with pytest.raises(InvalidInputError):
            build_stop_distance_table(g)

    def test_position_queries(self):
        g = triangle()
        b2 = g.place_stop(11, 30.0, "other")
        g.place_stop(10, 20.0, "other")
        table = build_stop_distance_table(g)
        # From mid-edge position on edge 10 at offset 40: (100-40) + 0 + 30
        assert table.distance_from_position(10, 40.0, b2.id) == pytest.approx(90.0)
        edges, dist = table.position_path(10, 40.0, b2.id)
        assert edges == (10, 11)
        assert dist == pytest.approx(90.0)


class TestTableProperties:
    def test_oracle_equivalence_sample(self):
        for seed in range(20):
            rng = random.Random(1000 + seed)
            g = random_connected_graph(rng)
            scatter_stops(rng, g, rng.randint(2, 10))
            table = build_stop_distance_table(g)
            assert check_table(g, table, tol=1e-9) == []

    def test_triangle_inequality(self):
        for seed in range(8):
            rng = random.Random(2000 + seed)
            g = random_connected_graph(rng, max_vertices=15, max_edges=40)
            scatter_stops(rng, g, 6)
            table = build_stop_distance_table(g)
            ids = table.stop_ids()
            for i in ids:
                for j in ids:
                    for k in ids:
                        assert table.distance(i, k) <= table.distance(i, j) + table.distance(j, k) + 1e-9

    def test_path_distance_consistency(self):
        rng = random.Random(77)
        g = random_connected_graph(rng)
        scatter_stops(rng, g, 8)
        table = build_stop_distance_table(g)
        for (a, b), path in table.entries.items():
            origin, dest = g.stop(a), g.stop(b)
            again = path_distance(g, path.edges, origin.slack, dest.slack)
            assert again == pytest.approx(path.distance, abs=1e-9)

    def test_consecutive_edges_share_vertex(self):
        rng = random.Random(78)
        g = random_connected_graph(rng)
        scatter_stops(rng, g, 6)
        table = build_stop_distance_table(g)
        for path in table.entries.values():
            for a, b in zip(path.edges, path.edges[1:]):
                assert g.edge(a).sink == g.edge(b).source

    def test_byte_identical_rebuild(self):
        rng1 = random.Random(555)
        g1 = random_connected_graph(rng1)
        scatter_stops(rng1, g1, 7)
        rng2 = random.Random(555)
        g2 = random_connected_graph(rng2)
        scatter_stops(rng2, g2, 7)
        t1 = build_stop_distance_table(g1)
        t2 = build_stop_distance_table(g2)
        assert repr(sorted(t1.entries.items())) == repr(sorted(t2.entries.items()))


class TestOracleInternals:
    def test_merged_stops_at_identical_position(self):
        g = two_cycle()
        a = g.place_stop(10, 40.0, "other")
        b = g.place_stop(10, 40.0, "other")
        dists = split_stop_distances(g)
        assert dists[(a.id, b.id)] == 0.0
        assert dists[(b.id, a.id)] == 0.0


class TestNetworkFiles:
    def test_round_trip(self, tmp_path):
        rng = random.Random(9)
        g = random_connected_graph(rng, max_vertices=10, max_edges=25)
        scatter_stops(rng, g, 4)
        path = tmp_path / "net.json"
        save_network(g, str(path))
        g2 = load_network(str(path))
        assert graph_to_dict(g) == graph_to_dict(g2)

    def test_save_deterministic(self, tmp_path):
        rng = random.Random(9)
        g = random_connected_graph(rng, max_vertices=10, max_edges=25)
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_network(g, str(p1))
        save_network(g, str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_loader_rejects_invalid(self, tmp_path):
        doc = {
            "vertices": [{"id": 1, "x": 0.0, "y": 0.0}, {"id": 2, "x": 100.0, "y": 0.0}],
            "edges": [{"id": 10, "source": 1, "sink": 2, "free_flow_speed": 13.4, "capacity_vehicles": 20}],
            "stops": [],
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(InvalidInputError):
            load_network(str(path))
        g = load_network(str(path), validate=False)
        assert not validate_graph(g).ok

    def test_length_computed_when_omitted(self, tmp_path):
        doc = {
            "vertices": [{"id": 1, "x": 0.0, "y": 0.0}, {"id": 2, "x": 3.0, "y": 4.0}],
            "edges": [
                {"id": 10, "source": 1, "sink": 2, "free_flow_speed": 13.4, "capacity_vehicles": 20},
                {"id": 11, "source": 2, "sink": 1, "free_flow_speed": 13.4, "capacity_vehicles": 20},
            ],
            "stops": [{"id": 0, "edge": 10, "slack": 2.5, "zone": "other"}],
        }
        path = tmp_path / "net.json"
        path.write_text(json.dumps(doc))
        g = load_network(str(path))
        assert g.edge(10).length == 5.0
        assert g.stop(0).zone == "other"
