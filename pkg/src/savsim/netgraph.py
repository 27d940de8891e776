"""Road network model: a weighted directed graph with mid-edge stops.

Vertices are points in the plane, edges are one-way road segments weighted by
Euclidean length, and stops are pickup/dropoff locations pinned to an edge at a
slack distance from the edge's source vertex.  Stop-to-stop distances follow the
traversal rule: the vehicle finishes the origin stop's host edge, follows the
shortest path to the destination edge's source vertex, then drives the slack
into the destination edge.  Two stops on the same edge are a special case: the
downstream stop is reached directly, the upstream one requires looping around.

All distances are meters, speeds meters/second.  Everything here is immutable
after construction and safe to share across threads or processes.
"""

from __future__ import annotations

import json
import math
import os
import random
import tempfile
from collections import defaultdict
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Iterator

from .errors import InvalidInputError, NotFoundError

ZONES = ("peripheral_housing", "central_opportunity", "other")


@dataclass(frozen=True)
class Vertex:
    """A 2D point; intersections are vertices."""

    id: int
    x: float
    y: float


@dataclass(frozen=True)
class DirectedEdge:
    """A one-way road segment from ``source`` to ``sink``.

    ``length`` is stored rather than recomputed per query so non-Euclidean
    lengths could be supported later; validation checks it against the
    coordinates of its endpoints.
    """

    id: int
    source: int
    sink: int
    length: float
    free_flow_speed: float
    capacity_vehicles: int


@dataclass(frozen=True)
class Stop:
    """A pickup/dropoff location ``slack`` meters along its host edge."""

    id: int
    edge: int
    slack: float
    zone: str


@dataclass(frozen=True)
class StopPath:
    """Edge sequence a vehicle traverses between two stops.

    The first element is the origin stop's host edge and the last is the
    destination stop's host edge (they coincide only for a direct same-edge
    hop, which is a single-element path).  ``distance`` counts the partial
    first and last edges.
    """

    origin_stop: int
    dest_stop: int
    edges: tuple[int, ...]
    distance: float


def edge_weight(source: Vertex, sink: Vertex) -> float:
    """Euclidean distance between two vertices.

    Raises InvalidInputError if either vertex has a non-finite coordinate.
    """
    for v in (source, sink):
        if not (math.isfinite(v.x) and math.isfinite(v.y)):
            raise InvalidInputError(f"vertex {v.id} has non-finite coordinates")
    return math.hypot(sink.x - source.x, sink.y - source.y)


class RoadGraph:
    """Directed road graph with a stop registry.

    ``add_*`` methods only enforce identifier uniqueness; semantic problems
    (dangling endpoints, self-loops, duplicate source/sink pairs, bad lengths,
    connectivity) are reported by :func:`validate_graph` so that loaders can
    surface every problem in a file at once.
    """

    def __init__(self) -> None:
        self._vertices: dict[int, Vertex] = {}
        self._edges: dict[int, DirectedEdge] = {}
        self._stops: dict[int, Stop] = {}
        self._out: dict[int, list[int]] = defaultdict(list)
        self._by_endpoints: dict[tuple[int, int], int] = {}

    # construction -----------------------------------------------------

    def add_vertex(self, vertex_id: int, x: float, y: float) -> Vertex:
        if vertex_id in self._vertices:
            raise InvalidInputError(f"duplicate vertex id {vertex_id}")
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InvalidInputError(f"vertex {vertex_id} has non-finite coordinates")
        v = Vertex(vertex_id, float(x), float(y))
        self._vertices[vertex_id] = v
        return v

    def add_edge(
        self,
        edge_id: int,
        source: int,
        sink: int,
        free_flow_speed: float,
        capacity_vehicles: int,
        length: float | None = None,
    ) -> DirectedEdge:
        """Add an edge; ``length`` defaults to the Euclidean endpoint distance."""
        if edge_id in self._edges:
            raise InvalidInputError(f"duplicate edge id {edge_id}")
        if free_flow_speed <= 0:
            raise InvalidInputError(f"edge {edge_id}: free_flow_speed must be > 0")
        if capacity_vehicles < 1:
            raise InvalidInputError(f"edge {edge_id}: capacity_vehicles must be >= 1")
        if length is None:
            if source not in self._vertices or sink not in self._vertices:
                raise InvalidInputError(
                    f"edge {edge_id}: cannot derive length, endpoint missing"
                )
            length = edge_weight(self._vertices[source], self._vertices[sink])
        e = DirectedEdge(edge_id, source, sink, float(length), float(free_flow_speed), int(capacity_vehicles))
        self._edges[edge_id] = e
        self._out[source].append(edge_id)
        self._out[source].sort(key=lambda eid: (self._edges[eid].sink, eid))
        self._by_endpoints.setdefault((source, sink), edge_id)
        return e

    def place_stop(self, edge_id: int, slack: float, zone: str, stop_id: int | None = None) -> Stop:
        """Register a stop ``slack`` meters from the host edge's source vertex."""
        edge = self._edges.get(edge_id)
        if edge is None:
            raise NotFoundError(f"edge {edge_id} not in graph")
        if not 0.0 <= slack <= edge.length:
            raise InvalidInputError(
                f"slack {slack} outside [0, {edge.length}] on edge {edge_id}"
            )
        if zone not in ZONES:
            raise InvalidInputError(f"unknown zone {zone!r}")
        if stop_id is None:
            stop_id = max(self._stops, default=-1) + 1
        elif stop_id in self._stops:
            raise InvalidInputError(f"duplicate stop id {stop_id}")
        stop = Stop(int(stop_id), edge_id, float(slack), zone)
        self._stops[stop.id] = stop
        return stop

    # accessors ----------------------------------------------------------

    def vertex(self, vertex_id: int) -> Vertex:
        try:
            return self._vertices[vertex_id]
        except KeyError:
            raise NotFoundError(f"vertex {vertex_id} not in graph") from None

    def edge(self, edge_id: int) -> DirectedEdge:
        try:
            return self._edges[edge_id]
        except KeyError:
            raise NotFoundError(f"edge {edge_id} not in graph") from None

    def stop(self, stop_id: int) -> Stop:
        try:
            return self._stops[stop_id]
        except KeyError:
            raise NotFoundError(f"stop {stop_id} not in graph") from None

    def has_vertex(self, vertex_id: int) -> bool:
        return vertex_id in self._vertices

    def has_stop(self, stop_id: int) -> bool:
        return stop_id in self._stops

    def vertices(self) -> Iterator[Vertex]:
        for vid in sorted(self._vertices):
            yield self._vertices[vid]

    def edges(self) -> Iterator[DirectedEdge]:
        for eid in sorted(self._edges):
            yield self._edges[eid]

    def stops(self) -> Iterator[Stop]:
        for sid in sorted(self._stops):
            yield self._stops[sid]

    def out_edges(self, vertex_id: int) -> list[DirectedEdge]:
        return [self._edges[eid] for eid in self._out.get(vertex_id, ())]

    def edge_between(self, source: int, sink: int) -> DirectedEdge:
        eid = self._by_endpoints.get((source, sink))
        if eid is None:
            raise NotFoundError(f"no edge {source}->{sink}")
        return self._edges[eid]

    def stop_point(self, stop_id: int) -> tuple[float, float]:
        """Planar coordinates of a stop, interpolated along its host edge."""
        stop = self.stop(stop_id)
        edge = self.edge(stop.edge)
        a = self.vertex(edge.source)
        b = self.vertex(edge.sink)
        f = stop.slack / edge.length if edge.length > 0 else 0.0
        return (a.x + f * (b.x - a.x), a.y + f * (b.y - a.y))

    def __len__(self) -> int:
        return len(self._vertices)


# validation -------------------------------------------------------------

@dataclass(frozen=True)
class ValidationIssue:
    kind: str
    message: str


@dataclass
class ValidationReport:
    issues: list[ValidationIssue]

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"{i.kind}: {i.message}" for i in self.issues)


def _reachable(graph: RoadGraph, start: int, forward: bool) -> set[int]:
    incoming: dict[int, list[int]] = defaultdict(list)
    if not forward:
        for e in graph.edges():
            if graph.has_vertex(e.source) and graph.has_vertex(e.sink):
                incoming[e.sink].append(e.source)
    seen = {start}
    frontier = [start]
    while frontier:
        v = frontier.pop()
        if forward:
            nxt = (e.sink for e in graph.out_edges(v) if graph.has_vertex(e.sink))
        else:
            nxt = iter(incoming.get(v, ()))
        for u in nxt:
            if u not in seen:
                seen.add(u)
                frontier.append(u)
    return seen


def validate_graph(graph: RoadGraph) -> ValidationReport:
    """Collect every structural violation in the graph.

    Checks dangling edge endpoints, self-loops, duplicate (source, sink)
    pairs, stored lengths that disagree with endpoint geometry, and strong
    connectivity (reported once, with a witness unreachable pair).
    """
    issues: list[ValidationIssue] = []
    seen_pairs: dict[tuple[int, int], int] = {}
    for e in graph.edges():
        dangling = False
        for end, role in ((e.source, "source"), (e.sink, "sink")):
            if not graph.has_vertex(end):
                issues.append(ValidationIssue(
                    "dangling_endpoint",
                    f"edge {e.id} references missing {role} vertex {end}",
                ))
                dangling = True
        if e.source == e.sink:
            issues.append(ValidationIssue(
                "self_loop", f"edge {e.id} is a self-loop at vertex {e.source}"
            ))
        pair = (e.source, e.sink)
        if pair in seen_pairs:
            issues.append(ValidationIssue(
                "duplicate_edge",
                f"edge {e.id} duplicates edge {seen_pairs[pair]} ({e.source}->{e.sink})",
            ))
        else:
            seen_pairs[pair] = e.id
        if not dangling:
            want = edge_weight(graph.vertex(e.source), graph.vertex(e.sink))
            if not math.isclose(e.length, want, rel_tol=1e-9, abs_tol=1e-9):
                issues.append(ValidationIssue(
                    "length_mismatch",
                    f"edge {e.id} stored length {e.length} != endpoint distance {want}",
                ))

    vertex_ids = sorted(v.id for v in graph.vertices())
    if len(vertex_ids) > 1:
        root = vertex_ids[0]
        fwd = _reachable(graph, root, forward=True)
        witness = None
        for vid in vertex_ids:
            if vid not in fwd:
                witness = (root, vid)
                break
        if witness is None:
            bwd = _reachable(graph, root, forward=False)
            for vid in vertex_ids:
                if vid not in bwd:
                    witness = (vid, root)
                    break
        if witness is not None:
            issues.append(ValidationIssue(
                "not_strongly_connected",
                f"no path from vertex {witness[0]} to vertex {witness[1]}",
            ))
    return ValidationReport(issues)


# shortest paths ----------------------------------------------------------

def _shortest_tree(graph: RoadGraph, source: int) -> dict[int, tuple[float, tuple[int, ...]]]:
    """Single-source shortest paths, lexicographic vertex-sequence tie-break.

    Heap entries carry the full vertex sequence so that equal-distance paths
    settle in lexicographic order; with strictly positive edge weights two
    equal-distance sequences to the same vertex are never prefixes of each
    other, which keeps the ordering stable under extension.
    """
    best: dict[int, tuple[float, tuple[int, ...]]] = {}
    heap: list[tuple[float, tuple[int, ...]]] = [(0.0, (source,))]
    while heap:
        dist, seq = heappop(heap)
        v = seq[-1]
        if v in best:
            continue
        best[v] = (dist, seq)
        for e in graph.out_edges(v):
            if e.sink not in best:
                heappush(heap, (dist + e.length, seq + (e.sink,)))
    return best


def _shortest_tree_random(
    graph: RoadGraph, source: int, rng: random.Random
) -> dict[int, tuple[float, tuple[int, ...]]]:
    """Like :func:`_shortest_tree` but equal-distance choices flip a seeded coin."""
    dist: dict[int, float] = {source: 0.0}
    pred: dict[int, int] = {}
    heap: list[tuple[float, int, int]] = [(0.0, 0, source)]
    order = 0
    done: set[int] = set()
    while heap:
        d, _, v = heappop(heap)
        if v in done:
            continue
        done.add(v)
        for e in graph.out_edges(v):
            nd = d + e.length
            old = dist.get(e.sink)
            if old is None or nd < old:
                dist[e.sink] = nd
                pred[e.sink] = v
                order += 1
                heappush(heap, (nd, order, e.sink))
            elif nd == old and rng.random() < 0.5:
                pred[e.sink] = v
    out: dict[int, tuple[float, tuple[int, ...]]] = {}
    for v, d in dist.items():
        seq = [v]
        while seq[-1] != source:
            seq.append(pred[seq[-1]])
        out[v] = (d, tuple(reversed(seq)))
    return out


def _edges_along(graph: RoadGraph, seq: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(graph.edge_between(a, b).id for a, b in zip(seq, seq[1:]))


def shortest_path(
    graph: RoadGraph,
    from_vertex: int,
    to_vertex: int,
    rng: random.Random | None = None,
) -> tuple[tuple[int, ...], float]:
    """Minimum-weight edge sequence between two vertices.

    Ties between equal-length paths go to the lexicographically smallest
    vertex-id sequence; pass ``rng`` to instead pick among ties at random.
    Returns ``((), 0.0)`` when the endpoints coincide.
    """
    for vid in (from_vertex, to_vertex):
        if not graph.has_vertex(vid):
            raise NotFoundError(f"vertex {vid} not in graph")
    if from_vertex == to_vertex:
        return ((), 0.0)
    tree = (
        _shortest_tree_random(graph, from_vertex, rng)
        if rng is not None
        else _shortest_tree(graph, from_vertex)
    )
    if to_vertex not in tree:
        raise NotFoundError(f"vertex {to_vertex} unreachable from {from_vertex}")
    dist, seq = tree[to_vertex]
    return (_edges_along(graph, seq), dist)


# stop distances -----------------------------------------------------------

def path_distance(graph: RoadGraph, edges: tuple[int, ...], origin_slack: float, dest_slack: float) -> float:
    """Recompute a stop-to-stop distance from its edge list and the two slacks."""
    if not edges:
        return 0.0
    if len(edges) == 1:
        return dest_slack - origin_slack
    first = graph.edge(edges[0])
    middle = sum(graph.edge(eid).length for eid in edges[1:-1])
    return (first.length - origin_slack) + middle + dest_slack


def _stop_path(
    graph: RoadGraph,
    origin: Stop,
    dest: Stop,
    tree: dict[int, tuple[float, tuple[int, ...]]],
) -> StopPath:
    e_o = graph.edge(origin.edge)
    e_d = graph.edge(dest.edge)
    if origin.edge == dest.edge and dest.slack >= origin.slack:
        return StopPath(origin.id, dest.id, (origin.edge,), dest.slack - origin.slack)
    if e_d.source not in tree:
        raise NotFoundError(
            f"vertex {e_d.source} unreachable from {e_o.sink}; graph not strongly connected"
        )
    mid_dist, seq = tree[e_d.source]
    mid_edges = _edges_along(graph, seq)
    distance = (e_o.length - origin.slack) + mid_dist + dest.slack
    return StopPath(origin.id, dest.id, (origin.edge,) + mid_edges + (dest.edge,), distance)


def stop_distance(graph: RoadGraph, from_stop: Stop, to_stop: Stop) -> StopPath:
    """Traversal distance from one registered stop to another.

    The vehicle finishes the origin host edge, takes the shortest path to the
    destination edge's source vertex, then drives the destination slack.  A
    downstream stop on the same edge is reached directly; an upstream one
    falls under the general rule (finish the edge, loop back, re-enter).
    """
    for s in (from_stop, to_stop):
        if not graph.has_stop(s.id) or graph.stop(s.id) != s:
            raise NotFoundError(f"stop {s.id} not registered with graph")
    if from_stop.id == to_stop.id:
        return StopPath(from_stop.id, to_stop.id, (), 0.0)
    tree = _shortest_tree(graph, graph.edge(from_stop.edge).sink)
    return _stop_path(graph, from_stop, to_stop, tree)


class StopDistanceTable:
    """Precomputed traversal distances between every ordered pair of stops.

    Holds exactly m(m-1) entries for m stops; the diagonal is answered as a
    zero-distance empty path without being stored.  The shortest-path trees
    built during precomputation are kept (and extended on demand) so that
    distances from an arbitrary mid-edge position, such as a vehicle between
    stops, reuse the same machinery.
    """

    def __init__(self, graph: RoadGraph, stops: list[Stop]) -> None:
        self._graph = graph
        self._stops = {s.id: s for s in stops}
        self._trees: dict[int, dict[int, tuple[float, tuple[int, ...]]]] = {}
        self.entries: dict[tuple[int, int], StopPath] = {}
        for origin in sorted(stops, key=lambda s: s.id):
            tree = self._tree(graph.edge(origin.edge).sink)
            for dest in sorted(stops, key=lambda s: s.id):
                if dest.id == origin.id:
                    continue
                self.entries[(origin.id, dest.id)] = _stop_path(graph, origin, dest, tree)

    def _tree(self, source_vertex: int) -> dict[int, tuple[float, tuple[int, ...]]]:
        tree = self._trees.get(source_vertex)
        if tree is None:
            tree = _shortest_tree(self._graph, source_vertex)
            self._trees[source_vertex] = tree
        return tree

    def _check(self, stop_id: int) -> Stop:
        stop = self._stops.get(stop_id)
        if stop is None:
            raise NotFoundError(f"stop {stop_id} not in distance table")
        return stop

    def path(self, from_stop: int, to_stop: int) -> StopPath:
        self._check(from_stop)
        self._check(to_stop)
        if from_stop == to_stop:
            return StopPath(from_stop, to_stop, (), 0.0)
        return self.entries[(from_stop, to_stop)]

    def distance(self, from_stop: int, to_stop: int) -> float:
        return self.path(from_stop, to_stop).distance

    def distance_from_position(self, edge_id: int, offset: float, to_stop: int) -> float:
        """Distance from a mid-edge position to a stop, same traversal rule."""
        dest = self._check(to_stop)
        edge = self._graph.edge(edge_id)
        if not 0.0 <= offset <= edge.length:
            raise InvalidInputError(f"offset {offset} outside edge {edge_id}")
        if edge_id == dest.edge and dest.slack >= offset:
            return dest.slack - offset
        tree = self._tree(edge.sink)
        dest_edge = self._graph.edge(dest.edge)
        if dest_edge.source not in tree:
            raise NotFoundError(f"vertex {dest_edge.source} unreachable from {edge.sink}")
        return (edge.length - offset) + tree[dest_edge.source][0] + dest.slack

    def position_path(self, edge_id: int, offset: float, to_stop: int) -> tuple[tuple[int, ...], float]:
        """Edge list and distance from a mid-edge position to a stop."""
        dest = self._check(to_stop)
        edge = self._graph.edge(edge_id)
        if edge_id == dest.edge and dest.slack >= offset:
            return ((edge_id,), dest.slack - offset)
        tree = self._tree(edge.sink)
        dest_edge = self._graph.edge(dest.edge)
        mid_dist, seq = tree[dest_edge.source]
        mid = _edges_along(self._graph, seq)
        return ((edge_id,) + mid + (dest.edge,), (edge.length - offset) + mid_dist + dest.slack)

    def stop_ids(self) -> list[int]:
        return sorted(self._stops)

    def __len__(self) -> int:
        return len(self.entries)


def build_stop_distance_table(
    graph: RoadGraph, stops: list[Stop] | None = None
) -> StopDistanceTable:
    """Build the all-pairs stop distance table.

    Runs one single-source shortest-path computation per distinct host-edge
    sink vertex, then assembles every ordered pair from those trees.
    """
    if stops is None:
        stops = list(graph.stops())
    if len(stops) < 2:
        raise InvalidInputError("need at least 2 stops for a distance table")
    return StopDistanceTable(graph, stops)


# JSON network files --------------------------------------------------------

def graph_to_dict(graph: RoadGraph) -> dict:
    return {
        "vertices": [{"id": v.id, "x": v.x, "y": v.y} for v in graph.vertices()],
        "edges": [
            {
                "id": e.id,
                "source": e.source,
                "sink": e.sink,
                "length": e.length,
                "free_flow_speed": e.free_flow_speed,
                "capacity_vehicles": e.capacity_vehicles,
            }
            for e in graph.edges()
        ],
        "stops": [
            {"id": s.id, "edge": s.edge, "slack": s.slack, "zone": s.zone}
            for s in graph.stops()
        ],
    }


def graph_from_dict(doc: dict, validate: bool = True) -> RoadGraph:
    graph = RoadGraph()
    for rec in doc.get("vertices", []):
        graph.add_vertex(int(rec["id"]), float(rec["x"]), float(rec["y"]))
    for rec in doc.get("edges", []):
        graph.add_edge(
            int(rec["id"]),
            int(rec["source"]),
            int(rec["sink"]),
            float(rec["free_flow_speed"]),
            int(rec["capacity_vehicles"]),
            length=float(rec["length"]) if "length" in rec else None,
        )
    for rec in doc.get("stops", []):
        graph.place_stop(
            int(rec["edge"]), float(rec["slack"]), str(rec["zone"]), stop_id=int(rec["id"])
        )
    if validate:
        report = validate_graph(graph)
        if not report.ok:
            raise InvalidInputError(f"network failed validation:\n{report}")
    return graph


def load_network(path: str, validate: bool = True) -> RoadGraph:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return graph_from_dict(doc, validate=validate)


def write_atomic(path: str, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_network(graph: RoadGraph, path: str) -> None:
    write_atomic(path, json.dumps(graph_to_dict(graph), indent=2, sort_keys=True) + "\n")
