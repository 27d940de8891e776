"""Discrete-event simulation loop tying demand, traffic, and dispatch together.

Events are processed in (time, scheduling sequence) order, which gives a total
order with no simultaneity ambiguity.  One replication is strictly sequential;
replications share nothing mutable and depend only on (scenario, index), so
they may run in separate processes.

Model notes:
  * Background vehicles drive edge occupancy; fleet vehicles are few enough
    at this scale that their density contribution is ignored.  Fleet travel
    times sample occupancy once, at leg start.
  * A fleet vehicle's boarding/alighting events each take one dwell period;
    a request's pickup/completion timestamps fall at the end of its own
    dwell slot.
  * Passenger conservation and vehicle capacity are asserted after every
    event that can touch passenger or fleet state (background vehicle
    events cannot); violations raise ConsistencyError.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from heapq import heappop, heappush

from . import traffic as traffic_mod
from .demand import DemandProfile, TripRequest, generate_requests
from .dispatch import (
    ASSIGNED,
    COMPLETED,
    DispatchPolicy,
    DWELLING,
    EN_ROUTE,
    IDLE,
    ONBOARD,
    PICKUP,
    PendingRequest,
    Sav,
    UNASSIGNED,
    on_arrival,
    request_legs,
    select_next_request,
    try_insert_shared,
)
from .errors import ConfigurationError, ConsistencyError, SimulationError
from .metrics import LogEntry, MetricsRecord, MetricsState, aggregate, finalize
from .netgraph import (
    RoadGraph,
    StopDistanceTable,
    build_stop_distance_table,
    load_network,
    shortest_path,
    validate_graph,
)
from .traffic import (
    BackgroundFlow,
    BehaviorProfile,
    count_stop_event,
    edge_speed,
    get_profile,
)

REQUEST_ARRIVAL = "request_arrival"
SAV_ARRIVAL = "sav_arrival_at_stop"
DWELL_END = "dwell_end"
BACKGROUND_INJECT = "background_inject"
BACKGROUND_EDGE_EXIT = "background_edge_exit"
HORIZON_END = "horizon_end"


@dataclass
class Scenario:
    """Complete description of one simulation configuration."""

    graph: RoadGraph
    name: str = "scenario"
    demand: DemandProfile = field(default_factory=DemandProfile)
    background_flows: list[BackgroundFlow] = field(default_factory=list)
    fleet_size: int = 8
    profile: str = "normal"
    policy: DispatchPolicy = field(default_factory=DispatchPolicy)
    horizon: float = 14400.0
    replications: int = 20
    base_seed: int = 0
    behavior_profiles: dict[str, BehaviorProfile] | None = None
    network_path: str | None = None

    def __post_init__(self) -> None:
        if self.fleet_size < 0:
            raise ConfigurationError("fleet_size must be >= 0")
        if self.horizon <= 0:
            raise ConfigurationError("horizon must be > 0")
        if self.replications < 1:
            raise ConfigurationError("replications must be >= 1")


def replication_seed(scenario: Scenario, index: int) -> int:
    return scenario.base_seed + index


def replication_requests(scenario: Scenario, index: int) -> list[TripRequest]:
    """The request stream a replication will see; shared across sweep cells."""
    return generate_requests(
        scenario.demand, list(scenario.graph.stops()), replication_seed(scenario, index)
    )


class _Runtime:
    """Per-scenario immutable precomputation shared by all replications."""

    def __init__(self, scenario: Scenario) -> None:
        graph = scenario.graph
        report = validate_graph(graph)
        if not report.ok:
            raise ConfigurationError(f"network failed validation:\n{report}")
        self.graph = graph
        self.stops = list(graph.stops())
        self.profiles = scenario.behavior_profiles or traffic_mod.DEFAULT_PROFILES
        get_profile(scenario.profile, self.profiles)  # fail fast on unknown names
        if scenario.fleet_size > 0 and not self.stops:
            raise ConfigurationError("a nonzero fleet needs stops to park at")
        zones = {s.zone for s in self.stops}
        if scenario.demand.outbound_rate > 0 or scenario.demand.inbound_rate > 0:
            missing = {"peripheral_housing", "central_opportunity"} - zones
            if missing:
                raise ConfigurationError(f"demand requires stops in zones: {sorted(missing)}")
        self.table: StopDistanceTable | None = (
            build_stop_distance_table(graph, self.stops) if len(self.stops) >= 2 else None
        )
        self.flow_routes: list[tuple[int, ...]] = []
        for flow in scenario.background_flows:
            try:
                edges, _ = shortest_path(graph, flow.origin_vertex, flow.destination_vertex)
            except SimulationError as exc:
                raise ConfigurationError(f"background flow {flow}: {exc}") from exc
            self.flow_routes.append(edges)


@dataclass
class _Segment:
    edge: int
    start_offset: float
    end_offset: float
    enter: float
    exit: float
    speed: float

    @property
    def distance(self) -> float:
        return self.end_offset - self.start_offset


@dataclass
class _LegPlan:
    version: int
    depart: float
    arrive: float
    distance: float
    delay: float
    stop_events: int
    segments: list[_Segment]

    def position_at(self, now: float) -> tuple[int, float]:
        last = self.segments[-1]
        if now >= self.arrive:
            return (last.edge, last.end_offset)
        for seg in self.segments:
            if now < seg.exit:
                if seg.exit <= seg.enter:
                    return (seg.edge, seg.start_offset)
                frac = max(0.0, (now - seg.enter) / (seg.exit - seg.enter))
                return (seg.edge, seg.start_offset + frac * (seg.end_offset - seg.start_offset))
        return (last.edge, last.end_offset)

    def distance_until(self, now: float) -> float:
        total = 0.0
        for seg in self.segments:
            if now >= seg.exit:
                total += seg.distance
            elif now > seg.enter and seg.exit > seg.enter:
                total += seg.distance * (now - seg.enter) / (seg.exit - seg.enter)
        return total


@dataclass
class _BackgroundVehicle:
    id: int
    edges: tuple[int, ...]
    index: int = 0
    speed: float = 0.0
    delay: float = 0.0
    stops: int = 0


@dataclass
class ReplicationResult:
    record: MetricsRecord
    log: list[LogEntry]
    occupancy: list[tuple[float, int, int]]


class _Replication:
    def __init__(
        self,
        runtime: _Runtime,
        scenario: Scenario,
        index: int,
        collect_log: bool = False,
        collect_occupancy: bool = False,
    ) -> None:
        self.runtime = runtime
        self.scenario = scenario
        self.index = index
        self.graph = runtime.graph
        self.table = runtime.table
        self.policy = scenario.policy
        self.profile = get_profile(scenario.profile, runtime.profiles)
        self.now = 0.0
        self._heap: list[tuple[float, int, str, object]] = []
        self._seq = 0
        self.pending: dict[int, PendingRequest] = {}
        self.requests_seen = 0
        self.edge_states: dict[int, traffic_mod.EdgeState] = {}
        self.collect_log = collect_log
        self.collect_occupancy = collect_occupancy
        self.log: list[LogEntry] = []
        self.occupancy_samples: list[tuple[float, int, int]] = []
        self.metrics = MetricsState(
            scenario=scenario.name,
            fleet_size=scenario.fleet_size,
            profile=scenario.profile,
            replication=index,
        )
        seed = replication_seed(scenario, index)
        self.requests = generate_requests(scenario.demand, runtime.stops, seed)

        # fleet parked round-robin over stops, in stop-id order
        self.savs: list[Sav] = []
        for k in range(scenario.fleet_size):
            stop = runtime.stops[k % len(runtime.stops)]
            self.savs.append(
                Sav(
                    id=k,
                    capacity=self.policy.capacity,
                    profile=scenario.profile,
                    position=(stop.edge, stop.slack),
                )
            )
        self.plans: dict[int, _LegPlan | None] = {s.id: None for s in self.savs}
        self.versions: dict[int, int] = {s.id: 0 for s in self.savs}
        self.sav_delay: dict[int, float] = {s.id: 0.0 for s in self.savs}
        self.sav_stops: dict[int, int] = {s.id: 0 for s in self.savs}

        self.background: dict[int, _BackgroundVehicle] = {}
        self.bg_injected = 0
        self.bg_exited = 0
        rng = random.Random(f"{seed}:background")
        for flow_idx, flow in enumerate(scenario.background_flows):
            if flow.rate <= 0 or not runtime.flow_routes[flow_idx]:
                continue
            t = 0.0
            per_second = flow.rate / 3600.0
            while True:
                t += rng.expovariate(per_second)
                if t >= scenario.horizon:
                    break
                self._schedule(t, BACKGROUND_INJECT, flow_idx)

    # event plumbing -----------------------------------------------------

    def _schedule(self, time: float, kind: str, payload: object) -> None:
        heappush(self._heap, (time, self._seq, kind, payload))
        self._seq += 1

    def _log(self, kind: str, sav: int, request: int | None, stop: int | None, distance: float = 0.0) -> None:
        if self.collect_log:
            self.log.append(LogEntry(self.now, sav, kind, request, stop, distance))

    def _edge_state(self, edge_id: int) -> traffic_mod.EdgeState:
        state = self.edge_states.get(edge_id)
        if state is None:
            edge = self.graph.edge(edge_id)
            state = traffic_mod.EdgeState(edge_id, 0, edge.free_flow_speed)
            self.edge_states[edge_id] = state
        return state

    def _sample_occupancy(self, edge_id: int) -> None:
        if self.collect_occupancy:
            self.occupancy_samples.append((self.now, edge_id, self._edge_state(edge_id).occupancy))

    # fleet movement ------------------------------------------------------

    def _attainable_speed(self, edge_id: int) -> float:
        edge = self.graph.edge(edge_id)
        return min(
            edge.free_flow_speed,
            edge_speed(edge, self._edge_state(edge_id).occupancy) * self.profile.speed_factor,
        )

    def _build_plan(self, sav: Sav, target_stop: int, now: float) -> _LegPlan:
        stop = self.graph.stop(target_stop)
        pos_edge, offset = sav.position
        pieces: list[tuple[int, float, float]] = []
        if pos_edge == stop.edge and stop.slack >= offset:
            pieces.append((pos_edge, offset, stop.slack))
        else:
            edge = self.graph.edge(pos_edge)
            pieces.append((pos_edge, offset, edge.length))
            mid_edges, _ = self.table.position_path(pos_edge, offset, target_stop)
            for eid in mid_edges[1:-1]:
                pieces.append((eid, 0.0, self.graph.edge(eid).length))
            pieces.append((stop.edge, 0.0, stop.slack))
        segments: list[_Segment] = []
        t = now
        delay = 0.0
        prev_speed = 0.0
        stop_events = 0
        distance = 0.0
        for eid, a, b in pieces:
            v = self._attainable_speed(eid)
            length = b - a
            dt = length / v if length > 0 else 0.0
            segments.append(_Segment(eid, a, b, t, t + dt, v))
            if length > 0:
                free = length / self.graph.edge(eid).free_flow_speed
                delay += dt - free
                if count_stop_event(prev_speed, v):
                    stop_events += 1
                prev_speed = v
            distance += length
            t += dt
        if count_stop_event(prev_speed, 0.0):
            stop_events += 1
        version = self.versions[sav.id]
        return _LegPlan(version, now, t, distance, delay, stop_events, segments)

    def _start_leg(self, sav: Sav, now: float) -> None:
        leg = sav.route[0]
        plan = self._build_plan(sav, leg.stop, now)
        self.plans[sav.id] = plan
        sav.status = EN_ROUTE
        self._log("depart", sav.id, leg.request, leg.stop, plan.distance)
        self._schedule(plan.arrive, SAV_ARRIVAL, (sav.id, plan.version))

    def _account_movement(self, sav: Sav, distance: float) -> None:
        self.metrics.sav_distance += distance
        if len(sav.onboard) >= 2:
            self.metrics.shared_miles += distance

    def _abort_leg(self, sav: Sav, now: float) -> None:
        """Cut the active leg short at the vehicle's current position."""
        plan = self.plans[sav.id]
        traveled = plan.distance_until(now)
        sav.position = plan.position_at(now)
        self._account_movement(sav, traveled)
        self._log("reroute", sav.id, None, None, traveled)
        self.versions[sav.id] += 1
        self.plans[sav.id] = None

    def _position_now(self, sav: Sav) -> tuple[int, float]:
        plan = self.plans.get(sav.id)
        if sav.status == EN_ROUTE and plan is not None:
            return plan.position_at(self.now)
        return sav.position

    # dispatch ------------------------------------------------------------

    def _pickup_distance(self, sav: Sav):
        def fn(pr: PendingRequest) -> float:
            edge_id, offset = sav.position
            return self.table.distance_from_position(edge_id, offset, pr.request.origin)
        return fn

    def _assign(self, sav: Sav, pr: PendingRequest, now: float) -> None:
        pr.advance(ASSIGNED)
        pr.assigned_sav = sav.id
        sav.route = request_legs(pr.request)
        self._log("assign", sav.id, pr.request.id, pr.request.origin)
        self._start_leg(sav, now)

    def _assign_idle(self, now: float) -> None:
        """Let idle vehicles pick unassigned work until none can."""
        while True:
            progress = False
            for sav in self.savs:
                if sav.status != IDLE:
                    continue
                rid = select_next_request(
                    self.policy, self.pending.values(), sav, now, self._pickup_distance(sav)
                )
                if rid is None:
                    return
                self._assign(sav, self.pending[rid], now)
                progress = True
            if not progress:
                return

    def _try_share(self, pr: PendingRequest, now: float) -> None:
        """Offer one request to every active route; apply the best insertion.

        Called once, when the request arrives; requests that fail here wait
        for an idle vehicle.
        """
        for sav in self.savs:
            if sav.status == EN_ROUTE:
                sav.position = self._position_now(sav)
        best = None
        best_sav = None
        for sav in self.savs:
            if sav.status == IDLE or not sav.route:
                continue
            res = try_insert_shared(self.policy, sav, pr.request, self.table)
            if res is not None and (best is None or res.shared_miles > best.shared_miles):
                best, best_sav = res, sav
        if best is None:
            return
        pr.advance(ASSIGNED)
        pr.assigned_sav = best_sav.id
        best_sav.route = list(best.route)
        self._log("assign", best_sav.id, pr.request.id, pr.request.origin)
        if best_sav.status == EN_ROUTE and best.pickup_index == 0:
            self._abort_leg(best_sav, now)
            self._start_leg(best_sav, now)

    # event handlers -------------------------------------------------------

    def _on_request_arrival(self, request: TripRequest) -> None:
        pr = PendingRequest(request)
        self.pending[request.id] = pr
        self.requests_seen += 1
        self.metrics.requests_seen += 1
        self._assign_idle(self.now)
        if pr.state == UNASSIGNED:
            self._try_share(pr, self.now)

    def _on_sav_arrival(self, sav_id: int, version: int) -> None:
        sav = self.savs[sav_id]
        plan = self.plans.get(sav_id)
        if plan is None or plan.version != version:
            return
        self._account_movement(sav, plan.distance)
        self.sav_delay[sav_id] += plan.delay
        self.sav_stops[sav_id] += plan.stop_events
        here = sav.route[0].stop
        stop = self.graph.stop(here)
        sav.position = (stop.edge, stop.slack)
        self.plans[sav_id] = None
        self._log("arrive", sav_id, sav.route[0].request, here, plan.distance)
        sav.status = DWELLING
        dwell_slots = 0
        while sav.route and sav.route[0].stop == here:
            leg = sav.route.pop(0)
            dwell_slots += 1
            event_time = self.now + dwell_slots * self.profile.dwell_time
            ev = on_arrival(sav, leg, self.pending, event_time)
            pr = self.pending[leg.request]
            if ev.kind == PICKUP:
                self.metrics.record_wait(event_time - pr.request.request_time)
            else:
                self.metrics.record_completion(pr.request.party_size)
            self._log(ev.kind, sav_id, leg.request, here)
            sav.assert_capacity()
        self._schedule(self.now + dwell_slots * self.profile.dwell_time, DWELL_END, sav_id)

    def _on_dwell_end(self, sav_id: int) -> None:
        sav = self.savs[sav_id]
        if sav.route:
            self._start_leg(sav, self.now)
        else:
            sav.status = IDLE
            self._assign_idle(self.now)

    def _enter_edge(self, vehicle: _BackgroundVehicle) -> None:
        eid = vehicle.edges[vehicle.index]
        edge = self.graph.edge(eid)
        state = self._edge_state(eid)
        speed = edge_speed(edge, state.occupancy)
        if count_stop_event(vehicle.speed, speed):
            vehicle.stops += 1
        vehicle.speed = speed
        vehicle.delay += edge.length / speed - edge.length / edge.free_flow_speed
        state.occupancy += 1
        state.current_speed = edge_speed(edge, state.occupancy)
        self._sample_occupancy(eid)
        self._schedule(self.now + edge.length / speed, BACKGROUND_EDGE_EXIT, vehicle.id)

    def _on_background_inject(self, flow_idx: int) -> None:
        vehicle = _BackgroundVehicle(self.bg_injected, self.runtime.flow_routes[flow_idx])
        self.bg_injected += 1
        self.background[vehicle.id] = vehicle
        self._enter_edge(vehicle)

    def _on_background_exit(self, vehicle_id: int) -> None:
        vehicle = self.background[vehicle_id]
        eid = vehicle.edges[vehicle.index]
        state = self._edge_state(eid)
        state.occupancy -= 1
        state.current_speed = edge_speed(self.graph.edge(eid), state.occupancy)
        self._sample_occupancy(eid)
        self.metrics.background_distance += self.graph.edge(eid).length
        vehicle.index += 1
        if vehicle.index < len(vehicle.edges):
            self._enter_edge(vehicle)
        else:
            del self.background[vehicle_id]
            self.bg_exited += 1
            self.metrics.record_vehicle(vehicle.delay, vehicle.stops)

    # invariants -----------------------------------------------------------

    def _check_conservation(self) -> None:
        counts = {UNASSIGNED: 0, ASSIGNED: 0, ONBOARD: 0, COMPLETED: 0}
        for p in self.pending.values():
            counts[p.state] += 1
        if sum(counts.values()) != self.requests_seen:
            raise ConsistencyError(
                f"passenger conservation broken at t={self.now}: {counts} vs {self.requests_seen}"
            )

    # main loop --------------------------------------------------------------

    def run(self) -> ReplicationResult:
        self._schedule(self.scenario.horizon, HORIZON_END, None)
        for req in self.requests:
            self._schedule(req.request_time, REQUEST_ARRIVAL, req)
        handlers = {
            REQUEST_ARRIVAL: self._on_request_arrival,
            DWELL_END: self._on_dwell_end,
            BACKGROUND_INJECT: self._on_background_inject,
            BACKGROUND_EDGE_EXIT: self._on_background_exit,
        }
        # background events cannot touch passenger or fleet state, so the
        # conservation and capacity asserts run on the events that can
        passenger_events = (REQUEST_ARRIVAL, SAV_ARRIVAL, DWELL_END)
        while self._heap:
            time, _, kind, payload = heappop(self._heap)
            if time < self.now - 1e-9:
                raise ConsistencyError(f"event time moved backwards: {time} < {self.now}")
            self.now = time
            if kind == HORIZON_END:
                break
            if kind == SAV_ARRIVAL:
                self._on_sav_arrival(*payload)
            else:
                handlers[kind](payload)
            if kind in passenger_events:
                self._check_conservation()
                for sav in self.savs:
                    sav.assert_capacity()
        self.now = self.scenario.horizon
        for sav in self.savs:
            plan = self.plans.get(sav.id)
            if sav.status == EN_ROUTE and plan is not None:
                traveled = plan.distance_until(self.now)
                self._account_movement(sav, traveled)
                self._log("reroute", sav.id, None, None, traveled)
        for sav in self.savs:
            self.metrics.record_vehicle(self.sav_delay[sav.id], self.sav_stops[sav.id])
        if self.bg_injected != self.bg_exited + len(self.background):
            raise ConsistencyError("background vehicle conservation broken")
        record = finalize(self.metrics, self.scenario.horizon)
        return ReplicationResult(record, self.log, self.occupancy_samples)


def simulate(
    scenario: Scenario,
    index: int,
    runtime: _Runtime | None = None,
    collect_log: bool = False,
    collect_occupancy: bool = False,
) -> ReplicationResult:
    """Run one replication and return its record plus optional log/occupancy."""
    if runtime is None:
        runtime = _Runtime(scenario)
    rep = _Replication(runtime, scenario, index, collect_log, collect_occupancy)
    return rep.run()


def run_replication(scenario: Scenario, replication_index: int) -> MetricsRecord:
    """Run one seeded replication; equal inputs give identical records."""
    return simulate(scenario, replication_index).record


@dataclass
class ScenarioResult:
    scenario: Scenario
    records: list[MetricsRecord]
    aggregates: dict[str, tuple[float, float, float, float]]


def _run_indices(scenario: Scenario, indices: list[int]) -> list[MetricsRecord]:
    runtime = _Runtime(scenario)
    records = []
    for i in indices:
        try:
            records.append(simulate(scenario, i, runtime).record)
        except Exception as exc:
            raise SimulationError(f"replication {i} failed: {exc}") from exc
    return records


def run_scenario(
    scenario: Scenario,
    jobs: int = 1,
    indices: list[int] | None = None,
) -> ScenarioResult:
    """Run all replications and aggregate order-independently.

    ``indices`` overrides the default range(replications), e.g. to force
    repeated seeds.  With ``jobs`` > 1 replications run in worker processes;
    results are identical to a sequential run.
    """
    if indices is None:
        indices = list(range(scenario.replications))
    if jobs > 1 and len(indices) > 1:
        from concurrent.futures import ProcessPoolExecutor

        chunks = [indices[k::jobs] for k in range(jobs) if indices[k::jobs]]
        records = []
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            for part in pool.map(_run_indices, [scenario] * len(chunks), chunks):
                records.extend(part)
    else:
        records = _run_indices(scenario, indices)
    records.sort(key=lambda r: r.replication)
    return ScenarioResult(scenario, records, aggregate(records))


@dataclass
class SweepResult:
    base: Scenario
    cells: dict[tuple[int, str], ScenarioResult]

    def all_records(self) -> list[MetricsRecord]:
        out = []
        for key in sorted(self.cells):
            out.extend(self.cells[key].records)
        return out


def run_sweep(
    base: Scenario,
    fleet_sizes: list[int],
    profiles: list[str],
    jobs: int = 1,
) -> SweepResult:
    """One aggregated result per (fleet size, profile) cell.

    Every cell derives demand from the same base seed, so request streams are
    identical across cells and comparisons isolate the swept variables.
    """
    if not fleet_sizes or not profiles:
        raise ConfigurationError("sweep needs at least one fleet size and one profile")
    cells: dict[tuple[int, str], ScenarioResult] = {}
    for fleet in fleet_sizes:
        for profile in profiles:
            cell = replace(base, fleet_size=fleet, profile=profile)
            cells[(fleet, profile)] = run_scenario(cell, jobs=jobs)
    return SweepResult(base, cells)


# scenario files -------------------------------------------------------------

def scenario_to_dict(scenario: Scenario) -> dict:
    doc = {
        "name": scenario.name,
        "network": scenario.network_path or "network.json",
        "demand": {
            "outbound_rate": scenario.demand.outbound_rate,
            "inbound_rate": scenario.demand.inbound_rate,
            "party_size_weights": {
                str(k): v for k, v in sorted(scenario.demand.party_size_weights.items())
            },
            "horizon": scenario.demand.horizon,
        },
        "background_flows": [
            {
                "origin_vertex": f.origin_vertex,
                "destination_vertex": f.destination_vertex,
                "rate": f.rate,
            }
            for f in scenario.background_flows
        ],
        "fleet_size": scenario.fleet_size,
        "profile": scenario.profile,
        "policy": {
            "overdue_threshold": scenario.policy.overdue_threshold,
            "priority_radius": scenario.policy.priority_radius,
            "detour_budget_factor": scenario.policy.detour_budget_factor,
            "capacity": scenario.policy.capacity,
        },
        "horizon": scenario.horizon,
        "replications": scenario.replications,
        "base_seed": scenario.base_seed,
    }
    if scenario.behavior_profiles is not None:
        doc["behavior_profiles"] = {
            name: {"speed_factor": p.speed_factor, "dwell_time": p.dwell_time}
            for name, p in sorted(scenario.behavior_profiles.items())
        }
    return doc


def scenario_from_dict(doc: dict, graph: RoadGraph, network_path: str | None = None) -> Scenario:
    try:
        demand = DemandProfile(
            outbound_rate=float(doc["demand"]["outbound_rate"]),
            inbound_rate=float(doc["demand"]["inbound_rate"]),
            party_size_weights={
                int(k): float(v)
                for k, v in doc["demand"].get(
                    "party_size_weights", {"1": 0.7, "2": 0.2, "3": 0.1}
                ).items()
            },
            horizon=float(doc["demand"].get("horizon", doc.get("horizon", 14400.0))),
        )
        policy_doc = doc.get("policy", {})
        policy = DispatchPolicy(
            overdue_threshold=float(policy_doc.get("overdue_threshold", 1200.0)),
            priority_radius=float(policy_doc.get("priority_radius", 3218.0)),
            detour_budget_factor=float(policy_doc.get("detour_budget_factor", 1.4)),
            capacity=int(policy_doc.get("capacity", 5)),
        )
        flows = [
            BackgroundFlow(
                int(f["origin_vertex"]), int(f["destination_vertex"]), float(f["rate"])
            )
            for f in doc.get("background_flows", [])
        ]
        profiles = None
        if "behavior_profiles" in doc:
            profiles = traffic_mod.profiles_from_dict(doc["behavior_profiles"])
        return Scenario(
            graph=graph,
            name=str(doc.get("name", "scenario")),
            demand=demand,
            background_flows=flows,
            fleet_size=int(doc.get("fleet_size", 8)),
            profile=str(doc.get("profile", "normal")),
            policy=policy,
            horizon=float(doc.get("horizon", 14400.0)),
            replications=int(doc.get("replications", 20)),
            base_seed=int(doc.get("base_seed", 0)),
            behavior_profiles=profiles,
            network_path=network_path,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad scenario document: {exc}") from exc


def load_scenario(path: str) -> Scenario:
    """Read a scenario file, loading its network relative to the file."""
    import json
    import os

    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    network_rel = doc.get("network", "network.json")
    network_path = os.path.join(os.path.dirname(os.path.abspath(path)), network_rel)
    graph = load_network(network_path)
    return scenario_from_dict(doc, graph, network_path=network_rel)
