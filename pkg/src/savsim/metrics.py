"""Per-replication measures and CSV emission.

One record per replication: network-wide delay and stop averages, distances,
trip counts, wait times, passengers served, and shared-ride distance.  Waits
are measured request-time to pickup and only over requests that were picked
up; requests never completed are counted separately so nothing is lost.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .dispatch import DROPOFF, PICKUP
from .netgraph import write_atomic


def vehicle_delay(actual_travel_time: float, free_flow_time: float) -> float:
    """Seconds of delay versus free flow, clamped at zero."""
    return max(0.0, actual_travel_time - free_flow_time)


@dataclass(frozen=True)
class MetricsRecord:
    scenario: str
    fleet_size: int
    profile: str
    replication: int
    avg_delay_min: float
    avg_stops: float
    total_distance_m: float
    trips_completed: int
    trips_per_sav: float
    avg_wait_min: float
    passengers_served: int
    shared_miles_m: float
    unserved: int
    sav_distance_m: float
    empty_vehicle_population: bool
    empty_wait_population: bool


# numeric fields aggregated by mean/std/min/max, in output order
AGGREGATE_FIELDS = (
    "avg_delay_min",
    "avg_stops",
    "total_distance_m",
    "trips_completed",
    "trips_per_sav",
    "avg_wait_min",
    "passengers_served",
    "shared_miles_m",
    "unserved",
    "sav_distance_m",
)

CSV_HEADER = (
    "scenario,fleet_size,profile,replication,avg_delay_min,avg_stops,"
    "total_distance_m,trips_completed,trips_per_sav,avg_wait_min,"
    "passengers_served,shared_miles_m,unserved"
)


@dataclass
class MetricsState:
    """Accumulators owned by one replication."""

    scenario: str
    fleet_size: int
    profile: str
    replication: int
    vehicle_delays: list[float] = field(default_factory=list)   # one per finished vehicle
    vehicle_stops: list[int] = field(default_factory=list)
    background_distance: float = 0.0
    sav_distance: float = 0.0
    shared_miles: float = 0.0
    wait_seconds: list[float] = field(default_factory=list)
    trips_completed: int = 0
    passengers_served: int = 0
    requests_seen: int = 0

    def record_wait(self, seconds: float) -> None:
        self.wait_seconds.append(seconds)

    def record_completion(self, party_size: int) -> None:
        self.trips_completed += 1
        self.passengers_served += party_size

    def record_vehicle(self, delay_seconds: float, stops: int) -> None:
        self.vehicle_delays.append(delay_seconds)
        self.vehicle_stops.append(stops)


def finalize(state: MetricsState, horizon: float) -> MetricsRecord:
    """Reduce accumulators to one record; empty populations yield flagged zeros."""
    no_vehicles = not state.vehicle_delays
    no_waits = not state.wait_seconds
    avg_delay = 0.0 if no_vehicles else sum(state.vehicle_delays) / len(state.vehicle_delays)
    avg_stops = 0.0 if no_vehicles else sum(state.vehicle_stops) / len(state.vehicle_stops)
    avg_wait = 0.0 if no_waits else sum(state.wait_seconds) / len(state.wait_seconds)
    return MetricsRecord(
        scenario=state.scenario,
        fleet_size=state.fleet_size,
        profile=state.profile,
        replication=state.replication,
        avg_delay_min=avg_delay / 60.0,
        avg_stops=avg_stops,
        total_distance_m=state.background_distance + state.sav_distance,
        trips_completed=state.trips_completed,
        trips_per_sav=(state.trips_completed / state.fleet_size) if state.fleet_size else 0.0,
        avg_wait_min=avg_wait / 60.0,
        passengers_served=state.passengers_served,
        shared_miles_m=state.shared_miles,
        unserved=state.requests_seen - state.trips_completed,
        sav_distance_m=state.sav_distance,
        empty_vehicle_population=no_vehicles,
        empty_wait_population=no_waits,
    )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def records_to_csv(records: list[MetricsRecord]) -> str:
    rows = sorted(records, key=lambda r: (r.scenario, r.fleet_size, r.profile, r.replication))
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join(_fmt(v) for v in (
            r.scenario, r.fleet_size, r.profile, r.replication,
            r.avg_delay_min, r.avg_stops, r.total_distance_m,
            r.trips_completed, r.trips_per_sav, r.avg_wait_min,
            r.passengers_served, r.shared_miles_m, r.unserved,
        )))
    return "\n".join(lines) + "\n"


def emit_csv(records: list[MetricsRecord], destination: str) -> None:
    """Write the per-replication CSV; byte-stable for identical inputs."""
    write_atomic(destination, records_to_csv(records))


def aggregate(records: list[MetricsRecord]) -> dict[str, tuple[float, float, float, float]]:
    """Per-metric (mean, population std, min, max) over replications."""
    ordered = sorted(records, key=lambda r: r.replication)
    out = {}
    for name in AGGREGATE_FIELDS:
        values = [float(getattr(r, name)) for r in ordered]
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        out[name] = (mean, math.sqrt(var), min(values), max(values))
    return out


def aggregates_to_csv(cells: list[tuple[str, int, str, dict]]) -> str:
    """Long-form aggregate table: one row per (cell, metric)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario", "fleet_size", "profile", "metric", "mean", "std", "min", "max"])
    for scenario, fleet_size, profile, stats in sorted(cells, key=lambda c: (c[0], c[1], c[2])):
        for metric in AGGREGATE_FIELDS:
            mean, std, lo, hi = stats[metric]
            writer.writerow([
                scenario, fleet_size, profile, metric,
                f"{mean:.6f}", f"{std:.6f}", f"{lo:.6f}", f"{hi:.6f}",
            ])
    return buf.getvalue()


def emit_aggregate_csv(cells: list[tuple[str, int, str, dict]], destination: str) -> None:
    write_atomic(destination, aggregates_to_csv(cells))


def occupancy_to_csv(samples: list[tuple[float, int, int]]) -> str:
    lines = ["time_s,edge_id,occupancy"]
    for t, edge_id, occ in samples:
        lines.append(f"{t:.6f},{edge_id},{occ}")
    return "\n".join(lines) + "\n"


def emit_occupancy_csv(samples: list[tuple[float, int, int]], destination: str) -> None:
    write_atomic(destination, occupancy_to_csv(samples))


# event-log replay ----------------------------------------------------------

@dataclass(frozen=True)
class LogEntry:
    """One fleet state transition, as written to the event log."""

    time: float
    sav: int
    kind: str       # depart | arrive | reroute | pickup | dropoff | assign
    request: int | None
    stop: int | None
    distance: float = 0.0


def log_to_lines(entries: list[LogEntry]) -> list[str]:
    def cell(v):
        return "" if v is None else str(v)
    return [
        f"{e.time:.6f},{e.sav},{e.kind},{cell(e.request)},{cell(e.stop)}"
        for e in entries
    ]


def replay_shared_miles(entries: list[LogEntry]) -> float:
    """Recompute shared distance from the event log alone.

    Rebuilds each vehicle's onboard set from pickup/dropoff entries and sums
    the distances of movement entries made with two or more requests aboard.
    Must equal the online accumulator exactly.
    """
    aboard: dict[int, set[int]] = {}
    shared = 0.0
    for e in entries:
        requests = aboard.setdefault(e.sav, set())
        if e.kind in ("arrive", "reroute"):
            if len(requests) >= 2:
                shared += e.distance
        elif e.kind == PICKUP:
            requests.add(e.request)
        elif e.kind == DROPOFF:
            requests.discard(e.request)
    return shared
