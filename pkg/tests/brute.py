"""Brute-force reference evaluations of the dispatch rules, plus random
dispatcher-state generators.  Written as flat loops, independent of the
implementations they check."""

from __future__ import annotations

import random

from savsim.demand import TripRequest
from savsim.dispatch import (
    DROPOFF,
    PICKUP,
    DispatchPolicy,
    PendingRequest,
    RouteLeg,
    Sav,
)


def brute_select(policy, pending, now, pickup_distance):
    """Literal restatement of the two-tier selection rule."""
    unassigned = []
    for p in pending:
        if p.state == "unassigned":
            unassigned.append(p)
    tier1 = []
    for p in unassigned:
        waited = now - p.request.request_time
        if waited > policy.overdue_threshold:
            if pickup_distance(p) <= policy.priority_radius:
                tier1.append(p)
    pool = tier1 if tier1 else unassigned
    winner = None
    for p in pool:
        key = (p.request.request_time, p.request.id)
        if winner is None or key < winner[0]:
            winner = (key, p)
    return None if winner is None else winner[1].request.id


def walk_length(position, legs, table):
    if not legs:
        return 0.0
    total = table.distance_from_position(position[0], position[1], legs[0].stop)
    k = 1
    while k < len(legs):
        total += table.distance(legs[k - 1].stop, legs[k].stop)
        k += 1
    return total


def walk_shared(onboard_ids, position, legs, table):
    aboard = set(onboard_ids)
    shared = 0.0
    prev_stop = None
    for idx, leg in enumerate(legs):
        if idx == 0:
            seg = table.distance_from_position(position[0], position[1], leg.stop)
        else:
            seg = table.distance(prev_stop, leg.stop)
        if len(aboard) >= 2:
            shared += seg
        if leg.action == PICKUP:
            aboard.add(leg.request)
        else:
            aboard.discard(leg.request)
        prev_stop = leg.stop
    return shared


def walk_capacity_ok(start_load, capacity, legs):
    load = start_load
    for leg in legs:
        if leg.action == PICKUP:
            load += leg.party_size
            if load > capacity:
                return False
        else:
            load -= leg.party_size
    return True


def brute_best_shared(policy, sav, candidate, table):
    """Max shared distance over every feasible insertion; None if none is."""
    base = list(sav.route)
    pickup = RouteLeg(candidate.origin, PICKUP, candidate.id, candidate.party_size)
    dropoff = RouteLeg(candidate.destination, DROPOFF, candidate.id, candidate.party_size)
    budget = policy.detour_budget_factor * walk_length(sav.position, base, table)
    best = None
    for i in range(len(base) + 1):
        for j in range(i + 1, len(base) + 2):
            legs = base.copy()
            legs.insert(i, pickup)
            legs.insert(j, dropoff)
            if not walk_capacity_ok(sav.onboard_total, sav.capacity, legs):
                continue
            if walk_length(sav.position, legs, table) > budget:
                continue
            shared = walk_shared(sav.onboard, sav.position, legs, table)
            if best is None or shared > best:
                best = shared
    return best


def random_pending(rng: random.Random, count: int) -> list[PendingRequest]:
    """Pending requests in mixed lifecycle states with random timings."""
    pending = []
    for rid in range(count):
        req = TripRequest(rid, 0, 1, rng.uniform(0.0, 3000.0), rng.randint(1, 3))
        state = rng.choice(["unassigned", "unassigned", "unassigned", "assigned", "completed"])
        pr = PendingRequest(req)
        pr.state = state
        pending.append(pr)
    return pending


def random_policy(rng: random.Random) -> DispatchPolicy:
    return DispatchPolicy(
        overdue_threshold=rng.uniform(300.0, 2400.0),
        priority_radius=rng.uniform(500.0, 8000.0),
        detour_budget_factor=rng.uniform(1.0, 2.0),
        capacity=rng.randint(2, 6),
    )


def random_sav_state(rng: random.Random, stop_ids, positions, capacity: int, next_rid: int):
    """A consistent vehicle state with a route of at most 4 legs.

    Onboard requests contribute one dropoff leg each; one optional
    assigned-but-unpicked request contributes an ordered pickup/dropoff pair.
    Returns (sav, next_request_id).
    """
    sav = Sav(id=0, capacity=capacity, profile="normal", position=rng.choice(positions))
    legs: list[RouteLeg] = []
    for _ in range(rng.randint(0, 2)):
        party = rng.randint(1, 2)
        if sav.onboard_total + party > capacity - 1:
            continue
        rid = next_rid
        next_rid += 1
        sav.onboard[rid] = party
        legs.insert(rng.randint(0, len(legs)), RouteLeg(rng.choice(stop_ids), DROPOFF, rid, party))
    if rng.random() < 0.6 and len(legs) <= 2:
        rid = next_rid
        next_rid += 1
        party = rng.randint(1, 2)
        i = rng.randint(0, len(legs))
        j = rng.randint(i + 1, len(legs) + 1)
        legs.insert(i, RouteLeg(rng.choice(stop_ids), PICKUP, rid, party))
        legs.insert(j, RouteLeg(rng.choice(stop_ids), DROPOFF, rid, party))
    if not legs:
        rid = next_rid
        next_rid += 1
        sav.onboard[rid] = 1
        legs.append(RouteLeg(rng.choice(stop_ids), DROPOFF, rid, 1))
    sav.route = legs
    sav.status = "en_route"
    return sav, next_rid
