"""Command-line interface.

Verbs: validate a network file, generate a synthetic network + scenario, run
one scenario, sweep fleet sizes and profiles, or cross-check the routing
table against the split-graph oracle.  Exit codes: 0 success, 1 validation or
oracle failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import engine, metrics, oracle, scenario_gen
from .errors import ConfigurationError, SimulationError
from .netgraph import (
    build_stop_distance_table,
    load_network,
    save_network,
    validate_graph,
    write_atomic,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="savsim",
        description="Shared autonomous vehicle fleet simulator",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_validate = sub.add_parser("validate", help="check a network file")
    p_validate.add_argument("--network", required=True)

    p_generate = sub.add_parser("generate", help="write a synthetic network and scenario")
    p_generate.add_argument("--out", default=None)
    p_generate.add_argument("--seed", type=int, default=0)
    p_generate.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                            help="override a generator field, e.g. grid_spacing=800")

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--replications", type=int, default=None)
    p_run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="dotted override into the scenario, e.g. policy.overdue_threshold=900")
    p_run.add_argument("--verbose", action="store_true", help="also write an event log")
    p_run.add_argument("--occupancy", action="store_true", help="also write per-edge occupancy")
    p_run.add_argument("--jobs", type=int, default=1)

    p_sweep = sub.add_parser("sweep", help="run a fleet size x profile sweep")
    p_sweep.add_argument("--scenario", required=True)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--fleet-sizes", default="2,4,6,8,10")
    p_sweep.add_argument("--profiles", default="cautious,normal,aggressive")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--replications", type=int, default=None)
    p_sweep.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p_sweep.add_argument("--jobs", type=int, default=1)

    p_oracle = sub.add_parser("oracle-check", help="verify stop distances against the split-graph oracle")
    p_oracle.add_argument("--network", required=True)

    return parser


def _out_dir(arg: str | None) -> str:
    out = arg or os.environ.get("SAVSIM_OUT") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_overrides(doc: dict, overrides: list[str]) -> dict:
    """Apply dotted-path KEY=VALUE overrides to a scenario document."""
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not KEY=VALUE")
        key, _, raw = item.partition("=")
        node = doc
        parts = key.split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                raise ConfigurationError(f"override {key!r}: no such field")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigurationError(f"override {key!r}: no such field")
        node[parts[-1]] = _parse_value(raw)
    return doc


def _load_scenario_with_overrides(path: str, args) -> engine.Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    _apply_overrides(doc, args.set)
    if args.seed is not None:
        doc["base_seed"] = args.seed
    if getattr(args, "replications", None) is not None:
        doc["replications"] = args.replications
    network_rel = doc.get("network", "network.json")
    network_path = os.path.join(os.path.dirname(os.path.abspath(path)), network_rel)
    graph = load_network(network_path)
    return engine.scenario_from_dict(doc, graph, network_path=network_rel)


def _cmd_validate(args) -> int:
    report = validate_graph(load_network(args.network, validate=False))
    if report.ok:
        print("ok")
        return EXIT_OK
    print(report)
    return EXIT_FAIL


def _cmd_generate(args) -> int:
    fields = {"seed": args.seed}
    for item in args.set:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not KEY=VALUE")
        key, _, raw = item.partition("=")
        fields[key] = _parse_value(raw)
    spec = scenario_gen.SyntheticSpec(**fields)
    out = _out_dir(args.out)
    scenario = scenario_gen.default_scenario(spec)
    save_network(scenario.graph, os.path.join(out, "network.json"))
    doc = engine.scenario_to_dict(scenario)
    write_atomic(os.path.join(out, "scenario.json"), json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}/network.json and {out}/scenario.json")
    return EXIT_OK


def _cmd_run(args) -> int:
    scenario = _load_scenario_with_overrides(args.scenario, args)
    out = _out_dir(args.out)
    result = engine.run_scenario(scenario, jobs=args.jobs)
    metrics.emit_csv(result.records, os.path.join(out, "replications.csv"))
    metrics.emit_aggregate_csv(
        [(scenario.name, scenario.fleet_size, scenario.profile, result.aggregates)],
        os.path.join(out, "aggregate.csv"),
    )
    if args.verbose or args.occupancy:
        runtime = engine._Runtime(scenario)
        lines: list[str] = []
        occupancy: list[tuple[float, int, int]] = []
        for i in range(scenario.replications):
            rep = engine.simulate(scenario, i, runtime,
                                  collect_log=args.verbose,
                                  collect_occupancy=args.occupancy)
            if args.verbose:
                lines.extend(f"{i}," + line for line in metrics.log_to_lines(rep.log))
            occupancy.extend(rep.occupancy)
        if args.verbose:
            header = "replication,time_s,sav,event,request,stop"
            write_atomic(os.path.join(out, "events.csv"), "\n".join([header] + lines) + "\n")
        if args.occupancy:
            metrics.emit_occupancy_csv(occupancy, os.path.join(out, "occupancy.csv"))
    print(f"wrote {out}/replications.csv and {out}/aggregate.csv")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    scenario = _load_scenario_with_overrides(args.scenario, args)
    try:
        fleet_sizes = [int(x) for x in args.fleet_sizes.split(",") if x]
    except ValueError:
        raise ConfigurationError(f"bad fleet sizes {args.fleet_sizes!r}")
    profiles = [p for p in args.profiles.split(",") if p]
    out = _out_dir(args.out)
    sweep = engine.run_sweep(scenario, fleet_sizes, profiles, jobs=args.jobs)
    metrics.emit_csv(sweep.all_records(), os.path.join(out, "sweep.csv"))
    cells = [
        (res.scenario.name, fleet, profile, res.aggregates)
        for (fleet, profile), res in sweep.cells.items()
    ]
    metrics.emit_aggregate_csv(cells, os.path.join(out, "sweep_aggregate.csv"))
    print(f"wrote {out}/sweep.csv and {out}/sweep_aggregate.csv")
    return EXIT_OK


def _cmd_oracle_check(args) -> int:
    graph = load_network(args.network)
    stops = list(graph.stops())
    if len(stops) < 2:
        print("need at least 2 stops to check")
        return EXIT_FAIL
    table = build_stop_distance_table(graph, stops)
    mismatches = oracle.check_table(graph, table, tol=1e-9)
    if not mismatches:
        print(f"ok: {len(table)} stop pairs match the split-graph oracle")
        return EXIT_OK
    for a, b, got, want in mismatches[:20]:
        print(f"mismatch {a}->{b}: table {got!r} oracle {want!r}")
    print(f"{len(mismatches)} mismatching pairs")
    return EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "validate": _cmd_validate,
        "generate": _cmd_generate,
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "oracle-check": _cmd_oracle_check,
    }
    try:
        return handlers[args.verb](args)
    except OSError as exc:
        print(f"i/o error: {getattr(exc, 'filename', None) or exc}", file=sys.stderr)
        return EXIT_IO
    except (SimulationError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
