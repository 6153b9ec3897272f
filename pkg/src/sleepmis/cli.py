"""Command-line entry points: single runs, experiment sweeps, verification."""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__, engine
from .graphs import EdgeListError, GraphConfigError
from .harness import (
    ALGOS,
    ConfigError,
    build_graph,
    config_from_values,
    load_config_file,
    parse_graph_template,
    parse_seed_range,
    run_cell,
    run_experiment,
    simulate,
    trace_dump_dict,
    write_csv,
    write_manifest,
)
from .verify import CHECKS, run_checks, summarize

GRAPH_HELP = (
    "family:key=val,... — families: gnp (n, p), cycle/path/complete/star/tree (n), "
    "grid (rows, cols), file:PATH. In experiment templates n sweeps with "
    "a..bxM (geometric) and p accepts X/n."
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sleepmis",
        description="Simulate and verify MIS algorithms in the sleeping model.",
    )
    parser.add_argument("--version", action="version", version=f"sleepmis {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation, print JSON metrics")
    p_run.add_argument("--algo", required=True, choices=ALGOS)
    p_run.add_argument("--graph", required=True, help=GRAPH_HELP)
    p_run.add_argument("--seed", required=True, type=int)
    p_run.add_argument("--c", type=int, default=6, help="greedy truncation constant (fast)")
    p_run.add_argument("--K", type=int, default=None, help="override recursion depth")
    p_run.add_argument("--cap", type=int, default=engine.DEFAULT_ROUND_CAP)
    p_run.add_argument("--emit-trace", metavar="PATH", default=None)

    p_exp = sub.add_parser("experiment", help="run a sweep, write CSV + manifest")
    p_exp.add_argument("--config", help="key=value config file")
    p_exp.add_argument("--algos", help="comma-separated list")
    p_exp.add_argument("--graphs", action="append", default=None, help=GRAPH_HELP)
    p_exp.add_argument("--seeds", help="a..b inclusive")
    p_exp.add_argument("--c", type=int, default=None)
    p_exp.add_argument("--K", type=int, default=None)
    p_exp.add_argument("--cap", type=int, default=None)
    p_exp.add_argument("--out", default=None)

    p_ver = sub.add_parser("verify", help="drive correctness oracles over seeds")
    p_ver.add_argument("--algo", required=True, choices=ALGOS)
    p_ver.add_argument("--graph", required=True, help=GRAPH_HELP)
    p_ver.add_argument("--seeds", required=True, help="a..b inclusive")
    p_ver.add_argument(
        "--checks", required=True, help=f"comma-separated subset of {','.join(CHECKS)}"
    )
    p_ver.add_argument("--c", type=int, default=6)
    p_ver.add_argument("--K", type=int, default=None)
    return parser


def _resolved_depth(algo: str, n: int, k_override: int | None):
    from .schedules import fast_depth, sleeping_depth

    if k_override is not None:
        return k_override
    if algo == "sleeping":
        return sleeping_depth(n)
    if algo == "fast":
        return fast_depth(n)
    return None


def _cmd_run(args) -> int:
    instances = parse_graph_template(args.graph)
    if len(instances) != 1:
        print("run takes a single graph instance, not a sweep", file=sys.stderr)
        return 1
    family, params = instances[0]
    g = build_graph(family, params, args.seed)
    row = run_cell(
        args.algo, family, params, args.seed, c=args.c, k_override=args.K, round_cap=args.cap
    )
    if args.emit_trace:
        outcome = simulate(
            args.algo, g, args.seed, c=args.c, k_override=args.K, round_cap=args.cap
        )
        with open(args.emit_trace, "w", encoding="utf-8") as fh:
            json.dump(trace_dump_dict(outcome), fh, indent=2)
            fh.write("\n")
    payload = row.to_json_dict()
    payload["K"] = _resolved_depth(args.algo, g.n, args.K)
    payload["c"] = args.c
    payload["cap"] = args.cap
    print(json.dumps(payload))
    if row.metrics.verdict.kind == "timeout":
        print("round cap exceeded", file=sys.stderr)
        return 1
    return 0 if row.metrics.verdict.ok else 2


def _cmd_experiment(args) -> int:
    values: dict = {}
    if args.config:
        values = load_config_file(args.config)
    if args.algos:
        values["algos"] = args.algos
    if args.graphs:
        values["graphs"] = ";".join(args.graphs)
    if args.seeds:
        values["seeds"] = args.seeds
    if args.c is not None:
        values["c"] = str(args.c)
    if args.K is not None:
        values["K"] = str(args.K)
    if args.cap is not None:
        values["cap"] = str(args.cap)
    if args.out is not None:
        values["out"] = args.out
    cfg = config_from_values(values)
    rows = run_experiment(cfg)
    write_csv(rows, cfg.out)
    write_manifest(cfg, rows, cfg.out + ".manifest.json")
    print(f"wrote {len(rows)} rows to {cfg.out}", file=sys.stderr)
    return 0


def _cmd_verify(args) -> int:
    seeds = parse_seed_range(args.seeds)
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    result = run_checks(
        args.algo, args.graph, seeds, checks, c=args.c, k_override=args.K
    )
    print(summarize(result), file=sys.stderr)
    print(json.dumps(result.report, indent=2))
    return 3 if result.hard_fail else 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        if args.command == "verify":
            return _cmd_verify(args)
    except (GraphConfigError, EdgeListError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except engine.EngineError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    parser.error(f"unknown command {args.command!r}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
