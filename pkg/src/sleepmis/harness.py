"""Experiment execution: cells, result rows, CSV/manifest output.

A cell is one (algorithm, graph instance, seed) simulation. Sweeps enumerate
cells from templates, run them (optionally across worker processes), and
always emit rows in canonical order so output bytes never depend on
scheduling.
"""
from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .graphs import Graph, GraphSpec, generate
from .metrics import ComplexityMetrics, compute_metrics, float_6
from .programs import (
    AlgoParams,
    fast_sleeping_mis_programs,
    greedy_mis_programs,
    luby_programs,
    sleeping_mis_programs,
)
from .schedules import fast_depth, sleeping_depth

ALGOS = ("sleeping", "fast", "greedy", "luby")

CSV_COLUMNS = (
    "algo",
    "family",
    "n",
    "m",
    "seed",
    "avg_awake",
    "max_awake",
    "total_rounds",
    "avg_finish",
    "mis_size",
    "verdict",
    "rank_tie_flag",
    "runtime_ms",
)

WORKERS_ENV = "SLEEPMIS_WORKERS"
STABLE_RUNTIME_ENV = "SLEEPMIS_STABLE_RUNTIME"

# Families whose output does not depend on the seed; their instances are
# cached and reused across cells.
_SEEDLESS_FAMILIES = frozenset({"cycle", "path", "complete", "star", "grid", "file"})
_graph_cache: dict = {}


def build_graph(family: str, params: dict, seed: int) -> Graph:
    effective_seed = 0 if family in _SEEDLESS_FAMILIES else seed
    key = (family, tuple(sorted(params.items())), effective_seed)
    g = _graph_cache.get(key)
    if g is None:
        g = generate(GraphSpec(family, dict(params), effective_seed))
        _graph_cache[key] = g
    return g


@dataclass
class SimOutcome:
    """Everything a single simulation produced."""

    outputs: list
    trace: engine.Trace
    recorder: object | None
    rank_tie: bool
    timed_out: bool


def simulate(
    algo: str,
    g: Graph,
    seed: int,
    *,
    c: int = 6,
    k_override: int | None = None,
    round_cap: int = engine.DEFAULT_ROUND_CAP,
    fast_forward: bool = True,
) -> SimOutcome:
    """Run one algorithm on one graph with one seed."""
    recorder = None
    rank_tie = False
    if algo == "sleeping":
        k = k_override if k_override is not None else sleeping_depth(g.n)
        programs, recorder, tapes = sleeping_mis_programs(g, seed, k_levels=k)
        if g.n > 1 and k > 0:
            rank_tie = len(np.unique(tapes, axis=0)) < g.n
    elif algo == "fast":
        k = k_override if k_override is not None else fast_depth(g.n)
        params = AlgoParams(k_levels=k, c=c)
        programs, recorder, tapes, _ranks = fast_sleeping_mis_programs(g, seed, params=params)
    elif algo == "greedy":
        programs, _ranks = greedy_mis_programs(g, seed)
    elif algo == "luby":
        programs = luby_programs(g, seed)
    else:
        raise ValueError(f"unknown algorithm {algo!r} (choose from {ALGOS})")
    try:
        outputs, trace = engine.run(g, programs, round_cap=round_cap, fast_forward=fast_forward)
        timed_out = False
    except engine.SimulationTimeout as exc:
        outputs, trace = exc.outputs, exc.trace
        timed_out = True
    if recorder is not None:
        trace.call_records = recorder.finalize()
    return SimOutcome(outputs, trace, recorder, rank_tie, timed_out)


@dataclass
class ResultRow:
    algo: str
    family: str
    n: int
    m: int
    seed: int
    metrics: ComplexityMetrics
    rank_tie_flag: bool
    runtime_ms: float
    graph_label: str = ""

    def sort_key(self):
        return (self.algo, self.family, self.n, self.graph_label, self.seed)

    def to_csv_fields(self) -> list[str]:
        m = self.metrics
        return [
            self.algo,
            self.family,
            str(self.n),
            str(self.m),
            str(self.seed),
            f"{float(m.avg_awake):.6f}",
            str(m.max_awake),
            str(m.total_rounds),
            f"{float(m.avg_finish):.6f}",
            str(m.mis_size),
            m.verdict.kind,
            str(int(self.rank_tie_flag)),
            f"{self.runtime_ms:.6f}",
        ]

    def to_json_dict(self) -> dict:
        d = {
            "algo": self.algo,
            "family": self.family,
            "n": self.n,
            "m": self.m,
            "seed": self.seed,
        }
        d.update(self.metrics.to_json_dict())
        d["rank_tie_flag"] = int(self.rank_tie_flag)
        d["runtime_ms"] = float_6(self.runtime_ms)
        return d


def run_cell(
    algo: str,
    family: str,
    params: dict,
    seed: int,
    *,
    c: int = 6,
    k_override: int | None = None,
    round_cap: int = engine.DEFAULT_ROUND_CAP,
) -> ResultRow:
    g = build_graph(family, params, seed)
    started = time.perf_counter()
    outcome = simulate(
        algo, g, seed, c=c, k_override=k_override, round_cap=round_cap
    )
    metrics = compute_metrics(g, outcome.outputs, outcome.trace)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    if os.environ.get(STABLE_RUNTIME_ENV):
        elapsed_ms = 0.0
    label = GraphSpec(family, params).label()
    return ResultRow(
        algo, family, g.n, g.m, seed, metrics, outcome.rank_tie, elapsed_ms, label
    )


# ---------------------------------------------------------------------------
# Sweep configuration


class ConfigError(ValueError):
    pass


def parse_seed_range(text: str) -> list[int]:
    """"a..b" inclusive, or a single integer."""
    text = text.strip()
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise ConfigError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def _parse_value_sweep(text: str) -> list[int]:
    # "16..4096x2" sweeps geometrically; "16..20" steps by one; "64" is itself.
    if ".." in text:
        lo_s, rest = text.split("..", 1)
        if "x" in rest:
            hi_s, mult_s = rest.split("x", 1)
            lo, hi, mult = int(lo_s), int(hi_s), int(mult_s)
            if mult < 2 or lo < 1 or hi < lo:
                raise ConfigError(f"bad sweep {text!r}")
            values = []
            v = lo
            while v <= hi:
                values.append(v)
                v *= mult
            return values
        lo, hi = int(lo_s), int(rest)
        if hi < lo:
            raise ConfigError(f"bad sweep {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def parse_graph_template(text: str) -> list[tuple[str, dict]]:
    """Expand "family:key=val,..." into concrete (family, params) instances.

    n accepts sweeps ("16..4096x2"); p accepts a literal or "X/n" resolved per
    swept n. "file:PATH" names an edge-list file.
    """
    text = text.strip()
    if ":" not in text:
        return [(text, {})]
    family, rest = text.split(":", 1)
    family = family.strip()
    if family == "file":
        return [(family, {"path": rest.strip()})]
    raw: dict[str, str] = {}
    for item in rest.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r} in {text!r}")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()
    n_values = _parse_value_sweep(raw.pop("n")) if "n" in raw else [None]
    out = []
    for n in n_values:
        params: dict = {}
        if n is not None:
            params["n"] = n
        for key, value in raw.items():
            if key == "p":
                if value.endswith("/n"):
                    if n is None:
                        raise ConfigError(f"p={value} needs an n parameter")
                    params["p"] = float(value[:-2]) / n
                else:
                    params["p"] = float(value)
            else:
                params[key] = int(value)
        out.append((family, params))
    return out


@dataclass
class ExperimentConfig:
    algos: list[str]
    graphs: list[str]
    seeds: list[int]
    c: int = 6
    k_override: int | None = None
    round_cap: int = engine.DEFAULT_ROUND_CAP
    out: str = "results.csv"

    def canonical_dict(self) -> dict:
        return {
            "algos": list(self.algos),
            "graphs": list(self.graphs),
            "seeds": [self.seeds[0], self.seeds[-1]] if self.seeds else [],
            "c": self.c,
            "k_override": self.k_override,
            "round_cap": self.round_cap,
        }


def load_config_file(path: str) -> dict:
    """Flat key=value lines; '#' comments. Keys: algos, graphs, seeds, c, K, cap, out."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def config_from_values(values: dict) -> ExperimentConfig:
    if "algos" not in values or "graphs" not in values or "seeds" not in values:
        raise ConfigError("config needs algos, graphs, and seeds")
    algos = [a.strip() for a in values["algos"].split(",") if a.strip()]
    for a in algos:
        if a not in ALGOS:
            raise ConfigError(f"unknown algorithm {a!r}")
    graphs = [t.strip() for t in values["graphs"].split(";") if t.strip()]
    seeds = parse_seed_range(values["seeds"])
    if not algos or not graphs or not seeds:
        raise ConfigError("need at least one algorithm, one graph, and one seed")
    cfg = ExperimentConfig(algos=algos, graphs=graphs, seeds=seeds)
    if "c" in values:
        cfg.c = int(values["c"])
    if "K" in values:
        cfg.k_override = int(values["K"])
    if "cap" in values:
        cfg.round_cap = int(values["cap"])
    if "out" in values:
        cfg.out = values["out"]
    return cfg


def _cell_worker(cell):
    algo, family, params, seed, c, k_override, round_cap = cell
    return run_cell(
        algo, family, params, seed, c=c, k_override=k_override, round_cap=round_cap
    )


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """Run all cells and return rows in canonical order."""
    cells = []
    for algo in cfg.algos:
        for template in cfg.graphs:
            for family, params in parse_graph_template(template):
                for seed in cfg.seeds:
                    cells.append(
                        (algo, family, params, seed, cfg.c, cfg.k_override, cfg.round_cap)
                    )
    workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_cell_worker, cells, chunksize=max(1, len(cells) // (workers * 8))))
    else:
        rows = [_cell_worker(cell) for cell in cells]
    rows.sort(key=ResultRow.sort_key)
    return rows


def write_csv(rows: list[ResultRow], path: str) -> None:
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(",".join(row.to_csv_fields()) for row in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_manifest(cfg: ExperimentConfig, rows: list[ResultRow], path: str) -> None:
    from . import __version__

    config = cfg.canonical_dict()
    blob = json.dumps(config, sort_keys=True).encode("utf-8")
    manifest = {
        "tool": "sleepmis",
        "version": __version__,
        "config": config,
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "columns": list(CSV_COLUMNS),
        "rows": len(rows),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def trace_dump_dict(outcome: SimOutcome) -> dict:
    trace = outcome.trace
    return {
        "outputs": [None if o is None else int(o) for o in outcome.outputs],
        "awake_rounds": trace.awake_rounds.tolist(),
        "last_awake": trace.last_awake.tolist(),
        "total_rounds": trace.total_rounds,
        "messages": {
            "sent": trace.messages_sent,
            "delivered": trace.messages_delivered,
            "dropped": trace.messages_dropped,
        },
        "timed_out": trace.timed_out,
        "call_records": [r.to_dict() for r in trace.call_records],
    }
