"""Acceptance suite: one test per criterion, each printing a pass/fail line.

The heavy sweeps run through the experiment harness (sorted, deterministic,
parallelizable via SLEEPMIS_WORKERS); statistical criteria use fixed seed
ranges so results are reproducible bit-for-bit.
"""
import math
import os
from collections import defaultdict

import numpy as np
import pytest

os.environ.setdefault("SLEEPMIS_WORKERS", str(min(2, os.cpu_count() or 1)))

from sleepmis import (
    equivalence_check,
    exact_expectation,
    fast_depth,
    fast_schedule,
    sleeping_depth,
    t_schedule,
)
from sleepmis.engine import CongestViolation, message_budget, run as engine_run
from sleepmis.graphs import Graph
from sleepmis.harness import ExperimentConfig, build_graph, run_experiment, simulate


def report(num: int, name: str, ok: bool, detail: str) -> None:
    print(f"criterion {num:2d} ({name}): {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def by_cell(rows, key):
    groups = defaultdict(list)
    for row in rows:
        groups[key(row)].append(row)
    return groups


# --- shared sweeps -----------------------------------------------------------


@pytest.fixture(scope="module")
def correctness_rows():
    cfg = ExperimentConfig(
        algos=["sleeping"],
        graphs=[
            "cycle:n=256",
            "gnp:n=256,p=0.05",
            "complete:n=64",
            "tree:n=255",
            "star:n=256",
        ],
        seeds=list(range(1000)),
    )
    return run_experiment(cfg)


@pytest.fixture(scope="module")
def awake_rows():
    cfg = ExperimentConfig(
        algos=["sleeping"],
        graphs=[
            "gnp:n=16..4096x2,p=8/n",
            "cycle:n=16..4096x2",
            "complete:n=16..4096x2",
        ],
        seeds=list(range(100)),
    )
    return run_experiment(cfg)


@pytest.fixture(scope="module")
def fast_rows():
    cfg = ExperimentConfig(
        algos=["fast"],
        graphs=["gnp:n=64..16384x2,p=8/n"],
        seeds=list(range(200)),
        c=6,
    )
    return run_experiment(cfg)


# --- criteria ----------------------------------------------------------------


CORRECTNESS_FAMILIES = {
    "cycle": {"n": 256},
    "gnp": {"n": 256, "p": 0.05},
    "complete": {"n": 64},
    "tree": {"n": 255},
    "star": {"n": 256},
}


def test_criterion_01_correctness_whp(correctness_rows):
    groups = by_cell(correctness_rows, lambda r: (r.family, r.n))
    details = []
    ok = True
    for (family, n), rows in sorted(groups.items()):
        valid = sum(1 for r in rows if r.metrics.verdict.ok)
        rate = valid / len(rows)
        details.append(f"{family}:{n} {valid}/{len(rows)}")
        ok = ok and rate >= 0.99
        for row in rows:
            if not row.metrics.verdict.ok:
                g = build_graph(row.family, CORRECTNESS_FAMILIES[row.family], row.seed)
                outcome = simulate("sleeping", g, row.seed)
                coincides = outcome.rank_tie or outcome.recorder.base_case_multiplicity() >= 2
                ok = ok and coincides
                if not coincides:
                    details.append(f"UNEXPLAINED invalid at {row.family}:{row.n} seed {row.seed}")
    report(1, "correctness whp", ok, "; ".join(details))


def test_criterion_02_oracle_equivalence():
    cases = [
        ("path", {"n": 64}),
        ("cycle", {"n": 128}),
        ("gnp", {"n": 128, "p": 0.1}),
    ]
    mismatches = 0
    ties = 0
    checked = 0
    for family, params in cases:
        for seed in range(500):
            g = build_graph(family, params, seed)
            rep = equivalence_check(g, seed)
            if rep.skipped == "rank_tie":
                ties += 1
            else:
                checked += 1
                if not rep.matched:
                    mismatches += 1
    report(
        2,
        "oracle equivalence",
        mismatches == 0,
        f"{checked} non-tie runs matched, {ties} tie-skipped, {mismatches} mismatches",
    )


def test_criterion_03_schedule_exactness():
    bad = []
    for exp in range(1, 11):
        n = 2**exp
        expect = t_schedule(sleeping_depth(n))
        for family, params in (("path", {"n": n}), ("gnp", {"n": n, "p": 0.3})):
            g = build_graph(family, params, exp)
            outcome = simulate("sleeping", g, exp)
            if outcome.trace.total_rounds != expect:
                bad.append((family, n, outcome.trace.total_rounds, expect))
    report(
        3,
        "schedule exactness",
        not bad,
        "total_rounds == 3*(2^ceil(3 log2 n) - 1) for n in 2..1024" if not bad else str(bad),
    )


def test_criterion_04_worst_case_awake_bound(correctness_rows):
    worst = 0.0
    for row in correctness_rows:
        bound = 3 * (sleeping_depth(row.n) + 1)
        worst = max(worst, row.metrics.max_awake / bound)
        if row.metrics.max_awake > bound:
            report(4, "worst-case awake bound", False, f"{row.family}:{row.n} seed {row.seed}")
    report(4, "worst-case awake bound", True, f"worst max_awake/bound = {worst:.3f} over 5000 runs")


def test_criterion_05_node_averaged_awake_o1(awake_rows):
    groups = by_cell(awake_rows, lambda r: (r.family, r.n))
    means = {
        cell: float(np.mean([float(r.metrics.avg_awake) for r in rows]))
        for cell, rows in groups.items()
    }
    ok = all(mean <= 30 for mean in means.values())
    flat = []
    for family in ("gnp", "cycle", "complete"):
        ratio = means[(family, 4096)] / means[(family, 16)]
        flat.append(f"{family} {means[(family, 16)]:.2f}->{means[(family, 4096)]:.2f} (x{ratio:.2f})")
        ok = ok and ratio <= 2.0
    report(5, "node-averaged awake O(1)", ok, "; ".join(flat))


def test_criterion_06_pruning_lemma():
    roots_left = []
    roots_right = []
    for seed in range(1000):
        g = build_graph("cycle", {"n": 256}, seed)
        outcome = simulate("sleeping", g, seed)
        root = outcome.recorder.records[""]
        roots_left.append(root.left_participants)
        roots_right.append(root.right_participants)
    left = np.asarray(roots_left, dtype=np.float64)
    right = np.asarray(roots_right, dtype=np.float64)
    left_se = left.std(ddof=1) / math.sqrt(len(left))
    right_se = right.std(ddof=1) / math.sqrt(len(right))
    ok_left = abs(left.mean() - 128) <= 3 * left_se
    ok_right = right.mean() <= 64 + 3 * right_se
    ex_edge = exact_expectation(Graph.from_edges(2, [(0, 1)]), 3)
    ex_tri = exact_expectation(Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)]), 3)
    ok_exact = ex_edge.right <= 0.5 and ex_tri.right <= 0.75
    report(
        6,
        "pruning lemma",
        ok_left and ok_right and ok_exact,
        f"root |L| {left.mean():.2f}±{left_se:.3f} (target 128), "
        f"root |R| {right.mean():.2f}±{right_se:.3f} (bound 64); "
        f"exact edge E|R|={ex_edge.right} <= 1/2, triangle E|R|={ex_tri.right} <= 3/4",
    )


def test_criterion_07_z_decay():
    n = 1024
    k_top = sleeping_depth(n)
    sums = defaultdict(list)
    for seed in range(200):
        g = build_graph("gnp", {"n": n, "p": 8 / n}, seed)
        outcome = simulate("sleeping", g, seed)
        totals = outcome.recorder.level_totals()
        for i in range(7):
            sums[i].append(totals.get(k_top - i, 0))
    details = []
    ok = True
    for i in range(7):
        mean = float(np.mean(sums[i]))
        bound = 1.1 * (0.75**i) * n
        ok = ok and mean <= bound
        details.append(f"i={i}: {mean:.1f}<={bound:.1f}")
    report(7, "participation decay", ok, "; ".join(details))


def test_criterion_08_fast_variant(fast_rows):
    groups = by_cell(fast_rows, lambda r: r.n)
    ok = True
    details = []
    normalized = {}
    for n, rows in sorted(groups.items()):
        expect = fast_schedule(fast_depth(n), n, 6)
        totals_ok = all(r.metrics.total_rounds == expect for r in rows)
        awake_bound = 20 * math.log2(n)
        awake_ok = sum(1 for r in rows if r.metrics.max_awake <= awake_bound) / len(rows)
        valid = sum(1 for r in rows if r.metrics.verdict.ok) / len(rows)
        normalized[n] = expect / math.log2(n) ** 3.41
        ok = ok and totals_ok and awake_ok >= 0.99 and valid >= 0.99
        details.append(f"n={n} total={expect} awake_ok={awake_ok:.3f} valid={valid:.3f}")
    spread = max(normalized.values()) / min(normalized.values())
    ok = ok and spread <= 4.0
    details.append(f"normalized-series max/min={spread:.2f}")
    report(8, "fast variant", ok, "; ".join(details))


def test_criterion_09_greedy_termination():
    bound = 6 * math.log2(4096)  # 72 join/out iterations
    ok = True
    details = []
    for family, params in (("gnp", {"n": 4096, "p": 16 / 4096}), ("cycle", {"n": 4096})):
        within = 0
        worst = 0
        for seed in range(500):
            g = build_graph(family, params, seed)
            outcome = simulate("greedy", g, seed)
            iterations = outcome.trace.total_rounds // 2
            worst = max(worst, iterations)
            if iterations <= bound:
                within += 1
        rate = within / 500
        ok = ok and rate >= 0.99
        details.append(f"{family}: {within}/500 within {bound:.0f} iterations (worst {worst})")
    report(9, "greedy termination", ok, "; ".join(details))


def test_criterion_10_congest_compliance(correctness_rows, awake_rows, fast_rows):
    # The budget and per-edge checks are unconditional in the engine; every
    # sweep above completing without CongestViolation means none fired.
    # Verify the checks are actually armed by tripping one deliberately.
    from sleepmis.engine import Broadcast, Terminate, WakeAt

    class Oversized:
        def start(self):
            return WakeAt(0, Broadcast(0, message_budget(2) + 1))

        def activate(self, rnd, inbox):
            return Terminate(None)

    class Quiet:
        def start(self):
            return WakeAt(0, None)

        def activate(self, rnd, inbox):
            return Terminate(None)

    g = Graph.from_edges(2, [(0, 1)])
    try:
        engine_run(g, [Oversized(), Quiet()])
        armed = False
    except CongestViolation:
        armed = True
    runs = len(correctness_rows) + len(awake_rows) + len(fast_rows)
    report(
        10,
        "bandwidth compliance",
        armed,
        f"budget checks armed; no violation across {runs} simulations",
    )


def test_criterion_11_engine_equivalence():
    cases = [
        ("path", {"n": 24}),
        ("cycle", {"n": 32}),
        ("gnp", {"n": 24, "p": 0.15}),
    ]
    checked = 0
    for family, params in cases:
        for seed in range(50):
            g = build_graph(family, params, seed)
            a = simulate("sleeping", g, seed)
            b = simulate("sleeping", g, seed, fast_forward=False)
            same = (
                a.outputs == b.outputs
                and np.array_equal(a.trace.awake_rounds, b.trace.awake_rounds)
                and np.array_equal(a.trace.last_awake, b.trace.last_awake)
                and a.trace.total_rounds == b.trace.total_rounds
                and a.trace.messages_sent == b.trace.messages_sent
                and a.trace.messages_delivered == b.trace.messages_delivered
                and a.trace.messages_dropped == b.trace.messages_dropped
            )
            if not same:
                report(11, "engine equivalence", False, f"{family} seed {seed} diverged")
            checked += 1
    report(11, "engine equivalence", True, f"fast-forward == stepping on {checked} runs")
