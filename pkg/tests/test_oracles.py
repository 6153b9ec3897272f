import math
from fractions import Fraction

import numpy as np
import pytest

from sleepmis import (
    Graph,
    GraphSpec,
    MISStatus,
    check_mis,
    composite_order,
    equivalence_check,
    exact_expectation,
    generate,
    make_tapes,
    naive_is_mis,
    pruning_stats,
    rank_order,
    sequential_greedy,
)
from sleepmis.harness import simulate

IN, OUT, UNK = MISStatus.IN, MISStatus.OUT, MISStatus.UNKNOWN


def triangle():
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


def test_check_mis_examples():
    g = triangle()
    assert check_mis(g, [IN, OUT, OUT]).kind == "valid"
    v = check_mis(g, [IN, IN, OUT])
    assert v.kind == "not_independent" and v.edge == (0, 1)
    path = Graph.from_edges(3, [(0, 1), (1, 2)])
    v = check_mis(path, [IN, OUT, OUT])
    assert v.kind == "not_maximal" and v.node == 2
    v = check_mis(path, [IN, OUT, UNK])
    assert v.kind == "not_maximal"  # undominated unknown counts as a maximality gap
    v = check_mis(g, [IN, UNK, OUT])
    assert v.kind == "undecided" and v.node == 1


def test_check_mis_agrees_with_naive_checker():
    rng = np.random.default_rng(0)
    checked = 0
    for trial in range(100):
        n = int(rng.integers(1, 11))
        p = float(rng.uniform(0, 1))
        g = generate(GraphSpec("gnp", {"n": n, "p": p}, seed=trial))
        members = {v for v in range(n) if rng.random() < 0.4}
        outputs = [IN if v in members else OUT for v in range(n)]
        assert check_mis(g, outputs).ok == naive_is_mis(g, members)
        checked += 1
    assert checked == 100


def test_sequential_greedy_examples():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert sequential_greedy(g, [0, 1, 2]) == {0, 2}
    assert sequential_greedy(g, [1, 0, 2]) == {1}
    empty = Graph.from_edges(3, [])
    assert sequential_greedy(empty, [2, 0, 1]) == {0, 1, 2}
    with pytest.raises(ValueError):
        sequential_greedy(g, [0, 1, 1])


def test_rank_order_examples():
    tapes = np.array([[1, 1, 1], [1, 1, 0]], dtype=np.uint8)  # X_1..X_3 per node
    # full ranks: node0=(1,1,1), node1=(0,1,1): node0 first
    res = rank_order(tapes)
    assert res.ok and res.order == [0, 1]
    tied = np.array([[1, 0, 1], [1, 0, 1]], dtype=np.uint8)
    res = rank_order(tied)
    assert not res.ok and res.ties == [(0, 1)]


def test_rank_tie_frequency_bound():
    # Tie probability per seed is at most C(n,2) * 2^-K; Monte Carlo must stay
    # within 3 sigma of that bound.
    n, k, seeds = 128, 21, 2000
    bound = n * (n - 1) / 2 * 2.0**-k
    ties = sum(1 for s in range(seeds) if not rank_order(make_tapes(n, s, k)).ok)
    sigma = math.sqrt(bound * (1 - bound) * seeds)
    assert ties <= bound * seeds + 3 * sigma + 1


def test_equivalence_single_node():
    g = generate(GraphSpec("path", {"n": 1}))
    rep = equivalence_check(g, 0)
    assert rep.matched and rep.algo_size == 1


def test_equivalence_sleeping_sweep():
    g = generate(GraphSpec("gnp", {"n": 40, "p": 0.12}, seed=11))
    stats = {"ok": 0, "skip": 0}
    for seed in range(60):
        rep = equivalence_check(g, seed)
        if rep.skipped:
            assert rep.skipped == "rank_tie"
            stats["skip"] += 1
        else:
            assert rep.matched, rep
            stats["ok"] += 1
    assert stats["ok"] > 0


def test_equivalence_fast_sweep():
    g = generate(GraphSpec("gnp", {"n": 48, "p": 0.1}, seed=21))
    for seed in range(40):
        rep = equivalence_check(g, seed, "fast")
        if rep.skipped is None:
            assert rep.matched, rep


def test_composite_order_is_total():
    tapes = np.zeros((5, 3), dtype=np.uint8)
    ranks = np.array([7, 7, 3, 9, 3], dtype=np.int64)
    order = composite_order(tapes, ranks)
    assert order == [3, 1, 0, 4, 2]  # rank desc, then id desc


def test_pruning_stats_cycle():
    g = generate(GraphSpec("cycle", {"n": 64}))
    records = []
    for seed in range(40):
        outcome = simulate("sleeping", g, seed)
        records.append(outcome.trace.call_records)
    report = pruning_stats(records, 64)
    # no isolated nodes: every node enters L with probability exactly 1/2
    assert abs(report.root_left_mean - 32) <= 3 * report.root_left_se
    assert report.root_right_mean <= 16 + 3 * report.root_right_se
    assert report.ok, report.violations
    assert report.levels[0].z_mean == 64  # root: everyone participates


def test_pruning_stats_se_shrinks_with_seeds():
    g = generate(GraphSpec("cycle", {"n": 64}))
    records = []
    for seed in range(80):
        records.append(simulate("sleeping", g, seed).trace.call_records)
    small = pruning_stats(records[:20], 64)
    large = pruning_stats(records, 64)
    # quadrupling the seeds should roughly halve the standard error
    assert large.root_left_se < small.root_left_se * 0.8


def test_pruning_stats_guards():
    with pytest.raises(ValueError):
        pruning_stats([], 4)
    with pytest.raises(ValueError):
        pruning_stats([[]], 4)


def test_exact_expectation_single_edge():
    g = Graph.from_edges(2, [(0, 1)])
    ex = exact_expectation(g, 3)
    assert ex.tapes == 64
    assert ex.left == Fraction(1, 1)  # E|L| = n/2 exactly
    assert ex.right == Fraction(1, 2)  # meets the |U|/4 bound exactly
    assert ex.right <= Fraction(2, 4)


def test_exact_expectation_triangle():
    g = triangle()
    ex = exact_expectation(g, 3)
    assert ex.tapes == 512
    assert ex.left == Fraction(3, 2)
    assert ex.right == Fraction(3, 8)
    assert ex.right <= Fraction(3, 4)


def test_exact_expectation_isolated():
    g = Graph.from_edges(2, [])
    ex = exact_expectation(g, 3)
    assert ex.left == 0 and ex.right == 0


def test_exact_expectation_guard():
    g = generate(GraphSpec("cycle", {"n": 9}))
    with pytest.raises(ValueError, match="guard"):
        exact_expectation(g, 3)  # 27 bits > 24
