"""Independent correctness oracles and statistical validation.

Everything here checks simulator output through a different code path than
the one that produced it: a linear-time MIS checker (plus a brute-force
definition checker for tiny graphs), the sequential greedy reference that the
distributed algorithms must reproduce order-for-order, and Monte-Carlo /
exhaustive estimates of the per-call participation bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import engine
from .graphs import Graph
from .programs import (
    AlgoParams,
    CallRecord,
    CallRecorder,
    MISStatus,
    fast_sleeping_mis_programs,
    sleeping_mis_programs,
)
from .schedules import fast_depth


@dataclass(frozen=True)
class Verdict:
    """Outcome of an MIS check: valid, or the first violation found."""

    kind: str  # valid | not_independent | not_maximal | undecided | timeout
    edge: tuple[int, int] | None = None
    node: int | None = None

    @property
    def ok(self) -> bool:
        return self.kind == "valid"


VALID = Verdict("valid")


def check_mis(g: Graph, outputs) -> Verdict:
    """Classify a complete output vector in O(n + m).

    Precedence: an independence violation wins over a maximality violation,
    which wins over an undecided node.
    """
    st = np.asarray(
        [int(MISStatus.UNKNOWN) if o is None else int(o) for o in outputs], dtype=np.int64
    )
    in_mask = st == int(MISStatus.IN)
    adj = g.adj_arrays
    for v in range(g.n):
        if in_mask[v]:
            hits = g.adj_arrays[v][in_mask[adj[v]]]
            if hits.size:
                w = int(hits[0])
                return Verdict("not_independent", edge=(min(v, w), max(v, w)))
    for v in range(g.n):
        if not in_mask[v] and not bool(in_mask[adj[v]].any()):
            return Verdict("not_maximal", node=v)
    unknown = np.nonzero(st == int(MISStatus.UNKNOWN))[0]
    if unknown.size:
        return Verdict("undecided", node=int(unknown[0]))
    return VALID


def naive_is_mis(g: Graph, members: set[int]) -> bool:
    """Definition-based check: independent, and no strict independent superset."""

    def independent(s: set[int]) -> bool:
        return all(w not in s for u in s for w in g.adjacency[u])

    if not independent(members):
        return False
    return all(not independent(members | {v}) for v in range(g.n) if v not in members)


def sequential_greedy(g: Graph, order) -> frozenset:
    """Scan `order`; a node joins iff no earlier neighbor joined."""
    order = list(order)
    if sorted(order) != list(range(g.n)):
        raise ValueError("order must be a permutation of 0..n-1")
    blocked = np.zeros(g.n, dtype=bool)
    members = []
    for v in order:
        if not blocked[v]:
            members.append(v)
            blocked[g.adj_arrays[v]] = True
    result = frozenset(members)
    assert check_mis(g, _status_vector(g.n, result)).ok
    return result


def _status_vector(n: int, members: frozenset) -> list[int]:
    return [int(MISStatus.IN) if v in members else int(MISStatus.OUT) for v in range(n)]


@dataclass
class RankOrderResult:
    """Nodes sorted by strictly decreasing full-depth rank, or the tie report."""

    order: list[int] | None
    ties: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.order is not None


def rank_order(tapes: np.ndarray) -> RankOrderResult:
    """Sort nodes by decreasing (X_K, ..., X_1); report colliding pairs if any."""
    n = len(tapes)
    keys = [tuple(int(b) for b in tapes[v][::-1]) for v in range(n)]
    groups: dict[tuple, list[int]] = {}
    for v, key in enumerate(keys):
        groups.setdefault(key, []).append(v)
    ties = [pair for nodes in groups.values() if len(nodes) > 1 for pair in combinations(nodes, 2)]
    if ties:
        return RankOrderResult(None, sorted(ties))
    order = sorted(range(n), key=lambda v: keys[v], reverse=True)
    return RankOrderResult(order)


def composite_order(tapes: np.ndarray, ranks: np.ndarray) -> list[int]:
    """Node order induced by the truncated variant: decreasing
    (X_K, ..., X_1, leaf rank, node ID). Total thanks to the ID tiebreak."""
    n = len(tapes)
    keys = [tuple(int(b) for b in tapes[v][::-1]) + (int(ranks[v]), v) for v in range(n)]
    return sorted(range(n), key=lambda v: keys[v], reverse=True)


@dataclass
class EquivalenceReport:
    algo: str
    seed: int
    verdict: str
    skipped: str | None  # None | rank_tie | invalid | leaf_timeout
    matched: bool | None
    algo_size: int = 0
    oracle_size: int = 0
    first_diff: int | None = None


def equivalence_check(g: Graph, seed: int, algo: str = "sleeping", *, c: int = 6) -> EquivalenceReport:
    """Compare a run's MIS against the sequential greedy oracle for its order.

    For the full algorithm the oracle order is the decreasing full-depth rank;
    seeds with colliding tapes are skipped (and reported). For the truncated
    variant the order appends (leaf rank, node ID) and the comparison applies
    whenever the run was valid with every leaf finishing inside its window.
    """
    if algo == "sleeping":
        programs, recorder, tapes = sleeping_mis_programs(g, seed)
        outputs, trace = engine.run(g, programs)
        verdict = check_mis(g, outputs)
        ordering = rank_order(tapes)
        if not ordering.ok:
            return EquivalenceReport(algo, seed, verdict.kind, "rank_tie", None)
        oracle = sequential_greedy(g, ordering.order)
    elif algo == "fast":
        params = AlgoParams(k_levels=fast_depth(g.n), c=c)
        programs, recorder, tapes, ranks = fast_sleeping_mis_programs(g, seed, params=params)
        outputs, trace = engine.run(g, programs)
        verdict = check_mis(g, outputs)
        if not verdict.ok:
            return EquivalenceReport(algo, seed, verdict.kind, "invalid", None)
        if any(r.k == 0 and r.undecided_at_close for r in recorder.records.values()):
            return EquivalenceReport(algo, seed, verdict.kind, "leaf_timeout", None)
        oracle = sequential_greedy(g, composite_order(tapes, ranks))
    else:
        raise ValueError(f"no order oracle for algorithm {algo!r}")

    produced = frozenset(v for v in range(g.n) if outputs[v] == MISStatus.IN)
    if produced == oracle:
        return EquivalenceReport(
            algo, seed, verdict.kind, None, True, len(produced), len(oracle)
        )
    first_diff = min(produced.symmetric_difference(oracle))
    return EquivalenceReport(
        algo, seed, verdict.kind, None, False, len(produced), len(oracle), first_diff
    )


@dataclass
class LevelStat:
    depth: int  # i, counting down from the top: level k = K - i
    z_mean: float
    z_se: float
    z_bound: float
    left_ratio_mean: float | None
    left_ratio_se: float | None
    right_ratio_mean: float | None
    right_ratio_se: float | None
    violated: bool


@dataclass
class PruningReport:
    seeds: int
    n: int
    k_top: int
    root_left_mean: float
    root_left_se: float
    root_right_mean: float
    root_right_se: float
    levels: list[LevelStat]
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def _mean_se(samples: np.ndarray) -> tuple[float, float]:
    mean = float(samples.mean())
    if len(samples) < 2:
        return mean, 0.0
    return mean, float(samples.std(ddof=1) / math.sqrt(len(samples)))


def pruning_stats(records_per_seed: list[list[CallRecord]], n: int, max_depth: int = 8) -> PruningReport:
    """Aggregate per-call participation counts across seeds and compare the
    sample means against the per-call expectation bounds (half the call for
    the left recursion, a quarter for the right, geometric decay per level)."""
    seeds = len(records_per_seed)
    if seeds < 2:
        raise ValueError("need at least 2 seeds of records")
    if any(not recs for recs in records_per_seed):
        raise ValueError("empty record set")
    k_top = max(r.k for r in records_per_seed[0])
    root_left = np.array(
        [next(r for r in recs if r.path == "").left_participants for recs in records_per_seed],
        dtype=np.float64,
    )
    root_right = np.array(
        [next(r for r in recs if r.path == "").right_participants for recs in records_per_seed],
        dtype=np.float64,
    )
    violations: list[str] = []
    rl_mean, rl_se = _mean_se(root_left)
    rr_mean, rr_se = _mean_se(root_right)
    if rl_mean > n / 2 + 3 * rl_se:
        violations.append(f"root left mean {rl_mean:.3f} exceeds {n / 2} + 3*SE")
    if rr_mean > n / 4 + 3 * rr_se:
        violations.append(f"root right mean {rr_mean:.3f} exceeds {n / 4} + 3*SE")

    levels: list[LevelStat] = []
    for i in range(min(max_depth, k_top) + 1):
        k = k_top - i
        z = np.array(
            [sum(r.participants for r in recs if r.k == k) for recs in records_per_seed],
            dtype=np.float64,
        )
        z_mean, z_se = _mean_se(z)
        bound = (0.75**i) * n
        lr = [
            r.left_participants / r.participants
            for recs in records_per_seed
            for r in recs
            if r.k == k and r.participants
        ]
        rr = [
            r.right_participants / r.participants
            for recs in records_per_seed
            for r in recs
            if r.k == k and r.participants
        ]
        lr_mean, lr_se = _mean_se(np.asarray(lr)) if lr else (None, None)
        rr_mean_i, rr_se_i = _mean_se(np.asarray(rr)) if rr else (None, None)
        violated = z_mean > bound + 3 * z_se
        if violated:
            violations.append(
                f"level k={k} (depth {i}): mean participation {z_mean:.3f} exceeds "
                f"(3/4)^{i} * n = {bound:.3f} + 3*SE"
            )
        levels.append(
            LevelStat(i, z_mean, z_se, bound, lr_mean, lr_se, rr_mean_i, rr_se_i, violated)
        )
    return PruningReport(
        seeds, n, k_top, rl_mean, rl_se, rr_mean, rr_se, levels, violations
    )


EXACT_GUARD_BITS = 24


@dataclass(frozen=True)
class ExactExpectation:
    left: Fraction
    right: Fraction
    tapes: int


def exact_expectation(g: Graph, k_levels: int) -> ExactExpectation:
    """Exact E[|L|], E[|R|] of the root call by enumerating all bit tapes.

    Brute force over 2**(n*K) assignments; guarded so the state space stays
    enumerable. This is the independent oracle for the expectation bounds.
    """
    n = g.n
    bits = n * k_levels
    if bits > EXACT_GUARD_BITS:
        raise ValueError(
            f"n*K = {bits} exceeds enumeration guard {EXACT_GUARD_BITS}; "
            "use pruning_stats for Monte-Carlo estimates instead"
        )
    total = 1 << bits
    left_sum = 0
    right_sum = 0
    for idx in range(total):
        tapes = np.empty((n, k_levels), dtype=np.uint8)
        for v in range(n):
            for i in range(k_levels):
                tapes[v, i] = (idx >> (v * k_levels + i)) & 1
        recorder = CallRecorder()
        programs, recorder, _ = sleeping_mis_programs(
            g, tapes=tapes, k_levels=k_levels, recorder=recorder
        )
        engine.run(g, programs)
        root = recorder.records[""]
        left_sum += root.left_participants
        right_sum += root.right_participants
    return ExactExpectation(Fraction(left_sum, total), Fraction(right_sum, total), total)
