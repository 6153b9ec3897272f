"""Node programs: the recursive sleeping MIS algorithm, its truncated fast
variant with greedy leaves, standalone distributed randomized greedy, and a
Luby baseline.

Each program is written as a coroutine that yields WakeAt actions (absolute
wake round plus the broadcast for that round) and receives the round's Inbox
back. The recursion schedule is then encoded directly by the structure of the
coroutine: a frame at level k entered at round s performs its neighborhood
probe at s, runs/sleeps the left recursion for the fixed duration of a level
k-1 call, exchanges statuses twice, and runs/sleeps the right recursion, so
every participant of a call hits the same absolute rounds without any shared
clock beyond the round number.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .engine import Broadcast, Terminate, WakeAt
from .graphs import Graph
from .rng import derive_rng, draw_ranks, make_tapes
from .schedules import ELL, ceil_log2, fast_depth, fast_schedule, sleeping_depth, t_schedule


class MISStatus(IntEnum):
    UNKNOWN = 0
    IN = 1
    OUT = 2


# Wire payloads. Statuses go on the wire as their enum value (2 bits).
PRESENCE = 1
MSG_JOINED = 1
MSG_OUT = 2


@dataclass
class AlgoParams:
    """Knobs of the truncated variant."""

    k_levels: int
    c: int = 6
    ell: float = ELL
    variant: str = "fast"


@dataclass
class CallRecord:
    """Aggregate counters for one recursive call (one recursion-tree vertex).

    path is the left/right descent string from the root ("" for the root
    call); k is the call's level parameter.
    """

    path: str
    k: int
    participants: int = 0
    left_participants: int = 0
    right_participants: int = 0
    isolated_joins: int = 0
    eliminations: int = 0
    second_detection_joins: int = 0
    undecided_at_close: int = 0

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "k": self.k,
            "participants": self.participants,
            "left_participants": self.left_participants,
            "right_participants": self.right_participants,
            "isolated_joins": self.isolated_joins,
            "eliminations": self.eliminations,
            "second_detection_joins": self.second_detection_joins,
            "undecided_at_close": self.undecided_at_close,
        }


class CallRecorder:
    """Shared per-run registry of CallRecords, keyed by recursion-tree path."""

    def __init__(self):
        self.records: dict[str, CallRecord] = {}

    def enter(self, path: str, k: int) -> CallRecord:
        rec = self.records.get(path)
        if rec is None:
            rec = CallRecord(path=path, k=k)
            self.records[path] = rec
        rec.participants += 1
        return rec

    def finalize(self) -> list[CallRecord]:
        return [self.records[p] for p in sorted(self.records, key=lambda p: (len(p), p))]

    def level_totals(self) -> dict[int, int]:
        """Total participants across all calls at each level k."""
        totals: dict[int, int] = {}
        for rec in self.records.values():
            totals[rec.k] = totals.get(rec.k, 0) + rec.participants
        return totals

    def base_case_multiplicity(self) -> int:
        """Largest number of nodes sharing one level-0 call."""
        return max((r.participants for r in self.records.values() if r.k == 0), default=0)


class _Cell:
    __slots__ = ("status",)

    def __init__(self):
        self.status = MISStatus.UNKNOWN


class _GenProgram:
    """Adapts a coroutine of WakeAt yields to the engine's program protocol."""

    __slots__ = ("_gen", "_cell", "_end_boundary")

    def __init__(self, gen, cell: _Cell, end_boundary: int | None):
        self._gen = gen
        self._cell = cell
        self._end_boundary = end_boundary

    def start(self):
        try:
            return next(self._gen)
        except StopIteration:
            return Terminate(self._cell.status, self._end_boundary)

    def activate(self, rnd, inbox):
        try:
            return self._gen.send(inbox)
        except StopIteration:
            return Terminate(self._cell.status, self._end_boundary)


def _beats_all(my_key: int, my_id: int, others: dict) -> bool:
    # Strict (key, id) maximum over {id: key}; larger id breaks key ties.
    if not others:
        return True
    return (my_key, my_id) > max((key, w) for w, key in others.items())


def _recursive_gen(cell, node, tape, k_top, duration_of, leaf, recorder):
    """Shared skeleton of the two recursive algorithms.

    duration_of(k) gives the fixed span of a level-k call; leaf is a
    sub-coroutine run at level 0 (None means: join immediately, zero rounds).
    """

    def call(k, start, path):
        rec = recorder.enter(path, k) if recorder is not None else None
        if k == 0:
            if leaf is None:
                cell.status = MISStatus.IN
            else:
                yield from leaf(start)
                if rec is not None and cell.status == MISStatus.UNKNOWN:
                    rec.undecided_at_close += 1
            return
        # Neighborhood probe: exactly the call's participants are awake, so
        # the senders heard here are this node's neighbors inside the call.
        inbox = yield WakeAt(start, Broadcast(PRESENCE, 1))
        if inbox.count() == 0:
            cell.status = MISStatus.IN
            if rec is not None:
                rec.isolated_joins += 1
        dur = duration_of(k - 1)
        if cell.status == MISStatus.UNKNOWN and tape[k - 1] == 1:
            if rec is not None:
                rec.left_participants += 1
            yield from call(k - 1, start + 1, path + "L")
        sync = start + 1 + dur
        inbox = yield WakeAt(sync, Broadcast(int(cell.status), 2))
        if cell.status == MISStatus.UNKNOWN and inbox.any_eq(int(MISStatus.IN)):
            cell.status = MISStatus.OUT
            if rec is not None:
                rec.eliminations += 1
        inbox = yield WakeAt(sync + 1, Broadcast(int(cell.status), 2))
        if cell.status == MISStatus.UNKNOWN and inbox.all_eq(int(MISStatus.OUT)):
            cell.status = MISStatus.IN
            if rec is not None:
                rec.second_detection_joins += 1
        if cell.status == MISStatus.UNKNOWN:
            if rec is not None:
                rec.right_participants += 1
            yield from call(k - 1, sync + 2, path + "R")

    yield from call(k_top, 0, "")


def _greedy_core(cell, node, rank, rank_bits, start, window_end):
    """Randomized greedy rounds: one rank broadcast, then join/out pairs.

    window_end is the first round NOT available (None: unbounded). Returns
    once the node is decided and has notified its neighbors, or when the
    window closes.
    """
    if window_end is not None and start >= window_end:
        return
    inbox = yield WakeAt(start, Broadcast(rank, rank_bits))
    undecided = dict(inbox.pairs())  # neighbor -> its rank, while undecided
    t = start + 1
    while True:
        if window_end is not None and t >= window_end:
            return
        if _beats_all(rank, node, undecided):
            yield WakeAt(t, Broadcast(MSG_JOINED, 2))
            cell.status = MISStatus.IN
            return
        inbox = yield WakeAt(t, None)
        if inbox.any_eq(MSG_JOINED):
            # A neighbor claimed the maximum; we are dominated.
            cell.status = MISStatus.OUT
            if window_end is None or t + 1 < window_end:
                yield WakeAt(t + 1, Broadcast(MSG_OUT, 2))
            return
        if window_end is not None and t + 1 >= window_end:
            return
        inbox = yield WakeAt(t + 1, None)
        for w, payload in inbox.pairs():
            if payload == MSG_OUT:
                undecided.pop(w, None)
        t += 2


def _luby_gen(cell, node, n, rng):
    value_bits = 2 + 3 * ceil_log2(max(n, 1))
    hi = max(1, n**3)
    t = 0
    while True:
        val = int(rng.integers(0, hi))
        inbox = yield WakeAt(t, Broadcast(val, value_bits))
        if _beats_all(val, node, dict(inbox.pairs())):
            yield WakeAt(t + 1, Broadcast(MSG_JOINED, 2))
            cell.status = MISStatus.IN
            return
        inbox = yield WakeAt(t + 1, None)
        if inbox.any_eq(MSG_JOINED):
            cell.status = MISStatus.OUT
            yield WakeAt(t + 2, Broadcast(MSG_OUT, 2))
            return
        # Baseline stays awake through the whole phase, as in the model
        # without sleeping.
        yield WakeAt(t + 2, None)
        t += 3


def k_rank(tape: np.ndarray, k: int) -> tuple:
    """Priority sequence (X_k, ..., X_1, -1) of a node at level k."""
    if k < 0 or k > len(tape):
        raise ValueError(f"level {k} outside tape of length {len(tape)}")
    if k == 0:
        return (-1,)
    return tuple(int(b) for b in tape[k - 1 :: -1]) + (-1,)


def compare_ranks(a: tuple, b: tuple) -> int:
    """Strict lexicographic comparison: -1, 0, or 1."""
    if a < b:
        return -1
    return 1 if a > b else 0


def sleeping_mis_program(
    g: Graph, node: int, tape: np.ndarray, k_levels: int, recorder: CallRecorder | None = None
):
    """Program for one node of the full recursive algorithm."""
    if len(tape) < k_levels:
        raise ValueError(f"tape of length {len(tape)} shorter than K={k_levels}")
    cell = _Cell()
    gen = _recursive_gen(cell, node, tape, k_levels, t_schedule, None, recorder)
    return _GenProgram(gen, cell, t_schedule(k_levels))


def sleeping_mis_programs(
    g: Graph,
    seed: int | None = None,
    *,
    k_levels: int | None = None,
    tapes: np.ndarray | None = None,
    recorder: CallRecorder | None = None,
):
    """Build one program per node; returns (programs, recorder, tapes)."""
    if k_levels is None:
        k_levels = sleeping_depth(g.n)
    if tapes is None:
        if seed is None:
            raise ValueError("need a seed when tapes are not supplied")
        tapes = make_tapes(g.n, seed, k_levels)
    if recorder is None:
        recorder = CallRecorder()
    programs = [sleeping_mis_program(g, v, tapes[v], k_levels, recorder) for v in range(g.n)]
    return programs, recorder, tapes


def fast_sleeping_mis_program(
    g: Graph,
    node: int,
    tape: np.ndarray,
    params: AlgoParams,
    rank: int,
    recorder: CallRecorder | None = None,
):
    """Program for one node of the truncated variant (greedy base case)."""
    n = g.n
    if len(tape) < params.k_levels:
        raise ValueError(f"tape of length {len(tape)} shorter than K={params.k_levels}")
    cell = _Cell()
    window = params.c * ceil_log2(max(n, 1))
    rank_bits = 2 + 3 * ceil_log2(max(n, 1))

    def leaf(start):
        yield from _greedy_core(cell, node, rank, rank_bits, start, start + window)

    def duration_of(k):
        return fast_schedule(k, n, params.c)

    gen = _recursive_gen(cell, node, tape, params.k_levels, duration_of, leaf, recorder)
    return _GenProgram(gen, cell, fast_schedule(params.k_levels, n, params.c))


def fast_sleeping_mis_programs(
    g: Graph,
    seed: int,
    *,
    params: AlgoParams | None = None,
    recorder: CallRecorder | None = None,
):
    """Build one fast-variant program per node; returns (programs, recorder, tapes, ranks)."""
    if params is None:
        params = AlgoParams(k_levels=fast_depth(g.n))
    tapes = make_tapes(g.n, seed, params.k_levels)
    ranks = draw_ranks(g.n, seed)
    if recorder is None:
        recorder = CallRecorder()
    programs = [
        fast_sleeping_mis_program(g, v, tapes[v], params, int(ranks[v]), recorder)
        for v in range(g.n)
    ]
    return programs, recorder, tapes, ranks


def greedy_mis_program(g: Graph, node: int, rank: int):
    """Standalone randomized greedy: terminates once decided and neighbors notified."""
    cell = _Cell()
    rank_bits = 2 + 3 * ceil_log2(max(g.n, 1))
    gen = _greedy_core(cell, node, rank, rank_bits, 0, None)
    return _GenProgram(gen, cell, None)


def greedy_mis_programs(g: Graph, seed: int):
    """Build one greedy program per node; returns (programs, ranks)."""
    ranks = draw_ranks(g.n, seed)
    programs = [greedy_mis_program(g, v, int(ranks[v])) for v in range(g.n)]
    return programs, ranks


def luby_program(g: Graph, node: int, seed: int):
    cell = _Cell()
    gen = _luby_gen(cell, node, g.n, derive_rng(seed, node, "luby"))
    return _GenProgram(gen, cell, None)


def luby_programs(g: Graph, seed: int):
    return [luby_program(g, v, seed) for v in range(g.n)]
