"""Synchronous round-based execution under sleeping-model semantics.

Per round t, every node scheduled awake at t is activated simultaneously;
messages it declared for round t are delivered within round t to recipients
that are awake at t, and silently dropped for sleeping or terminated
recipients. The clock then jumps to the next round in which anything is
scheduled (fast-forward); skipped rounds still count toward the total.

A node's action always carries the messages for its *next* awake round, which
is the synchronous-causality constraint: what a node sends in a round cannot
depend on what it receives in that same round.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Protocol

import numpy as np

from .graphs import Graph
from .schedules import ceil_log2

DEFAULT_ROUND_CAP = 1 << 40


class EngineError(Exception):
    """Base class for simulation failures."""


class ProgramError(EngineError):
    """A node program violated its contract (e.g. scheduled a wake in the past)."""


class CongestViolation(EngineError):
    """A message broke the bandwidth contract; always a hard failure."""


class SimulationTimeout(EngineError):
    """Round cap exceeded; carries the partial outputs and trace."""

    def __init__(self, message: str, outputs, trace):
        super().__init__(message)
        self.outputs = outputs
        self.trace = trace


def message_budget(n: int) -> int:
    """Per-message payload budget in bits: a status tag plus a rank in [0, n^3)."""
    return 3 * ceil_log2(max(n, 1)) + 8


@dataclass(frozen=True)
class Broadcast:
    """One identical payload to every neighbor (one message per incident edge)."""

    payload: int
    bits: int


@dataclass(frozen=True)
class Unicast:
    payload: int
    bits: int
    dst: int


@dataclass(frozen=True)
class WakeAt:
    """Be awake at absolute round `round`, sending `send` in that round.

    `send` is None (listen only), a Broadcast, or an iterable of Unicasts.
    """

    round: int
    send: Any = None


@dataclass(frozen=True)
class Terminate:
    """Stop participating as of round boundary `at_round` (default: right after
    the current round). The node is never activated again; messages addressed
    to it are dropped."""

    output: Any
    at_round: int | None = None


class NodeProgram(Protocol):
    def start(self) -> WakeAt | Terminate: ...

    def activate(self, round: int, inbox: "Inbox") -> WakeAt | Terminate: ...


@dataclass
class Trace:
    """Exact accounting of one run."""

    awake_rounds: np.ndarray
    last_awake: np.ndarray
    total_rounds: int
    messages_sent: int
    messages_delivered: int
    messages_dropped: int
    outputs: list
    call_records: list = field(default_factory=list)
    timed_out: bool = False


# Below this degree an inbox resolves through a per-round dict instead of
# numpy gathers; the crossover is dominated by per-call numpy overhead.
_SMALL_DEGREE = 32


class _Round:
    """All messages of one round, in broadcast-grouped form."""

    __slots__ = ("sender_ids", "payloads", "full_payload", "unicasts", "_by_src")

    def __init__(self, sender_ids, payloads, n, unicasts):
        self.sender_ids = sender_ids
        self.payloads = payloads
        self.unicasts = unicasts
        self._by_src: dict | None = None
        # Dense lookup pays off once a quarter of the graph is broadcasting.
        if len(sender_ids) > max(4, n // 4):
            full = np.full(n, -1, dtype=np.int64)
            full[sender_ids] = payloads
            self.full_payload = full
        else:
            self.full_payload = None

    def by_src(self) -> dict:
        if self._by_src is None:
            self._by_src = dict(zip(self.sender_ids.tolist(), self.payloads.tolist()))
        return self._by_src


class Inbox:
    """A node's view of the messages delivered to it this round.

    Only messages from awake neighbors are visible. Query by count/any_eq/
    all_eq, or materialize (src, payload) pairs sorted by sender.
    """

    __slots__ = ("_ctx", "_node", "_adj", "_ids", "_payloads", "_is_list")

    def __init__(self, ctx: _Round, node: int, adj):
        self._ctx = ctx
        self._node = node
        self._adj = adj
        self._ids = None
        self._payloads = None
        self._is_list = False

    def _resolve(self) -> None:
        if self._ids is not None:
            return
        ctx = self._ctx
        adj = self._adj
        if len(adj) <= _SMALL_DEGREE:
            by_src = ctx.by_src()
            ids = []
            payloads = []
            for w in adj.tolist():
                p = by_src.get(w)
                if p is not None:
                    ids.append(w)
                    payloads.append(p)
            self._is_list = True
        elif ctx.full_payload is not None:
            pl = ctx.full_payload[adj]
            mask = pl >= 0
            ids = adj[mask]
            payloads = pl[mask]
        elif len(ctx.sender_ids) == 0:
            ids = []
            payloads = []
            self._is_list = True
        else:
            pos = np.searchsorted(ctx.sender_ids, adj)
            pos[pos == len(ctx.sender_ids)] = 0
            mask = ctx.sender_ids[pos] == adj
            ids = adj[mask]
            payloads = ctx.payloads[pos[mask]]
        if ctx.unicasts is not None and self._node in ctx.unicasts:
            extra = ctx.unicasts[self._node]
            merged = sorted(list(zip(self._to_list(ids), self._to_list(payloads))) + extra)
            ids = [src for src, _ in merged]
            payloads = [p for _, p in merged]
            self._is_list = True
        self._ids = ids
        self._payloads = payloads

    @staticmethod
    def _to_list(x):
        return x if isinstance(x, list) else x.tolist()

    def count(self) -> int:
        self._resolve()
        return len(self._ids)

    def any_eq(self, payload: int) -> bool:
        """True if some delivered message carries `payload`."""
        self._resolve()
        if self._is_list:
            return payload in self._payloads
        return bool(np.any(self._payloads == payload))

    def all_eq(self, payload: int) -> bool:
        """True if at least one message arrived and every payload equals `payload`."""
        self._resolve()
        if len(self._ids) == 0:
            return False
        if self._is_list:
            return self._payloads.count(payload) == len(self._payloads)
        return bool(np.all(self._payloads == payload))

    def pairs(self) -> list[tuple[int, int]]:
        """(src, payload) pairs sorted by sender."""
        self._resolve()
        if self._is_list:
            return list(zip(self._ids, self._payloads))
        return list(zip(self._ids.tolist(), self._payloads.tolist()))

    def messages(self) -> list[tuple[int, int]]:
        """Alias of pairs(), for tests and trace dumps."""
        return self.pairs()


def _check_bits(payload: int, bits: int, budget: int) -> None:
    if bits < 0 or bits > budget:
        raise CongestViolation(f"payload of {bits} bits exceeds budget of {budget} bits")
    if payload < 0 or payload >= (1 << bits):
        raise CongestViolation(f"payload {payload} does not fit in {bits} declared bits")


def run(
    g: Graph,
    programs: list,
    *,
    round_cap: int = DEFAULT_ROUND_CAP,
    fast_forward: bool = True,
) -> tuple[list, Trace]:
    """Execute one program per node until all terminate; return (outputs, trace).

    Deterministic: (g, programs) fully determines the result. With
    fast_forward=False the clock steps through every round one by one, which
    is observationally identical but only feasible for short schedules.
    """
    n = g.n
    if len(programs) != n:
        raise ValueError(f"need one program per node: {len(programs)} != {n}")
    budget = message_budget(n)
    adj = g.adj_arrays
    degrees = g.degrees

    awake_rounds = np.zeros(n, dtype=np.int64)
    last_awake = np.zeros(n, dtype=np.int64)
    outputs: list = [None] * n
    done = [False] * n
    pending: list = [None] * n
    wake_heap: list[tuple[int, int]] = []
    sent = delivered = 0
    end_boundary = 0

    def partial_trace(timed_out: bool = False) -> Trace:
        return Trace(
            awake_rounds=awake_rounds,
            last_awake=last_awake,
            total_rounds=end_boundary,
            messages_sent=sent,
            messages_delivered=delivered,
            messages_dropped=sent - delivered,
            outputs=outputs,
            timed_out=timed_out,
        )

    def apply(v: int, action, current: int) -> None:
        nonlocal end_boundary
        if isinstance(action, Terminate):
            at = action.at_round
            if at is None:
                at = current + 1 if current >= 0 else 0
            if at <= current:
                raise ProgramError(f"node {v} terminated at boundary {at} <= round {current}")
            done[v] = True
            outputs[v] = action.output
            if at > end_boundary:
                end_boundary = at
        elif isinstance(action, WakeAt):
            if action.round <= current:
                raise ProgramError(
                    f"node {v} scheduled wake round {action.round} <= current round {current}"
                )
            pending[v] = action.send
            heapq.heappush(wake_heap, (action.round, v))
        else:
            raise ProgramError(f"node {v} returned invalid action {action!r}")

    for v in range(n):
        apply(v, programs[v].start(), -1)

    clock = 0
    while wake_heap:
        if fast_forward:
            t = wake_heap[0][0]
        else:
            t = clock
            if wake_heap[0][0] != t:
                # Empty round: no node awake, nothing to deliver.
                clock += 1
                if clock >= round_cap:
                    raise SimulationTimeout(
                        f"round cap {round_cap} exceeded", outputs, partial_trace(True)
                    )
                continue
        if t >= round_cap:
            raise SimulationTimeout(
                f"round cap {round_cap} exceeded at round {t}", outputs, partial_trace(True)
            )
        awake_now: list[int] = []
        while wake_heap and wake_heap[0][0] == t:
            awake_now.append(heapq.heappop(wake_heap)[1])
        awake_now.sort()

        bc_src: list[int] = []
        bc_payload: list[int] = []
        unicasts: dict[int, list[tuple[int, int]]] = {}
        used_edges: set[tuple[int, int]] | None = None
        for v in awake_now:
            send = pending[v]
            pending[v] = None
            if send is None:
                continue
            if isinstance(send, Broadcast):
                _check_bits(send.payload, send.bits, budget)
                bc_src.append(v)
                bc_payload.append(send.payload)
                sent += int(degrees[v])
            else:
                if used_edges is None:
                    used_edges = set()
                for msg in send:
                    _check_bits(msg.payload, msg.bits, budget)
                    dst = msg.dst
                    row = adj[v]
                    i = int(np.searchsorted(row, dst))
                    if i >= len(row) or row[i] != dst:
                        raise ProgramError(f"node {v} sent to non-neighbor {dst}")
                    if (v, dst) in used_edges:
                        raise CongestViolation(
                            f"two messages on directed edge ({v},{dst}) in round {t}"
                        )
                    used_edges.add((v, dst))
                    unicasts.setdefault(dst, []).append((v, msg.payload))
                    sent += 1

        ctx = _Round(
            np.asarray(bc_src, dtype=np.int64),
            np.asarray(bc_payload, dtype=np.int64),
            n,
            unicasts or None,
        )
        for v in awake_now:
            awake_rounds[v] += 1
            last_awake[v] = t
            inbox = Inbox(ctx, v, adj[v])
            delivered += inbox.count()
            apply(v, programs[v].activate(t, inbox), t)
        if t + 1 > end_boundary:
            end_boundary = t + 1
        clock = t + 1

    if not all(done):
        missing = [v for v in range(n) if not done[v]]
        raise ProgramError(f"nodes {missing[:5]} never terminated nor scheduled a wake")
    return outputs, partial_trace(False)
