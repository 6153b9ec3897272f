"""Simple undirected graphs: canonical representation, generators, edge lists.

All algorithms run on `Graph`, which keeps node IDs dense in 0..n-1 and
adjacency lists sorted ascending so that equal graphs are byte-equal when
serialized.
"""
from __future__ import annotations

import heapq
import math
import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .rng import derive_rng

FAMILIES = ("gnp", "cycle", "path", "complete", "star", "tree", "grid", "file")


class GraphConfigError(ValueError):
    """Invalid family name or parameter range."""


class EdgeListError(ValueError):
    """Malformed edge-list text; carries a 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with sorted adjacency lists."""

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    m: int

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build the canonical graph for an iterable of (u, v) pairs."""
        nbrs: list[set[int]] = [set() for _ in range(n)]
        m = 0
        for u, v in edges:
            if u == v:
                raise GraphConfigError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphConfigError(f"edge ({u},{v}) out of range for n={n}")
            if v in nbrs[u]:
                raise GraphConfigError(f"duplicate edge ({u},{v})")
            nbrs[u].add(v)
            nbrs[v].add(u)
            m += 1
        adjacency = tuple(tuple(sorted(s)) for s in nbrs)
        return cls(n=n, adjacency=adjacency, m=m)

    @classmethod
    def _from_sorted_adjacency(cls, n: int, adjacency: tuple, m: int) -> "Graph":
        # Trusted constructor for generators that build canonical rows directly.
        return cls(n=n, adjacency=adjacency, m=m)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def edges(self):
        """Yield edges as (u, v) with u < v, in canonical order."""
        for u in range(self.n):
            for v in self.adjacency[u]:
                if u < v:
                    yield (u, v)

    @cached_property
    def adj_arrays(self) -> list[np.ndarray]:
        """Per-node sorted neighbor arrays (int64), shared by the engine."""
        return [np.asarray(nbrs, dtype=np.int64) for nbrs in self.adjacency]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.asarray([len(nbrs) for nbrs in self.adjacency], dtype=np.int64)


@dataclass(frozen=True)
class GraphSpec:
    """A generator request: family plus family-specific parameters and a seed."""

    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def label(self) -> str:
        parts = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.family}:{parts}" if parts else self.family


@dataclass(frozen=True)
class GraphVerdict:
    ok: bool
    reason: str = ""


def _require_n(params: dict, minimum: int = 1) -> int:
    if "n" not in params:
        raise GraphConfigError("missing parameter n")
    n = int(params["n"])
    if n < minimum:
        raise GraphConfigError(f"n must be >= {minimum}, got {n}")
    return n


def generate(spec: GraphSpec) -> Graph:
    """Deterministically build the graph described by `spec`."""
    family = spec.family
    if family not in FAMILIES:
        raise GraphConfigError(f"unknown graph family {family!r} (choose from {FAMILIES})")
    if family == "file":
        path = spec.params.get("path")
        if not path:
            raise GraphConfigError("file family requires a path")
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise GraphConfigError(f"cannot read edge list {path!r}: {exc}") from exc
        return parse_edge_list(text)
    if family == "gnp":
        n = _require_n(spec.params)
        p = float(spec.params.get("p", -1.0))
        if not 0.0 <= p <= 1.0:
            raise GraphConfigError(f"gnp requires p in [0,1], got {p}")
        return _gnp(n, p, spec.seed)
    if family == "cycle":
        n = _require_n(spec.params, minimum=3)
        rows = tuple(tuple(sorted(((v - 1) % n, (v + 1) % n))) for v in range(n))
        return Graph._from_sorted_adjacency(n, rows, n)
    if family == "path":
        n = _require_n(spec.params)
        if n == 1:
            return Graph._from_sorted_adjacency(1, ((),), 0)
        rows = [(1,)] + [(v - 1, v + 1) for v in range(1, n - 1)] + [(n - 2,)]
        return Graph._from_sorted_adjacency(n, tuple(rows), n - 1)
    if family == "complete":
        n = _require_n(spec.params)
        ids = list(range(n))  # shared int objects keep the rows reference-cheap
        rows = tuple(tuple(ids[:v] + ids[v + 1 :]) for v in range(n))
        return Graph._from_sorted_adjacency(n, rows, n * (n - 1) // 2)
    if family == "star":
        n = _require_n(spec.params)
        if n == 1:
            return Graph._from_sorted_adjacency(1, ((),), 0)
        rows = (tuple(range(1, n)),) + ((0,),) * (n - 1)
        return Graph._from_sorted_adjacency(n, rows, n - 1)
    if family == "tree":
        n = _require_n(spec.params)
        return _uniform_tree(n, spec.seed)
    if family == "grid":
        rows = int(spec.params.get("rows", 0))
        cols = int(spec.params.get("cols", 0))
        if rows < 1 or cols < 1:
            raise GraphConfigError("grid requires rows >= 1 and cols >= 1")
        edges = []
        for r in range(rows):
            for c in range(cols):
                v = r * cols + c
                if c + 1 < cols:
                    edges.append((v, v + 1))
                if r + 1 < rows:
                    edges.append((v, v + cols))
        return Graph.from_edges(rows * cols, edges)
    raise GraphConfigError(f"unhandled family {family!r}")


def _gnp(n: int, p: float, seed: int) -> Graph:
    # Exact G(n,p) via geometric gap-skipping over the canonical pair order
    # (u,v), u < v: one stream, O(n + m) draws instead of one Bernoulli per pair.
    rng = derive_rng(seed, 0, "gnp")
    edges = []
    if p >= 1.0:
        edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    elif p > 0.0:
        log_q = math.log1p(-p)
        for u in range(n - 1):
            v = u
            while True:
                r = rng.random()
                v += 1 + int(math.log1p(-r) / log_q)
                if v >= n:
                    break
                edges.append((u, v))
    return Graph.from_edges(n, edges)


def _uniform_tree(n: int, seed: int) -> Graph:
    # Uniform labeled tree via a random Pruefer sequence.
    if n == 1:
        return Graph.from_edges(1, [])
    if n == 2:
        return Graph.from_edges(2, [(0, 1)])
    seq = derive_rng(seed, 0, "tree").integers(0, n, size=n - 2)
    degree = np.ones(n, dtype=np.int64)
    for x in seq:
        degree[x] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, int(x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, int(x))
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((u, v))
    return Graph.from_edges(n, edges)


_HEADER_RE = re.compile(r"#\s*n\s*=\s*(\d+)\s*$")


def parse_edge_list(text: str) -> Graph:
    """Parse "u v" lines into a Graph.

    '#'-prefixed lines are comments; an optional "# n=<int>" header fixes the
    node count (otherwise it is 1 + the largest node ID seen).
    """
    declared_n: int | None = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    max_id = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            match = _HEADER_RE.match(line)
            if match:
                if declared_n is not None:
                    raise EdgeListError("duplicate n= header", lineno)
                declared_n = int(match.group(1))
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListError(f"expected 'u v', got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"non-integer node ID in {line!r}", lineno) from None
        if u < 0 or v < 0:
            raise EdgeListError(f"negative node ID in {line!r}", lineno)
        if u == v:
            raise EdgeListError(f"self-loop at node {u}", lineno)
        if declared_n is not None and (u >= declared_n or v >= declared_n):
            raise EdgeListError(f"node ID >= declared n={declared_n}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise EdgeListError(f"duplicate edge ({u},{v})", lineno)
        seen.add(key)
        edges.append(key)
        max_id = max(max_id, u, v)
    n = declared_n if declared_n is not None else max_id + 1
    return Graph.from_edges(n, edges)


def serialize(g: Graph) -> str:
    """Canonical edge-list text; parse_edge_list(serialize(g)) == g."""
    lines = [f"# n={g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def validate(g: Graph) -> GraphVerdict:
    """Check all Graph invariants; report the first violation found."""
    if g.n < 0:
        return GraphVerdict(False, f"negative node count {g.n}")
    if len(g.adjacency) != g.n:
        return GraphVerdict(False, f"adjacency has {len(g.adjacency)} rows for n={g.n}")
    deg_sum = 0
    for v in range(g.n):
        nbrs = g.adjacency[v]
        prev = -1
        for w in nbrs:
            if w == v:
                return GraphVerdict(False, f"self-loop at node {v}")
            if not 0 <= w < g.n:
                return GraphVerdict(False, f"neighbor {w} of node {v} out of range")
            if w <= prev:
                return GraphVerdict(False, f"adjacency of node {v} not sorted strictly ascending")
            prev = w
        deg_sum += len(nbrs)
    for v in range(g.n):
        for w in g.adjacency[v]:
            if v not in g.adjacency[w]:
                return GraphVerdict(False, f"asymmetric adjacency: {v}->{w} but not {w}->{v}")
    if deg_sum != 2 * g.m:
        return GraphVerdict(False, f"edge count m={g.m} inconsistent with degree sum {deg_sum}")
    return GraphVerdict(True)
