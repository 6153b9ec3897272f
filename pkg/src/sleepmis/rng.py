"""Reproducible per-node random streams.

Every random decision in a simulation is drawn from a stream addressed by
(seed, node, stream tag), so any component can re-derive exactly the bits a
node consumed without threading generator state around.
"""
from __future__ import annotations

import numpy as np

# Registered stream tags. Ints are accepted as raw tags too.
STREAMS = {
    "tape": 0,     # recursion bits X_1..X_K
    "rank": 1,     # greedy leaf ranks
    "luby": 2,     # per-phase Luby values
    "gnp": 3,      # G(n, p) edge sampling
    "tree": 4,     # Pruefer sequence
}

_MAX_SEED = 2**64


def derive_rng(seed: int, node: int, stream: int | str) -> np.random.Generator:
    """Return an independent, reproducible generator for (seed, node, stream).

    Identical arguments always yield an identical stream; distinct arguments
    yield statistically independent streams (PCG64 seeded through a
    SeedSequence spawn key, which mixes all three coordinates).
    """
    seed = int(seed)
    if not 0 <= seed < _MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    tag = STREAMS[stream] if isinstance(stream, str) else int(stream)
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(int(node), tag))
    return np.random.Generator(np.random.PCG64(ss))


def make_tapes(n: int, seed: int, k_levels: int) -> np.ndarray:
    """Draw the per-node bit tapes X_1..X_K as a (n, K) uint8 array.

    tapes[v, i-1] is X_i of node v: a fair bit consumed at recursion level i.
    """
    tapes = np.empty((n, k_levels), dtype=np.uint8)
    for v in range(n):
        tapes[v] = derive_rng(seed, v, "tape").integers(0, 2, size=k_levels, dtype=np.uint8)
    return tapes


def draw_ranks(n: int, seed: int) -> np.ndarray:
    """Draw one greedy rank per node, uniform over [0, n^3)."""
    hi = max(1, n**3)
    ranks = np.empty(n, dtype=np.int64)
    for v in range(n):
        ranks[v] = int(derive_rng(seed, v, "rank").integers(0, hi))
    return ranks
