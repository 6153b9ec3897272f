"""Fixed sleep schedules and recursion depths for the two recursive algorithms."""
from __future__ import annotations

import math

# Constant steering how far the fast variant truncates its recursion:
# 1 / log2(4/3), the decay base of per-level participation.
ELL = 1.0 / math.log2(4.0 / 3.0)


def ceil_log2(n: int) -> int:
    """Smallest k with 2**k >= n (0 for n=1)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return (n - 1).bit_length()


def _ceil_guarded(x: float) -> int:
    # Guard against 1-ulp float noise pushing an (analytically non-integer)
    # value across an integer boundary.
    r = round(x)
    if abs(x - r) < 1e-9:
        return int(r)
    return math.ceil(x)


def t_schedule(k: int) -> int:
    """Duration in rounds of a level-k recursive call: 3 * (2**k - 1)."""
    if k < 0:
        raise ValueError(f"level must be >= 0, got {k}")
    return 3 * ((1 << k) - 1)


def fast_schedule(k: int, n: int, c: int) -> int:
    """Duration of a level-k call in the truncated variant.

    Solves T'(k) = 2*T'(k-1) + 3 with base T'(0) = c * ceil(log2 n) rounds of
    greedy at the leaves: T'(k) = 2**k * (c*ceil(log2 n) + 3) - 3.
    """
    if k < 0:
        raise ValueError(f"level must be >= 0, got {k}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return (1 << k) * (c * ceil_log2(n) + 3) - 3


def sleeping_depth(n: int) -> int:
    """Recursion depth K = ceil(3 * log2 n) for the full algorithm (0 for n=1)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n == 1:
        return 0
    return _ceil_guarded(3.0 * math.log2(n))


def fast_depth(n: int) -> int:
    """Truncated depth K = ceil(ELL * log2 log2 n), clamped to >= 1 for tiny n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n < 4:
        return 1
    return max(1, _ceil_guarded(ELL * math.log2(math.log2(n))))
