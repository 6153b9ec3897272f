"""The four complexity measures of a run, computed exactly."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .engine import Trace
from .graphs import Graph
from .oracles import Verdict, check_mis
from .programs import MISStatus


class MetricsError(RuntimeError):
    """Trace incomplete without a failure flag."""


@dataclass(frozen=True)
class ComplexityMetrics:
    avg_awake: Fraction
    max_awake: int
    total_rounds: int
    avg_finish: Fraction
    mis_size: int
    verdict: Verdict

    def to_json_dict(self) -> dict:
        return {
            "avg_awake": float_6(self.avg_awake),
            "max_awake": self.max_awake,
            "total_rounds": self.total_rounds,
            "avg_finish": float_6(self.avg_finish),
            "mis_size": self.mis_size,
            "verdict": self.verdict.kind,
        }


def float_6(x) -> float:
    """Render an exact average with 6 decimal digits, as serialized everywhere."""
    return float(f"{float(x):.6f}")


def compute_metrics(g: Graph, outputs, trace: Trace, *, verdict: Verdict | None = None) -> ComplexityMetrics:
    """Averages are kept as exact rationals; floats appear only at serialization."""
    n = g.n
    if not trace.timed_out and any(o is None for o in outputs):
        raise MetricsError("trace incomplete but not flagged as timed out")
    if verdict is None:
        verdict = Verdict("timeout") if trace.timed_out else check_mis(g, outputs)
    awake_total = int(trace.awake_rounds.sum())
    finish_total = int(trace.last_awake.sum())
    return ComplexityMetrics(
        avg_awake=Fraction(awake_total, n) if n else Fraction(0),
        max_awake=int(trace.awake_rounds.max()) if n else 0,
        total_rounds=trace.total_rounds,
        avg_finish=Fraction(finish_total, n) if n else Fraction(0),
        mis_size=sum(1 for o in outputs if o == MISStatus.IN),
        verdict=verdict,
    )
