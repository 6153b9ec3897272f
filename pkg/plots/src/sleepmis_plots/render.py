"""Render aggregate figures from the simulator's experiment CSV.

Each figure aggregates rows by (algo, family, n) with mean and standard-error
bars on a log-scaled x-axis, and dumps the aggregated numbers as a CSV next to
the image so downstream checks never have to parse pixels. Rendering is
headless and byte-deterministic for a fixed input.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# figure kind -> CSV column plotted on the y-axis
KINDS = {
    "awake_vs_n": "avg_awake",
    "maxawake_vs_n": "max_awake",
    "rounds_vs_n": "total_rounds",
}

# exponent of the log-polylog reference curve overlaid on rounds_vs_n
ROUNDS_REFERENCE_EXPONENT = 3.41

REQUIRED_COLUMNS = ("algo", "family", "n", "seed")


class RenderError(ValueError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    csv_path: str
    kind: str
    out_path: str
    algo: str | None = None
    family: str | None = None


def load_rows(csv_path: str, metric: str) -> list[dict]:
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        columns = reader.fieldnames or []
        missing = [c for c in (*REQUIRED_COLUMNS, metric) if c not in columns]
        if missing:
            raise RenderError(f"CSV {csv_path} lacks columns: {', '.join(missing)}")
        return list(reader)


def aggregate(rows: list[dict], metric: str) -> list[dict]:
    """Group by (algo, family, n); emit mean and standard error of `metric`."""
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        key = (row["algo"], row["family"], int(row["n"]))
        groups.setdefault(key, []).append(float(row[metric]))
    out = []
    for (algo, family, n) in sorted(groups):
        values = np.asarray(groups[(algo, family, n)], dtype=np.float64)
        se = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
        out.append(
            {
                "algo": algo,
                "family": family,
                "n": n,
                "count": len(values),
                "mean": float(values.mean()),
                "se": se,
            }
        )
    return out


def fit_reference(agg: list[dict]) -> float:
    """Envelope scale a with mean <= a * (log2 n)^exponent at every point.

    The reference visualizes an upper bound, so the curve is fitted to the
    worst ratio; residuals (mean - fit) are then all <= 0.
    """
    ratios = [
        row["mean"] / math.log2(row["n"]) ** ROUNDS_REFERENCE_EXPONENT
        for row in agg
        if row["n"] > 1
    ]
    if not ratios:
        raise RenderError("degenerate reference fit")
    return max(ratios)


def render(spec: FigureSpec) -> tuple[str, str]:
    """Write the figure and its aggregate CSV; returns both paths."""
    if spec.kind not in KINDS:
        raise RenderError(f"unknown figure kind {spec.kind!r} (choose from {sorted(KINDS)})")
    metric = KINDS[spec.kind]
    rows = load_rows(spec.csv_path, metric)
    if spec.algo:
        rows = [r for r in rows if r["algo"] == spec.algo]
    if spec.family:
        rows = [r for r in rows if r["family"] == spec.family]
    if not rows:
        raise RenderError("no rows left after filtering")
    agg = aggregate(rows, metric)

    scale = None
    if spec.kind == "rounds_vs_n":
        scale = fit_reference(agg)
        for row in agg:
            row["fit"] = scale * math.log2(row["n"]) ** ROUNDS_REFERENCE_EXPONENT
            row["residual"] = row["mean"] - row["fit"]

    fig, ax = plt.subplots(figsize=(7.0, 4.5), dpi=150)
    series: dict[tuple, list[dict]] = {}
    for row in agg:
        series.setdefault((row["algo"], row["family"]), []).append(row)
    for (algo, family), points in sorted(series.items()):
        ns = [p["n"] for p in points]
        means = [p["mean"] for p in points]
        errs = [p["se"] for p in points]
        ax.errorbar(ns, means, yerr=errs, marker="o", capsize=3, label=f"{algo} / {family}")
    if scale is not None:
        ns = sorted({row["n"] for row in agg})
        ref = [scale * math.log2(n) ** ROUNDS_REFERENCE_EXPONENT for n in ns]
        ax.plot(ns, ref, "--", color="gray",
                label=f"{scale:.3g} * (log2 n)^{ROUNDS_REFERENCE_EXPONENT}")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("n")
    ax.set_ylabel(metric)
    ax.set_title(spec.kind)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.out_path, metadata={"Software": "sleepmis-plots"})
    plt.close(fig)

    agg_path = aggregate_path(spec.out_path)
    columns = ["algo", "family", "n", "count", "mean", "se"]
    if scale is not None:
        columns += ["fit", "residual"]
    lines = [",".join(columns)]
    for row in agg:
        lines.append(",".join(_render_value(row[c]) for c in columns))
    with open(agg_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return spec.out_path, agg_path


def aggregate_path(out_path: str) -> str:
    stem, dot, _ext = out_path.rpartition(".")
    return (stem if dot else out_path) + "_aggregate.csv"


def _render_value(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)
