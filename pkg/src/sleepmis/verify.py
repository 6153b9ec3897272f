"""Verification campaigns: drive the oracles across seed ranges and summarize."""
from __future__ import annotations

from dataclasses import dataclass

from .graphs import GraphSpec
from .harness import build_graph, parse_graph_template, simulate
from .oracles import equivalence_check, exact_expectation, pruning_stats
from .schedules import sleeping_depth

CHECKS = ("mis", "equiv", "pruning", "zdecay", "exact")


@dataclass
class VerifyResult:
    report: dict
    hard_fail: bool


def _mis_check(algo, family, params, seeds, c, k_override) -> dict:
    counts = {"valid": 0, "invalid": 0, "timeout": 0}
    invalid_seeds = []
    uncoincident = []
    for seed in seeds:
        g = build_graph(family, params, seed)
        outcome = simulate(algo, g, seed, c=c, k_override=k_override)
        if outcome.timed_out:
            counts["timeout"] += 1
            continue
        from .oracles import check_mis

        verdict = check_mis(g, outcome.outputs)
        if verdict.ok:
            counts["valid"] += 1
        else:
            counts["invalid"] += 1
            invalid_seeds.append(seed)
            multiplicity = (
                outcome.recorder.base_case_multiplicity() if outcome.recorder else 0
            )
            if not outcome.rank_tie and multiplicity < 2:
                uncoincident.append(seed)
    return {
        "runs": len(seeds),
        **counts,
        "invalid_seeds": invalid_seeds,
        "invalid_without_tie_or_multiplicity": uncoincident,
    }


def _equiv_check(algo, family, params, seeds, c) -> tuple[dict, bool]:
    matched = 0
    mismatched = []
    skipped: dict[str, int] = {}
    for seed in seeds:
        g = build_graph(family, params, seed)
        report = equivalence_check(g, seed, algo, c=c)
        if report.skipped:
            skipped[report.skipped] = skipped.get(report.skipped, 0) + 1
        elif report.matched:
            matched += 1
        else:
            mismatched.append(
                {"seed": seed, "first_diff": report.first_diff, "verdict": report.verdict}
            )
    return (
        {
            "runs": len(seeds),
            "matched": matched,
            "mismatched": mismatched,
            "skipped": skipped,
        },
        bool(mismatched),
    )


def _collect_records(family, params, seeds, k_override):
    per_seed = []
    n = None
    for seed in seeds:
        g = build_graph(family, params, seed)
        n = g.n
        outcome = simulate("sleeping", g, seed, k_override=k_override)
        per_seed.append(outcome.recorder.finalize())
    return per_seed, n


def _level_stat_dict(stat) -> dict:
    return {
        "depth": stat.depth,
        "z_mean": stat.z_mean,
        "z_se": stat.z_se,
        "z_bound": stat.z_bound,
        "left_ratio_mean": stat.left_ratio_mean,
        "right_ratio_mean": stat.right_ratio_mean,
        "violated": stat.violated,
    }


def run_checks(
    algo: str,
    graph_template: str,
    seeds: list[int],
    checks: list[str],
    *,
    c: int = 6,
    k_override: int | None = None,
) -> VerifyResult:
    for check in checks:
        if check not in CHECKS:
            raise ValueError(f"unknown check {check!r} (choose from {CHECKS})")
    if not seeds:
        raise ValueError("empty seed range")
    instances = parse_graph_template(graph_template)
    report: dict = {
        "algo": algo,
        "graph": graph_template,
        "seeds": [seeds[0], seeds[-1]],
        "checks": {},
    }
    hard_fail = False
    for family, params in instances:
        label = GraphSpec(family, params).label()
        entry: dict = {}
        records = None
        if "mis" in checks:
            entry["mis"] = _mis_check(algo, family, params, seeds, c, k_override)
        if "equiv" in checks:
            equiv, fail = _equiv_check(algo, family, params, seeds, c)
            entry["equiv"] = equiv
            hard_fail = hard_fail or fail
        if "pruning" in checks or "zdecay" in checks:
            records, n = _collect_records(family, params, seeds, k_override)
            stats = pruning_stats(records, n)
            if "pruning" in checks:
                root_violations = [v for v in stats.violations if v.startswith("root")]
                entry["pruning"] = {
                    "seeds": stats.seeds,
                    "root_left_mean": stats.root_left_mean,
                    "root_left_se": stats.root_left_se,
                    "root_left_bound": n / 2,
                    "root_right_mean": stats.root_right_mean,
                    "root_right_se": stats.root_right_se,
                    "root_right_bound": n / 4,
                    "violations": root_violations,
                }
                hard_fail = hard_fail or bool(root_violations)
            if "zdecay" in checks:
                level_violations = [v for v in stats.violations if v.startswith("level")]
                entry["zdecay"] = {
                    "levels": [_level_stat_dict(s) for s in stats.levels],
                    "violations": level_violations,
                }
                hard_fail = hard_fail or bool(level_violations)
        if "exact" in checks:
            g = build_graph(family, params, seeds[0])
            k = k_override if k_override is not None else sleeping_depth(g.n)
            exact = exact_expectation(g, k)  # raises if n*K over the guard
            entry["exact"] = {
                "k": k,
                "tapes": exact.tapes,
                "e_left": str(exact.left),
                "e_right": str(exact.right),
                "e_left_float": float(exact.left),
                "e_right_float": float(exact.right),
                "left_bound": g.n / 2,
                "right_bound": g.n / 4,
                "left_ok": float(exact.left) <= g.n / 2,
                "right_ok": float(exact.right) <= g.n / 4,
            }
            if not entry["exact"]["left_ok"] or not entry["exact"]["right_ok"]:
                hard_fail = True
        report["checks"][label] = entry
    report["hard_fail"] = hard_fail
    return VerifyResult(report, hard_fail)


def summarize(result: VerifyResult) -> str:
    lines = []
    rep = result.report
    lines.append(f"verify {rep['algo']} on {rep['graph']} seeds {rep['seeds'][0]}..{rep['seeds'][1]}")
    for label, entry in rep["checks"].items():
        for check, data in entry.items():
            if check == "mis":
                lines.append(
                    f"  [{label}] mis: {data['valid']}/{data['runs']} valid, "
                    f"{data['invalid']} invalid, {data['timeout']} timeout"
                )
            elif check == "equiv":
                skipped = sum(data["skipped"].values())
                lines.append(
                    f"  [{label}] equiv: {data['matched']} matched, "
                    f"{len(data['mismatched'])} mismatched, {skipped} skipped"
                )
            elif check == "pruning":
                lines.append(
                    f"  [{label}] pruning: root |L| mean {data['root_left_mean']:.3f} "
                    f"(bound {data['root_left_bound']}), root |R| mean "
                    f"{data['root_right_mean']:.3f} (bound {data['root_right_bound']}) "
                    + ("FAIL" if data["violations"] else "ok")
                )
            elif check == "zdecay":
                worst = max(
                    (s["z_mean"] / s["z_bound"] for s in data["levels"] if s["z_bound"]),
                    default=0.0,
                )
                lines.append(
                    f"  [{label}] zdecay: worst mean/bound ratio {worst:.3f} "
                    + ("FAIL" if data["violations"] else "ok")
                )
            elif check == "exact":
                lines.append(
                    f"  [{label}] exact: E|L|={data['e_left']} (<= {data['left_bound']}: "
                    f"{data['left_ok']}), E|R|={data['e_right']} (<= {data['right_bound']}: "
                    f"{data['right_ok']})"
                )
    lines.append("hard failure" if result.hard_fail else "all checks passed")
    return "\n".join(lines)
