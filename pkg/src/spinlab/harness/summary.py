"""Aggregate experiment records into CSV tables, a text report and figures."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..analysis.stats import censored_median, fit_log_slope
from ..errors import DegenerateInput
from . import plotting
from .runner import load_records

SUMMARY_COLUMNS = ("experiment", "n", "rule", "cells", "errors", "violations", "observable",
                   "median", "q10", "q90", "missing")


def rule_label(rule: dict) -> str:
    kind = rule.get("kind", "?")
    keys = [k for k in ("beta", "beta_p", "q", "p") if k in rule]
    return kind + "(" + ",".join(f"{k}={rule[k]}" for k in keys) + ")"


@dataclass
class Summary:
    rows: list[dict]
    fits: dict = field(default_factory=dict)
    violation_total: int = 0
    error_count: int = 0
    figures: list[str] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return self.violation_total > 0 or self.error_count > 0


def _numeric(v):
    if isinstance(v, bool):
        return float(v)
    if isinstance(v, (int, float)):
        return float(v)
    return None


def summarize(path, out_dir=None, figures: bool = True) -> Summary:
    records = load_records(path)
    if not records:
        raise DegenerateInput(f"no records under {path}")
    out_dir = Path(out_dir) if out_dir else (Path(path) if Path(path).is_dir() else Path(path).parent)
    out_dir.mkdir(parents=True, exist_ok=True)

    groups: dict[tuple, list[dict]] = defaultdict(list)
    for r in records:
        groups[(r["experiment"], r["n"], rule_label(r.get("rule", {})))].append(r)

    rows = []
    summary = Summary(rows)
    for (exp, n, rule), recs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
        errors = sum(1 for r in recs if r.get("error"))
        viol = sum(int(r.get("violation_total", 0)) for r in recs)
        summary.error_count += errors
        summary.violation_total += viol
        names = sorted({k for r in recs for k in r.get("observables", {})})
        base = {"experiment": exp, "n": n, "rule": rule, "cells": len(recs), "errors": errors, "violations": viol}
        scalar_rows = 0
        for name in names:
            vals = [r.get("observables", {}).get(name) for r in recs]
            if any(isinstance(v, (list, dict, str)) for v in vals):
                continue
            nums = [_numeric(v) for v in vals]
            present = np.array([x for x in nums if x is not None], dtype=float)
            missing = len(nums) - present.size
            q10, med, q90 = (np.quantile(present, [0.1, 0.5, 0.9]) if present.size else (math.nan,) * 3)
            rows.append({**base, "observable": name, "median": float(med), "q10": float(q10),
                         "q90": float(q90), "missing": missing})
            scalar_rows += 1
        if not scalar_rows:
            rows.append({**base, "observable": "", "median": math.nan, "q10": math.nan, "q90": math.nan,
                         "missing": 0})

    _fit_extinction(records, summary, out_dir, figures)
    if figures:
        _figures(records, summary, out_dir)

    with open(out_dir / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        w.writeheader()
        w.writerows(rows)
    (out_dir / "report.txt").write_text(render_text(summary))
    return summary


def _fit_extinction(records, summary, out_dir, figures):
    by_n = defaultdict(list)
    horizons = {}
    for r in records:
        if r["experiment"] == "extinction_scaling" and not r.get("error"):
            by_n[r["n"]].append(r["observables"].get("extinction_time"))
            horizons[r["n"]] = r.get("horizon", math.inf)
    if not by_n:
        return
    ns = sorted(by_n)
    medians = [censored_median(by_n[n], horizons[n]) for n in ns]
    frac = {n: sum(v is not None for v in by_n[n]) / len(by_n[n]) for n in ns}
    fit = None
    if len(ns) >= 3:
        fit = fit_log_slope(ns, medians)
        spread = max(medians) - min(medians)
        summary.fits["extinction_scaling"] = {
            "ns": ns, "medians": medians, "slope": fit.slope, "intercept": fit.intercept,
            "residual": fit.residual, "residual_over_range": fit.residual / spread if spread > 0 else math.inf,
            "extinct_fraction": frac,
        }
    else:
        summary.fits["extinction_scaling"] = {"ns": ns, "medians": medians, "extinct_fraction": frac}
    if figures:
        p = out_dir / "extinction_scaling.png"
        plotting.extinction_scaling(p, ns, medians, fit, [horizons[n] for n in ns])
        summary.figures.append(str(p))


def _figures(records, summary, out_dir):
    by_exp = defaultdict(list)
    for r in records:
        if not r.get("error"):
            by_exp[r["experiment"]].append(r)
    if "rigid_tails" in by_exp:
        sizes = [s for r in by_exp["rigid_tails"] for s in r["observables"].get("dead_projection_sizes", [])]
        p = out_dir / "rigid_tails_projection.png"
        plotting.size_histogram(p, sizes, "projection size of dead clusters")
        summary.figures.append(str(p))
    if "magnetization_drift" in by_exp:
        series = [(r["observables"]["trace_t"], r["observables"]["trace_m"]) for r in by_exp["magnetization_drift"][:20]]
        p = out_dir / "magnetization_drift.png"
        floor = by_exp["magnetization_drift"][0]["params"].get("floor")
        target = by_exp["magnetization_drift"][0]["params"].get("target")
        plotting.traces(p, series, "magnetization", [h for h in (floor, target) if h is not None])
        summary.figures.append(str(p))
    for exp, key, label in (("tau_R_survival", "max_projection", "max projection size"),
                            ("stationarity_oracle", "tv", "TV distance"),
                            ("potts_coupling", "max_disagreement", "max disagreement")):
        if exp in by_exp:
            p = out_dir / f"{exp}.png"
            plotting.per_cell_bars(p, [r["observables"].get(key, 0) for r in by_exp[exp]], label)
            summary.figures.append(str(p))


def render_text(summary: Summary) -> str:
    lines = [f"cells with violations: {summary.violation_total}  errors: {summary.error_count}  "
             f"status: {'FAIL' if summary.failed else 'OK'}", ""]
    current = None
    for row in summary.rows:
        key = (row["experiment"], row["n"], row["rule"])
        if key != current:
            current = key
            lines.append(f"[{row['experiment']}] n={row['n']} {row['rule']}  cells={row['cells']} "
                         f"errors={row['errors']} violations={row['violations']}")
        if row["observable"]:
            lines.append(f"    {row['observable']:<28} median={row['median']:.6g}  "
                         f"q10={row['q10']:.6g}  q90={row['q90']:.6g}  missing={row['missing']}")
    for name, fit in summary.fits.items():
        lines.append("")
        lines.append(f"fit {name}: " + ", ".join(f"{k}={v}" for k, v in fit.items()))
    if summary.figures:
        lines.append("")
        lines += [f"figure: {f}" for f in summary.figures]
    return "\n".join(lines) + "\n"
