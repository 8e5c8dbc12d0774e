"""Uniform report shape for lemma and invariant checks."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


@dataclass
class Report:
    check: str
    params: dict
    passed: bool
    worst_margin: float
    witnesses: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "check": self.check,
            "params": self.params,
            "pass": bool(self.passed),
            "worst_margin": _finite(self.worst_margin),
            "witnesses": self.witnesses,
        }
        if self.extra:
            out["extra"] = self.extra
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def __bool__(self) -> bool:
        return bool(self.passed)


def _finite(x: float):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def merge(check: str, reports: list[Report], params: dict | None = None) -> Report:
    """Conjunction of several reports; keeps the first witnesses of each failure."""
    witnesses = []
    for r in reports:
        if not r.passed:
            witnesses.append({"check": r.check, "params": r.params, "witnesses": r.witnesses[:3]})
    worst = min((r.worst_margin for r in reports), default=math.inf)
    return Report(check, params or {}, all(r.passed for r in reports), worst, witnesses)
