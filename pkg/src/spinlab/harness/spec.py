"""Experiment specifications, read from JSON.

Example::

    {
      "name": "extinction_scaling",
      "seed": 0,
      "graph": {"n": [512, 1024], "d": 7, "seeds": [0, 1, 2]},
      "rule": {"kind": "ising", "beta": 3.0},
      "init": "biased:0.99",
      "horizon": "10log",
      "replicas": 1,
      "cadence": 0.5,
      "check": "normal",
      "params": {},
      "output": "runs/extinction"
    }

``graph.fixture`` (``K4``, ``petersen``, ``cycle:N``) replaces random graphs
for the stationarity oracle.  ``horizon`` is a number or ``"<c>log"`` for
c * ln n.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

EXPERIMENTS = (
    "extinction_scaling",
    "rigid_tails",
    "tau_R_survival",
    "magnetization_drift",
    "potts_coupling",
    "stationarity_oracle",
    "lemma_suite",
    "grand_coupling",
)
CHECK_MODES = ("normal", "paranoid")


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    graph: dict = field(default_factory=lambda: {"n": [500], "d": 7, "seeds": [0]})
    rule: dict = field(default_factory=lambda: {"kind": "ising", "beta": 3.0})
    init: str = "all_plus"
    horizon: float | str = 20.0
    replicas: int = 1
    cadence: float = 0.5
    check: str = "normal"
    seed: int = 0
    params: dict = field(default_factory=dict)
    output: str = "runs/out"

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.name!r}; expected one of {EXPERIMENTS}")
        if self.replicas < 1:
            raise ValueError("replicas must be at least 1")
        if self.check not in CHECK_MODES:
            raise ValueError(f"check mode must be one of {CHECK_MODES}")
        if isinstance(self.horizon, str):
            if not self.horizon.endswith("log"):
                raise ValueError("string horizons look like '10log'")
            float(self.horizon[:-3] or 1)
        elif self.horizon < 0:
            raise ValueError("horizon must be non-negative")
        d = self.graph.get("d")
        if not self.graph.get("fixture") and self.name != "lemma_suite":
            for n in self.ns:
                if (n * d) % 2:
                    raise ValueError(f"n*d must be even, got n={n}, d={d}")

    @property
    def ns(self) -> list[int]:
        n = self.graph.get("n", [])
        return [int(x) for x in (n if isinstance(n, list) else [n])]

    @property
    def graph_seeds(self) -> list[int]:
        s = self.graph.get("seeds", [0])
        return [int(x) for x in (s if isinstance(s, list) else [s])]

    def horizon_for(self, n: int) -> float:
        if isinstance(self.horizon, str):
            c = float(self.horizon[:-3] or 1)
            return c * math.log(n)
        return float(self.horizon)

    @property
    def records_path(self) -> Path:
        return Path(self.output) / "records.jsonl"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown spec keys: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))
