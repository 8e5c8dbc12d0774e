"""Synchronous observers for the trajectory engines.

An observer is any callable ``(chain_index, event, old, new)``; the engines
call it after each event has been applied to a chain.  The classes here keep
their own running state so they never need to read chain internals, and
expose what they collected through ``result()``.
"""

from __future__ import annotations

import csv
from typing import Sequence

import numpy as np

from .coupling import UpdateEvent
from .spacetime import ClusterStore

CLUSTER_COLUMNS = ("t", "n_minus", "n_clusters", "legacy_size", "legacy_alive", "max_region", "max_projection")


class MagnetizationTrace:
    """Sampled (t, m) trace of one two-spin chain, every ``cadence`` time units."""

    def __init__(self, x0: Sequence[int], chain: int = 0, cadence: float = 0.1):
        x0 = np.asarray(x0)
        self.n = x0.size
        self.n_plus = int((x0 > 0).sum())
        self.chain = chain
        self.cadence = cadence
        self.times = [0.0]
        self.values = [self.m]
        self._next = cadence

    @property
    def m(self) -> float:
        return (2.0 * self.n_plus - self.n) / self.n

    def __call__(self, ci: int, ev: UpdateEvent, old: int, new: int) -> None:
        if ci != self.chain:
            return
        if ev.time >= self._next:
            # value just before this event holds on the skipped grid points
            self.times.append(ev.time)
            self.values.append(self.m)
            self._next = ev.time + self.cadence
        if new != old:
            self.n_plus += 1 if new > 0 else -1

    def result(self) -> dict:
        return {"t": list(self.times), "m": list(self.values), "final": self.m}


class ClusterTrace:
    """Rows of the cluster summary of one store, every ``cadence`` time units."""

    def __init__(self, store: ClusterStore, chain: int = 0, cadence: float = 0.5):
        self.store = store
        self.chain = chain
        self.cadence = cadence
        self.rows: list[tuple] = [self._row(0.0)]
        self._next = cadence

    def _row(self, t: float) -> tuple:
        s = self.store.summary()
        return (t, *(s[k] for k in CLUSTER_COLUMNS[1:]))

    def __call__(self, ci: int, ev: UpdateEvent, old: int, new: int) -> None:
        if ci == self.chain and ev.time >= self._next:
            self.rows.append(self._row(ev.time))
            self._next = ev.time + self.cadence

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CLUSTER_COLUMNS)
            w.writerows(self.rows)

    def result(self) -> list[dict]:
        return [dict(zip(CLUSTER_COLUMNS, r)) for r in self.rows]


class OccupationCounter:
    """Histogram of configurations of a small chain, sampled at every clock ring.

    Rings arrive at a state-independent rate, so the counts estimate the
    stationary law directly.  Configurations are indexed by the bitmask with
    bit v set when vertex v is minus.
    """

    def __init__(self, x0: Sequence[int], chain: int = 0):
        x0 = np.asarray(x0)
        if x0.size > 24:
            raise ValueError("occupation counting is for graphs with at most 24 vertices")
        self.n = x0.size
        self.chain = chain
        self.state = sum(1 << v for v in range(self.n) if x0[v] < 0)
        self.counts = np.zeros(1 << self.n, dtype=np.int64)
        self._buf: list[int] = []

    def __call__(self, ci: int, ev: UpdateEvent, old: int, new: int) -> None:
        if ci != self.chain:
            return
        if new != old:
            self.state ^= 1 << ev.vertex
        self._buf.append(self.state)
        if len(self._buf) >= 1 << 16:
            self._flush()

    def _flush(self) -> None:
        if self._buf:
            self.counts += np.bincount(self._buf, minlength=self.counts.size)
            self._buf = []

    def result(self) -> np.ndarray:
        self._flush()
        total = self.counts.sum()
        return self.counts / total if total else self.counts.astype(float)


class FlipCounter:
    def __init__(self, chains: int = 1):
        self.flips = [0] * chains
        self.events = 0

    def __call__(self, ci: int, ev: UpdateEvent, old: int, new: int) -> None:
        if ci == 0:
            self.events += 1
        if new != old:
            self.flips[ci] += 1

    def result(self) -> dict:
        return {"events": self.events, "flips": list(self.flips)}
