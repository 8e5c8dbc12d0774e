"""Shared clock rings and uniforms for grand-coupled chains.

n independent rate-1 Poisson clocks are realised by superposition: the merged
process has Exponential(n) gaps and each ring lands on a uniformly chosen
vertex.  Draws are made in fixed-size blocks so that a stream is a pure
function of its seed.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple

import numpy as np

GENERATOR_NAME = "numpy.PCG64"
BLOCK = 4096


class UpdateEvent(NamedTuple):
    time: float
    vertex: int
    uniform: float


class EventStream:
    """Lazily generated, reproducible sequence of update events.

    Single consumer: every chain in a coupled group must read the same
    events in the same order, so the group drives the stream and fans each
    event out.
    """

    generator_name = GENERATOR_NAME

    def __init__(self, seed: int, n: int, *, replica: int | None = None):
        self.seed = int(seed)
        self.n = int(n)
        self.replica = replica
        entropy = [self.seed & (2**64 - 1)] if replica is None else [self.seed & (2**64 - 1), int(replica)]
        self._rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
        self.clock = 0.0
        self._times: list[float] = []
        self._vertices: list[int] = []
        self._uniforms: list[float] = []
        self._pos = 0

    def _refill(self) -> None:
        gaps = self._rng.exponential(1.0 / self.n, BLOCK)
        verts = self._rng.integers(0, self.n, BLOCK)
        unif = self._rng.random(BLOCK)
        times = self.clock + np.cumsum(gaps)
        # cumsum can repeat a float when a gap underflows relative to the clock
        if times[0] <= self.clock or np.any(np.diff(times) <= 0):
            prev = self.clock
            for i in range(BLOCK):
                if times[i] <= prev:
                    times[i] = np.nextafter(prev, np.inf)
                prev = times[i]
        self._times = times.tolist()
        self._vertices = verts.tolist()
        self._uniforms = unif.tolist()
        self._pos = 0

    def next_event(self) -> UpdateEvent:
        if self._pos >= len(self._times):
            self._refill()
        i = self._pos
        self._pos += 1
        t = self._times[i]
        self.clock = t
        return UpdateEvent(t, self._vertices[i], self._uniforms[i])

    def blocks(self, horizon: float) -> Iterator[tuple[list[float], list[int], list[float]]]:
        """Yield (times, vertices, uniforms) slices up to and including ``horizon``.

        Fast path for engines: equivalent to calling :meth:`next_event` until
        the clock passes ``horizon``.  The first event beyond the horizon is
        left unconsumed.
        """
        while True:
            if self._pos >= len(self._times):
                self._refill()
            times = self._times
            start = self._pos
            if times[-1] <= horizon:
                end = len(times)
            else:
                lo, hi = start, len(times)
                while lo < hi:
                    mid = (lo + hi) // 2
                    if times[mid] <= horizon:
                        lo = mid + 1
                    else:
                        hi = mid
                end = lo
            if end > start:
                self._pos = end
                self.clock = times[end - 1]
                yield times[start:end], self._vertices[start:end], self._uniforms[start:end]
            if end < len(times):
                return

    def __iter__(self) -> Iterator[UpdateEvent]:
        while True:
            yield self.next_event()


def fork_replica(base_seed: int, replica_id: int, n: int) -> EventStream:
    """Independent stream for one replica, keyed by (base_seed, replica_id)."""
    return EventStream(base_seed, n, replica=replica_id)


def derive_seed(*parts: int) -> int:
    """Stable 64-bit seed from a tuple of integers."""
    ss = np.random.SeedSequence([int(p) & (2**64 - 1) for p in parts])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
