import numpy as np
import pytest

from spinlab.coupling import EventStream, derive_seed, fork_replica


def _take(stream, k):
    return [stream.next_event() for _ in range(k)]


def test_times_strictly_increase():
    ev = _take(EventStream(1, 100), 20_000)
    t = np.array([e.time for e in ev])
    assert np.all(np.diff(t) > 0) and t[0] > 0


def test_mean_gap():
    s = EventStream(7, 100)
    ev = _take(s, 1_000_000)
    gaps = np.diff([0.0] + [e.time for e in ev])
    assert abs(gaps.mean() - 0.01) < 3e-4


def test_vertices_and_uniforms():
    ev = _take(EventStream(3, 10), 100_000)
    v = np.array([e.vertex for e in ev])
    u = np.array([e.uniform for e in ev])
    assert v.min() == 0 and v.max() == 9
    assert np.abs(np.bincount(v) / v.size - 0.1).max() < 0.01
    assert 0 <= u.min() and u.max() < 1 and abs(u.mean() - 0.5) < 0.01


def test_same_seed_same_stream():
    a = _take(EventStream(42, 50), 10_000)
    b = _take(EventStream(42, 50), 10_000)
    assert a == b


def test_blocks_match_next_event():
    horizon = 37.5
    s = EventStream(9, 64)
    from_blocks = [e for times, verts, unifs in s.blocks(horizon) for e in zip(times, verts, unifs)]
    ref = []
    r = EventStream(9, 64)
    while True:
        e = r.next_event()
        if e.time > horizon:
            break
        ref.append(tuple(e))
    assert from_blocks == ref
    # the first event past the horizon stays available
    assert s.next_event() == e


def test_blocks_resume_across_horizons():
    a = EventStream(5, 30)
    first = [x for b in a.blocks(3.0) for x in zip(*b)]
    second = [x for b in a.blocks(8.0) for x in zip(*b)]
    b = EventStream(5, 30)
    both = [x for blk in b.blocks(8.0) for x in zip(*blk)]
    assert first + second == both


def test_fork_replica():
    assert _take(fork_replica(11, 0, 20), 100) == _take(fork_replica(11, 0, 20), 100)
    differ = sum(fork_replica(s, 0, 20).next_event() != fork_replica(s, 1, 20).next_event() for s in range(1000))
    assert differ == 1000


@pytest.mark.parametrize("k", [0, 1, 5])
def test_forked_replica_gap_mean(k):
    ev = _take(fork_replica(123, k, 100), 200_000)
    gaps = np.diff([0.0] + [e.time for e in ev])
    assert abs(gaps.mean() - 0.01) < 3e-4


def test_derive_seed_stable():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
    assert 0 <= derive_seed(0) < 2**64
