"""Random regular graphs and the structural audits the dynamics rely on.

Graphs are immutable once built.  Generation pairs half-edges uniformly at
random; audits cover local tree-likeness (balls of radius R with at most one
cycle), spectral expansion via power iteration and the three set-expansion
counts used by the drift arguments.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix

from .errors import (
    DegenerateGraph,
    InvalidParity,
    MarginViolation,
    NotAPartition,
    RestartBudgetExceeded,
    SizeViolation,
)

DEFAULT_MAX_RESTARTS = 10_000
DEFAULT_GAMMA0 = 1e-2
EXHAUSTIVE_LIMIT = 20


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph stored as sorted neighbour tuples.

    ``d`` is the common degree for regular graphs and ``None`` for graphs
    built through the relaxed (oracle-only) constructor.
    """

    n: int
    d: int | None
    adjacency: tuple[tuple[int, ...], ...]
    seed: int = 0
    simple: bool = True
    oracle_only: bool = False
    _array: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], seed: int = 0,
                   relaxed: bool = False) -> "Graph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise DegenerateGraph(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise DegenerateGraph(f"edge ({u}, {v}) out of range for n={n}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        adjacency = tuple(tuple(sorted(s)) for s in nbrs)
        degrees = {len(a) for a in adjacency}
        regular = len(degrees) == 1
        if not regular and not relaxed:
            raise DegenerateGraph(f"graph is not regular (degrees {sorted(degrees)})")
        d = degrees.pop() if regular else None
        g = cls(n=n, d=d, adjacency=adjacency, seed=seed, simple=True,
                oracle_only=relaxed and not regular)
        return g

    @classmethod
    def from_adjacency(cls, adjacency: Sequence[Sequence[int]], seed: int = 0,
                       relaxed: bool = False) -> "Graph":
        n = len(adjacency)
        edges = {(min(u, v), max(u, v)) for u, row in enumerate(adjacency) for v in row}
        g = cls.from_edges(n, edges, seed=seed, relaxed=relaxed)
        for u, row in enumerate(adjacency):
            if len(row) != len(g.adjacency[u]):
                raise DegenerateGraph(f"vertex {u} has repeated or asymmetric neighbours")
        return g

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, row in enumerate(self.adjacency) for v in row if u < v]

    @property
    def degrees(self) -> list[int]:
        return [len(row) for row in self.adjacency]

    def neighbor_array(self) -> np.ndarray:
        """(n, d) integer array of neighbours; regular graphs only."""
        if self.d is None:
            raise DegenerateGraph("neighbor_array needs a regular graph")
        if self._array is None:
            object.__setattr__(self, "_array", np.array(self.adjacency, dtype=np.int64).reshape(self.n, self.d))
        return self._array

    def check_invariants(self) -> None:
        for u, row in enumerate(self.adjacency):
            if u in row:
                raise DegenerateGraph(f"self-loop at {u}")
            if len(set(row)) != len(row):
                raise DegenerateGraph(f"multi-edge at {u}")
            if self.d is not None and len(row) != self.d:
                raise DegenerateGraph(f"vertex {u} has degree {len(row)} != {self.d}")
            for v in row:
                if u not in self.adjacency[v]:
                    raise DegenerateGraph(f"asymmetric adjacency {u}->{v}")
        if self.d is not None and (self.n * self.d) % 2:
            raise InvalidParity("n*d is odd")


def locality_radius(n: int, d: int) -> int:
    """R = max(1, floor(ln n / (4 ln d)))."""
    return max(1, int(math.floor(math.log(n) / (4.0 * math.log(d)))))


def raw_locality_radius(n: int, d: int) -> int:
    """floor(log_d(n) / 4) without the lower clamp."""
    return int(math.floor(math.log(n) / (4.0 * math.log(d))))


# ---------------------------------------------------------------- generation

def _pairing_round(n: int, d: int, rng: np.random.Generator) -> set[tuple[int, int]] | None:
    edges: set[tuple[int, int]] = set()
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    while stubs.size:
        rng.shuffle(stubs)
        flat = stubs.tolist()
        leftover: list[int] = []
        for s1, s2 in zip(flat[0::2], flat[1::2]):
            if s1 > s2:
                s1, s2 = s2, s1
            if s1 != s2 and (s1, s2) not in edges:
                edges.add((s1, s2))
            else:
                leftover.append(s1)
                leftover.append(s2)
        if leftover and not _has_suitable_pair(edges, leftover):
            return None
        stubs = np.array(leftover, dtype=np.int64)
    return edges


def _has_suitable_pair(edges: set[tuple[int, int]], stubs: list[int]) -> bool:
    verts = sorted(set(stubs))
    for a, b in itertools.combinations(verts, 2):
        if (a, b) not in edges:
            return True
    return False


def generate_random_regular(n: int, d: int, seed: int,
                            max_restarts: int = DEFAULT_MAX_RESTARTS) -> Graph:
    """Sample a simple d-regular graph on n vertices.

    Half-edges are paired uniformly; pairs that would form a loop or a repeated
    edge are returned to the pool and re-paired, and the whole pairing restarts
    only when the pool can no longer be completed.  Deterministic in
    ``(n, d, seed)``.
    """
    if d < 3:
        raise DegenerateGraph(f"degree must be >= 3, got {d}")
    if (n * d) % 2:
        raise InvalidParity(f"n*d = {n * d} is odd")
    if n <= d:
        raise DegenerateGraph(f"need n > d, got n={n}, d={d}")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), n, d]))
    for _ in range(max_restarts):
        edges = _pairing_round(n, d, rng)
        if edges is not None:
            g = Graph.from_edges(n, sorted(edges), seed=seed)
            g.check_invariants()
            return g
    raise RestartBudgetExceeded(f"no simple {d}-regular graph on {n} vertices after {max_restarts} restarts")


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, itertools.combinations(range(n), 2))


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner)


# ---------------------------------------------------------------- file format

def write_graph(g: Graph, path: str | Path) -> None:
    lines = [f"{g.n} {g.d if g.d is not None else 0} {g.seed}"]
    lines.extend(" ".join(map(str, row)) for row in g.adjacency)
    Path(path).write_text("\n".join(lines) + "\n")


def read_graph(path: str | Path) -> Graph:
    text = Path(path).read_text().splitlines()
    n, d, seed = (int(x) for x in text[0].split())
    rows = [[int(x) for x in line.split()] for line in text[1:1 + n]]
    if len(rows) != n:
        raise DegenerateGraph(f"expected {n} adjacency lines, found {len(rows)}")
    g = Graph.from_adjacency(rows, seed=seed, relaxed=(d == 0))
    if d and g.d != d:
        raise DegenerateGraph(f"header degree {d} does not match adjacency")
    return g


# ---------------------------------------------------------------- balls

class BallReport(NamedTuple):
    center: int
    radius: int
    vertices: frozenset[int]
    tree_excess: int


def ball_vertices(g: Graph, v: int, r: int) -> dict[int, int]:
    """Vertices within distance r of v, mapped to their distance."""
    dist = {v: 0}
    frontier = [v]
    adj = g.adjacency
    for step in range(1, r + 1):
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in dist:
                    dist[w] = step
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return dist


def _components(adj, vertices: set[int]) -> list[set[int]]:
    seen: set[int] = set()
    comps = []
    for s in vertices:
        if s in seen:
            continue
        comp = {s}
        seen.add(s)
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w in vertices and w not in seen:
                    seen.add(w)
                    comp.add(w)
                    queue.append(w)
        comps.append(comp)
    return comps


def ball(g: Graph, v: int, r: int) -> BallReport:
    verts = set(ball_vertices(g, v, r))
    adj = g.adjacency
    n_edges = sum(1 for u in verts for w in adj[u] if w in verts) // 2
    n_comp = len(_components(adj, verts))
    return BallReport(v, r, frozenset(verts), n_edges - len(verts) + n_comp)


class TreelikeReport(NamedTuple):
    ok: bool
    violations: list[int]


def is_one_locally_treelike(g: Graph, R: int) -> TreelikeReport:
    """True iff every radius-R ball carries at most one cycle."""
    bad = [v for v in range(g.n) if ball(g, v, R).tree_excess > 1]
    return TreelikeReport(not bad, bad)


# ---------------------------------------------------------------- expansion

class ExpansionReport(NamedTuple):
    count: int
    bound: float
    passed: bool


def _indicator(n: int, S: Iterable[int]) -> np.ndarray:
    ind = np.zeros(n, dtype=np.int64)
    ind[np.fromiter(S, dtype=np.int64)] = 1
    return ind


def degrees_into(g: Graph, S: Iterable[int]) -> np.ndarray:
    """deg_S(u) for every u."""
    ind = _indicator(g.n, S)
    return ind[g.neighbor_array()].sum(axis=1)


def check_degree_expansion(g: Graph, S: Sequence[int], delta: float, eta: float) -> ExpansionReport:
    """Count vertices with at least eta*d neighbours in S against 4|S|/(d(eta-delta)^2)."""
    S = list(S)
    if len(S) > delta * g.n:
        raise SizeViolation(f"|S|={len(S)} exceeds delta*n={delta * g.n}")
    bound = 4.0 * len(S) / (g.d * (eta - delta) ** 2)
    if not S:
        return ExpansionReport(0, bound, True)
    count = int(np.count_nonzero(degrees_into(g, S) >= eta * g.d))
    return ExpansionReport(count, bound, count <= bound)


def check_majority_expansion(g: Graph, S: Sequence[int], gamma0: float = DEFAULT_GAMMA0) -> ExpansionReport:
    """Count vertices with more than 3d/7 neighbours in S against |S|/3."""
    S = list(S)
    if len(S) > 10 * gamma0 * g.n:
        raise SizeViolation(f"|S|={len(S)} exceeds 10*gamma0*n={10 * gamma0 * g.n}")
    bound = len(S) / 3.0
    if not S:
        return ExpansionReport(0, bound, True)
    count = int(np.count_nonzero(degrees_into(g, S) > 3.0 * g.d / 7.0))
    return ExpansionReport(count, bound, count <= bound)


def check_partition_expansion(g: Graph, parts: Sequence[Sequence[int]], eta: float,
                              delta: float) -> ExpansionReport:
    """Count vertices whose S_1 degree fails to beat every other part by eta*d."""
    q = len(parts)
    sizes = [len(p) for p in parts]
    label = np.full(g.n, -1, dtype=np.int64)
    for k, p in enumerate(parts):
        idx = np.fromiter(p, dtype=np.int64, count=len(p))
        if np.any(label[idx] >= 0) or len(set(p)) != len(p):
            raise NotAPartition("parts overlap")
        label[idx] = k
    if np.any(label < 0):
        raise NotAPartition("parts do not cover V")
    if not 0 < eta < delta < 1:
        raise MarginViolation(f"need 0 < eta < delta < 1, got eta={eta}, delta={delta}")
    if sizes[0] < max(sizes[1:], default=0) + delta * g.n:
        raise MarginViolation("|S_1| must exceed every other part by delta*n")
    nb = label[g.neighbor_array()]
    deg = np.stack([(nb == k).sum(axis=1) for k in range(q)], axis=1)
    other = deg[:, 1:].max(axis=1) if q > 1 else np.zeros(g.n, dtype=np.int64)
    count = int(np.count_nonzero(deg[:, 0] <= other + eta * g.d))
    bound = 8.0 * (q - 1) * sizes[0] / (g.d * (delta - eta) ** 2)
    return ExpansionReport(count, bound, count <= bound)


def exhaustive_majority_expansion(g: Graph, max_size: int) -> list[tuple[tuple[int, ...], ExpansionReport]]:
    """Check every S with |S| <= max_size; returns the failing sets."""
    if g.n > EXHAUSTIVE_LIMIT:
        raise SizeViolation(f"exhaustive checks are capped at n <= {EXHAUSTIVE_LIMIT}")
    nbr = g.neighbor_array()
    failures = []
    for size in range(1, max_size + 1):
        for S in itertools.combinations(range(g.n), size):
            ind = np.zeros(g.n, dtype=np.int64)
            ind[list(S)] = 1
            count = int(np.count_nonzero(ind[nbr].sum(axis=1) > 3.0 * g.d / 7.0))
            if count > size / 3.0:
                failures.append((S, ExpansionReport(count, size / 3.0, False)))
    return failures


def exhaustive_partition_expansion(g: Graph, eta: float, delta: float):
    """Check every 2-partition meeting the margin; returns (checked, failures)."""
    if g.n > EXHAUSTIVE_LIMIT:
        raise SizeViolation(f"exhaustive checks are capped at n <= {EXHAUSTIVE_LIMIT}")
    checked, failures = 0, []
    for mask in range(1 << g.n):
        S1 = [v for v in range(g.n) if mask >> v & 1]
        S2 = [v for v in range(g.n) if not mask >> v & 1]
        if len(S1) < len(S2) + delta * g.n:
            continue
        rep = check_partition_expansion(g, [S1, S2], eta, delta)
        checked += 1
        if not rep.passed:
            failures.append((tuple(S1), rep))
    return checked, failures


# ---------------------------------------------------------------- spectrum

class Lambda2Estimate(NamedTuple):
    value: float
    iterations: int
    converged: bool


def estimate_lambda2(g: Graph, iters: int = 2000, tol: float = 1e-7) -> Lambda2Estimate:
    """Largest |eigenvalue| of A - (d/n) 11^T by power iteration on 1-perp.

    The start vector is a deterministic function of the graph seed.  The
    iterate norm ratio is used as the estimate, which is insensitive to a
    +/- pair of top eigenvalues.
    """
    adj = g.adjacency
    n = g.n
    rows = np.repeat(np.arange(n), [len(a) for a in adj])
    cols = np.fromiter(itertools.chain.from_iterable(adj), dtype=np.int64)

    A = csr_matrix((np.ones(len(cols)), (rows, cols)), shape=(n, n))
    rng = np.random.default_rng(np.random.SeedSequence([int(g.seed) & (2**64 - 1), 0x1A2B]))
    x = rng.standard_normal(n)
    x -= x.mean()
    x /= np.linalg.norm(x)
    est, prev = 0.0, -1.0
    for it in range(1, iters + 1):
        y = A @ x
        y -= y.mean()
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return Lambda2Estimate(0.0, it, True)
        # two-step ratio cancels oscillation between a +lambda/-lambda pair
        z = A @ (y / norm)
        z -= z.mean()
        est = math.sqrt(norm * float(np.linalg.norm(z)))
        x = z / np.linalg.norm(z)
        if abs(est - prev) <= tol * max(1.0, est):
            return Lambda2Estimate(est, it, True)
        prev = est
    return Lambda2Estimate(est, iters, False)
