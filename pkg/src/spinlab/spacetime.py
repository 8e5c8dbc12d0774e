"""Minus spacetime clusters, their regions and projections, per trajectory.

A :class:`ClusterStore` follows one two-spin trajectory flip by flip.  Each
live cluster keeps its present slice (the minus *region*) and its vertex
projection (every vertex that has ever belonged to it).  A vertex turning
minus merges every cluster owning one of its neighbours; a vertex turning
plus only leaves its region.  Clusters touching the initial minus set are
flagged *legacy* and the flag survives merges.

The trifurcation test used by the rigid dynamics lives here as well, since it
reads the region of the vertex being updated.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .errors import DoubleFlip
from .graph import Graph, ball_vertices


class ClusterRecord:
    __slots__ = ("cid", "region", "projection", "legacy", "birth_time", "death_time", "peak_region")

    def __init__(self, cid: int, region: set[int], legacy: bool, birth_time: float):
        self.cid = cid
        self.region = region
        self.projection = set(region)
        self.legacy = legacy
        self.birth_time = birth_time
        self.death_time: float | None = None
        self.peak_region = len(region)

    def __repr__(self):
        return (f"ClusterRecord(cid={self.cid}, |region|={len(self.region)}, "
                f"|projection|={len(self.projection)}, legacy={self.legacy})")


class DeadCluster(NamedTuple):
    cid: int
    legacy: bool
    birth_time: float
    death_time: float
    projection_size: int
    peak_region: int


class ClusterStore:
    """Dynamic record of the minus spacetime clusters of one trajectory."""

    def __init__(self, n: int):
        self.n = n
        self.cluster_of: list[int] = [-1] * n
        self.clusters: dict[int, ClusterRecord] = {}
        self.redirect: dict[int, int] = {}
        self.archive: list[DeadCluster] = []
        self.next_id = 0
        self.legacy_alive = 0
        self.legacy_size = 0
        self.n_minus = 0
        self.max_projection_ever = 0
        self.merges = 0

    # -- construction -------------------------------------------------------

    @classmethod
    def from_config(cls, x0: Sequence[int], g: Graph) -> "ClusterStore":
        store = cls(g.n)
        minus = {v for v in range(g.n) if x0[v] < 0}
        adj = g.adjacency
        seen: set[int] = set()
        for s in sorted(minus):
            if s in seen:
                continue
            comp = {s}
            seen.add(s)
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for w in adj[u]:
                    if w in minus and w not in seen:
                        seen.add(w)
                        comp.add(w)
                        queue.append(w)
            store._new_cluster(comp, legacy=True, t=0.0)
        return store

    def _new_cluster(self, region: set[int], legacy: bool, t: float) -> int:
        cid = self.next_id
        self.next_id += 1
        rec = ClusterRecord(cid, region, legacy, t)
        self.clusters[cid] = rec
        for v in region:
            self.cluster_of[v] = cid
        self.n_minus += len(region)
        if legacy:
            self.legacy_alive += 1
            self.legacy_size += len(region)
        if len(rec.projection) > self.max_projection_ever:
            self.max_projection_ever = len(rec.projection)
        return cid

    # -- updates ------------------------------------------------------------

    def on_flip_to_minus(self, g: Graph, v: int, t: float) -> int:
        """v turns minus: merge v with every region owning one of its neighbours."""
        cluster_of = self.cluster_of
        if cluster_of[v] >= 0:
            raise DoubleFlip(f"vertex {v} is already minus")
        ids = {cluster_of[z] for z in g.adjacency[v]}
        ids.discard(-1)
        if not ids:
            return self._new_cluster({v}, legacy=(t == 0.0), t=t)
        self.n_minus += 1
        recs = [self.clusters[c] for c in ids]
        target = max(recs, key=lambda r: (len(r.projection), len(r.region), -r.cid))
        legacy_count = sum(1 for r in recs if r.legacy)
        absorbed = sum(len(r.region) for r in recs if not r.legacy) if legacy_count else 0
        for r in recs:
            if r is target:
                continue
            for u in r.region:
                cluster_of[u] = target.cid
            target.region |= r.region
            target.projection |= r.projection
            target.birth_time = min(target.birth_time, r.birth_time)
            target.peak_region = max(target.peak_region, r.peak_region)
            del self.clusters[r.cid]
            self.redirect[r.cid] = target.cid
            self.merges += 1
        target.region.add(v)
        target.projection.add(v)
        cluster_of[v] = target.cid
        if legacy_count:
            target.legacy = True
            self.legacy_alive -= legacy_count - 1
            # the new vertex plus every absorbed non-legacy region joins the legacy slice
            self.legacy_size += 1 + absorbed
        if len(target.region) > target.peak_region:
            target.peak_region = len(target.region)
        if len(target.projection) > self.max_projection_ever:
            self.max_projection_ever = len(target.projection)
        return target.cid

    def on_flip_to_plus(self, v: int, t: float) -> None:
        """v turns plus: it leaves its region; the projection keeps it."""
        cid = self.cluster_of[v]
        if cid < 0:
            raise DoubleFlip(f"vertex {v} is already plus")
        rec = self.clusters[cid]
        rec.region.discard(v)
        self.cluster_of[v] = -1
        self.n_minus -= 1
        if rec.legacy:
            self.legacy_size -= 1
        if not rec.region:
            rec.death_time = t
            del self.clusters[cid]
            if rec.legacy:
                self.legacy_alive -= 1
            self.archive.append(DeadCluster(cid, rec.legacy, rec.birth_time, t,
                                            len(rec.projection), rec.peak_region))

    # -- queries ------------------------------------------------------------

    def resolve(self, cid: int) -> int:
        while cid in self.redirect:
            cid = self.redirect[cid]
        return cid

    def region_of(self, v: int) -> set[int]:
        cid = self.cluster_of[v]
        return self.clusters[cid].region if cid >= 0 else set()

    def projection_of(self, v: int) -> set[int]:
        cid = self.cluster_of[v]
        return self.clusters[cid].projection if cid >= 0 else set()

    def legacy_region(self) -> set[int]:
        out: set[int] = set()
        for rec in self.clusters.values():
            if rec.legacy:
                out |= rec.region
        return out

    def legacy_extinct(self) -> bool:
        return self.legacy_alive == 0

    def in_legacy(self, v: int) -> bool:
        cid = self.cluster_of[v]
        return cid >= 0 and self.clusters[cid].legacy

    def max_projection_size(self) -> int:
        return max((len(r.projection) for r in self.clusters.values()), default=0)

    def max_region_size(self) -> int:
        return max((len(r.region) for r in self.clusters.values()), default=0)

    def tau_R_reached(self, R: int) -> bool:
        return self.max_projection_ever >= R

    def summary(self) -> dict:
        return {
            "n_minus": self.n_minus,
            "n_clusters": len(self.clusters),
            "legacy_size": self.legacy_size,
            "legacy_alive": self.legacy_alive,
            "max_region": self.max_region_size(),
            "max_projection": self.max_projection_size(),
        }


# free-function aliases matching the operation names

def init_store(x0: Sequence[int], g: Graph) -> ClusterStore:
    return ClusterStore.from_config(x0, g)


def on_flip_to_minus(store: ClusterStore, g: Graph, v: int, t: float) -> int:
    return store.on_flip_to_minus(g, v, t)


def on_flip_to_plus(store: ClusterStore, v: int, t: float) -> None:
    store.on_flip_to_plus(v, t)


def legacy_region(store: ClusterStore) -> set[int]:
    return store.legacy_region()


def legacy_extinct(store: ClusterStore) -> bool:
    return store.legacy_extinct()


def max_projection_size(store: ClusterStore) -> int:
    return store.max_projection_size()


def tau_R_reached(store: ClusterStore, R: int) -> bool:
    return store.tau_R_reached(R)


# ---------------------------------------------------------------- trifurcation

def components_hit(g: Graph, v: int, A: Iterable[int], R: int, stop_at: int | None = None) -> int:
    """Number of components of B_R(v) minus v that intersect A."""
    dist = ball_vertices(g, v, R)
    del dist[v]
    adj = g.adjacency
    labelled: set[int] = set()
    hits = 0
    for a in A:
        if a == v or a not in dist or a in labelled:
            continue
        hits += 1
        if stop_at is not None and hits >= stop_at:
            return hits
        labelled.add(a)
        queue = deque([a])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w in dist and w not in labelled:
                    labelled.add(w)
                    queue.append(w)
    return hits


def is_trifurcation(store: ClusterStore, g: Graph, v: int, R: int) -> bool:
    """v is a trifurcation point of its own region."""
    region = store.region_of(v)
    if len(region) < 4:
        return False
    return components_hit(g, v, region, R, stop_at=3) >= 3


def trifurcation_points(g: Graph, A: Iterable[int], R: int) -> list[int]:
    A = set(A)
    return [v for v in sorted(A) if components_hit(g, v, A, R, stop_at=3) >= 3]


# ---------------------------------------------------------------- invariant scans

@dataclass
class ScanResult:
    partition: int = 0
    distance_two: int = 0
    projection_connected: int = 0
    region_in_projection: int = 0

    @property
    def total(self) -> int:
        return self.partition + self.distance_two + self.projection_connected + self.region_in_projection

    def add(self, other: "ScanResult") -> None:
        self.partition += other.partition
        self.distance_two += other.distance_two
        self.projection_connected += other.projection_connected
        self.region_in_projection += other.region_in_projection


def scan_store(store: ClusterStore, spins: Sequence[int], g: Graph,
               check_connectivity: bool = True) -> ScanResult:
    """Full audit of the store against the chain it follows."""
    res = ScanResult()
    cluster_of = store.cluster_of
    for v in range(g.n):
        minus = spins[v] < 0
        cid = cluster_of[v]
        if minus != (cid >= 0):
            res.partition += 1
            continue
        if cid >= 0:
            if cid not in store.clusters or v not in store.clusters[cid].region:
                res.partition += 1
            for z in g.adjacency[v]:
                if cluster_of[z] >= 0 and cluster_of[z] != cid:
                    res.distance_two += 1
    for rec in store.clusters.values():
        if not rec.region <= rec.projection:
            res.region_in_projection += 1
        if check_connectivity and not _connected(g, rec.projection):
            res.projection_connected += 1
    return res


def _connected(g: Graph, verts: set[int]) -> bool:
    if not verts:
        return True
    start = next(iter(verts))
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in g.adjacency[u]:
            if w in verts and w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(verts)


def rigid_structure_violations(store: ClusterStore, spins: Sequence[int], g: Graph, R: int,
                               vertices: Iterable[int] | None = None) -> tuple[int, int]:
    """Counts of breaches of the two local laws of the rigid chain.

    (a) a minus vertex that is not a trifurcation point of its region has at
        most three minus neighbours;
    (b) a plus vertex has at most three neighbours in any adjacent region
        whose projection has size at most R.

    Meaningful only while every projection is below R on a 1-locally-treelike
    graph; the caller decides when to apply it.
    """
    if vertices is None:
        vertices = range(g.n)
    bad_minus = bad_plus = 0
    cluster_of = store.cluster_of
    for v in vertices:
        nbrs = g.adjacency[v]
        if spins[v] < 0:
            minus_nbrs = sum(1 for z in nbrs if spins[z] < 0)
            if minus_nbrs > 3 and not is_trifurcation(store, g, v, R):
                bad_minus += 1
        else:
            per_region: dict[int, int] = {}
            for z in nbrs:
                c = cluster_of[z]
                if c >= 0:
                    per_region[c] = per_region.get(c, 0) + 1
            for c, k in per_region.items():
                if k > 3 and len(store.clusters[c].projection) <= R:
                    bad_plus += 1
    return bad_minus, bad_plus
