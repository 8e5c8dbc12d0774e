"""Update rules and coupled continuous-time trajectories.

Two-spin rules (Ising, the Potts-dominating threshold chain, noisy
majority) are all functions of the number of plus neighbours, so chains keep
a per-vertex plus-neighbour count and look the minus probability up in a
table.  Every chain in a group reads the same :class:`~spinlab.coupling.EventStream`.

Conventions
-----------
* Two-spin grand coupling: the updated spin is -1 iff ``U <= 1 - p_plus``.
* Potts triple coupling: ``[0, 1)`` is cut into intervals for state 1, then
  states 2..q in increasing order; the dominating two-spin chain becomes +1
  iff ``U < p_plus``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .coupling import EventStream, UpdateEvent
from .errors import DominationViolation, InclusionViolation, ParameterTooSmall
from .graph import Graph, is_one_locally_treelike, locality_radius
from .spacetime import ClusterStore, is_trifurcation, rigid_structure_violations, scan_store

DOMINATION_CONSTANT = 7.0

ISING = "ising"
POTTS_DOMINATING = "potts_dominating"
NOISY_MAJORITY = "noisy_majority"
POTTS_GLAUBER = "potts_glauber"
TWO_SPIN_KINDS = (ISING, POTTS_DOMINATING, NOISY_MAJORITY)


def _expit(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def dominating_beta(beta_p: float, q: int, d: int) -> float:
    """Two-spin beta paired with Potts beta_p: (beta_p - 7 ln(q-1)/d) / 2."""
    return (beta_p - DOMINATION_CONSTANT * math.log(q - 1) / d) / 2.0


# ---------------------------------------------------------------- p_plus


def p_plus_ising(beta: float, neighbor_spins: Sequence[int]) -> float:
    return _expit(2.0 * beta * float(sum(neighbor_spins)))


def p_plus_potts_dominating(beta_p: float, q: int, neighbor_spins: Sequence[int]) -> float:
    d = len(neighbor_spins)
    beta = dominating_beta(beta_p, q, d)
    if beta <= 0:
        raise ParameterTooSmall(f"beta_p={beta_p} gives non-positive two-spin beta for q={q}, d={d}")
    plus = sum(1 for s in neighbor_spins if s > 0)
    if 7 * plus >= 4 * d:
        return _expit(2.0 * beta * d / 7.0)
    return 0.0


def p_plus_noisy_majority(p: float, neighbor_spins: Sequence[int]) -> float:
    total = sum(neighbor_spins)
    if total > 0:
        return 1.0 - p
    if total < 0:
        return p
    return 0.5


def potts_conditional(beta_p: float, q: int, neighbor_states: Sequence[int]) -> np.ndarray:
    """Heat-bath law of one site given neighbour states in 1..q."""
    counts = np.bincount(np.asarray(neighbor_states, dtype=np.int64) - 1, minlength=q)[:q]
    expo = beta_p * counts.astype(float)
    w = np.exp(expo - expo.max())
    return w / w.sum()


@dataclass(frozen=True)
class UpdateRule:
    """One of the four update rules; build with the classmethods."""

    kind: str
    beta: float = 0.0
    beta_p: float = 0.0
    q: int = 2
    p: float = 0.0
    d: int | None = None

    @classmethod
    def ising(cls, beta: float) -> "UpdateRule":
        if beta < 0:
            raise ValueError("beta must be >= 0")
        return cls(ISING, beta=beta)

    @classmethod
    def potts_dominating(cls, beta_p: float, q: int, d: int) -> "UpdateRule":
        beta = dominating_beta(beta_p, q, d)
        if beta <= 0:
            raise ParameterTooSmall(
                f"beta_p={beta_p} must exceed 7 ln(q-1)/d = {DOMINATION_CONSTANT * math.log(q - 1) / d:.4g}")
        return cls(POTTS_DOMINATING, beta=beta, beta_p=beta_p, q=q, d=d)

    @classmethod
    def noisy_majority(cls, p: float) -> "UpdateRule":
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        return cls(NOISY_MAJORITY, p=p)

    @classmethod
    def potts_glauber(cls, beta_p: float, q: int) -> "UpdateRule":
        if beta_p < 0 or q < 2:
            raise ValueError("need beta_p >= 0 and q >= 2")
        return cls(POTTS_GLAUBER, beta_p=beta_p, q=q)

    @property
    def two_spin(self) -> bool:
        return self.kind in TWO_SPIN_KINDS

    def p_plus(self, neighbor_spins: Sequence[int]) -> float:
        if self.kind == ISING:
            return p_plus_ising(self.beta, neighbor_spins)
        if self.kind == POTTS_DOMINATING:
            return p_plus_potts_dominating(self.beta_p, self.q, neighbor_spins)
        if self.kind == NOISY_MAJORITY:
            return p_plus_noisy_majority(self.p, neighbor_spins)
        raise ValueError(f"{self.kind} is not a two-spin rule")

    def p_plus_by_count(self, plus: int, d: int) -> float:
        return self.p_plus([1] * plus + [-1] * (d - plus))

    def minus_prob_by_count(self, plus: int, d: int) -> float:
        """1 - p_plus, evaluated without cancellation."""
        total = 2 * plus - d
        if self.kind == ISING:
            return _expit(-2.0 * self.beta * total)
        if self.kind == POTTS_DOMINATING:
            if 7 * plus >= 4 * d:
                return _expit(-2.0 * self.beta * d / 7.0)
            return 1.0
        if self.kind == NOISY_MAJORITY:
            return self.p if total > 0 else (1.0 - self.p if total < 0 else 0.5)
        raise ValueError(f"{self.kind} is not a two-spin rule")

    def minus_table(self, d: int) -> list[float]:
        return [self.minus_prob_by_count(k, d) for k in range(d + 1)]

    def plus_table(self, d: int) -> list[float]:
        return [self.p_plus_by_count(k, d) for k in range(d + 1)]

    def params(self) -> dict:
        return {"kind": self.kind, "beta": self.beta, "beta_p": self.beta_p, "q": self.q, "p": self.p, "d": self.d}


# ---------------------------------------------------------------- configurations


def magnetization_ising(cfg: Sequence[int]) -> float:
    cfg = np.asarray(cfg)
    return float(cfg.sum()) / cfg.size


def magnetization_potts(states: Sequence[int], q: int) -> float:
    """(#state-1 minus the largest other state count) / n."""
    states = np.asarray(states)
    counts = np.bincount(states - 1, minlength=q)
    other = counts[1:].max() if q > 1 else 0
    return float(counts[0] - other) / states.size


def all_plus(n: int) -> np.ndarray:
    return np.ones(n, dtype=np.int8)


def all_minus(n: int) -> np.ndarray:
    return -np.ones(n, dtype=np.int8)


def biased_two_spin(n: int, eps: float, seed: int) -> np.ndarray:
    """Exactly ceil((1+eps) n / 2) plus spins at seeded uniform positions."""
    n_plus = min(n, math.ceil((1.0 + eps) * n / 2.0 - 1e-9))
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), 0xB1A5]))
    cfg = -np.ones(n, dtype=np.int8)
    cfg[rng.permutation(n)[:n_plus]] = 1
    return cfg


def biased_potts(n: int, q: int, eps: float, seed: int) -> np.ndarray:
    """ceil(eps n) seeded vertices in state 1, every other vertex uniform on 1..q."""
    n_one = min(n, math.ceil(eps * n - 1e-9))
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), 0xB0775]))
    states = rng.integers(1, q + 1, n).astype(np.int16)
    states[rng.permutation(n)[:n_one]] = 1
    return states


def parse_init(spec: str, n: int, seed: int, q: int | None = None) -> np.ndarray:
    """Decode ``all_plus | all_minus | biased:EPS | file:PATH``.

    With ``q`` given the result is a Potts configuration (all_plus means all
    state 1, all_minus means all state 2).
    """
    if spec == "all_plus":
        return all_plus(n) if q is None else np.ones(n, dtype=np.int16)
    if spec == "all_minus":
        return all_minus(n) if q is None else np.full(n, 2, dtype=np.int16)
    if spec.startswith("biased:"):
        eps = float(spec.split(":", 1)[1])
        return biased_two_spin(n, eps, seed) if q is None else biased_potts(n, q, eps, seed)
    if spec.startswith("file:"):
        values = np.array(Path(spec.split(":", 1)[1]).read_text().split(), dtype=np.int16)
        if values.size != n:
            raise ValueError(f"init file holds {values.size} values, expected {n}")
        return values.astype(np.int8) if q is None else values
    raise ValueError(f"unknown initialisation {spec!r}")


def potts_to_two_spin(states: Sequence[int]) -> np.ndarray:
    return np.where(np.asarray(states) == 1, 1, -1).astype(np.int8)


# ---------------------------------------------------------------- reference single update


def apply_two_spin(cfg: Sequence[int], rule: UpdateRule, ev: UpdateEvent, g: Graph,
                   reject_hook: Callable[[np.ndarray, int], bool] | None = None) -> np.ndarray:
    """One update of the grand coupling, written directly from the definition."""
    if not rule.two_spin:
        raise ValueError("apply_two_spin needs a two-spin rule")
    cfg = np.array(cfg, dtype=np.int8, copy=True)
    v = ev.vertex
    nbr = [int(cfg[w]) for w in g.adjacency[v]]
    threshold = 1.0 - rule.p_plus(nbr)
    new = -1 if ev.uniform <= threshold else 1
    if new == 1 and cfg[v] == -1 and reject_hook is not None and reject_hook(cfg, v):
        return cfg
    cfg[v] = new
    return cfg


# ---------------------------------------------------------------- chains


class TwoSpinChain:
    """Mutable two-spin trajectory with incremental plus-neighbour counts."""

    def __init__(self, g: Graph, rule: UpdateRule, x0: Sequence[int], *, track_clusters: bool = False,
                 rigid: bool = False, R: int | None = None):
        if g.d is None:
            raise ValueError("dynamics need a regular graph")
        self.g = g
        self.rule = rule
        spins = [1 if s > 0 else -1 for s in np.asarray(x0).tolist()]
        if len(spins) != g.n:
            raise ValueError(f"initial configuration has length {len(spins)}, expected {g.n}")
        self.spins = spins
        adj = g.adjacency
        self.plus_count = [sum(1 for z in row if spins[z] > 0) for row in adj]
        self.minus_prob = rule.minus_table(g.d)
        self.plus_prob = rule.plus_table(g.d)
        self.n_plus = sum(1 for s in spins if s > 0)
        self.rigid = rigid
        self.R = R if R is not None else locality_radius(g.n, g.d)
        self.store = ClusterStore.from_config(spins, g) if (track_clusters or rigid) else None
        self.flips = 0
        self.rejections = 0

    def flip(self, v: int, new: int, t: float) -> None:
        self.spins[v] = new
        pc = self.plus_count
        self.flips += 1
        if new > 0:
            for z in self.g.adjacency[v]:
                pc[z] += 1
            self.n_plus += 1
            if self.store is not None:
                self.store.on_flip_to_plus(v, t)
        else:
            for z in self.g.adjacency[v]:
                pc[z] -= 1
            self.n_plus -= 1
            if self.store is not None:
                self.store.on_flip_to_minus(self.g, v, t)

    def rejects(self, v: int) -> bool:
        """Rigid rule: a minus site that is a trifurcation point of its region stays minus."""
        return self.rigid and is_trifurcation(self.store, self.g, v, self.R)

    @property
    def magnetization(self) -> float:
        return (2.0 * self.n_plus - self.g.n) / self.g.n

    def config(self) -> np.ndarray:
        return np.array(self.spins, dtype=np.int8)


class PottsChain:
    """Mutable Potts Glauber trajectory with per-vertex neighbour state counts."""

    def __init__(self, g: Graph, beta_p: float, q: int, y0: Sequence[int]):
        if g.d is None:
            raise ValueError("dynamics need a regular graph")
        self.g = g
        self.q = q
        self.beta_p = beta_p
        states = [int(s) for s in np.asarray(y0).tolist()]
        if len(states) != g.n or min(states) < 1 or max(states) > q:
            raise ValueError("Potts configuration must have n entries in 1..q")
        self.states = states
        self.counts = [[0] * q for _ in range(g.n)]
        for v, row in enumerate(g.adjacency):
            c = self.counts[v]
            for z in row:
                c[states[z] - 1] += 1
        # weight of a state with (max count - k) fewer neighbours
        self.weights = [math.exp(-beta_p * k) for k in range(g.d + 1)]
        self.state_totals = [0] * q
        for s in states:
            self.state_totals[s - 1] += 1
        self.flips = 0

    def conditional(self, v: int) -> list[float]:
        c = self.counts[v]
        m = max(c)
        w = [self.weights[m - k] for k in c]
        total = sum(w)
        return [x / total for x in w]

    def choose(self, v: int, u: float) -> int:
        """State picked by U: intervals for state 1, 2, ..., q in that order."""
        c = self.counts[v]
        m = max(c)
        weights = self.weights
        w = [weights[m - k] for k in c]
        target = u * sum(w)
        acc = 0.0
        for k in range(self.q - 1):
            acc += w[k]
            if target < acc:
                return k + 1
        return self.q

    def set_state(self, v: int, new: int) -> None:
        old = self.states[v]
        self.states[v] = new
        self.state_totals[old - 1] -= 1
        self.state_totals[new - 1] += 1
        counts = self.counts
        for z in self.g.adjacency[v]:
            cz = counts[z]
            cz[old - 1] -= 1
            cz[new - 1] += 1
        self.flips += 1

    @property
    def magnetization(self) -> float:
        tot = self.state_totals
        return (tot[0] - max(tot[1:])) / self.g.n

    def config(self) -> np.ndarray:
        return np.array(self.states, dtype=np.int16)


# ---------------------------------------------------------------- engines

Observer = Callable[[int, UpdateEvent, int, int], None]


@dataclass
class GroupResult:
    final: list[np.ndarray]
    events: int
    end_time: float
    flips: list[int]
    order_violations: int = 0
    stopped_at: float | None = None
    chains: list = field(default_factory=list, repr=False)
    observers: list = field(default_factory=list, repr=False)

    def observer_outputs(self) -> list:
        return [ob.result() if hasattr(ob, "result") else None for ob in self.observers]


def _comparable_pairs(inits: Sequence[np.ndarray]) -> list[tuple[int, int]]:
    pairs = []
    for i, a in enumerate(inits):
        for j, b in enumerate(inits):
            if i != j and np.all(np.asarray(a) <= np.asarray(b)):
                pairs.append((i, j))
    return pairs


def run_chains(chains: Sequence[TwoSpinChain], stream: EventStream, horizon: float,
               observers: Sequence[Observer] = (), order_pairs: Sequence[tuple[int, int]] = (),
               until: Callable[[float], bool] | None = None,
               after_flip: Callable[[int, int, float], None] | None = None,
               after_event: Callable[[int, float], None] | None = None) -> GroupResult:
    """Drive already-built two-spin chains with one shared stream.

    ``until(t)`` is polled after every event that flipped some chain and ends
    the run when it returns True.  ``after_flip(chain, v, t)`` runs after each
    individual flip; ``after_event(v, t)`` once every chain has applied an
    event that flipped something.
    """
    k = len(chains)
    idx = range(k)
    spins = [c.spins for c in chains]
    counts = [c.plus_count for c in chains]
    tables = [c.minus_prob for c in chains]
    rigid = [c.rigid for c in chains]
    events = 0
    violations = 0
    stopped = None
    t = 0.0
    for times, verts, unifs in stream.blocks(horizon):
        for t, v, u in zip(times, verts, unifs):
            events += 1
            changed = False
            ev = UpdateEvent(t, v, u) if observers else None
            for ci in idx:
                s = spins[ci]
                old = s[v]
                new = -1 if u <= tables[ci][counts[ci][v]] else 1
                if new != old:
                    ch = chains[ci]
                    if new > 0 and rigid[ci] and ch.rejects(v):
                        ch.rejections += 1
                        new = old
                    else:
                        ch.flip(v, new, t)
                        changed = True
                        if after_flip is not None:
                            after_flip(ci, v, t)
                for ob in observers:
                    ob(ci, ev, old, new)
            if changed:
                for i, j in order_pairs:
                    if spins[i][v] > spins[j][v]:
                        violations += 1
                if after_event is not None:
                    after_event(v, t)
                if until is not None and until(t):
                    stopped = t
                    break
        if stopped is not None:
            break
    return GroupResult(
        final=[c.config() for c in chains],
        events=events,
        end_time=stopped if stopped is not None else horizon,
        flips=[c.flips for c in chains],
        order_violations=violations,
        stopped_at=stopped,
        chains=list(chains),
        observers=list(observers),
    )


def run_grand_coupled(g: Graph, rule: UpdateRule, initializations: Sequence[Sequence[int]],
                      stream: EventStream, horizon: float, observers: Sequence[Observer] = (),
                      track_clusters: bool = False,
                      until: Callable[[float], bool] | None = None) -> GroupResult:
    """Run one chain per initialisation off the same events.

    Pointwise order between every ordered pair of initial configurations is
    re-checked at the updated site after every event that flipped a spin;
    breaches are counted in ``order_violations``.
    """
    if not rule.two_spin:
        raise ValueError("grand coupling needs a two-spin rule")
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    inits = [np.asarray(x) for x in initializations]
    for x in inits:
        if x.size != g.n:
            raise ValueError(f"initialisation of length {x.size}, expected {g.n}")
    chains = [TwoSpinChain(g, rule, x, track_clusters=track_clusters) for x in inits]
    return run_chains(chains, stream, horizon, observers, _comparable_pairs(inits), until=until)


@dataclass
class RigidPairResult:
    standard: np.ndarray
    rigid: np.ndarray
    events: int
    domination_checks: int
    domination_violations: int
    structure_checks: int
    structure_violations: tuple[int, int]
    scan_violations: int
    rejections: int
    max_projection: int
    tau_R: float | None
    R: int
    treelike: bool
    store: ClusterStore = field(repr=False)
    observers: list = field(default_factory=list, repr=False)


def run_rigid_pair(g: Graph, rule: UpdateRule, stream: EventStream, horizon: float,
                   observers: Sequence[Observer] = (), *, R: int | None = None, rigid: bool = True,
                   paranoid: bool = False, check_every: int = 1000, treelike: bool | None = None,
                   strict: bool = True, standard: bool = True) -> RigidPairResult:
    """All-plus standard chain next to the rigid chain, both off one stream.

    Domination ``rigid <= standard`` is checked at the updated site after
    every event (raising :class:`DominationViolation` when ``strict``).  The
    rigid chain's local structure laws are audited while every projection is
    smaller than R, either around each flip (``paranoid``) or by full scan
    every ``check_every`` events.  ``standard=False`` runs the rigid chain
    alone.
    """
    if not rule.two_spin:
        raise ValueError("rigid pair needs a two-spin rule")
    R = R if R is not None else locality_radius(g.n, g.d)
    if treelike is None:
        treelike = is_one_locally_treelike(g, R).ok
    x0 = np.ones(g.n, dtype=np.int8)
    rig = TwoSpinChain(g, rule, x0, rigid=rigid, R=R, track_clusters=True)
    chains = [rig] if not standard else [TwoSpinChain(g, rule, x0), rig]
    ri = len(chains) - 1
    store = rig.store
    state = {"dom_checks": 0, "dom_viol": 0, "struct_checks": 0, "bad_minus": 0, "bad_plus": 0,
             "scan": 0, "tau": None, "since_scan": 0}
    adj = g.adjacency

    def audit(vertices, t):
        if not treelike or store.max_projection_ever >= R:
            return
        a, b = rigid_structure_violations(store, rig.spins, g, R, vertices)
        state["struct_checks"] += 1
        state["bad_minus"] += a
        state["bad_plus"] += b

    def after_flip(ci, v, t):
        if ci != ri:
            return
        if state["tau"] is None and store.max_projection_ever >= R:
            state["tau"] = t
        if paranoid:
            audit([v, *adj[v]], t)
            state["scan"] += scan_store(store, rig.spins, g, check_connectivity=False).total

    def after_event(v, t):
        if standard:
            state["dom_checks"] += 1
            if rig.spins[v] > chains[0].spins[v]:
                state["dom_viol"] += 1
                if strict:
                    raise DominationViolation(
                        f"rigid chain above standard chain at vertex {v}, t={t}",
                        {"vertex": v, "time": t, "rigid": rig.spins[v], "standard": chains[0].spins[v]})
        if not paranoid:
            state["since_scan"] += 1
            if state["since_scan"] >= check_every:
                state["since_scan"] = 0
                audit(None, t)
                state["scan"] += scan_store(store, rig.spins, g).total

    res = run_chains(chains, stream, horizon, observers, after_flip=after_flip, after_event=after_event)
    audit(None, horizon)
    state["scan"] += scan_store(store, rig.spins, g).total
    return RigidPairResult(
        standard=res.final[0] if standard else np.ones(g.n, dtype=np.int8),
        rigid=res.final[ri],
        events=res.events,
        domination_checks=state["dom_checks"],
        domination_violations=state["dom_viol"],
        structure_checks=state["struct_checks"],
        structure_violations=(state["bad_minus"], state["bad_plus"]),
        scan_violations=state["scan"],
        rejections=rig.rejections,
        max_projection=store.max_projection_ever,
        tau_R=state["tau"],
        R=R,
        treelike=treelike,
        store=store,
        observers=list(observers),
    )


@dataclass
class PottsTripleResult:
    y_init: np.ndarray
    y_one: np.ndarray
    x: np.ndarray
    events: int
    inclusion_checks: int
    disagreement_violations: int
    support_violations: int
    extinction_time: float | None
    post_extinction_disagreements: int
    max_disagreement: int
    scan_violations: int
    store: ClusterStore = field(repr=False)
    observers: list = field(default_factory=list, repr=False)


def run_potts_triple(g: Graph, y0: Sequence[int], beta_p: float, q: int, stream: EventStream,
                     horizon: float, observers: Sequence[Observer] = (), *, strict: bool = True,
                     paranoid: bool = False, check_every: int = 1000) -> PottsTripleResult:
    """Potts chains from y0 and from all-1 coupled to the dominating two-spin chain.

    All three read the same uniform at each ring.  After every event the
    disagreement set of the two Potts chains must lie inside the legacy
    region of the two-spin chain, and every non-1 Potts site must be minus in
    the two-spin chain.
    """
    rule = UpdateRule.potts_dominating(beta_p, q, g.d)
    y0 = np.asarray(y0)
    ya = PottsChain(g, beta_p, q, y0)
    yb = PottsChain(g, beta_p, q, np.ones(g.n, dtype=np.int16))
    x = TwoSpinChain(g, rule, potts_to_two_spin(y0), track_clusters=True)
    store = x.store
    plus_prob = x.plus_prob
    sa, sb, sx, pc = ya.states, yb.states, x.spins, x.plus_count
    disagree = sum(1 for v in range(g.n) if sa[v] != sb[v])
    ext = 0.0 if store.legacy_extinct() else None
    checks = d_viol = s_viol = post = scan = 0
    max_dis = disagree
    events = 0
    since = 0

    def fail(kind, v, t):
        raise InclusionViolation(f"{kind} inclusion broken at vertex {v}, t={t}",
                                 {"vertex": v, "time": t, "y_init": sa[v], "y_one": sb[v], "x": sx[v],
                                  "in_legacy": store.in_legacy(v)})

    t = 0.0
    for times, verts, unifs in stream.blocks(horizon):
        for t, v, u in zip(times, verts, unifs):
            events += 1
            before = sa[v] != sb[v]
            na = ya.choose(v, u)
            nb = yb.choose(v, u)
            nx = 1 if u < plus_prob[pc[v]] else -1
            oa, ob_, ox = sa[v], sb[v], sx[v]
            if na != oa:
                ya.set_state(v, na)
            if nb != ob_:
                yb.set_state(v, nb)
            if nx != ox:
                x.flip(v, nx, t)
            if observers:
                ev = UpdateEvent(t, v, u)
                for ob in observers:
                    ob(0, ev, oa, na)
                    ob(1, ev, ob_, nb)
                    ob(2, ev, ox, nx)
            after = na != nb
            disagree += int(after) - int(before)
            if disagree > max_dis:
                max_dis = disagree
            checks += 1
            if after and not store.in_legacy(v):
                d_viol += 1
                if strict:
                    fail("disagreement", v, t)
            if (na != 1 or nb != 1) and nx != -1:
                s_viol += 1
                if strict:
                    fail("support", v, t)
            if ext is None and store.legacy_alive == 0:
                ext = t
            if ext is not None and disagree:
                post += 1
            since += 1
            if paranoid or since >= check_every:
                since = 0
                scan += scan_store(store, sx, g, check_connectivity=paranoid).total
                legacy = store.legacy_region()
                for w in range(g.n):
                    if sa[w] != sb[w] and w not in legacy:
                        d_viol += 1
                    if (sa[w] != 1 or sb[w] != 1) and sx[w] != -1:
                        s_viol += 1
    return PottsTripleResult(
        y_init=ya.config(), y_one=yb.config(), x=x.config(), events=events, inclusion_checks=checks,
        disagreement_violations=d_viol, support_violations=s_viol, extinction_time=ext,
        post_extinction_disagreements=post, max_disagreement=max_dis, scan_violations=scan,
        store=store, observers=list(observers),
    )


def run_potts_single(g: Graph, rule: UpdateRule, y0: Sequence[int], stream: EventStream, horizon: float,
                     observers: Sequence[Observer] = (),
                     until: Callable[[float], bool] | None = None) -> tuple[PottsChain, int, float | None]:
    """Plain Potts Glauber trajectory; returns (chain, events, stop time)."""
    if rule.kind != POTTS_GLAUBER:
        raise ValueError("run_potts_single needs a Potts Glauber rule")
    ch = PottsChain(g, rule.beta_p, rule.q, y0)
    states = ch.states
    events = 0
    for times, verts, unifs in stream.blocks(horizon):
        for t, v, u in zip(times, verts, unifs):
            events += 1
            old = states[v]
            new = ch.choose(v, u)
            if new != old:
                ch.set_state(v, new)
            if observers:
                ev = UpdateEvent(t, v, u)
                for ob in observers:
                    ob(0, ev, old, new)
            if new != old and until is not None and until(t):
                return ch, events, t
    return ch, events, None
