"""Exact Gibbs measures of tiny graphs, by full enumeration.

Configuration indices follow :class:`spinlab.observers.OccupationCounter`:
for two-spin models bit v of the index is set when vertex v is minus; for
Potts, base-q digit v of the index is the state of v minus one.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.special import expit, logsumexp

from ..dynamics import ISING, POTTS_GLAUBER, UpdateRule
from ..errors import NonReversibleRule, NullEvent, ShapeMismatch, StateSpaceTooLarge
from ..graph import Graph
from .report import Report

MAX_STATES = 1 << 20


def _state_count(n: int, q: int) -> int:
    return q ** n


def configurations(n: int, q: int | None = None) -> np.ndarray:
    """Matrix of all configurations in index order (rows)."""
    if q is None:
        idx = np.arange(1 << n, dtype=np.int64)
        bits = (idx[:, None] >> np.arange(n)) & 1
        return (1 - 2 * bits).astype(np.int8)
    total = q ** n
    idx = np.arange(total, dtype=np.int64)
    out = np.empty((total, n), dtype=np.int16)
    for v in range(n):
        out[:, v] = idx % q + 1
        idx //= q
    return out


def _check_rule(rule: UpdateRule, n: int) -> int:
    if rule.kind not in (ISING, POTTS_GLAUBER):
        raise NonReversibleRule(f"no explicit stationary law for rule {rule.kind}")
    q = 2 if rule.kind == ISING else rule.q
    if _state_count(n, q) > MAX_STATES:
        raise StateSpaceTooLarge(f"{q}^{n} configurations exceed 2^20")
    return q


def log_weights(g: Graph, rule: UpdateRule) -> np.ndarray:
    _check_rule(rule, g.n)
    edges = np.asarray(g.edges, dtype=np.int64).reshape(-1, 2)
    if rule.kind == ISING:
        cfg = configurations(g.n).astype(np.int64)
        if edges.size == 0:
            return np.zeros(cfg.shape[0])
        return rule.beta * (cfg[:, edges[:, 0]] * cfg[:, edges[:, 1]]).sum(axis=1).astype(float)
    cfg = configurations(g.n, rule.q)
    if edges.size == 0:
        return np.zeros(cfg.shape[0])
    return rule.beta_p * (cfg[:, edges[:, 0]] == cfg[:, edges[:, 1]]).sum(axis=1).astype(float)


def exact_gibbs(g: Graph, rule: UpdateRule) -> np.ndarray:
    """Normalised Boltzmann weights over every configuration."""
    lw = log_weights(g, rule)
    return np.exp(lw - logsumexp(lw))


def _site_laws(g: Graph, rule: UpdateRule):
    """Per site v: (base, digit of v in every index, heat-bath law over digits).

    Two-spin digits are 0 for plus and 1 for minus; Potts digits are state - 1.
    """
    n = g.n
    if rule.kind == ISING:
        cfg = configurations(n).astype(np.int64)
        for v in range(n):
            nbrs = list(g.adjacency[v])
            field = cfg[:, nbrs].sum(axis=1) if nbrs else np.zeros(cfg.shape[0])
            law = np.stack([expit(2.0 * rule.beta * field), expit(-2.0 * rule.beta * field)], axis=1)
            yield 2, (cfg[:, v] < 0).astype(np.int64), law
        return
    q = rule.q
    cfg = configurations(n, q).astype(np.int64)
    for v in range(n):
        nbrs = list(g.adjacency[v])
        counts = np.stack([(cfg[:, nbrs] == k).sum(axis=1) for k in range(1, q + 1)], axis=1)
        expo = rule.beta_p * counts
        yield q, cfg[:, v] - 1, np.exp(expo - logsumexp(expo, axis=1, keepdims=True))


def detailed_balance(g: Graph, rule: UpdateRule, tol: float = 1e-10) -> Report:
    """pi(s) rate(s -> s') = pi(s') rate(s' -> s) over every single-site move."""
    pi = exact_gibbs(g, rule)
    idx = np.arange(pi.size)
    worst = 0.0
    witness = None
    for v, (base, digit, law) in enumerate(_site_laws(g, rule)):
        place = base ** v
        for s in range(base):
            move = digit != s
            src = idx[move]
            dst = src + (s - digit[move]) * place
            lhs = pi[src] * law[src, s]
            rhs = pi[dst] * law[dst, digit[move]]
            scale = np.maximum(lhs, rhs)
            rel = np.abs(lhs - rhs) / np.where(scale > 0, scale, 1.0)
            i = int(np.argmax(rel))
            if rel[i] > worst or witness is None:
                worst = max(worst, float(rel[i]))
                witness = {"site": v, "from": int(src[i]), "to": int(dst[i]), "relative_error": float(rel[i])}
    return Report("detailed_balance", {**rule.params(), "n": g.n, "edges": len(g.edges)},
                  worst <= tol, tol - worst, [witness] if witness else [])


def tv_distance(p, r) -> float:
    p = np.asarray(p, dtype=float)
    r = np.asarray(r, dtype=float)
    if p.shape != r.shape:
        raise ShapeMismatch(f"shapes {p.shape} and {r.shape} differ")
    for name, x in (("p", p), ("r", r)):
        if abs(x.sum() - 1.0) > 1e-9:
            raise ValueError(f"{name} sums to {x.sum()}, not 1")
    return 0.5 * float(np.abs(p - r).sum())


def phase_mask(n: int, q: int | None = None) -> np.ndarray:
    """Plus phase (sum of spins >= 0) or, for Potts, state 1 at least as common as any other."""
    if q is None:
        return configurations(n).sum(axis=1) >= 0
    cfg = configurations(n, q)
    counts = np.stack([(cfg == k).sum(axis=1) for k in range(1, q + 1)], axis=1)
    return counts[:, 0] >= counts[:, 1:].max(axis=1)


def restrict_to_phase(p, predicate: np.ndarray | Callable[[int], bool]) -> np.ndarray:
    """Condition p on an event given as a boolean mask or a predicate on indices."""
    p = np.asarray(p, dtype=float)
    if callable(predicate):
        mask = np.fromiter((bool(predicate(i)) for i in range(p.size)), dtype=bool, count=p.size)
    else:
        mask = np.asarray(predicate, dtype=bool)
        if mask.shape != p.shape:
            raise ShapeMismatch("mask and distribution differ in shape")
    mass = p[mask].sum()
    if mass <= 0:
        raise NullEvent("the phase has zero probability")
    return np.where(mask, p, 0.0) / mass


def single_site_means(p, n: int) -> np.ndarray:
    """Expected spin at each vertex under a two-spin distribution."""
    return np.asarray(p) @ configurations(n).astype(float)


def log_partition(g: Graph, rule: UpdateRule) -> float:
    return float(logsumexp(log_weights(g, rule)))


def exact_expectation(g: Graph, rule: UpdateRule, f: Callable[[np.ndarray], np.ndarray]) -> float:
    q = None if rule.kind == ISING else rule.q
    return float(exact_gibbs(g, rule) @ f(configurations(g.n, q)))


__all__ = [
    "configurations", "detailed_balance", "exact_expectation", "exact_gibbs", "log_partition",
    "log_weights", "phase_mask", "restrict_to_phase", "single_site_means", "tv_distance",
]
