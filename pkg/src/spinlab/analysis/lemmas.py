"""Exhaustive checks of the finite combinatorial statements behind the dynamics."""

from __future__ import annotations

import heapq
import itertools
import math

import numpy as np
from scipy.special import logsumexp

from ..dynamics import UpdateRule, dominating_beta
from ..errors import ParameterTooSmall
from ..graph import Graph
from ..spacetime import trifurcation_points
from .report import Report

# equality cases (q = 2 at zero margin) sit exactly on the bound
LOG_TOL = 1e-12


def compositions(total: int, parts: int):
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 1 - prev - 1)
        yield tuple(out)


def verify_potts_domination(beta_p: float, q: int, d: int, beta: float | None = None) -> Report:
    """Potts heat-bath mass on state 1 against the dominating two-spin p_plus.

    Over every neighbour-count vector with k_1 >= 4d/7 checks
    e^{beta_p k_1} / sum_r e^{beta_p k_r} >= 1 / (1 + e^{-2 beta d / 7}).
    ``beta`` defaults to the paired value (beta_p - 7 ln(q-1)/d) / 2; passing
    it explicitly probes other margins.
    """
    if q < 2:
        raise ValueError("q must be at least 2")
    if beta is None:
        beta = dominating_beta(beta_p, q, d)
    if beta <= 0:
        raise ParameterTooSmall(f"two-spin beta {beta} is not positive")
    log_target = -math.log1p(math.exp(-2.0 * beta * d / 7.0))
    worst = math.inf
    witnesses = []
    count = 0
    for ks in compositions(d, q):
        if 7 * ks[0] < 4 * d:
            continue
        count += 1
        expo = beta_p * (np.asarray(ks, dtype=float) - ks[0])
        margin = -float(logsumexp(expo)) - log_target
        if margin < worst:
            worst = margin
            worst_ks = ks
        if margin < -LOG_TOL and len(witnesses) < 20:
            witnesses.append({"counts": list(ks), "margin": margin})
    passed = worst >= -LOG_TOL
    if passed:
        witnesses = [{"counts": list(worst_ks), "margin": worst}]
    return Report("potts_domination", {"beta_p": beta_p, "q": q, "d": d, "beta": beta, "compositions": count},
                  passed, worst, witnesses)


def _neighbourhoods(d: int):
    for bits in range(1 << d):
        yield bits, [1 if (bits >> i) & 1 else -1 for i in range(d)]


def check_p_plus_monotone(rule: UpdateRule, d: int) -> Report:
    """p_plus(eta) <= p_plus(eta') for every pair eta <= eta' in {-1,1}^d."""
    if d > 12:
        raise ValueError("exhaustive check limited to d <= 12")
    values = [rule.p_plus(eta) for _, eta in _neighbourhoods(d)]
    witnesses = []
    worst = math.inf
    # enough to compare each eta with its single-site raises
    for bits in range(1 << d):
        for i in range(d):
            if not (bits >> i) & 1:
                up = bits | (1 << i)
                m = values[up] - values[bits]
                worst = min(worst, m)
                if m < 0 and len(witnesses) < 20:
                    witnesses.append({"lower": bits, "upper": up, "margin": m})
    return Report("p_plus_monotone", {**rule.params(), "d": d}, not witnesses, worst, witnesses)


def check_supermajority_bound(rule: UpdateRule, d: int, beta: float) -> Report:
    """#plus >= 4d/7 implies p_plus >= 1/(1 + e^{-2 beta d / 7})."""
    target = 1.0 / (1.0 + math.exp(-2.0 * beta * d / 7.0))
    worst = math.inf
    witnesses = []
    for plus in range(d + 1):
        if 7 * plus < 4 * d:
            continue
        m = rule.p_plus_by_count(plus, d) - target
        worst = min(worst, m)
        if m < -1e-15:
            witnesses.append({"plus": plus, "margin": m})
    return Report("supermajority_bound", {**rule.params(), "d": d, "beta_bound": beta},
                  not witnesses, worst, witnesses)


def noisy_majority_noise_limit(beta: float, d: int) -> float:
    """Largest p for which noisy majority meets the supermajority bound at beta."""
    return 1.0 / (1.0 + math.exp(2.0 * beta * d / 7.0))


# ---------------------------------------------------------------- trifurcations on trees


def random_tree(m: int, rng: np.random.Generator, max_degree: int | None = None) -> Graph:
    """Uniform labelled tree from a Pruefer sequence, resampled until degrees fit."""
    if m < 2:
        raise ValueError("need at least two vertices")
    while True:
        seq = rng.integers(0, m, m - 2).tolist() if m > 2 else []
        deg = [1] * m
        for s in seq:
            deg[s] += 1
        if max_degree is None or max(deg) <= max_degree:
            break
    edges = []
    deg_left = deg[:]
    leaves = [v for v in range(m) if deg_left[v] == 1]
    heapq.heapify(leaves)
    for s in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, s))
        deg_left[s] -= 1
        if deg_left[s] == 1:
            heapq.heappush(leaves, s)
    u, w = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, w))
    return Graph.from_edges(m, edges, relaxed=True)


def _grown_subset(g: Graph, size: int, rng: np.random.Generator) -> list[int]:
    """Connected subset grown from a random root by random frontier picks."""
    start = int(rng.integers(0, g.n))
    chosen = {start}
    frontier = list(g.adjacency[start])
    while len(chosen) < size and frontier:
        w = frontier.pop(int(rng.integers(0, len(frontier))))
        if w not in chosen:
            chosen.add(w)
            frontier.extend(z for z in g.adjacency[w] if z not in chosen)
    return sorted(chosen)


def trifurcation_bound_trials(trials: int, seed: int, max_set: int = 40, max_tree: int = 120,
                              max_degree: int = 7) -> Report:
    """|Tri(A)| <= floor(|A|/2) over random (tree, subset, radius) instances."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x7121]))
    worst = math.inf
    witnesses = []
    largest_ratio = 0.0
    for trial in range(trials):
        m = int(rng.integers(4, max_tree + 1))
        g = random_tree(m, rng, max_degree)
        size = int(rng.integers(1, min(max_set, m) + 1))
        A = _grown_subset(g, size, rng) if trial % 2 else rng.choice(m, size, replace=False).tolist()
        R = int(rng.integers(1, m))
        tri = trifurcation_points(g, A, R)
        margin = size // 2 - len(tri)
        worst = min(worst, margin)
        largest_ratio = max(largest_ratio, len(tri) / size)
        if margin < 0 and len(witnesses) < 20:
            witnesses.append({"trial": trial, "edges": list(g.edges), "A": sorted(A), "R": R, "tri": tri})
    return Report("trifurcation_bound", {"trials": trials, "seed": seed, "max_set": max_set},
                  not witnesses, float(worst), witnesses, extra={"max_ratio": largest_ratio})
