import math

import numpy as np
import pytest

from spinlab.analysis.gibbs import (
    configurations,
    detailed_balance,
    exact_expectation,
    exact_gibbs,
    log_partition,
    phase_mask,
    restrict_to_phase,
    single_site_means,
    tv_distance,
)
from spinlab.dynamics import UpdateRule
from spinlab.errors import NonReversibleRule, NullEvent, ShapeMismatch, StateSpaceTooLarge
from spinlab.graph import Graph, complete_graph, cycle_graph, generate_random_regular, petersen_graph


def test_configuration_indexing():
    cfg = configurations(3)
    assert cfg[0].tolist() == [1, 1, 1]
    assert cfg[0b101].tolist() == [-1, 1, -1]
    pc = configurations(2, q=3)
    assert pc[5].tolist() == [3, 2]


def test_beta_zero_uniform(k4):
    assert np.allclose(exact_gibbs(k4, UpdateRule.ising(0.0)), 1 / 16)


def test_k4_beta_one_direct_sum(k4):
    beta = 1.0
    w = []
    for s in configurations(4):
        w.append(math.exp(beta * sum(s[u] * s[v] for u, v in k4.edges)))
    w = np.array(w) / sum(w)
    pi = exact_gibbs(k4, UpdateRule.ising(beta))
    assert abs(pi.sum() - 1) < 1e-12
    assert np.allclose(pi, w, rtol=1e-12)
    # all-plus: 6 satisfied edges; Z = 2e^6 + 8e^0 + 6e^-2
    assert log_partition(k4, UpdateRule.ising(1.0)) == pytest.approx(math.log(2 * math.e ** 6 + 8 + 6 * math.e ** -2))


def test_relaxed_single_edge():
    g = Graph.from_edges(2, [(0, 1)], relaxed=True)
    pi = exact_gibbs(g, UpdateRule.ising(0.5))
    z = 2 * math.exp(0.5) + 2 * math.exp(-0.5)
    assert np.allclose(pi, [math.exp(0.5) / z, math.exp(-0.5) / z, math.exp(-0.5) / z, math.exp(0.5) / z])


def test_global_flip_symmetry(petersen):
    pi = exact_gibbs(petersen, UpdateRule.ising(0.7))
    idx = np.arange(pi.size)
    assert np.allclose(pi, pi[idx ^ (pi.size - 1)], rtol=1e-13)


def test_potts_gibbs():
    g = complete_graph(3)
    pi = exact_gibbs(g, UpdateRule.potts_glauber(0.9, 3))
    assert pi.size == 27 and abs(pi.sum() - 1) < 1e-12
    cfg = configurations(3, q=3)
    same = (cfg[:, 0] == cfg[:, 1]) & (cfg[:, 1] == cfg[:, 2])
    assert np.allclose(pi[same], pi[same][0])


def test_rejections():
    with pytest.raises(NonReversibleRule):
        exact_gibbs(complete_graph(4), UpdateRule.noisy_majority(0.1))
    with pytest.raises(StateSpaceTooLarge):
        exact_gibbs(generate_random_regular(22, 3, 0), UpdateRule.ising(0.1))


@pytest.mark.parametrize("g,rule", [
    (complete_graph(4), UpdateRule.ising(1.0)),
    (petersen_graph(), UpdateRule.ising(0.3)),
    (cycle_graph(12), UpdateRule.ising(2.0)),
    (complete_graph(5), UpdateRule.potts_glauber(0.8, 3)),
    (Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (1, 4)], relaxed=True), UpdateRule.ising(1.5)),
])
def test_detailed_balance(g, rule):
    r = detailed_balance(g, rule)
    assert r.passed and r.worst_margin >= 0


def test_tv_examples():
    assert tv_distance([0.2, 0.8], [0.2, 0.8]) == 0.0
    assert tv_distance([1, 0], [0, 1]) == 1.0
    assert tv_distance([1, 0], [0.5, 0.5]) == 0.5
    with pytest.raises(ShapeMismatch):
        tv_distance([1.0], [0.5, 0.5])
    with pytest.raises(ValueError):
        tv_distance([0.5, 0.4], [0.5, 0.5])


def test_restrict_to_phase_k4_beta0(k4):
    pi = exact_gibbs(k4, UpdateRule.ising(0.0))
    mask = phase_mask(4)
    assert mask.sum() == 11
    plus = restrict_to_phase(pi, mask)
    assert np.allclose(plus[mask], 1 / 11) and np.all(plus[~mask] == 0)
    assert abs(plus.sum() - 1) < 1e-12
    assert np.array_equal(restrict_to_phase(pi, np.ones(16, bool)), pi)
    by_callable = restrict_to_phase(pi, lambda i: bool(mask[i]))
    assert np.array_equal(by_callable, plus)


def test_restrict_complements_partition(petersen):
    pi = exact_gibbs(petersen, UpdateRule.ising(0.4))
    mask = phase_mask(10)
    a, b = pi[mask].sum(), pi[~mask].sum()
    assert a + b == pytest.approx(1.0, abs=1e-12)
    mix = a * restrict_to_phase(pi, mask) + b * restrict_to_phase(pi, ~mask)
    assert np.allclose(mix, pi, atol=1e-15)


def test_restrict_null():
    with pytest.raises(NullEvent):
        restrict_to_phase([0.5, 0.5, 0.0], [False, False, True])


def test_potts_phase_mask():
    m = phase_mask(2, q=3)
    cfg = configurations(2, q=3)
    assert m.tolist() == [((c == 1).sum() >= max((c == 2).sum(), (c == 3).sum())) for c in cfg]


def test_beta_zero_means(petersen):
    pi = exact_gibbs(petersen, UpdateRule.ising(0.0))
    assert np.allclose(single_site_means(pi, 10), 0.0)
    e = exact_expectation(petersen, UpdateRule.ising(0.0), lambda c: c.sum(axis=1) ** 2)
    assert e == pytest.approx(10.0)
