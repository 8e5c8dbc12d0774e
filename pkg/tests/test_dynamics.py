import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinlab.coupling import EventStream, UpdateEvent
from spinlab.dynamics import (
    TwoSpinChain,
    UpdateRule,
    apply_two_spin,
    biased_potts,
    biased_two_spin,
    dominating_beta,
    magnetization_ising,
    magnetization_potts,
    p_plus_ising,
    p_plus_noisy_majority,
    p_plus_potts_dominating,
    parse_init,
    potts_conditional,
    run_chains,
    run_grand_coupled,
    run_potts_single,
    run_potts_triple,
    run_rigid_pair,
)
from spinlab.errors import ParameterTooSmall
from spinlab.graph import complete_graph, generate_random_regular
from spinlab.observers import FlipCounter, MagnetizationTrace


# ---------------------------------------------------------------- p_plus


def test_ising_beta_zero():
    assert p_plus_ising(0.0, [1, -1, -1, -1, 1, 1, -1]) == 0.5


def test_ising_all_plus():
    beta, d = 0.7, 7
    assert p_plus_ising(beta, [1] * d) == pytest.approx(1 / (1 + math.exp(-2 * beta * d)), rel=1e-15)


def test_ising_balanced():
    assert p_plus_ising(3.0, [1, -1, 1, -1]) == 0.5


def test_ising_extreme_beta_is_finite():
    assert p_plus_ising(50.0, [-1] * 7) == pytest.approx(math.exp(-700), rel=1e-9)
    assert UpdateRule.ising(50.0).minus_prob_by_count(7, 7) == pytest.approx(math.exp(-700), rel=1e-9)


def test_dominating_threshold():
    beta_p, q = 6.0, 3
    beta = dominating_beta(beta_p, q, 7)
    assert beta == pytest.approx((6.0 - 7 * math.log(2) / 7) / 2)
    assert p_plus_potts_dominating(beta_p, q, [1] * 4 + [-1] * 3) == pytest.approx(1 / (1 + math.exp(-2 * beta)))
    assert p_plus_potts_dominating(beta_p, q, [1] * 3 + [-1] * 4) == 0.0


def test_dominating_q2_halves_beta_p():
    assert dominating_beta(5.0, 2, 7) == 2.5
    assert UpdateRule.potts_dominating(5.0, 2, 7).beta == 2.5


def test_dominating_needs_positive_beta():
    with pytest.raises(ParameterTooSmall):
        UpdateRule.potts_dominating(0.5, 3, 7)


def test_noisy_majority():
    assert p_plus_noisy_majority(0.1, [1, 1, -1]) == 0.9
    assert p_plus_noisy_majority(0.1, [1, -1]) == 0.5
    assert p_plus_noisy_majority(0.1, [-1, -1, 1]) == pytest.approx(0.1)
    for eta in ([1, 1, 1], [-1, 1], [-1, -1, -1]):
        assert p_plus_noisy_majority(0.5, eta) == 0.5


def test_potts_conditional_examples():
    assert np.allclose(potts_conditional(0.0, 4, [1, 2, 3, 1, 2, 3, 4]), 0.25)
    bp, d, q = 1.3, 7, 3
    p1 = potts_conditional(bp, q, [1] * d)[0]
    assert p1 == pytest.approx(math.exp(bp * d) / (math.exp(bp * d) + q - 1))
    assert np.allclose(potts_conditional(2.0, 3, [1, 2, 3, 1, 2, 3]), 1 / 3)


def test_potts_conditional_large_beta_stable():
    p = potts_conditional(50.0, 3, [1] * 7)
    assert np.isfinite(p).all() and p[0] == pytest.approx(1.0)


@settings(max_examples=60, deadline=None)
@given(plus=st.integers(0, 12), d=st.integers(1, 12), beta=st.floats(0, 5))
def test_minus_table_is_complement(plus, d, beta):
    if plus > d:
        return
    for rule in (UpdateRule.ising(beta), UpdateRule.noisy_majority(min(beta / 5, 1.0))):
        assert rule.minus_prob_by_count(plus, d) == pytest.approx(1 - rule.p_plus_by_count(plus, d), abs=1e-15)


# ---------------------------------------------------------------- magnetization and inits


def test_magnetization_examples():
    assert magnetization_ising([1, 1, -1, 1]) == 0.5
    assert magnetization_potts([1, 1, 1], 3) == 1.0
    assert magnetization_potts([1, 1, 2, 3], 3) == 0.25
    assert magnetization_potts([1, 2, 1, 2, 3], 3) == 0.0


def test_biased_init_counts():
    for n, eps in ((1000, 0.98), (8192, 0.99), (501, 0.5), (10, 0.0)):
        x = biased_two_spin(n, eps, 3)
        assert int((x > 0).sum()) == math.ceil((1 + eps) * n / 2 - 1e-9)
    y = biased_potts(1000, 3, 0.3, 1)
    assert set(np.unique(y)) <= {1, 2, 3}
    assert (y == 1).sum() >= 300


def test_biased_init_seeded():
    assert np.array_equal(biased_two_spin(100, 0.5, 4), biased_two_spin(100, 0.5, 4))
    assert not np.array_equal(biased_two_spin(100, 0.5, 4), biased_two_spin(100, 0.5, 5))


def test_parse_init(tmp_path):
    assert parse_init("all_plus", 5, 0).tolist() == [1] * 5
    assert parse_init("all_minus", 5, 0).tolist() == [-1] * 5
    assert parse_init("all_plus", 5, 0, q=3).tolist() == [1] * 5
    p = tmp_path / "x.txt"
    p.write_text("1 -1 1\n-1 1\n")
    assert parse_init(f"file:{p}", 5, 0).tolist() == [1, -1, 1, -1, 1]
    with pytest.raises(ValueError):
        parse_init("warm", 5, 0)


# ---------------------------------------------------------------- single update


def test_apply_uniform_zero_gives_minus(k4):
    rule = UpdateRule.ising(1.0)
    out = apply_two_spin([1, 1, 1, 1], rule, UpdateEvent(0.1, 0, 0.0), k4)
    assert out[0] == -1


def test_apply_certain_plus(k4):
    rule = UpdateRule.noisy_majority(0.0)
    out = apply_two_spin([-1, 1, 1, 1], rule, UpdateEvent(0.1, 0, 0.5), k4)
    assert out[0] == 1


def test_apply_rejection(k4):
    rule = UpdateRule.ising(1.0)
    out = apply_two_spin([-1, 1, 1, 1], rule, UpdateEvent(0.1, 0, 0.99), k4, reject_hook=lambda c, v: True)
    assert out.tolist() == [-1, 1, 1, 1]


def test_engine_matches_reference_update(rrg200):
    rule = UpdateRule.ising(0.35)
    x0 = biased_two_spin(200, 0.2, 1)
    chain = TwoSpinChain(rrg200, rule, x0)
    ref = x0.copy()
    stream = EventStream(8, 200)
    seen = []
    run_chains([chain], stream, 5.0, observers=[lambda ci, ev, o, n: seen.append(ev)])
    for ev in seen:
        ref = apply_two_spin(ref, rule, ev, rrg200)
    assert np.array_equal(ref, chain.config())
    assert chain.plus_count == [sum(1 for z in row if ref[z] > 0) for row in rrg200.adjacency]


# ---------------------------------------------------------------- coupled runs


def test_grand_coupling_preserves_order(rrg200):
    rule = UpdateRule.ising(0.4)
    inits = [-np.ones(200), biased_two_spin(200, 0.0, 2), np.ones(200)]
    res = run_grand_coupled(rrg200, rule, inits, EventStream(2, 200), 20.0)
    assert res.order_violations == 0
    assert np.all(res.final[0] <= res.final[1]) and np.all(res.final[1] <= res.final[2])
    assert min(res.flips) > 0


def test_identical_inits_identical_paths(rrg200):
    x = biased_two_spin(200, 0.1, 0)
    res = run_grand_coupled(rrg200, UpdateRule.ising(0.3), [x, x], EventStream(1, 200), 10.0)
    assert np.array_equal(res.final[0], res.final[1]) and res.flips[0] == res.flips[1]


def test_horizon_zero(rrg200):
    x = biased_two_spin(200, 0.1, 0)
    res = run_grand_coupled(rrg200, UpdateRule.ising(0.3), [x], EventStream(1, 200), 0.0)
    assert res.events == 0 and np.array_equal(res.final[0], x)
    with pytest.raises(ValueError):
        run_grand_coupled(rrg200, UpdateRule.ising(0.3), [x], EventStream(1, 200), -1.0)


def test_beta_zero_k4_magnetization_mean(k4):
    x0 = np.ones(4)
    trace = MagnetizationTrace(x0, cadence=0.05)
    run_grand_coupled(k4, UpdateRule.ising(0.0), [x0], EventStream(4, 4), 5000.0, observers=[trace])
    assert abs(np.mean(trace.values)) < 0.05


def test_grand_coupling_noisy_majority_and_dominating(rrg200):
    for rule in (UpdateRule.noisy_majority(0.2), UpdateRule.potts_dominating(1.5, 3, 7)):
        inits = [-np.ones(200), biased_two_spin(200, 0.3, 2), np.ones(200)]
        assert run_grand_coupled(rrg200, rule, inits, EventStream(3, 200), 10.0).order_violations == 0


def test_rigid_pair_horizon_zero(rrg200):
    r = run_rigid_pair(rrg200, UpdateRule.ising(3.0), EventStream(1, 200), 0.0)
    assert r.standard.tolist() == [1] * 200 and r.rigid.tolist() == [1] * 200


def test_rigid_pair_domination_at_low_beta(rrg200):
    # R = 1: every neighbour is its own component of the punctured ball, so rejections are common
    r = run_rigid_pair(rrg200, UpdateRule.ising(0.1), EventStream(5, 200), 10.0, R=1, paranoid=True)
    assert r.domination_violations == 0 and r.domination_checks > 500
    assert r.scan_violations == 0
    assert r.rejections > 100
    assert (r.rigid <= r.standard).all()


def test_rigid_pair_without_rejection_matches_standard(rrg200):
    r = run_rigid_pair(rrg200, UpdateRule.ising(0.1), EventStream(5, 200), 10.0, R=1, rigid=False)
    assert np.array_equal(r.rigid, r.standard) and r.rejections == 0


def test_rigid_pair_beta3(rrg200):
    r = run_rigid_pair(generate_random_regular(1000, 7, 0), UpdateRule.ising(3.0), EventStream(0, 1000), 20.0)
    assert r.domination_violations == 0 and sum(r.structure_violations) == 0


def test_potts_triple_all_one(rrg200):
    r = run_potts_triple(rrg200, np.ones(200), 2.0, 3, EventStream(3, 200), 10.0)
    assert r.max_disagreement == 0 and r.extinction_time == 0.0
    assert r.disagreement_violations == 0 and r.post_extinction_disagreements == 0


def test_potts_triple_inclusions(rrg200):
    beta = 0.5
    y0 = biased_potts(200, 3, 0.9, 1)
    r = run_potts_triple(rrg200, y0, 2 * beta + math.log(2), 3, EventStream(1, 200), 20.0, paranoid=True)
    assert r.disagreement_violations == 0 and r.support_violations == 0
    assert r.post_extinction_disagreements == 0 and r.scan_violations == 0
    if r.extinction_time is not None:
        assert np.array_equal(r.y_init, r.y_one)


def test_potts_triple_q2_maps_to_two_spin(rrg200):
    y0 = np.where(biased_two_spin(200, 0.8, 0) > 0, 1, 2)
    r = run_potts_triple(rrg200, y0, 3.0, 2, EventStream(2, 200), 10.0)
    assert r.disagreement_violations == 0 and r.support_violations == 0
    assert set(np.flatnonzero(r.y_init != r.y_one)) <= r.store.legacy_region()


def test_potts_single_runs(k4):
    ch, events, _ = run_potts_single(k4, UpdateRule.potts_glauber(0.5, 3), [1, 2, 3, 1], EventStream(1, 4), 10.0)
    assert events > 0 and sorted(ch.state_totals) == sorted(np.bincount(ch.states, minlength=4)[1:].tolist())


def test_flip_counter_sees_every_event(k4):
    fc = FlipCounter(2)
    res = run_grand_coupled(k4, UpdateRule.ising(0.2), [-np.ones(4), np.ones(4)], EventStream(1, 4), 50.0,
                            observers=[fc])
    assert fc.events == res.events and fc.flips == res.flips
