import itertools
import math

import numpy as np
import pytest
from scipy.special import logsumexp

from spinlab.analysis.psi import (
    PsiPmf,
    convolve_log,
    f_q,
    log_sum_tail,
    log_two_positive_tail,
    psi_log,
    verify_psi_tail_bounds,
    verify_simple_convolution,
)
from spinlab.errors import OutOfRange, TruncationOverflow


@pytest.fixture(scope="module")
def default_exp():
    return PsiPmf.build(7)


@pytest.fixture(scope="module")
def scaled():
    return PsiPmf.build(7, 10, 2, kmax=200)


def test_psi_one_at_default_exponents(default_exp):
    expected = -1100 * math.log(7)
    assert abs(psi_log(default_exp, 1) - expected) <= 1e-12 * abs(expected)


def test_psi_log_matches_closed_form(default_exp):
    for k in range(1, default_exp.kmax + 1):
        closed = -2 * math.log(k) - (1000 + 100 * k) * math.log(7)
        assert abs(psi_log(default_exp, k) - closed) <= 1e-12 * abs(closed)


def test_psi_zero_near_one(scaled, default_exp):
    assert 1 - math.exp(psi_log(scaled, 0)) <= 2 * 7.0 ** -12
    assert psi_log(default_exp, 0) == 0.0


def test_psi_strictly_decreasing(scaled):
    vals = [psi_log(scaled, k) for k in range(1, scaled.kmax + 1)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_psi_out_of_range(scaled):
    with pytest.raises(OutOfRange):
        psi_log(scaled, scaled.kmax + 1)
    with pytest.raises(OutOfRange):
        psi_log(scaled, -1)


def test_convolve_identity_and_point_mass():
    a = np.log([0.5, 0.3, 0.2])
    assert np.array_equal(convolve_log(a, 1).log_pmf, a)
    point = np.array([0.0, -np.inf, -np.inf])
    out = convolve_log(point, 4).log_pmf
    assert out[0] == 0.0 and np.all(np.isneginf(out[1:]))


def test_convolve_three_point_by_hand():
    p = [0.5, 0.3, 0.2]
    # sum over the 9 ordered pairs
    expected = [0.25, 0.3, 0.09 + 0.2, 0.12, 0.04]
    out = np.exp(convolve_log(np.log(p), 2).log_pmf)
    assert np.allclose(out, expected, rtol=1e-14)


@pytest.mark.parametrize("q", [1, 2, 3])
def test_convolve_against_enumeration(q):
    rng = np.random.default_rng(q)
    kmax = 12
    p = rng.random(kmax + 1)
    p /= p.sum()
    exact = np.zeros(q * kmax + 1)
    for combo in itertools.product(range(kmax + 1), repeat=q):
        exact[sum(combo)] += np.prod(p[list(combo)])
    got = convolve_log(np.log(p), q).log_pmf
    assert np.max(np.abs(got - np.log(exact)) / np.abs(np.log(exact))) < 1e-10


def test_convolve_overflow_keeps_mass():
    p = np.log([0.4, 0.3, 0.2, 0.1])
    c = convolve_log(p, 3, max_index=4)
    total = logsumexp(np.append(c.log_pmf, c.log_overflow))
    assert abs(total) < 1e-12
    with pytest.raises(TruncationOverflow):
        c.at(5)


def test_simple_convolution_q1_equality(scaled):
    r = verify_simple_convolution(scaled, 1, 50)
    assert r.passed and r.worst_margin == 0.0


def test_simple_convolution_scaled(scaled):
    assert verify_simple_convolution(scaled, 2, 50).passed
    r = verify_simple_convolution(scaled, 7, 50)
    assert r.passed
    assert f_q(scaled, 7) <= math.sqrt(2) * 7


def test_tail_bounds_trivial_corner(scaled):
    r = verify_psi_tail_bounds(scaled, 3, 20)
    assert r.extra["part_a"]["pass"]
    one = verify_psi_tail_bounds(scaled, 1, 20)
    assert one.extra["part_b"]["worst_margin"] == math.inf
    assert np.all(np.isneginf(log_two_positive_tail(scaled, 1, 20)))


def _brute_tails(p, q, K, km):
    w = np.exp(p.log_mass[:K + 1])
    two = np.zeros((km + 1, km + 1))
    single = np.zeros(km + 1)
    for xs in itertools.product(range(K + 1), repeat=q):
        pr = np.prod(w[list(xs)])
        single[:min(sum(xs), km) + 1] += pr
    for zs in itertools.product(itertools.product(range(K + 1), repeat=2), repeat=q):
        if sum(1 for x, y in zs if x >= 1 and y >= 1) < 2:
            continue
        pr = np.prod([w[x] * w[y] for x, y in zs])
        sx, sy = min(sum(x for x, _ in zs), km), min(sum(y for _, y in zs), km)
        two[:sx + 1, :sy + 1] += pr
    return single, two


def test_tail_lhs_against_brute_force():
    # mild exponents so every term is representable and the truncation is negligible
    p = PsiPmf.build(7, 1.0, 0.5, kmax=80)
    single, two = _brute_tails(p, 2, 30, 6)
    assert np.allclose(log_sum_tail(p, 2, 6), np.log(single), rtol=0, atol=1e-10)
    assert np.allclose(log_two_positive_tail(p, 2, 6), np.log(two), rtol=0, atol=1e-10)


def test_tail_lhs_three_pairs_brute_force():
    p = PsiPmf.build(7, 3.0, 2.5, kmax=60)
    _, two = _brute_tails(p, 3, 8, 4)
    assert np.allclose(log_two_positive_tail(p, 3, 4), np.log(two), rtol=0, atol=1e-8)


def test_tail_bounds_at_default_exponents(default_exp):
    r = verify_psi_tail_bounds(default_exp, 7, 20)
    assert r.passed and r.extra["part_b"]["worst_margin"] > 1000


def test_part_b_needs_gamma_gap():
    # the d^-20 factor needs roughly gamma0 - gamma1 >= 10
    assert not verify_psi_tail_bounds(PsiPmf.build(7, 10, 2, kmax=120), 2, 20).extra["part_b"]["pass"]
    assert verify_psi_tail_bounds(PsiPmf.build(7, 14, 2, kmax=120), 7, 20).extra["part_b"]["pass"]


def test_tail_kmax_guard(scaled):
    with pytest.raises(TruncationOverflow):
        verify_psi_tail_bounds(scaled, 2, scaled.kmax)
