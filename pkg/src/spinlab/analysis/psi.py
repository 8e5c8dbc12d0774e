"""The psi family and exact log-space convolution checks.

psi_k = k^-2 d^-(gamma0 + gamma1 k) for k >= 1 and psi_0 = 1 - sum.  At the
large exponents these masses are far below the smallest double, so every
quantity here is a natural log.  Truncated supports are handled by adding
the missing mass, bounded analytically, to whichever side makes the check
harder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from ..errors import OutOfRange, TruncationOverflow
from .report import Report

NEG_INF = -math.inf


def _log_psi_closed(d: int, gamma0: float, gamma1: float, k: np.ndarray | int):
    k = np.asarray(k, dtype=float)
    return -2.0 * np.log(k) - (gamma0 + gamma1 * k) * math.log(d)


def _log_add(a: float, b: float) -> float:
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


@dataclass(frozen=True)
class PsiPmf:
    d: int
    gamma0: float
    gamma1: float
    kmax: int
    log_mass: np.ndarray
    log_tail: float  # log of sum_{k > kmax} psi_k (upper bound)

    @classmethod
    def build(cls, d: int, gamma0: float = 1000.0, gamma1: float = 100.0, kmax: int = 200) -> "PsiPmf":
        if d < 7:
            raise ValueError("d must be at least 7")
        if kmax < 1:
            raise ValueError("kmax must be at least 1")
        ks = np.arange(1, kmax + 1)
        logs = _log_psi_closed(d, gamma0, gamma1, ks)
        # sum_{k>kmax} psi_k <= psi_{kmax+1} / (1 - d^-gamma1)
        tail = float(_log_psi_closed(d, gamma0, gamma1, kmax + 1)) - math.log1p(-d ** (-gamma1))
        log_pos = _log_add(float(logsumexp(logs)), tail)
        log0 = math.log1p(-math.exp(log_pos))
        mass = np.concatenate([[log0], logs])
        pmf = cls(d, float(gamma0), float(gamma1), int(kmax), mass, tail)
        pmf._check()
        return pmf

    def _check(self) -> None:
        total = math.exp(float(logsumexp(self.log_mass)))
        # at large exponents psi_0 rounds to exactly 1
        if not (math.isfinite(self.log_mass[0]) and self.log_mass[0] <= 0.0):
            raise ValueError("psi_0 outside (0, 1]")
        if not 1.0 - 1e-12 <= total <= 1.0 + 1e-15:
            raise ValueError(f"truncated psi mass {total} not within 1e-12 of 1; raise kmax")
        if np.any(np.diff(self.log_mass[1:]) >= 0):
            raise ValueError("psi_k not strictly decreasing")

    def closed(self, k: int) -> float:
        """log psi_k from the formula, valid past the truncation for k >= 1."""
        if k == 0:
            return float(self.log_mass[0])
        return float(_log_psi_closed(self.d, self.gamma0, self.gamma1, k))

    def log_positive(self) -> float:
        """log P(Y >= 1), including the untruncated tail."""
        return _log_add(float(logsumexp(self.log_mass[1:])), self.log_tail)

    def params(self) -> dict:
        return {"d": self.d, "gamma0": self.gamma0, "gamma1": self.gamma1, "kmax": self.kmax}


def psi_log(p: PsiPmf, k: int) -> float:
    if not 0 <= k <= p.kmax:
        raise OutOfRange(f"k={k} outside 0..{p.kmax}")
    return float(p.log_mass[k])


# ---------------------------------------------------------------- convolution


class LogConvolution(NamedTuple):
    log_pmf: np.ndarray
    log_overflow: float  # log of the mass that landed beyond the returned support

    def at(self, k: int) -> float:
        if k < 0 or k >= self.log_pmf.size:
            raise TruncationOverflow(f"index {k} beyond convolution support 0..{self.log_pmf.size - 1}")
        return float(self.log_pmf[k])


def _conv2(a: np.ndarray, b: np.ndarray, limit: int | None) -> tuple[np.ndarray, float]:
    size = a.size + b.size - 1
    keep = size if limit is None else min(size, limit + 1)
    out = np.full(keep, NEG_INF)
    over = NEG_INF
    for k in range(size):
        lo = max(0, k - b.size + 1)
        hi = min(k, a.size - 1)
        terms = a[lo:hi + 1] + b[k - hi:k - lo + 1][::-1]
        v = float(logsumexp(terms)) if terms.size else NEG_INF
        if k < keep:
            out[k] = v
        else:
            over = _log_add(over, v)
    return out, over


def convolve_log(log_pmf, q: int, max_index: int | None = None) -> LogConvolution:
    """q-fold self-convolution of a log-space pmf by iterated log-sum-exp.

    Entry k is log P(Y_1 + ... + Y_q = k) for the (possibly truncated) input.
    Mass at indices above ``max_index`` is folded into ``log_overflow``.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    a = np.asarray(log_pmf, dtype=float)
    acc, over = a.copy(), NEG_INF
    if max_index is not None and acc.size > max_index + 1:
        over = float(logsumexp(acc[max_index + 1:]))
        acc = acc[:max_index + 1]
    for _ in range(q - 1):
        # overflow mass stays overflow: every input value is >= 0
        total_a = float(logsumexp(a))
        over = over + total_a if over != NEG_INF else NEG_INF
        acc, extra = _conv2(acc, a, max_index)
        over = _log_add(over, extra)
    return LogConvolution(acc, over)


def _log_tails(log_pmf: np.ndarray) -> np.ndarray:
    """tails[k] = log sum_{j >= k} exp(log_pmf[j])."""
    out = np.empty(log_pmf.size)
    acc = NEG_INF
    for k in range(log_pmf.size - 1, -1, -1):
        acc = _log_add(acc, float(log_pmf[k]))
        out[k] = acc
    return out


# ---------------------------------------------------------------- lemma checks


def f_q(p: PsiPmf, q: int) -> float:
    r = 1.0 + 16.0 * p.d ** (-p.gamma0)
    return sum(r ** i for i in range(q))


def verify_simple_convolution(p: PsiPmf, q: int, kmax: int) -> Report:
    """P(Y_1+...+Y_q = k) <= f_q psi_k for 1 <= k <= kmax, Y_i iid psi.

    Sums equal to k only involve draws <= k, so with kmax <= p.kmax the left
    side is exact (no truncation correction needed).
    """
    if q > p.d:
        raise ValueError("q must not exceed d")
    if kmax > p.kmax:
        raise TruncationOverflow(f"kmax={kmax} beyond pmf truncation {p.kmax}")
    conv = convolve_log(p.log_mass[:kmax + 1], q, max_index=kmax)
    lf = math.log(f_q(p, q))
    margins = [lf + float(p.log_mass[k]) - float(conv.log_pmf[k]) for k in range(1, kmax + 1)]
    worst = min(margins)
    bad = [{"k": k, "margin": m} for k, m in zip(range(1, kmax + 1), margins) if m < 0]
    wit = bad[:20] if bad else [{"k": int(np.argmin(margins)) + 1, "margin": worst}]
    return Report("simple_convolution", {**p.params(), "q": q, "check_kmax": kmax, "f_q": f_q(p, q)},
                  not bad, worst, wit)


def _positive_sum_tails(p: PsiPmf, m_max: int, kmax: int) -> list[np.ndarray]:
    """G[m][k] = log P(m positive draws sum to >= k, all draws >= 1), k <= kmax.

    Built from the truncated positive part of psi; draws past the truncation
    always push the sum past kmax, so m * log_tail is added as an upper bound.
    """
    pos = p.log_mass.copy()
    pos[0] = NEG_INF
    out = [np.concatenate([[0.0], np.full(kmax, NEG_INF)])]  # m = 0: empty sum is 0
    acc = np.array([0.0])
    total_pos = p.log_positive()
    for m in range(1, m_max + 1):
        full, _ = _conv2(acc, pos, None)
        acc = full
        tails = _log_tails(full)
        t = np.array([tails[k] if k < tails.size else NEG_INF for k in range(kmax + 1)])
        # any configuration with at least one draw past truncation: <= m * tail * P(pos)^(m-1)
        extra = math.log(m) + p.log_tail + (m - 1) * total_pos
        out.append(np.array([_log_add(float(x), extra) for x in t]))
    return out


def log_sum_tail(p: PsiPmf, q: int, kmax: int, G=None) -> np.ndarray:
    """log P(X_1 + ... + X_q >= k) for X_i iid psi, k = 0..kmax (upper bound past truncation)."""
    G = G if G is not None else _positive_sum_tails(p, q, kmax)
    log0 = float(p.log_mass[0])
    # condition on the number m of positive draws
    out = np.full(kmax + 1, NEG_INF)
    for m in range(q + 1):
        lc = math.log(math.comb(q, m)) + (q - m) * log0
        out = np.logaddexp(out, lc + G[m])
    out[0] = 0.0
    return out


def log_two_positive_tail(p: PsiPmf, q: int, kmax: int, G=None) -> np.ndarray:
    """log P(J >= 2, sum Z >= (k, l)) for q iid pairs Z_i ~ psi x psi, as a (kmax+1)^2 array.

    Exact over the types of the q pairs: a pairs with both coordinates
    positive, b / c with only the first / second positive, r with neither.
    """
    G = G if G is not None else _positive_sum_tails(p, q, kmax)
    log0 = float(p.log_mass[0])
    lgam = math.lgamma
    out = np.full((kmax + 1, kmax + 1), NEG_INF)
    for a in range(2, q + 1):
        for b in range(0, q - a + 1):
            for c in range(0, q - a - b + 1):
                r = q - a - b - c
                coef = (lgam(q + 1) - lgam(a + 1) - lgam(b + 1) - lgam(c + 1) - lgam(r + 1)
                        + (b + c + 2 * r) * log0)
                out = np.logaddexp(out, coef + G[a + b][:, None] + G[a + c][None, :])
    return out


def verify_psi_tail_bounds(p: PsiPmf, q: int, kmax: int) -> Report:
    """Both tail bounds for sums of q iid pairs Z_i ~ psi x psi, 0 <= k, l <= kmax.

    (a) P(sum Z >= (k, l)) <= 2 q^2 psi_k psi_l, via the product of the two
        coordinate tails;
    (b) P(J >= 2, sum Z >= (k, l)) <= d^-20 psi_{k+1} psi_{l+1}, J the number
        of pairs that are >= (1, 1) coordinatewise.
    """
    if q > p.d:
        raise ValueError("q must not exceed d")
    if kmax >= p.kmax:
        raise TruncationOverflow(f"kmax={kmax} must be below the pmf truncation {p.kmax}")
    logd = math.log(p.d)
    G = _positive_sum_tails(p, q, kmax)
    single = log_sum_tail(p, q, kmax, G)
    rhs_a = lambda k, l: math.log(2 * q * q) + p.closed(k) + p.closed(l)
    margins_a = np.array([[rhs_a(k, l) - (single[k] + single[l]) for l in range(kmax + 1)]
                          for k in range(kmax + 1)])

    lhs_b = log_two_positive_tail(p, q, kmax, G)
    rhs_b = np.array([[-20 * logd + p.closed(k + 1) + p.closed(l + 1) for l in range(kmax + 1)]
                      for k in range(kmax + 1)])
    margins_b = rhs_b - lhs_b

    def summarize(margins, part):
        bad = np.argwhere(margins < 0)
        wit = [{"part": part, "k": int(k), "l": int(l), "margin": float(margins[k, l])} for k, l in bad[:20]]
        if not wit:
            k, l = np.unravel_index(np.argmin(margins), margins.shape)
            wit = [{"part": part, "k": int(k), "l": int(l), "margin": float(margins[k, l])}]
        return bad.size == 0, float(margins.min()), wit, int(len(bad))

    ok_a, worst_a, wit_a, nbad_a = summarize(margins_a, "a")
    ok_b, worst_b, wit_b, nbad_b = summarize(margins_b, "b")
    return Report("psi_tail_bounds", {**p.params(), "q": q, "check_kmax": kmax},
                  ok_a and ok_b, min(worst_a, worst_b), wit_a + wit_b,
                  extra={"part_a": {"pass": ok_a, "worst_margin": worst_a, "violations": nbad_a},
                         "part_b": {"pass": ok_b, "worst_margin": worst_b, "violations": nbad_b}})
