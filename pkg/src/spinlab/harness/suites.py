"""The ``verify`` suites: exact lemma checks and small invariant simulations."""

from __future__ import annotations

import math

import numpy as np

from ..analysis.gibbs import detailed_balance
from ..analysis.lemmas import (
    check_p_plus_monotone,
    check_supermajority_bound,
    noisy_majority_noise_limit,
    trifurcation_bound_trials,
    verify_potts_domination,
)
from ..analysis.psi import PsiPmf, f_q, verify_psi_tail_bounds, verify_simple_convolution
from ..analysis.report import Report, merge
from ..coupling import EventStream, derive_seed
from ..dynamics import UpdateRule, biased_potts, biased_two_spin, run_grand_coupled, run_potts_triple, run_rigid_pair
from ..graph import complete_graph, cycle_graph, generate_random_regular, petersen_graph

SCALED = {"d": 7, "gamma0": 10.0, "gamma1": 2.0}
DOMINATION_BETAS = (0.25, 0.5, 1.0, 2.0, 3.0)


def potts_domination_grid() -> Report:
    reports = []
    for q in (2, 3, 4, 5):
        for d in range(7, 13):
            for beta in DOMINATION_BETAS:
                beta_p = 2 * beta + 7 * math.log(q - 1) / d
                reports.append(verify_potts_domination(beta_p, q, d))
    return merge("potts_domination_grid", reports, {"q": [2, 5], "d": [7, 12], "beta": list(DOMINATION_BETAS)})


def potts_margin_zero_grid() -> Report:
    """With no ln(q-1) margin some composition must break the bound (q = 3)."""
    witnesses = []
    for d in range(7, 13):
        for beta in DOMINATION_BETAS:
            r = verify_potts_domination(2 * beta, 3, d, beta=beta)
            if not r.passed:
                witnesses.append({"d": d, "beta": beta, "first": r.witnesses[0]})
    return Report("potts_margin_zero_needs_witness", {"q": 3, "beta_p": "2 beta"}, bool(witnesses),
                  float(len(witnesses)), witnesses[:10])


def convolution_reports(kmax: int = 50, qs=(1, 2, 3, 4, 5, 6, 7), gammas=None) -> list[Report]:
    gammas = gammas or (SCALED["gamma0"], SCALED["gamma1"])
    p = PsiPmf.build(SCALED["d"], gammas[0], gammas[1], kmax=200)
    out = []
    for q in qs:
        out.append(verify_simple_convolution(p, q, kmax))
        if f_q(p, q) > math.sqrt(2) * q:
            out.append(Report("f_q_bound", {"q": q}, False, math.sqrt(2) * q - f_q(p, q)))
    for q in qs:
        out.append(verify_psi_tail_bounds(p, q, kmax))
    return out


def two_spin_condition_reports(d_values=range(7, 11)) -> list[Report]:
    out = []
    for d in d_values:
        for beta in (0.5, 1.0, 3.0):
            out.append(check_p_plus_monotone(UpdateRule.ising(beta), d))
            out.append(check_supermajority_bound(UpdateRule.ising(beta), d, beta))
            dom = UpdateRule.potts_dominating(2 * beta + 7 * math.log(2) / d, 3, d)
            out.append(check_p_plus_monotone(dom, d))
            out.append(check_supermajority_bound(dom, d, dom.beta))
            noisy = UpdateRule.noisy_majority(noisy_majority_noise_limit(beta, d))
            out.append(check_p_plus_monotone(noisy, d))
            out.append(check_supermajority_bound(noisy, d, beta))
    return out


def lemma_suite(quick: bool = False) -> list[Report]:
    reports = [potts_domination_grid(), potts_margin_zero_grid()]
    reports += convolution_reports(qs=(1, 2, 7) if quick else (1, 2, 3, 4, 5, 6, 7))
    reports += two_spin_condition_reports(range(7, 9) if quick else range(7, 11))
    reports.append(trifurcation_bound_trials(1000 if quick else 10_000, seed=0))
    return reports


def invariants_suite(quick: bool = False, seed: int = 0) -> list[Report]:
    out = []
    for g, rule in ((complete_graph(4), UpdateRule.ising(1.0)), (petersen_graph(), UpdateRule.ising(0.3)),
                    (cycle_graph(9), UpdateRule.ising(0.7)), (complete_graph(5), UpdateRule.potts_glauber(0.8, 3))):
        out.append(detailed_balance(g, rule))

    seeds = range(3 if quick else 10)
    n = 200
    order = dom = struct = incl = 0
    for s in seeds:
        g = generate_random_regular(n, 7, s)
        ss = derive_seed(seed, s)
        inits = [-np.ones(n), biased_two_spin(n, 0.5, ss), np.ones(n)]
        order += run_grand_coupled(g, UpdateRule.ising(0.4), inits, EventStream(ss, n), 10.0).order_violations
        r = run_rigid_pair(g, UpdateRule.ising(0.1), EventStream(ss, n), 10.0, R=1, strict=False, paranoid=True)
        dom += r.domination_violations
        struct += sum(r.structure_violations) + r.scan_violations
        t = run_potts_triple(g, biased_potts(n, 3, 0.9, ss), 2 * 0.5 + math.log(2), 3, EventStream(ss, n), 10.0,
                             strict=False, check_every=200)
        incl += t.disagreement_violations + t.support_violations + t.post_extinction_disagreements + t.scan_violations
    params = {"n": n, "seeds": len(seeds)}
    out.append(Report("grand_coupling_order", params, order == 0, float(-order)))
    out.append(Report("rigid_domination", params, dom == 0, float(-dom)))
    out.append(Report("rigid_structure", params, struct == 0, float(-struct)))
    out.append(Report("potts_inclusions", params, incl == 0, float(-incl)))
    return out
