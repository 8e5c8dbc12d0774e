"""Oracles and statistics: exact Gibbs laws, psi convolutions, finite lemma checks."""

from .gibbs import detailed_balance, exact_gibbs, phase_mask, restrict_to_phase, tv_distance
from .lemmas import check_p_plus_monotone, trifurcation_bound_trials, verify_potts_domination
from .psi import PsiPmf, convolve_log, f_q, verify_psi_tail_bounds, verify_simple_convolution
from .report import Report
from .stats import censored_median, fit_log_slope, hitting_time, histogram

__all__ = [
    "PsiPmf", "Report", "censored_median", "check_p_plus_monotone", "convolve_log", "detailed_balance",
    "exact_gibbs", "f_q", "fit_log_slope", "histogram", "hitting_time", "phase_mask", "restrict_to_phase",
    "trifurcation_bound_trials", "tv_distance", "verify_potts_domination", "verify_psi_tail_bounds",
    "verify_simple_convolution",
]
