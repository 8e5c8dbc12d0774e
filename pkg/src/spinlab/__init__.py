"""Glauber dynamics on random regular graphs: coupled simulation, spacetime clusters, oracles."""

from .coupling import EventStream, UpdateEvent, derive_seed, fork_replica
from .dynamics import (
    UpdateRule,
    apply_two_spin,
    magnetization_ising,
    magnetization_potts,
    p_plus_ising,
    p_plus_noisy_majority,
    p_plus_potts_dominating,
    potts_conditional,
    run_grand_coupled,
    run_potts_triple,
    run_rigid_pair,
)
from .graph import Graph, estimate_lambda2, generate_random_regular, is_one_locally_treelike
from .spacetime import ClusterStore, is_trifurcation, trifurcation_points

__version__ = "0.1.0"

__all__ = [
    "ClusterStore",
    "EventStream",
    "Graph",
    "UpdateEvent",
    "UpdateRule",
    "apply_two_spin",
    "derive_seed",
    "estimate_lambda2",
    "fork_replica",
    "generate_random_regular",
    "is_one_locally_treelike",
    "is_trifurcation",
    "magnetization_ising",
    "magnetization_potts",
    "p_plus_ising",
    "p_plus_noisy_majority",
    "p_plus_potts_dominating",
    "potts_conditional",
    "run_grand_coupled",
    "run_potts_triple",
    "run_rigid_pair",
    "trifurcation_points",
]
