"""Approximation algorithms for metric uncapacitated facility location.

Provides the LP relaxation and its rounding pipeline (sparsening,
clustering, randomized opening), the primal-dual algorithm with greedy
augmentation and facility-cost scaling, hybrid portfolios, exact oracles,
instance I/O, and a benchmark harness.
"""

from .cluster import (
    Clustering,
    exact_center_probabilities,
    greedy_clustering,
    random_clustering,
    support_adjacency,
)
from .core import Instance, IntegralSolution, is_metric, nearest_assignment, validate
from .errors import UFLError
from .harness import (
    emit_json,
    emit_orlib,
    gen_euclidean,
    gen_regular,
    parse_json,
    parse_orlib,
    run_bench,
)
from .lp import ClientShares, DualSolution, FractionalSolution, client_shares, solve_relaxation
from .portfolio import a2_randomized, best_of, brute_force_opt
from .primal_dual import (
    BifactorBound,
    JMS_BOUND,
    greedy_augment,
    jms,
    myz,
    scaled,
    scaled_bound,
)
from .rounding import (
    RoundingDiagnostics,
    a1,
    gamma_zero,
    monte_carlo,
    prepare,
    round_solution,
)
from .sparsen import (
    SparsenedSolution,
    SplitFacility,
    check_main_lemma,
    scale_and_reassign,
    sparsen,
    split_to_complete,
)

__version__ = "0.1.0"

__all__ = [
    "BifactorBound",
    "ClientShares",
    "Clustering",
    "DualSolution",
    "FractionalSolution",
    "Instance",
    "IntegralSolution",
    "JMS_BOUND",
    "RoundingDiagnostics",
    "SparsenedSolution",
    "SplitFacility",
    "UFLError",
    "a1",
    "a2_randomized",
    "best_of",
    "brute_force_opt",
    "check_main_lemma",
    "client_shares",
    "emit_json",
    "emit_orlib",
    "exact_center_probabilities",
    "gamma_zero",
    "gen_euclidean",
    "gen_regular",
    "greedy_augment",
    "greedy_clustering",
    "is_metric",
    "jms",
    "monte_carlo",
    "myz",
    "nearest_assignment",
    "parse_json",
    "parse_orlib",
    "prepare",
    "random_clustering",
    "round_solution",
    "run_bench",
    "scale_and_reassign",
    "scaled",
    "scaled_bound",
    "solve_relaxation",
    "sparsen",
    "split_to_complete",
    "support_adjacency",
    "validate",
]
