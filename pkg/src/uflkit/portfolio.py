"""Algorithm portfolio: randomized hybrid, best-of combiner, and exact oracle."""

from __future__ import annotations

import itertools

import numpy as np

from . import primal_dual as _pd
from . import rounding as _rounding
from .core import Instance, IntegralSolution, nearest_assignment
from .errors import TooLarge

BRUTE_FORCE_LIMIT = 20

# Probability of taking the primal-dual branch in the randomized hybrid.
JMS_BRANCH_PROBABILITY = 0.313

_GAMMA_ZERO = None


def balanced_gamma() -> float:
    """The rounding parameter used by the hybrid (cached root, about 1.67736)."""
    global _GAMMA_ZERO
    if _GAMMA_ZERO is None:
        _GAMMA_ZERO = _rounding.gamma_zero(1e-9)
    return _GAMMA_ZERO


def a2_randomized(instance: Instance, seed: int) -> IntegralSolution:
    """Run the primal-dual algorithm with probability 0.313, else the rounding one."""
    rng = _rounding.trial_rng(seed, 2)
    coin = rng.random()
    derived = int(rng.integers(2**63 - 1))
    if coin < JMS_BRANCH_PROBABILITY:
        return _pd.jms(instance)
    return _rounding.a1(instance, balanced_gamma(), derived)


def best_of(instance: Instance, a1_trials: int, base_seed: int) -> IntegralSolution:
    """Cheapest of the primal-dual run, its delta=1.504 scaling, and rounding trials."""
    if a1_trials < 1:
        raise ValueError("a1_trials must be at least 1")
    best = _pd.jms(instance)
    candidate = _pd.myz(instance, 1.504)
    if candidate.total_cost < best.total_cost:
        best = candidate
    context = _rounding.prepare(instance, balanced_gamma())
    for t in range(1, a1_trials + 1):
        rng = _rounding.trial_rng(base_seed, t)
        opened = _rounding.draw_open_splits(context, rng)
        candidate = _rounding.solution_from_splits(context, opened)
        if candidate.total_cost < best.total_cost:
            best = candidate
    return best


def brute_force_opt(instance: Instance) -> IntegralSolution:
    """Exact optimum by enumerating every nonempty open set.

    Breaks cost ties toward the lexicographically smallest open set.
    Intended as a desk-scale oracle; refuses instances with more than
    BRUTE_FORCE_LIMIT facilities.
    """
    m = instance.num_facilities
    if m > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"enumeration limited to {BRUTE_FORCE_LIMIT} facilities")
    f = instance.facility_costs
    c = instance.connection_costs
    best_cost = np.inf
    best_subset = None
    for size in range(1, m + 1):
        for subset in itertools.combinations(range(m), size):
            idx = np.asarray(subset, dtype=int)
            cost = float(f[idx].sum() + c[idx].min(axis=0).sum())
            if cost < best_cost or (cost == best_cost and subset < best_subset):
                best_cost = cost
                best_subset = subset
    return nearest_assignment(instance, best_subset)
