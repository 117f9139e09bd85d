"""Shared fixtures and instance families used across the test modules."""

from __future__ import annotations

import numpy as np

from uflkit import Instance, client_shares, gen_euclidean, solve_relaxation
from uflkit.sparsen import sparsen

# Canonical fixture: facilities on a line at 0, 1, 2 with opening costs
# 1, 3, 1; clients at 0.25, 0.75, 1.25, 1.75; costs are line distances.
# Its exact optimum (4.0, open {0, 2}) is established by enumeration in
# test_portfolio before anything else relies on it.
TINY1_FACILITY_POSITIONS = [0.0, 1.0, 2.0]
TINY1_CLIENT_POSITIONS = [0.25, 0.75, 1.25, 1.75]
TINY1_FACILITY_COSTS = [1.0, 3.0, 1.0]


def tiny1() -> Instance:
    c = np.abs(np.subtract.outer(TINY1_FACILITY_POSITIONS, TINY1_CLIENT_POSITIONS))
    return Instance(facility_costs=TINY1_FACILITY_COSTS, connection_costs=c)


def cycle_gadget(k: int, seed: int, far: float = 2.5) -> Instance:
    """Odd-cycle instance with a fractional LP optimum; metric by construction."""
    rng = np.random.default_rng(seed)
    c = np.full((k, k), far)
    for j in range(k):
        c[j, j] = 0.9 + 0.2 * rng.random()
        c[(j + 1) % k, j] = 0.9 + 0.2 * rng.random()
    f = 0.8 + 0.4 * rng.random(k)
    return Instance(facility_costs=f, connection_costs=c)


def box_instance(seed: int) -> Instance:
    """Random costs in [1, 2.9]: metric because max < 3 * min."""
    rng = np.random.default_rng(seed)
    m, n = rng.integers(3, 7), rng.integers(4, 10)
    c = rng.uniform(1.0, 2.9, (m, n))
    f = rng.uniform(0.2, 2.0, m)
    return Instance(facility_costs=f, connection_costs=c)


def mixed_suite(count: int):
    """Metric instances of all three families, round-robin by seed."""
    out = []
    for seed in range(count):
        family = seed % 3
        if family == 0:
            out.append(gen_euclidean(5 + seed % 4, 10 + seed % 5, (0.05, 0.8), seed))
        elif family == 1:
            out.append(cycle_gadget(5 + seed % 3, seed))
        else:
            out.append(box_instance(seed))
    return out


_LP_CACHE: dict = {}


def solved(instance: Instance, key=None):
    """LP primal/dual/shares, cached per test session when a key is given."""
    if key is not None and key in _LP_CACHE:
        return _LP_CACHE[key]
    primal, dual = solve_relaxation(instance)
    shares = client_shares(instance, primal, dual)
    result = (primal, dual, shares)
    if key is not None:
        _LP_CACHE[key] = result
    return result


_SPARSEN_CACHE: dict = {}


def sparsened(instance: Instance, gamma: float, key=None):
    if key is not None and (key, gamma) in _SPARSEN_CACHE:
        return _SPARSEN_CACHE[(key, gamma)]
    primal, dual, shares = solved(instance, key)
    sp = sparsen(instance, primal, shares, gamma)
    if key is not None:
        _SPARSEN_CACHE[(key, gamma)] = sp
    return sp
