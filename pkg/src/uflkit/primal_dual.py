"""Primal-dual facility opening, greedy augmentation, and the scaling wrapper.

The primal-dual algorithm grows a global time from zero; every
unconnected client raises its budget with the time.  A closed facility
opens once the budgets exceeding its connection costs, plus the savings
it would give already-connected clients, cover its opening cost.
Clients connect to the first open facility within budget and switch to
closer facilities as they open.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Instance, IntegralSolution, nearest_assignment, validate
from .errors import DeltaOutOfRange


@dataclass(frozen=True)
class BifactorBound:
    """Cost guarantee of the form lambda_f * F + lambda_c * C."""

    lambda_f: float
    lambda_c: float

    def __post_init__(self):
        if self.lambda_f < 1.0 or self.lambda_c < 1.0:
            raise ValueError("bifactor bounds must be at least 1")


# Bifactor guarantee of the primal-dual algorithm against the fractional optimum.
JMS_BOUND = BifactorBound(lambda_f=1.11, lambda_c=1.7764)


def scaled_bound(bound: BifactorBound, delta: float) -> BifactorBound:
    """Guarantee after facility-cost scaling by delta plus greedy augmentation."""
    if delta < 1.0:
        raise DeltaOutOfRange(f"delta must be at least 1, got {delta}")
    return BifactorBound(
        lambda_f=bound.lambda_f + math.log(delta),
        lambda_c=1.0 + (bound.lambda_c - 1.0) / delta,
    )


def _open_threshold(time: float, rem: float, dists: np.ndarray) -> float:
    """Earliest time at which budgets of unconnected clients cover rem."""
    if rem <= 0:
        return time
    if dists.size == 0:
        return math.inf
    d = np.sort(dists)
    prefix = np.cumsum(d)
    # Between d[k-1] and d[k] the contribution is k*t - prefix[k-1].
    for k in range(1, d.size + 1):
        t = (rem + prefix[k - 1]) / k
        if t >= d[k - 1] - 1e-12 and (k == d.size or t <= d[k]):
            return max(t, time)
    return max((rem + prefix[-1]) / d.size, time)


def jms(instance: Instance) -> IntegralSolution:
    """Primal-dual opening with budget growth, switching, and exact events."""
    validate(instance)
    m, n = instance.num_facilities, instance.num_clients
    f = instance.facility_costs
    c = instance.connection_costs

    is_open = np.zeros(m, dtype=bool)
    current = np.full(n, -1, dtype=int)  # serving facility, -1 while unconnected
    t = 0.0

    while np.any(current < 0):
        unconn = np.flatnonzero(current < 0)
        open_idx = np.flatnonzero(is_open)

        # Earliest budget-reaches-open-facility event.
        conn_time = math.inf
        conn_client = -1
        if open_idx.size:
            dmin = c[np.ix_(open_idx, unconn)].min(axis=0)
            k = int(np.argmin(dmin))
            conn_time = float(dmin[k])
            conn_client = int(unconn[k])

        # Earliest facility-opening event (lowest index on ties).
        open_time = math.inf
        open_fac = -1
        connected = np.flatnonzero(current >= 0)
        for i in np.flatnonzero(~is_open):
            static = 0.0
            if connected.size:
                cur_d = c[current[connected], connected]
                static = float(np.maximum(0.0, cur_d - c[i, connected]).sum())
            ti = _open_threshold(t, f[i] - static, c[i, unconn])
            if ti < open_time - 1e-15:
                open_time = ti
                open_fac = i

        if open_fac >= 0 and open_time <= conn_time:
            t = max(t, open_time)
            is_open[open_fac] = True
            # Unconnected clients within budget connect to the new facility.
            reach = unconn[c[open_fac, unconn] <= t + 1e-12]
            current[reach] = open_fac
            # Connected clients switch if the new facility is strictly closer.
            if connected.size:
                closer = c[open_fac, connected] < c[current[connected], connected]
                current[connected[closer]] = open_fac
        else:
            t = max(t, conn_time)
            j = conn_client
            within = open_idx[c[open_idx, j] <= t + 1e-12]
            current[j] = int(within[np.argmin(c[within, j])])

    return nearest_assignment(instance, np.flatnonzero(is_open))


def greedy_augment(instance: Instance, solution: IntegralSolution) -> IntegralSolution:
    """Open closed facilities while any has positive gain.

    The gain of a closed facility is the connection cost saved by opening
    it minus its opening cost.  While some gain is positive, the facility
    maximizing gain / opening cost is opened (free facilities with
    positive gain go first, largest gain first; ties by lowest index) and
    all clients are reassigned to their nearest open facility.
    """
    f = instance.facility_costs
    c = instance.connection_costs
    open_set = set(solution.open_set)
    cur_dist = c[solution.assignment, np.arange(instance.num_clients)].astype(float)
    changed = False

    while True:
        closed = np.array(sorted(set(range(instance.num_facilities)) - open_set), dtype=int)
        if closed.size == 0:
            break
        savings = np.maximum(0.0, cur_dist[None, :] - c[closed]).sum(axis=1)
        gains = savings - f[closed]
        positive = gains > 0
        if not positive.any():
            break
        free = positive & (f[closed] == 0)
        if free.any():
            cand = np.flatnonzero(free)
            pick = cand[np.argmax(gains[cand])]
        else:
            cand = np.flatnonzero(positive)
            pick = cand[np.argmax(gains[cand] / f[closed[cand]])]
        open_set.add(int(closed[pick]))
        cur_dist = c[sorted(open_set)].min(axis=0)
        changed = True

    if not changed:
        return solution
    return nearest_assignment(instance, open_set)


def scaled(algorithm, delta: float):
    """Wrap an algorithm: scale facility costs by delta, run, unscale, augment."""
    if delta < 1.0:
        raise DeltaOutOfRange(f"delta must be at least 1, got {delta}")

    def run(instance: Instance) -> IntegralSolution:
        scaled_instance = Instance(
            facility_costs=delta * instance.facility_costs,
            connection_costs=instance.connection_costs,
        )
        sol = algorithm(scaled_instance)
        restored = IntegralSolution(
            open_set=sol.open_set,
            assignment=sol.assignment,
            facility_cost=float(instance.facility_costs[list(sol.open_set)].sum()),
            connection_cost=sol.connection_cost,
        )
        return greedy_augment(instance, restored)

    return run


def myz(instance: Instance, delta: float) -> IntegralSolution:
    """Primal-dual algorithm under facility-cost scaling by delta."""
    return scaled(jms, delta)(instance)
