"""Facility location instances, integral solutions, and shared cost accounting.

All types are immutable after construction (numpy buffers are flagged
read-only) and safe to share across concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyDimension, EmptyOpenSet, NegativeCost, NonFiniteEntry

# Relative slack absorbing float noise in generated Euclidean instances.
METRIC_SLACK = 1e-9


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """Opening costs f_i and connection costs c_ij (facility i, client j)."""

    facility_costs: np.ndarray
    connection_costs: np.ndarray

    def __post_init__(self):
        f = np.atleast_1d(np.array(self.facility_costs, dtype=float))
        c = np.array(self.connection_costs, dtype=float)
        if c.size == 0:
            c = c.reshape(f.shape[0], 0) if f.shape[0] else c.reshape(0, 0)
        c = np.atleast_2d(c)
        if c.shape[0] != f.shape[0]:
            raise ValueError(
                f"connection cost matrix has {c.shape[0]} rows, expected {f.shape[0]}"
            )
        f.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "facility_costs", f)
        object.__setattr__(self, "connection_costs", c)

    @property
    def num_facilities(self) -> int:
        return self.facility_costs.shape[0]

    @property
    def num_clients(self) -> int:
        return self.connection_costs.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return np.array_equal(self.facility_costs, other.facility_costs) and np.array_equal(
            self.connection_costs, other.connection_costs
        )


@dataclass(frozen=True, eq=False)
class IntegralSolution:
    """An open facility set plus a total client assignment, with the cost split."""

    open_set: tuple
    assignment: np.ndarray
    facility_cost: float
    connection_cost: float

    def __post_init__(self):
        object.__setattr__(self, "open_set", tuple(sorted(int(i) for i in self.open_set)))
        object.__setattr__(self, "assignment", _frozen_array(self.assignment, dtype=int))

    @property
    def total_cost(self) -> float:
        return self.facility_cost + self.connection_cost


def validate(instance: Instance) -> None:
    """Raise unless the instance invariants hold (nonnegative, finite, nonempty)."""
    if instance.num_facilities == 0 or instance.num_clients == 0:
        raise EmptyDimension("instance must have at least one facility and one client")
    if not np.all(np.isfinite(instance.facility_costs)) or not np.all(
        np.isfinite(instance.connection_costs)
    ):
        raise NonFiniteEntry("all costs must be finite")
    if np.any(instance.facility_costs < 0) or np.any(instance.connection_costs < 0):
        raise NegativeCost("all costs must be nonnegative")


def is_metric(instance: Instance) -> bool:
    """Check the facility-location variant of the triangle inequality.

    Accepts iff c_ij <= c_ij' + c_i'j' + c_i'j for every pair of facilities
    i, i' and every pair of clients j, j'.  Exact quadruple check, intended
    for desk-scale instances.
    """
    c = instance.connection_costs
    n = instance.num_clients
    for j in range(n):
        col_j = c[:, j]
        for jp in range(n):
            if jp == j:
                continue
            col_jp = c[:, jp]
            lhs = float(np.max(col_j - col_jp))
            rhs = float(np.min(col_jp + col_j))
            if lhs > rhs + METRIC_SLACK * max(1.0, lhs):
                return False
    return True


def nearest_assignment(instance: Instance, open_set) -> IntegralSolution:
    """Assign every client to its closest open facility (ties: lowest index)."""
    open_list = sorted(int(i) for i in set(open_set))
    if not open_list:
        raise EmptyOpenSet("cannot assign clients with no open facility")
    idx = np.asarray(open_list, dtype=int)
    sub = instance.connection_costs[idx]
    # argmin returns the first minimum, which is the lowest facility index
    # because idx is sorted ascending.
    pick = np.argmin(sub, axis=0)
    assignment = idx[pick]
    facility_cost = float(instance.facility_costs[idx].sum())
    connection_cost = float(sub[pick, np.arange(instance.num_clients)].sum())
    return IntegralSolution(
        open_set=tuple(open_list),
        assignment=assignment,
        facility_cost=facility_cost,
        connection_cost=connection_cost,
    )
