"""LP relaxation of the facility location IP: optimal primal, dual, and cost shares.

The relaxation is

    min  sum_ij c_ij x_ij + sum_i f_i y_i
    s.t. sum_i x_ij = 1        for every client j
         x_ij - y_i <= 0       for every facility i and client j
         x, y >= 0

solved with HiGHS dual simplex through scipy, which also reports the dual
multipliers (v_j for the assignment equalities, w_ij for the linking rows).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .core import Instance, validate
from .errors import InfeasibleInput, NumericalFailure

DEFAULT_GAP_TOL = 1e-7

_PRIMAL_ROW_TOL = 1e-7
_LINK_TOL = 1e-9
_DUAL_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class FractionalSolution:
    """Optimal primal (x, y) of the relaxation and its objective value."""

    x: np.ndarray
    y: np.ndarray
    objective: float

    def __post_init__(self):
        self.x.setflags(write=False)
        self.y.setflags(write=False)


@dataclass(frozen=True, eq=False)
class DualSolution:
    """Optimal dual (v, w); objective equals sum of the v_j."""

    v: np.ndarray
    w: np.ndarray
    objective: float

    def __post_init__(self):
        self.v.setflags(write=False)
        self.w.setflags(write=False)


@dataclass(frozen=True, eq=False)
class ClientShares:
    """Per-client split of the LP cost.

    cost_share is the dual price v_j of client j; it decomposes into the
    fractional connection cost (connection_share) and the fractional
    facility cost (facility_share = cost_share - connection_share).
    """

    cost_share: np.ndarray
    connection_share: np.ndarray
    facility_share: np.ndarray
    facility_total: float
    connection_total: float

    def __post_init__(self):
        for arr in (self.cost_share, self.connection_share, self.facility_share):
            arr.setflags(write=False)


def _check_primal(instance: Instance, primal: FractionalSolution) -> bool:
    x, y = primal.x, primal.y
    if np.any(x < -1e-12) or np.any(y < -1e-12):
        return False
    if np.any(np.abs(x.sum(axis=0) - 1.0) > _PRIMAL_ROW_TOL):
        return False
    if np.any(x > y[:, None] + _LINK_TOL):
        return False
    return True


def _check_dual(instance: Instance, dual: DualSolution) -> bool:
    v, w = dual.v, dual.w
    if np.any(w < -1e-12):
        return False
    if np.any(w.sum(axis=1) > instance.facility_costs + _DUAL_TOL):
        return False
    if np.any(v[None, :] - w > instance.connection_costs + _DUAL_TOL):
        return False
    return True


def solve_relaxation(
    instance: Instance, gap_tol: float = DEFAULT_GAP_TOL
) -> tuple[FractionalSolution, DualSolution]:
    """Solve the relaxation to optimality; returns the primal and a feasible dual.

    Deterministic for a fixed instance.  Raises NumericalFailure if the
    solver fails or the duality gap exceeds gap_tol (relative).
    """
    validate(instance)
    if gap_tol <= 0:
        raise ValueError("gap_tol must be positive")
    m, n = instance.num_facilities, instance.num_clients
    f = instance.facility_costs
    c = instance.connection_costs
    nx = m * n

    cost = np.concatenate([c.ravel(), f])

    # sum_i x_ij = 1: row j touches columns i*n + j.
    eq_rows = np.tile(np.arange(n), m)
    eq_cols = np.arange(nx)
    a_eq = sparse.csr_matrix((np.ones(nx), (eq_rows, eq_cols)), shape=(n, nx + m))

    # x_ij - y_i <= 0: row i*n + j.
    ub_rows = np.repeat(np.arange(nx), 2)
    ub_cols = np.empty(2 * nx, dtype=int)
    ub_cols[0::2] = np.arange(nx)
    ub_cols[1::2] = nx + np.repeat(np.arange(m), n)
    ub_data = np.tile([1.0, -1.0], nx)
    a_ub = sparse.csr_matrix((ub_data, (ub_rows, ub_cols)), shape=(nx, nx + m))

    res = linprog(
        cost,
        A_ub=a_ub,
        b_ub=np.zeros(nx),
        A_eq=a_eq,
        b_eq=np.ones(n),
        method="highs-ds",
    )
    if res.status != 0:
        raise NumericalFailure(f"LP solver failed with status {res.status}: {res.message}")

    x = res.x[:nx].reshape(m, n)
    y = res.x[nx:]
    # Clamp float dust and restore the assignment rows exactly.
    x = np.clip(x, 0.0, 1.0)
    y = np.clip(y, 0.0, 1.0)
    col = x.sum(axis=0)
    if np.any(col <= 0):
        raise NumericalFailure("degenerate assignment column in LP solution")
    x = x / col
    objective = float((c * x).sum() + f @ y)

    v = np.array(res.eqlin.marginals, dtype=float)
    w = np.clip(-np.array(res.ineqlin.marginals, dtype=float).reshape(m, n), 0.0, None)
    dual_objective = float(v.sum())

    primal = FractionalSolution(x=x, y=y, objective=objective)
    dual = DualSolution(v=v, w=w, objective=dual_objective)

    if abs(objective - dual_objective) > gap_tol * max(1.0, abs(objective)):
        raise NumericalFailure(
            f"duality gap {abs(objective - dual_objective):.3e} exceeds tolerance"
        )
    if not _check_primal(instance, primal) or not _check_dual(instance, dual):
        raise NumericalFailure("solver returned an infeasible primal/dual pair")
    return primal, dual


def client_shares(
    instance: Instance, primal: FractionalSolution, dual: DualSolution
) -> ClientShares:
    """Split the LP optimum into per-client connection and facility shares."""
    if not _check_primal(instance, primal) or not _check_dual(instance, dual):
        raise InfeasibleInput("primal/dual pair violates LP feasibility")
    if abs(primal.objective - dual.objective) > 1e-6 * max(1.0, abs(primal.objective)):
        raise InfeasibleInput("primal/dual pair is not optimal (duality gap too large)")

    connection = (instance.connection_costs * primal.x).sum(axis=0)
    facility = dual.v - connection
    if np.any(facility < -_DUAL_TOL):
        raise InfeasibleInput("negative fractional facility share")
    shares = ClientShares(
        cost_share=dual.v.copy(),
        connection_share=connection,
        facility_share=facility,
        facility_total=float(instance.facility_costs @ primal.y),
        connection_total=float(connection.sum()),
    )
    return shares
