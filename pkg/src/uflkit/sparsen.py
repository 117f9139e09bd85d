"""Sparsening: turn the LP optimum into a complete, gamma-scaled solution.

The transformation has three mechanical stages:

1. The optimal (x, y) is first made *complete* (no pair with
   0 < x_ij < y_i) by layering every facility at the distinct positive
   assignment values of its clients.  Each layer becomes a "base"
   facility; a client either uses a base fully or not at all, and the
   bases serving a client carry total opening exactly 1.  This step is
   what makes the close/distant bookkeeping below exact even when the LP
   optimum itself is not complete.
2. Base openings are scaled by gamma and every client is greedily
   reassigned to its nearest bases (nondecreasing distance, serving
   bases first on distance ties) until its unit demand is covered.
3. Bases are layered again at the distinct reassigned values, yielding
   split facilities on which the solution is complete.

For every client j the split facilities with positive assignment form
its close set; the leftover scaled capacity of bases that served j in
the completed optimum forms its distant set.  Close openings sum to 1
and distant openings to gamma - 1, which is what the per-client distance
statistics and the irregularity measure rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Instance
from .errors import GammaOutOfRange, NotNeighbors, NumericalFailure
from .lp import ClientShares, FractionalSolution

_POSITIVE_TOL = 1e-12
_SHARE_ZERO_TOL = 1e-9

MASS_TOL = 1e-7
STAT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SplitFacility:
    """One split copy of an input facility; costs are inherited from it."""

    original_index: int
    opening: float


@dataclass(frozen=True, eq=False)
class ScaledSolution:
    """Intermediate (x~, y~ = gamma * y) over the completed base facilities."""

    instance: Instance
    gamma: float
    base_original: np.ndarray  # (B,) original facility of each base
    base_serves: np.ndarray  # (B, n) True if the base served the client pre-scaling
    opening: np.ndarray  # (B,) scaled openings y~
    assignment: np.ndarray  # (B, n) reassigned x~
    y_star: np.ndarray  # (m,) openings of the LP optimum

    def __post_init__(self):
        for name in ("base_original", "base_serves", "opening", "assignment", "y_star"):
            getattr(self, name).setflags(write=False)


@dataclass(frozen=True, eq=False)
class SparsenedSolution:
    """Complete gamma-scaled solution with per-client distance statistics."""

    instance: Instance
    gamma: float
    facilities: tuple  # tuple[SplitFacility]
    original_index: np.ndarray  # (K,)
    base_index: np.ndarray  # (K,) base facility each split copy came from
    opening: np.ndarray  # (K,) openings, in (0, gamma]
    x_bar: np.ndarray  # (K, n) complete assignment
    distances: np.ndarray  # (K, n) connection costs of the split copies
    close_mask: np.ndarray  # (K, n) x_bar > 0
    distant_mask: np.ndarray  # (K, n) unused leftover of serving bases
    avg_close: np.ndarray  # (n,) average distance to a close facility
    avg_distant: np.ndarray  # (n,) average distance to a distant facility
    max_close: np.ndarray  # (n,) maximum distance to a close facility
    irregularity: np.ndarray  # (n,) in [0, 1]
    irregularity_scaled: np.ndarray  # (n,) irregularity * (gamma - 1)
    connection_share: np.ndarray  # (n,) fractional connection cost per client
    facility_share: np.ndarray  # (n,) fractional facility cost per client

    def __post_init__(self):
        for name in (
            "original_index",
            "base_index",
            "opening",
            "x_bar",
            "distances",
            "close_mask",
            "distant_mask",
            "avg_close",
            "avg_distant",
            "max_close",
            "irregularity",
            "irregularity_scaled",
            "connection_share",
            "facility_share",
        ):
            getattr(self, name).setflags(write=False)

    @property
    def num_split_facilities(self) -> int:
        return self.opening.shape[0]

    @property
    def num_clients(self) -> int:
        return self.x_bar.shape[1]

    def close_set(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.close_mask[:, j])

    def distant_set(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.distant_mask[:, j])

    def avg_distance(self, j: int, split_indices) -> float:
        """Opening-weighted average distance from client j to the given copies."""
        idx = np.asarray(split_indices, dtype=int)
        if idx.size == 0:
            raise ValueError("average distance over an empty facility set")
        w = self.opening[idx]
        return float((w * self.distances[idx, j]).sum() / w.sum())

    def are_neighbors(self, j: int, j2: int) -> bool:
        """True if the clients share a split facility with positive assignment."""
        return bool(np.any(self.close_mask[:, j] & self.close_mask[:, j2]))


def _layer_boundaries(values: np.ndarray, top: float) -> np.ndarray:
    """Ascending layer boundaries: distinct positive values capped by top."""
    vals = values[values > _POSITIVE_TOL]
    vals = np.minimum(vals, top)
    return np.unique(np.append(vals, top))


def scale_and_reassign(
    instance: Instance, primal: FractionalSolution, gamma: float
) -> ScaledSolution:
    """Scale facility openings by gamma and reassign clients nearest-first.

    The LP optimum is completed (facilities layered at distinct assignment
    values) before scaling, so each client's serving bases carry total
    opening exactly 1.  The reassignment then fills each client's unit
    demand from the scaled bases in order of nondecreasing distance,
    preferring serving bases on exact distance ties.
    """
    if not 1.0 < gamma < 2.0:
        raise GammaOutOfRange(f"gamma must lie in (1, 2), got {gamma}")
    m, n = instance.num_facilities, instance.num_clients
    x = np.minimum(np.asarray(primal.x, dtype=float), primal.y[:, None])
    y = np.asarray(primal.y, dtype=float)

    base_original = []
    base_openings = []
    serves_rows = []
    for i in range(m):
        if y[i] <= _POSITIVE_TOL:
            continue
        uppers = _layer_boundaries(x[i], y[i])
        lowers = np.concatenate([[0.0], uppers[:-1]])
        widths = uppers - lowers
        keep = widths > 0
        uppers, widths = uppers[keep], widths[keep]
        # Client j uses every layer whose upper boundary is within x_ij;
        # x_ij is itself one of the boundaries, so the comparison is exact.
        serves_rows.append(uppers[:, None] <= x[i][None, :])
        base_original.extend([i] * len(uppers))
        base_openings.extend(widths)

    base_original = np.asarray(base_original, dtype=int)
    base_open = gamma * np.asarray(base_openings, dtype=float)
    base_serves = (
        np.vstack(serves_rows) if serves_rows else np.zeros((0, n), dtype=bool)
    )
    num_bases = base_original.shape[0]

    dist = instance.connection_costs[base_original]  # (B, n)
    ordinal = np.arange(num_bases)
    assignment = np.zeros((num_bases, n))
    for j in range(n):
        not_serving = (~base_serves[:, j]).astype(int)
        order = np.lexsort((ordinal, base_original, not_serving, dist[:, j]))
        caps = base_open[order]
        before = np.cumsum(caps) - caps
        take = np.minimum(caps, np.maximum(0.0, 1.0 - before))
        assignment[order, j] = take

    return ScaledSolution(
        instance=instance,
        gamma=gamma,
        base_original=base_original,
        base_serves=base_serves,
        opening=base_open,
        assignment=assignment,
        y_star=y.copy(),
    )


def split_to_complete(scaled: ScaledSolution, shares: ClientShares) -> SparsenedSolution:
    """Split bases until no client partially uses a facility; compute statistics."""
    instance = scaled.instance
    gamma = scaled.gamma
    n = instance.num_clients
    num_bases = scaled.opening.shape[0]

    orig_idx = []
    base_idx = []
    openings = []
    xbar_blocks = []
    distant_blocks = []
    for b in range(num_bases):
        row = scaled.assignment[b]
        uppers = _layer_boundaries(row, scaled.opening[b])
        lowers = np.concatenate([[0.0], uppers[:-1]])
        widths = uppers - lowers
        keep = widths > 0
        uppers, widths = uppers[keep], widths[keep]
        used = uppers[:, None] <= row[None, :]  # exact: row values are boundaries
        xbar_blocks.append(widths[:, None] * used)
        distant_blocks.append(~used & scaled.base_serves[b][None, :])
        orig_idx.extend([scaled.base_original[b]] * len(uppers))
        base_idx.extend([b] * len(uppers))
        openings.extend(widths)

    original_index = np.asarray(orig_idx, dtype=int)
    base_index = np.asarray(base_idx, dtype=int)
    opening = np.asarray(openings, dtype=float)
    x_bar = np.vstack(xbar_blocks)
    distant_mask = np.vstack(distant_blocks)
    close_mask = x_bar > 0
    distances = instance.connection_costs[original_index]

    close_w = np.where(close_mask, opening[:, None], 0.0)
    distant_w = np.where(distant_mask, opening[:, None], 0.0)
    close_mass = close_w.sum(axis=0)
    distant_mass = distant_w.sum(axis=0)
    if np.any(close_mass <= 0) or np.any(distant_mass <= 0):
        raise NumericalFailure("client with empty close or distant set after sparsening")

    avg_close = (close_w * distances).sum(axis=0) / close_mass
    avg_distant = (distant_w * distances).sum(axis=0) / distant_mass
    max_close = np.where(close_mask, distances, -np.inf).max(axis=0)

    c_share = shares.connection_share
    f_share = shares.facility_share
    nonzero = f_share > _SHARE_ZERO_TOL
    r = np.zeros(n)
    r[nonzero] = np.clip((avg_distant[nonzero] - c_share[nonzero]) / f_share[nonzero], 0.0, 1.0)

    sparsened = SparsenedSolution(
        instance=instance,
        gamma=gamma,
        facilities=tuple(
            SplitFacility(original_index=int(i), opening=float(o))
            for i, o in zip(original_index, opening)
        ),
        original_index=original_index,
        base_index=base_index,
        opening=opening,
        x_bar=x_bar,
        distances=distances,
        close_mask=close_mask,
        distant_mask=distant_mask,
        avg_close=avg_close,
        avg_distant=avg_distant,
        max_close=max_close,
        irregularity=r,
        irregularity_scaled=r * (gamma - 1.0),
        connection_share=c_share.copy(),
        facility_share=f_share.copy(),
    )
    _check_invariants(sparsened, scaled, close_mass, distant_mass)
    return sparsened


def _check_invariants(
    sp: SparsenedSolution,
    scaled: ScaledSolution,
    close_mass: np.ndarray,
    distant_mass: np.ndarray,
) -> None:
    gamma = sp.gamma
    if not np.all((sp.x_bar == 0) | (sp.x_bar == sp.opening[:, None])):
        raise NumericalFailure("completeness violated: partial assignment survived")
    if np.any(np.abs(close_mass - 1.0) > MASS_TOL):
        raise NumericalFailure("close-set openings do not sum to 1")
    if np.any(np.abs(distant_mass - (gamma - 1.0)) > MASS_TOL):
        raise NumericalFailure("distant-set openings do not sum to gamma - 1")
    merged = np.bincount(
        sp.original_index, weights=sp.opening, minlength=scaled.y_star.shape[0]
    )
    if np.any(np.abs(merged - gamma * scaled.y_star) > 1e-9):
        raise NumericalFailure("split openings do not merge back to gamma * y")
    if np.any(sp.irregularity < 0) or np.any(sp.irregularity > 1):
        raise NumericalFailure("irregularity outside [0, 1]")
    c, f = sp.connection_share, sp.facility_share
    if np.any(np.abs(sp.avg_close - (c - sp.irregularity_scaled * f)) > STAT_TOL):
        raise NumericalFailure("average close distance identity violated")
    if np.any(np.abs(sp.avg_distant - (c + sp.irregularity * f)) > STAT_TOL):
        raise NumericalFailure("average distant distance identity violated")
    if np.any(sp.max_close > sp.avg_distant + 1e-9):
        raise NumericalFailure("maximum close distance exceeds average distant distance")


def sparsen(
    instance: Instance, primal: FractionalSolution, shares: ClientShares, gamma: float
) -> SparsenedSolution:
    """Full sparsening pipeline: scale, reassign, and split to a complete solution."""
    return split_to_complete(scale_and_reassign(instance, primal, gamma), shares)


def check_main_lemma(
    sp: SparsenedSolution, j: int, j2: int, tol: float = STAT_TOL
) -> bool:
    """Bound the distance from j to the close facilities of j2 that are new to j.

    For neighboring clients, the close facilities of j2 outside j's close
    and distant sets are either absent or within
    avg_distant(j) + max_close(j2) + avg_close(j2) on average.  Holds for
    every neighbor pair whenever gamma < 2; exposed as a property-test hook.
    """
    if j == j2:
        return True
    if not sp.are_neighbors(j, j2):
        raise NotNeighbors(f"clients {j} and {j2} share no split facility")
    diff = sp.close_mask[:, j2] & ~(sp.close_mask[:, j] | sp.distant_mask[:, j])
    if not diff.any():
        return True
    w = sp.opening[diff]
    d = sp.distances[diff, j]
    lhs = float((w * d).sum() / w.sum())
    rhs = float(sp.avg_distant[j] + sp.max_close[j2] + sp.avg_close[j2])
    return lhs <= rhs + tol
