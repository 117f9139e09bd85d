"""Randomized LP rounding: per-cluster facility opening and the full pipeline.

The pipeline solves the relaxation, sparsens it at the chosen gamma,
clusters the clients greedily, then opens exactly one close facility per
cluster center (with probabilities given by the complete assignment) and
every remaining split facility independently with probability equal to
its scaled opening.  Clients connect to the nearest opened facility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cluster as _cluster
from . import lp as _lp
from . import sparsen as _sparsen
from .core import Instance, IntegralSolution, nearest_assignment
from .errors import GammaOutOfRange

GAMMA_SEARCH_LOW = 1.0
GAMMA_SEARCH_HIGH = 2.0


def balance_residual(gamma: float) -> float:
    """Residual whose positive root balances the irregularity term away."""
    e_inv = math.exp(-1.0)
    e_g = math.exp(-gamma)
    return e_inv + e_g - (gamma - 1.0) * (1.0 - e_inv + e_g)


def gamma_zero(tol: float = 1e-7) -> float:
    """Root of balance_residual in (1, 2), found by bisection (about 1.67736)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = GAMMA_SEARCH_LOW, GAMMA_SEARCH_HIGH
    mid = 0.5 * (lo + hi)
    # The residual is strictly decreasing on [1, 2], so the root is unique.
    while abs(balance_residual(mid)) > tol:
        if balance_residual(mid) > 0:
            lo = mid
        else:
            hi = mid
        mid = 0.5 * (lo + hi)
    return mid


def trial_rng(base_seed: int, *key) -> np.random.Generator:
    """Deterministic per-trial generator derived from (base_seed, key...)."""
    return np.random.default_rng(np.random.SeedSequence([int(base_seed), *map(int, key)]))


@dataclass(frozen=True, eq=False)
class PipelineContext:
    """Shared read-only state: LP optimum, shares, sparsening, clustering."""

    instance: Instance
    gamma: float
    primal: _lp.FractionalSolution
    dual: _lp.DualSolution
    shares: _lp.ClientShares
    sparsened: _sparsen.SparsenedSolution
    clustering: _cluster.Clustering
    center_close: np.ndarray  # (K,) split facility is close to some center
    independent_prob: np.ndarray  # (K,) opening probability of non-center facilities


def prepare(
    instance: Instance,
    gamma: float,
    clustering_strategy: str = "greedy",
    clustering_seed: int | None = None,
) -> PipelineContext:
    """Run the deterministic part of the pipeline once, for reuse across trials."""
    if not 1.0 < gamma < 2.0:
        raise GammaOutOfRange(f"gamma must lie in (1, 2), got {gamma}")
    primal, dual = _lp.solve_relaxation(instance)
    shares = _lp.client_shares(instance, primal, dual)
    sparsened = _sparsen.sparsen(instance, primal, shares, gamma)
    if clustering_strategy == "greedy":
        clustering = _cluster.greedy_clustering(sparsened)
    elif clustering_strategy == "random":
        adjacency = _cluster.support_adjacency(sparsened)
        clustering = _cluster.random_clustering(
            adjacency, 0 if clustering_seed is None else clustering_seed
        )
    else:
        raise ValueError(f"unknown clustering strategy: {clustering_strategy!r}")
    center_close = np.zeros(sparsened.num_split_facilities, dtype=bool)
    for center in clustering.centers:
        center_close |= sparsened.close_mask[:, center]
    independent_prob = np.where(center_close, 0.0, np.minimum(sparsened.opening, 1.0))
    return PipelineContext(
        instance=instance,
        gamma=gamma,
        primal=primal,
        dual=dual,
        shares=shares,
        sparsened=sparsened,
        clustering=clustering,
        center_close=center_close,
        independent_prob=independent_prob,
    )


def draw_open_splits(context: PipelineContext, rng: np.random.Generator) -> np.ndarray:
    """One random draw of the opened split facilities (boolean over copies)."""
    sp = context.sparsened
    opened = np.zeros(sp.num_split_facilities, dtype=bool)
    for center in context.clustering.centers:
        close = np.flatnonzero(sp.close_mask[:, center])
        probs = sp.opening[close]
        probs = probs / probs.sum()
        opened[close[rng.choice(close.shape[0], p=probs)]] = True
    u = rng.random(sp.num_split_facilities)
    opened |= u < context.independent_prob
    return opened


def solution_from_splits(context: PipelineContext, opened: np.ndarray) -> IntegralSolution:
    """Merge opened split copies back to original facilities and connect clients."""
    originals = np.unique(context.sparsened.original_index[opened])
    return nearest_assignment(context.instance, originals)


def round_context(context: PipelineContext, rng: np.random.Generator) -> IntegralSolution:
    """One rounding trial on a prepared pipeline context."""
    return solution_from_splits(context, draw_open_splits(context, rng))


def round_solution(
    instance: Instance,
    sparsened: _sparsen.SparsenedSolution,
    clustering: _cluster.Clustering,
    seed,
    primal: _lp.FractionalSolution | None = None,
    dual: _lp.DualSolution | None = None,
    shares: _lp.ClientShares | None = None,
) -> IntegralSolution:
    """Randomized rounding of a sparsened solution under a given clustering.

    Opens one close split facility per cluster center (probabilities equal
    to the complete assignment, which sums to 1 over the close set), opens
    every other split facility independently with probability
    min(opening, 1), merges split copies back to original facilities, and
    connects clients to the nearest opened facility.
    """
    center_close = np.zeros(sparsened.num_split_facilities, dtype=bool)
    for center in clustering.centers:
        center_close |= sparsened.close_mask[:, center]
    context = PipelineContext(
        instance=instance,
        gamma=sparsened.gamma,
        primal=primal,
        dual=dual,
        shares=shares,
        sparsened=sparsened,
        clustering=clustering,
        center_close=center_close,
        independent_prob=np.where(center_close, 0.0, np.minimum(sparsened.opening, 1.0)),
    )
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return solution_from_splits(context, draw_open_splits(context, rng))


def a1(
    instance: Instance,
    gamma: float,
    seed: int,
    clustering_strategy: str = "greedy",
) -> IntegralSolution:
    """Full rounding algorithm at the given gamma; deterministic per seed."""
    context = prepare(
        instance,
        gamma,
        clustering_strategy=clustering_strategy,
        clustering_seed=seed,
    )
    return solution_from_splits(context, draw_open_splits(context, trial_rng(seed, 0)))


@dataclass(frozen=True, eq=False)
class RoundingDiagnostics:
    """Empirical behaviour of the rounding step over repeated trials."""

    trials: int
    mean_facility_cost: float
    mean_connection_cost: float
    std_total_cost: float
    p_close: float  # some close facility opened, averaged over clients
    p_distant_only: float  # no close but some distant facility opened
    p_none: float  # neither opened
    per_client_p: np.ndarray  # (n, 3) per-client empirical probabilities
    bound_facility: float  # gamma * fractional facility cost
    bound_connection: float  # (1 + 2 e^-gamma) * fractional connection cost
    cond_close_count: np.ndarray  # (n,) trials with some close facility open
    cond_close_mean: np.ndarray  # (n,) mean nearest open close distance
    cond_close_std: np.ndarray
    cond_distant_count: np.ndarray
    cond_distant_mean: np.ndarray
    cond_distant_std: np.ndarray
    target_close: np.ndarray  # (n,) avg_close, the distance being certified
    target_distant: np.ndarray  # (n,) avg_distant

    def __post_init__(self):
        for name in (
            "per_client_p",
            "cond_close_count",
            "cond_close_mean",
            "cond_close_std",
            "cond_distant_count",
            "cond_distant_mean",
            "cond_distant_std",
            "target_close",
            "target_distant",
        ):
            getattr(self, name).setflags(write=False)


def monte_carlo(
    instance: Instance, gamma: float, trials: int, base_seed: int
) -> RoundingDiagnostics:
    """Repeated rounding over one shared LP/sparsening/clustering.

    Trial seeds derive from (base_seed, trial index), so trials are
    independent and reproducible.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    context = prepare(instance, gamma)
    sp = context.sparsened
    n = instance.num_clients

    totals = np.empty(trials)
    fac_costs = np.empty(trials)
    conn_costs = np.empty(trials)
    counts = np.zeros((n, 3))
    close_sum = np.zeros(n)
    close_sq = np.zeros(n)
    close_hits = np.zeros(n)
    distant_sum = np.zeros(n)
    distant_sq = np.zeros(n)
    distant_hits = np.zeros(n)

    close_dist = np.where(sp.close_mask, sp.distances, np.inf)
    distant_dist = np.where(sp.distant_mask, sp.distances, np.inf)

    for t in range(trials):
        rng = trial_rng(base_seed, t)
        opened = draw_open_splits(context, rng)
        solution = solution_from_splits(context, opened)
        totals[t] = solution.total_cost
        fac_costs[t] = solution.facility_cost
        conn_costs[t] = solution.connection_cost

        min_close = np.where(opened[:, None], close_dist, np.inf).min(axis=0)
        min_distant = np.where(opened[:, None], distant_dist, np.inf).min(axis=0)
        has_close = np.isfinite(min_close)
        has_distant = np.isfinite(min_distant)
        counts[has_close, 0] += 1
        counts[~has_close & has_distant, 1] += 1
        counts[~has_close & ~has_distant, 2] += 1
        close_hits += has_close
        close_sum[has_close] += min_close[has_close]
        close_sq[has_close] += min_close[has_close] ** 2
        distant_hits += has_distant
        distant_sum[has_distant] += min_distant[has_distant]
        distant_sq[has_distant] += min_distant[has_distant] ** 2

    per_client_p = counts / trials
    with np.errstate(invalid="ignore", divide="ignore"):
        close_mean = np.where(close_hits > 0, close_sum / np.maximum(close_hits, 1), np.nan)
        close_var = close_sq / np.maximum(close_hits, 1) - close_mean**2
        distant_mean = np.where(
            distant_hits > 0, distant_sum / np.maximum(distant_hits, 1), np.nan
        )
        distant_var = distant_sq / np.maximum(distant_hits, 1) - distant_mean**2

    return RoundingDiagnostics(
        trials=trials,
        mean_facility_cost=float(fac_costs.mean()),
        mean_connection_cost=float(conn_costs.mean()),
        std_total_cost=float(totals.std(ddof=1)) if trials > 1 else 0.0,
        p_close=float(per_client_p[:, 0].mean()),
        p_distant_only=float(per_client_p[:, 1].mean()),
        p_none=float(per_client_p[:, 2].mean()),
        per_client_p=per_client_p,
        bound_facility=float(gamma * context.shares.facility_total),
        bound_connection=float(
            (1.0 + 2.0 * math.exp(-gamma)) * context.shares.connection_total
        ),
        cond_close_count=close_hits,
        cond_close_mean=close_mean,
        cond_close_std=np.sqrt(np.maximum(close_var, 0.0)),
        cond_distant_count=distant_hits,
        cond_distant_mean=distant_mean,
        cond_distant_std=np.sqrt(np.maximum(distant_var, 0.0)),
        target_close=sp.avg_close.copy(),
        target_distant=sp.avg_distant.copy(),
    )
