"""Clusterings of the client support graph.

Two clients are neighbors when they share a split facility with positive
assignment in the sparsened solution.  A clustering partitions clients
into groups, each led by a center; centers are pairwise non-adjacent and
every member is adjacent to its center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooLarge
from .sparsen import SparsenedSolution

EXACT_PROBABILITY_LIMIT = 12


@dataclass(frozen=True, eq=False)
class Clustering:
    """Cluster centers (in creation order) and the client -> center map."""

    centers: tuple
    assignment: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(int(c) for c in self.centers))
        arr = np.array(self.assignment, dtype=int)
        arr.setflags(write=False)
        object.__setattr__(self, "assignment", arr)

    def center_of(self, j: int) -> int:
        return int(self.assignment[j])


def support_adjacency(sparsened: SparsenedSolution) -> np.ndarray:
    """Client adjacency matrix of the support graph of the complete solution."""
    close = sparsened.close_mask.astype(float)
    adj = (close.T @ close) > 0
    np.fill_diagonal(adj, False)
    return adj


def greedy_clustering(sparsened: SparsenedSolution) -> Clustering:
    """Pick centers greedily by smallest avg_close + max_close.

    Iteratively selects the unclustered client minimizing
    avg_close(j) + max_close(j) (ties: lowest index) and absorbs its
    unclustered neighbors, which guarantees that every member's score is
    at least its center's score.
    """
    adj = support_adjacency(sparsened)
    n = adj.shape[0]
    score = sparsened.avg_close + sparsened.max_close
    assignment = np.full(n, -1, dtype=int)
    centers = []
    unclustered = np.ones(n, dtype=bool)
    while unclustered.any():
        candidates = np.flatnonzero(unclustered)
        center = int(candidates[np.argmin(score[candidates])])
        members = adj[center] & unclustered
        assignment[center] = center
        assignment[members] = center
        unclustered[center] = False
        unclustered[members] = False
        centers.append(center)
    return Clustering(centers=tuple(centers), assignment=assignment)


def random_clustering(adjacency: np.ndarray, seed) -> Clustering:
    """Cluster by picking uniform-random centers among unclustered clients."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    adj = np.asarray(adjacency, dtype=bool)
    n = adj.shape[0]
    assignment = np.full(n, -1, dtype=int)
    centers = []
    unclustered = np.ones(n, dtype=bool)
    while unclustered.any():
        candidates = np.flatnonzero(unclustered)
        center = int(candidates[rng.integers(candidates.shape[0])])
        members = adj[center] & unclustered
        assignment[center] = center
        assignment[members] = center
        unclustered[center] = False
        unclustered[members] = False
        centers.append(center)
    return Clustering(centers=tuple(centers), assignment=assignment)


def exact_center_probabilities(adjacency: np.ndarray) -> np.ndarray:
    """Exact P[j, j2] = probability that the random clustering assigns j to j2.

    Recurses over every uniform center choice with equal weights; rows sum
    to 1.  Exponential in the number of clients, so limited to
    EXACT_PROBABILITY_LIMIT of them.
    """
    adj = np.asarray(adjacency, dtype=bool)
    n = adj.shape[0]
    if n > EXACT_PROBABILITY_LIMIT:
        raise TooLarge(f"exact recursion limited to {EXACT_PROBABILITY_LIMIT} clients")
    neighbor_bits = [0] * n
    for j in range(n):
        for j2 in np.flatnonzero(adj[j]):
            neighbor_bits[j] |= 1 << int(j2)

    cache: dict[int, np.ndarray] = {}

    def solve(mask: int) -> np.ndarray:
        if mask == 0:
            return np.zeros((n, n))
        hit = cache.get(mask)
        if hit is not None:
            return hit
        members = [j for j in range(n) if mask >> j & 1]
        p = 1.0 / len(members)
        total = np.zeros((n, n))
        for center in members:
            cluster = (1 << center) | (neighbor_bits[center] & mask)
            rest = mask & ~cluster
            contrib = solve(rest).copy()
            for j in range(n):
                if cluster >> j & 1:
                    contrib[j, center] += 1.0
            total += p * contrib
        cache[mask] = total
        return total

    return solve((1 << n) - 1)
