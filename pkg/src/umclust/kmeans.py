"""K-Means++ with Lloyd iterations and centroid inheritance across
curriculum rounds.

All clustering arithmetic is float64 regardless of training precision.
Assignment ties break toward the lower cluster index; empty clusters are
reseeded with the point currently farthest from its assigned centroid,
so the configured cluster count is always preserved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TooFewPoints


@dataclass
class ClusterState:
    centroids: np.ndarray            # (k, d)
    assignments: np.ndarray          # (n,)
    inertia: float
    round: int = 0
    n_iters: int = 0
    inertia_history: list[float] = field(default_factory=list)  # one per Lloyd iteration

    @property
    def members(self) -> list[np.ndarray]:
        k = self.centroids.shape[0]
        return [np.flatnonzero(self.assignments == c) for c in range(k)]


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """D^2 seeding: first centroid uniform, each next sampled proportionally
    to squared distance from the nearest chosen centroid."""
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if n < k:
        raise TooFewPoints(f"{n} points for k={k}")
    chosen = [int(rng.integers(n))]
    d2 = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total == 0.0:
            idx = int(rng.integers(n))  # all remaining points coincide
        else:
            idx = int(rng.choice(n, p=d2 / total))
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((points - points[idx]) ** 2, axis=1))
    return points[chosen].copy()


def lloyd(points: np.ndarray, init_centroids: np.ndarray,
          max_iters: int = 300, tol: float = 1e-6) -> ClusterState:
    """Alternate assign/update until the max centroid displacement drops
    below tol; inertia is non-increasing across iterations."""
    points = np.asarray(points, dtype=np.float64)
    centroids = np.asarray(init_centroids, dtype=np.float64).copy()
    k = centroids.shape[0]
    assignments = np.zeros(len(points), dtype=np.int64)
    history: list[float] = []
    it = 0
    for it in range(1, max_iters + 1):
        d2 = _sq_dists(points, centroids)
        assignments = np.argmin(d2, axis=1)  # argmin takes the lowest index on ties
        history.append(float(d2[np.arange(len(points)), assignments].sum()))
        new_centroids = centroids.copy()
        for c in range(k):
            mask = assignments == c
            if mask.any():
                new_centroids[c] = points[mask].mean(axis=0)
            else:
                # reseed with the point farthest from its assigned centroid
                farthest = int(np.argmax(d2[np.arange(len(points)), assignments]))
                new_centroids[c] = points[farthest]
                assignments[farthest] = c
        shift = np.max(np.linalg.norm(new_centroids - centroids, axis=1))
        centroids = new_centroids
        if shift < tol:
            break
    d2 = _sq_dists(points, centroids)
    assignments = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(len(points)), assignments].sum())
    history.append(inertia)
    return ClusterState(centroids=centroids, assignments=assignments,
                        inertia=inertia, n_iters=it, inertia_history=history)


def cluster_round(points: np.ndarray, prev: ClusterState | None, k: int,
                  rng: np.random.Generator, max_iters: int = 300,
                  tol: float = 1e-6) -> ClusterState:
    """First round seeds with K-Means++; later rounds inherit the previous
    round's converged centroids."""
    if prev is None:
        init = kmeanspp_init(points, k, rng)
        state = lloyd(points, init, max_iters, tol)
        state.round = 0
    else:
        if prev.centroids.shape[0] != k:
            raise TooFewPoints(
                f"inherited centroids have k={prev.centroids.shape[0]}, expected {k}")
        state = lloyd(points, prev.centroids, max_iters, tol)
        state.round = prev.round + 1
    return state
