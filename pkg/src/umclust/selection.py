"""High-quality sample selection: per-cluster density, ranking, neighbor
count candidates, cohesion scoring, and the final index split.

Density of a sample is the reciprocal of the mean Euclidean distance to
its nearest neighbors *within its own cluster*.  The neighbor count is
chosen per cluster from a size-proportional candidate grid by scoring
each candidate's top-density subset with the cohesion metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ClusterTooSmall, SubsetTooSmall
from .kmeans import ClusterState

ZERO_DIST_EPS = 1e-12


@dataclass
class SelectionConfig:
    t: float = 0.1              # fraction of each cluster kept as high-quality
    lower_bound: float = 0.1    # L: lowest candidate proportion
    interval: float = 0.02      # candidate grid spacing
    num_candidates: int = 10    # u
    mode: str = "auto"          # auto | fixed | random
    fixed_k_near: int = 10      # used when mode == "fixed"
    cohesion_objective: str = "max"  # max (verbatim) | min (compactness reading)

    def __post_init__(self):
        if not (0.0 <= self.t <= 1.0):
            raise ValueError("t must be in [0,1]")
        if not (0.0 <= self.lower_bound <= 1.0) or self.interval <= 0 or self.num_candidates < 1:
            raise ValueError("bad candidate grid")
        if self.lower_bound + self.interval * (self.num_candidates - 1) > 1.0 + 1e-12:
            raise ValueError("candidate grid exceeds proportion 1")
        if self.mode not in ("auto", "fixed", "random"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class SelectionResult:
    high_quality: np.ndarray             # Idx': global indices
    low_quality: np.ndarray              # complement, global indices
    k_near: dict[int, int]               # chosen neighbor count per cluster
    densities: dict[int, np.ndarray]     # per-cluster densities (local order)


def density(points: np.ndarray, k_near: int) -> np.ndarray:
    """rho_i = k / sum of distances to the k nearest same-cluster neighbors;
    zero distance sums map to 1/eps."""
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if n < 2:
        raise ClusterTooSmall("density needs at least 2 points")
    k = min(max(k_near, 1), n - 1)
    diff = points[:, None, :] - points[None, :, :]
    d = np.sqrt(np.einsum("ijd,ijd->ij", diff, diff))
    np.fill_diagonal(d, np.inf)
    nearest = np.sort(d, axis=1)[:, :k]
    sums = nearest.sum(axis=1)
    with np.errstate(divide="ignore"):
        rho = np.where(sums > 0.0, k / np.where(sums > 0, sums, 1.0), 1.0 / ZERO_DIST_EPS)
    return rho


def rank_indices(rho: np.ndarray) -> np.ndarray:
    """Stable ascending argsort; selection reads the tail (highest density)."""
    return np.argsort(rho, kind="stable")


def knear_candidates(cluster_size: int, cfg: SelectionConfig) -> list[int]:
    """u candidate neighbor counts, floor(n * (L + interval*(q-1))), clamped
    to [1, n-1]."""
    if cluster_size < 2:
        raise ClusterTooSmall("need at least 2 points for neighbor candidates")
    out = []
    for q in range(1, cfg.num_candidates + 1):
        k = math.floor(cluster_size * (cfg.lower_bound + cfg.interval * (q - 1)))
        out.append(min(max(k, 1), cluster_size - 1))
    return out


def cohesion(selected: np.ndarray) -> float:
    """Sum over members of their average pairwise Euclidean distance to the
    rest of the subset."""
    selected = np.asarray(selected, dtype=np.float64)
    m = len(selected)
    if m < 2:
        raise SubsetTooSmall("cohesion needs at least 2 points")
    diff = selected[:, None, :] - selected[None, :, :]
    d = np.sqrt(np.einsum("ijd,ijd->ij", diff, diff))
    return float(d.sum(axis=1).sum() / (m - 1))


def _top_m(rho: np.ndarray, m: int) -> np.ndarray:
    return rank_indices(rho)[::-1][:m]


def select_cluster(points: np.ndarray, cfg: SelectionConfig,
                   rng: np.random.Generator | None = None) -> tuple[int, np.ndarray]:
    """Choose a neighbor count and the top-m density local indices for one
    cluster; m = max(1, floor(n*t))."""
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if n < 2:
        raise ClusterTooSmall("selection needs at least 2 points")
    m = max(1, math.floor(n * cfg.t))

    if cfg.mode == "random":
        if rng is None:
            raise ValueError("random mode needs an rng")
        return 0, np.sort(rng.choice(n, size=m, replace=False))

    candidates = ([min(max(cfg.fixed_k_near, 1), n - 1)] if cfg.mode == "fixed"
                  else knear_candidates(n, cfg))
    if m < 2:
        # cohesion undefined for a single point: smallest candidate, densest point
        k = candidates[0]
        return k, _top_m(density(points, k), m)

    best_k, best_sel, best_score = None, None, None
    better = (lambda a, b: a > b) if cfg.cohesion_objective == "max" else (lambda a, b: a < b)
    for k in candidates:
        sel = _top_m(density(points, k), m)
        score = cohesion(points[sel])
        if best_score is None or better(score, best_score):
            best_k, best_sel, best_score = k, sel, score
    return best_k, best_sel


def select_all(points: np.ndarray, state: ClusterState,
               cfg: SelectionConfig,
               rng: np.random.Generator | None = None) -> SelectionResult:
    """Per-cluster selection merged into the global high/low-quality split.
    Clusters with fewer than 2 members contribute all members as
    high-quality."""
    points = np.asarray(points, dtype=np.float64)
    high: list[np.ndarray] = []
    k_near: dict[int, int] = {}
    densities: dict[int, np.ndarray] = {}
    for c, member_idx in enumerate(state.members):
        if len(member_idx) < 2:
            high.append(member_idx)
            continue
        cluster_points = points[member_idx]
        k, local_sel = select_cluster(cluster_points, cfg, rng)
        k_near[c] = k
        if cfg.mode != "random":
            densities[c] = density(cluster_points, k if k >= 1 else 1)
        high.append(member_idx[local_sel])
    high_idx = np.sort(np.concatenate(high)) if high else np.array([], dtype=np.int64)
    mask = np.ones(len(points), dtype=bool)
    mask[high_idx] = False
    return SelectionResult(high_quality=high_idx,
                           low_quality=np.flatnonzero(mask),
                           k_near=k_near, densities=densities)
