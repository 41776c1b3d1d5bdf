"""Offline k-clustering: k-means++ seeding, Lloyd refinement and restarts.

Used for the first phase of the three-phase online algorithm and as the
full-data baseline when the exact oracle is out of budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import CostKind, CostModel, Rng, SQUARED_EUCLIDEAN
from .cost import _as_points, assign, brute_force_opt, n_subsets


@dataclass(frozen=True)
class OfflineConfig:
    restarts: int = 8
    lloyd_max_iters: int = 50
    lloyd_rel_tol: float = 1e-9
    exact_threshold: int = 10**5  # use the exact oracle when C(n, k) <= this

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be positive")
        if self.lloyd_max_iters < 0:
            raise ValueError("lloyd_max_iters must be non-negative")
        if self.lloyd_rel_tol < 0:
            raise ValueError("lloyd_rel_tol must be non-negative")
        if self.exact_threshold < 0:
            raise ValueError("exact_threshold must be non-negative")


def kmeanspp_indices(points, k: int, model: CostModel, rng: Rng) -> list[int]:
    """Indices chosen by k-means++ seeding; always ``k`` distinct indices."""
    X = _as_points(points)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}, got {k}")
    gen = rng.generator
    chosen = [int(gen.integers(n))]
    nearest = model.to_point(X, X[chosen[0]])
    available = np.ones(n, dtype=bool)
    available[chosen[0]] = False
    for _ in range(1, k):
        weights = np.where(available, nearest, 0.0)
        total = weights.sum()
        if total > 0:
            idx = int(gen.choice(n, p=weights / total))
        else:
            # only duplicates of chosen points remain
            idx = int(gen.choice(np.flatnonzero(available)))
        chosen.append(idx)
        available[idx] = False
        nearest = np.minimum(nearest, model.to_point(X, X[idx]))
    return chosen


def kmeanspp_seed(points, k: int, model: CostModel, rng: Rng) -> np.ndarray:
    """k-means++ seeding: uniform first center, then D-weighted sampling."""
    X = _as_points(points)
    return X[kmeanspp_indices(X, k, model, rng)].copy()


def lloyd_iterations(points, centers, cfg: OfflineConfig) -> Iterator[tuple[np.ndarray, float]]:
    """Yield ``(centers, cost)`` starting from the input, one pair per accepted step.

    Stops once the relative improvement drops below ``cfg.lloyd_rel_tol``,
    after ``cfg.lloyd_max_iters`` updates, or when an update would not lower
    the cost, so yielded costs never increase.
    """
    X = _as_points(points)
    C = np.array(centers, dtype=np.float64, copy=True).reshape(-1, X.shape[1])
    a = assign(X, C, SQUARED_EUCLIDEAN)
    cost = a.total
    yield C.copy(), cost
    for _ in range(cfg.lloyd_max_iters):
        new = C.copy()
        for j in range(C.shape[0]):
            members = a.owner == j
            if members.any():  # empty clusters keep their center
                new[j] = X[members].mean(axis=0)
        a_new = assign(X, new, SQUARED_EUCLIDEAN)
        new_cost = a_new.total
        if new_cost > cost:
            return
        improvement = cost - new_cost
        C, a, prev, cost = new, a_new, cost, new_cost
        yield C.copy(), cost
        if prev == 0 or improvement <= cfg.lloyd_rel_tol * prev:
            return


def lloyd_refine(points, centers, cfg: OfflineConfig = OfflineConfig(), model: CostModel = SQUARED_EUCLIDEAN) -> np.ndarray:
    """Lloyd's alternation of assignment and centroid steps.

    Raises:
        ValueError: for any model but squared Euclidean (the centroid step is
            the mean, which only minimizes that cost).
    """
    if model.kind is not CostKind.SQUARED_EUCLIDEAN:
        raise ValueError("Lloyd refinement requires the squared Euclidean cost")
    C = None
    for C, _ in lloyd_iterations(points, centers, cfg):
        pass
    return C


def offline_cluster(
    points,
    k: int,
    cfg: OfflineConfig = OfflineConfig(),
    model: CostModel = SQUARED_EUCLIDEAN,
    rng: Rng | None = None,
) -> np.ndarray:
    """Return ``k`` centers approximately minimizing the clustering cost.

    Small inputs (C(n, k) <= ``cfg.exact_threshold``) go to the exact oracle.
    Otherwise each restart ``r`` seeds with k-means++ on ``rng.child(r)``
    (refined by Lloyd under squared Euclidean cost) and the cheapest restart
    wins, ties to the lowest restart index.
    """
    X = _as_points(points)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}, got {k}")
    if n_subsets(n, k) <= cfg.exact_threshold:
        opt = brute_force_opt(X, k, model, budget=cfg.exact_threshold)
        return X[list(opt.centers)].copy()
    rng = rng if rng is not None else Rng(0)
    best_cost, best = np.inf, None
    for r in range(cfg.restarts):
        C = kmeanspp_seed(X, k, model, rng.child(r))
        if model.kind is CostKind.SQUARED_EUCLIDEAN:
            C = lloyd_refine(X, C, cfg, model)
        c = assign(X, C, model).total
        if c < best_cost:
            best_cost, best = c, C
    return best
