"""Clustering cost, nearest-center assignment and the exact k-subset oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import CostKind, CostModel, Dataset, ResourceLimitError, SQUARED_EUCLIDEAN

DEFAULT_ORACLE_BUDGET = 10**7

# above this many point-center pairs, nearest centers are found with a k-d tree
_KDTREE_PAIRS = 2 * 10**7


def _as_points(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.points
    X = np.asarray(data, dtype=np.float64)
    return X.reshape(-1, 1) if X.ndim == 1 else np.atleast_2d(X)


def _as_centers(centers, dim: int) -> np.ndarray:
    C = np.asarray(centers, dtype=np.float64)
    if C.ndim == 1:
        C = C.reshape(-1, dim)
    if C.shape[0] == 0:
        raise ValueError("at least one center is required")
    if C.shape[1] != dim:
        raise ValueError(f"dimension mismatch: centers have {C.shape[1]} coordinates, points have {dim}")
    return C


@dataclass(frozen=True, eq=False)
class Assignment:
    """Nearest center per point; exact ties go to the lowest center index."""

    owner: np.ndarray
    per_point_cost: np.ndarray

    @property
    def total(self) -> float:
        return float(self.per_point_cost.sum())


def assign(data, centers, model: CostModel = SQUARED_EUCLIDEAN) -> Assignment:
    X = _as_points(data)
    C = _as_centers(centers, X.shape[1])
    if X.shape[0] * C.shape[0] > _KDTREE_PAIRS:
        owner = _kdtree_owner(X, C, model)
    else:
        best = model.to_point(X, C[0])
        owner = np.zeros(X.shape[0], dtype=np.intp)
        for j in range(1, C.shape[0]):
            dj = model.to_point(X, C[j])
            closer = dj < best  # strict: earlier centers keep ties
            best = np.where(closer, dj, best)
            owner[closer] = j
    return Assignment(owner, model.rowwise(X, C[owner]))


def _kdtree_owner(X: np.ndarray, C: np.ndarray, model: CostModel) -> np.ndarray:
    # Every supported kind is monotone in the Minkowski-p norm.
    p = 1.0 if model.kind is CostKind.L1 else model.p
    tree = cKDTree(C, balanced_tree=False, compact_nodes=False)
    _, idx = tree.query(X, k=1, p=p)
    return np.asarray(idx, dtype=np.intp)


def clustering_cost(data, centers, model: CostModel = SQUARED_EUCLIDEAN) -> float:
    """Sum over points of the distance to their nearest center."""
    return assign(data, centers, model).total


@dataclass(frozen=True)
class OptResult:
    centers: tuple[int, ...]
    cost: float


def n_subsets(n: int, k: int) -> int:
    return math.comb(n, k)


def brute_force_opt(
    data,
    k: int,
    model: CostModel = SQUARED_EUCLIDEAN,
    budget: int = DEFAULT_ORACLE_BUDGET,
    chunk: int | None = None,
) -> OptResult:
    """Exact minimum cost over every k-subset of dataset points as centers.

    Subsets are scanned in lexicographic index order and only a strictly
    smaller cost replaces the incumbent, so among equal-cost minimizers the
    lexicographically smallest index set wins.

    Raises:
        ResourceLimitError: if C(n, k) exceeds ``budget``.
    """
    X = _as_points(data)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}, got {k}")
    total = n_subsets(n, k)
    if total > budget:
        raise ResourceLimitError(f"C({n},{k}) = {total} subsets exceeds the oracle budget of {budget}")

    P = model.pairwise(X)  # P[i, j] = d(x_i, x_j)
    if chunk is None:
        chunk = max(1, min(4096, 2**21 // (n * k)))
    best_cost = math.inf
    best: tuple[int, ...] | None = None
    combos = itertools.combinations(range(n), k)
    while True:
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, chunk)), dtype=np.intp)
        if flat.size == 0:
            break
        batch = flat.reshape(-1, k)
        # (B, n): per-point cost under each candidate subset
        per_point = np.ascontiguousarray(P[:, batch].min(axis=2).T)
        costs = per_point.sum(axis=1)
        i = int(np.argmin(costs))
        if costs[i] < best_cost:
            best_cost = float(costs[i])
            best = tuple(int(v) for v in batch[i])
    assert best is not None
    # report the cost exactly as clustering_cost computes it
    return OptResult(best, clustering_cost(X, X[list(best)], model))


def expected_random_center_cost(data, model: CostModel = SQUARED_EUCLIDEAN) -> float:
    """Mean clustering cost when the single center is a uniformly random data point.

    Evaluated exactly as ``(1/n) * sum_j sum_i d(x_i, x_j)``.
    """
    X = _as_points(data)
    n = X.shape[0]
    col_sums = np.empty(n)
    for j in range(n):
        col_sums[j] = model.to_point(X, X[j]).sum()
    return float(col_sums.sum() / n)


def mean_center_cost(data, model: CostModel = SQUARED_EUCLIDEAN) -> float:
    """Squared-Euclidean cost of the coordinate-wise mean as the single center."""
    if model.kind is not CostKind.SQUARED_EUCLIDEAN:
        raise ValueError("mean_center_cost is defined for the squared Euclidean cost only")
    X = _as_points(data)
    diff = X - X.mean(axis=0)
    return float(np.einsum("ij,ij->", diff, diff))


def best_single_center_cost(data, model: CostModel = SQUARED_EUCLIDEAN) -> float:
    """Cost of the best in-dataset single center (``opt_1``)."""
    X = _as_points(data)
    return min(float(model.to_point(X, X[j]).sum()) for j in range(X.shape[0]))
