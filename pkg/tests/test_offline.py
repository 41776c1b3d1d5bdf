import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from onlinekm.core import SQUARED_EUCLIDEAN, CostModel, Rng
from onlinekm.cost import brute_force_opt, clustering_cost, mean_center_cost
from onlinekm.instances import gen_separated_blobs
from onlinekm.offline import (
    OfflineConfig,
    kmeanspp_indices,
    kmeanspp_seed,
    lloyd_iterations,
    lloyd_refine,
    offline_cluster,
)

small = st.floats(-50, 50, allow_nan=False).map(lambda v: round(v, 2))


def test_config_validation():
    for bad in (dict(restarts=0), dict(lloyd_max_iters=-1), dict(lloyd_rel_tol=-1.0), dict(exact_threshold=-1)):
        with pytest.raises(ValueError):
            OfflineConfig(**bad)


def test_kmeanspp_outlier_always_chosen():
    pts = np.array([[0.0], [0.0], [0.0], [100.0]])
    hits = sum(100.0 in kmeanspp_seed(pts, 2, SQUARED_EUCLIDEAN, Rng(s))[:, 0] for s in range(1000))
    assert hits / 1000 >= 0.99


def test_kmeanspp_second_pick_distribution():
    # exact law of the ordered pair (first, second) on {0, 1, 3}
    pts = np.array([[0.0], [1.0], [3.0]])
    d = SQUARED_EUCLIDEAN.pairwise(pts)
    expected = {}
    for i in range(3):
        for j in range(3):
            if i != j:
                expected[(i, j)] = (1 / 3) * d[i, j] / d[i].sum()
    trials = 6000
    counts = dict.fromkeys(expected, 0)
    for s in range(trials):
        counts[tuple(kmeanspp_indices(pts, 2, SQUARED_EUCLIDEAN, Rng(5, s)))] += 1
    chi2 = sum((counts[key] - trials * p) ** 2 / (trials * p) for key, p in expected.items())
    assert chi2 < 20.5  # 5 degrees of freedom, p ~ 0.001


def test_kmeanspp_duplicates_fall_back_to_distinct_indices():
    pts = np.zeros((5, 2))
    idx = kmeanspp_indices(pts, 4, SQUARED_EUCLIDEAN, Rng(1))
    assert len(set(idx)) == 4
    with pytest.raises(ValueError):
        kmeanspp_indices(pts, 6, SQUARED_EUCLIDEAN, Rng(1))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 40), st.integers(1, 3)), elements=small), st.integers(1, 4), st.integers(0, 2**32))
def test_lloyd_cost_never_increases(pts, k, seed):
    k = min(k, pts.shape[0])
    C = kmeanspp_seed(pts, k, SQUARED_EUCLIDEAN, Rng(seed))
    costs = [c for _, c in lloyd_iterations(pts, C, OfflineConfig())]
    assert all(b <= a for a, b in zip(costs, costs[1:]))
    assert costs[0] == clustering_cost(pts, C)


def test_lloyd_requires_squared_euclidean():
    with pytest.raises(ValueError):
        lloyd_refine(np.zeros((3, 1)), np.zeros((1, 1)), OfflineConfig(), CostModel.l1())


def test_k1_lloyd_reaches_the_mean():
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(300, 3))
    C = offline_cluster(pts, 1, OfflineConfig(exact_threshold=0), SQUARED_EUCLIDEAN, Rng(0))
    assert math.isclose(clustering_cost(pts, C), mean_center_cost(pts), rel_tol=1e-9)


def test_exact_threshold_routes_to_oracle():
    rng = np.random.default_rng(4)
    pts = rng.normal(size=(12, 2))
    C = offline_cluster(pts, 3, OfflineConfig(), SQUARED_EUCLIDEAN, Rng(0))
    opt = brute_force_opt(pts, 3)
    assert np.array_equal(C, pts[list(opt.centers)])


def test_offline_is_deterministic_and_good_on_blobs():
    inst = gen_separated_blobs(3, 200, separation=20.0, spread=1.0, dim=2, rng=Rng(8))
    cfg = OfflineConfig(exact_threshold=0)
    a = offline_cluster(inst.dataset, 3, cfg, SQUARED_EUCLIDEAN, Rng(1))
    b = offline_cluster(inst.dataset, 3, cfg, SQUARED_EUCLIDEAN, Rng(1))
    assert np.array_equal(a, b)
    # reference: the true blob centroids
    labels = np.array(inst.metadata["labels"])
    X = inst.dataset.points
    reference = sum(mean_center_cost(X[labels == j]) for j in range(3))
    assert clustering_cost(X, a) <= 1.05 * reference


def test_non_squared_models_skip_lloyd():
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(60, 2))
    C = offline_cluster(pts, 2, OfflineConfig(exact_threshold=0), CostModel.l1(), Rng(3))
    # centers come straight from seeding, so they are data points
    assert all(any(np.array_equal(c, p) for p in pts) for c in C)
