import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from onlinekm.core import SQUARED_EUCLIDEAN, CostModel, ResourceLimitError
from onlinekm.cost import (
    assign,
    best_single_center_cost,
    brute_force_opt,
    clustering_cost,
    expected_random_center_cost,
    mean_center_cost,
)
from onlinekm import cost as cost_module

MODELS = [CostModel.squared_euclidean(), CostModel.euclidean(), CostModel.l1(), CostModel.lp_to_the_p(3.0)]
small = st.floats(-100, 100, allow_nan=False).map(lambda v: round(v, 2))


def naive_cost(points, centers, model):
    return math.fsum(min(model.distance(x, c) for c in centers) for x in points)


def naive_opt(points, k, model):
    best, arg = math.inf, None
    for subset in itertools.combinations(range(len(points)), k):
        c = naive_cost(points, points[list(subset)], model)
        if c < best:
            best, arg = c, subset
    return arg, best


def test_clustering_cost_examples():
    assert clustering_cost([[0.0], [1.0], [2.0]], [[0.0], [2.0]]) == 1.0
    assert clustering_cost([[0.0], [1.0], [10.0]], [[1.0], [10.0]]) == 1.0
    with pytest.raises(ValueError):
        clustering_cost([[0.0, 1.0]], [[0.0]])
    with pytest.raises(ValueError):
        clustering_cost([[0.0]], np.empty((0, 1)))


def test_assign_ties_go_to_lowest_center():
    a = assign([[1.0]], [[0.0], [2.0]])
    assert a.owner.tolist() == [0]


def test_brute_force_examples():
    opt = brute_force_opt([[0.0], [1.0], [10.0]], 2)
    assert (opt.centers, opt.cost) == ((0, 2), 1.0)
    opt = brute_force_opt([[0.0], [4.0], [5.0]], 1)
    assert (opt.centers, opt.cost) == ((1,), 17.0)


def test_brute_force_budget():
    with pytest.raises(ResourceLimitError, match="C\\(30,15\\)"):
        brute_force_opt(np.arange(30.0), 15, budget=10**7)
    with pytest.raises(ValueError):
        brute_force_opt(np.arange(3.0), 4)


def test_brute_force_tie_break_is_lexicographic():
    # {0,2}, {0,3}, {1,2} and {1,3} all cost 0; the first in lexicographic order wins
    pts = np.array([[0.0], [0.0], [5.0], [5.0]])
    opt = brute_force_opt(pts, 2)
    assert opt.cost == 0.0 and opt.centers == (0, 2)


@settings(max_examples=80, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 3)), elements=small),
    st.integers(1, 3),
    st.sampled_from(MODELS),
    st.sampled_from([1, 3, None]),
)
def test_brute_force_matches_naive_enumeration(pts, k, model, chunk):
    k = min(k, pts.shape[0])
    opt = brute_force_opt(pts, k, model, chunk=chunk)
    arg, best = naive_opt(pts, k, model)
    assert math.isclose(opt.cost, best, rel_tol=1e-9, abs_tol=1e-9)
    # the returned subset really achieves the reported cost
    assert opt.cost == clustering_cost(pts, pts[list(opt.centers)], model)
    assert list(opt.centers) == sorted(set(opt.centers))


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 3)), elements=small),
    arrays(np.float64, st.tuples(st.integers(1, 4), st.just(1)), elements=small),
    st.sampled_from(MODELS),
)
def test_cost_matches_naive_and_kdtree_path(pts, centers, model):
    centers = np.repeat(centers, pts.shape[1], axis=1)
    expected = naive_cost(pts, centers, model)
    assert math.isclose(clustering_cost(pts, centers, model), expected, rel_tol=1e-9, abs_tol=1e-9)
    saved = cost_module._KDTREE_PAIRS
    cost_module._KDTREE_PAIRS = 0
    try:
        kd = assign(pts, centers, model)
    finally:
        cost_module._KDTREE_PAIRS = saved
    assert math.isclose(kd.total, expected, rel_tol=1e-9, abs_tol=1e-9)


def test_random_center_identity_examples():
    assert expected_random_center_cost([[0.0], [1.0]]) == 1.0
    assert mean_center_cost([[0.0], [1.0]]) == 0.5
    assert expected_random_center_cost([[0.0], [1.0], [2.0]]) == 4.0
    assert mean_center_cost([[0.0], [1.0], [2.0]]) == 2.0
    with pytest.raises(ValueError):
        mean_center_cost([[0.0]], CostModel.l1())


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 30), st.integers(1, 4)), elements=small))
def test_random_center_identity_property(pts):
    lhs = expected_random_center_cost(pts)
    rhs = 2 * mean_center_cost(pts)
    assert math.isclose(lhs, rhs, rel_tol=1e-9, abs_tol=1e-9)


def test_best_single_center_is_brute_force_k1():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(25, 2))
    assert best_single_center_cost(pts) == brute_force_opt(pts, 1).cost
    # mean is never worse than the best data point
    assert mean_center_cost(pts) <= best_single_center_cost(pts)


def test_kdtree_path_on_large_input():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(4000, 2))
    C = rng.normal(size=(60, 2))
    saved = cost_module._KDTREE_PAIRS
    cost_module._KDTREE_PAIRS = 0
    try:
        kd = assign(X, C, SQUARED_EUCLIDEAN)
    finally:
        cost_module._KDTREE_PAIRS = saved
    dense = assign(X, C, SQUARED_EUCLIDEAN)
    assert np.array_equal(kd.per_point_cost, dense.per_point_cost)
