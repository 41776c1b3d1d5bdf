import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from onlinekm.core import (
    SQUARED_EUCLIDEAN,
    CostKind,
    CostModel,
    Dataset,
    DatasetFormatError,
    OrderKind,
    Rng,
    StreamOrder,
    check_triangle_constant,
    distance,
    format_points,
    parse_points,
    uniform_permutation,
)

coords = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
MODELS = [CostModel.squared_euclidean(), CostModel.euclidean(), CostModel.l1(), CostModel.lp_to_the_p(3.0)]


def point_sets(max_n=8, max_d=3):
    return st.integers(1, max_d).flatmap(
        lambda d: arrays(np.float64, st.tuples(st.integers(3, max_n), st.just(d)), elements=coords)
    )


# --- Dataset and parsing ---


def test_dataset_reshapes_1d_and_is_read_only():
    ds = Dataset([0.0, 1.0, 2.0])
    assert ds.points.shape == (3, 1)
    assert (ds.n, ds.dim) == (3, 1)
    with pytest.raises(ValueError):
        ds.points[0, 0] = 5.0


@pytest.mark.parametrize("bad", [np.empty((0, 2)), [[np.nan, 1.0]], [[np.inf]]])
def test_dataset_rejects_empty_or_nonfinite(bad):
    with pytest.raises(ValueError):
        Dataset(bad)


def test_parse_points_reports_line_numbers():
    with pytest.raises(DatasetFormatError) as err:
        parse_points(["1,2", "", "3,x"])
    assert err.value.line == 3
    with pytest.raises(DatasetFormatError) as err:
        parse_points(["1,2", "3"])
    assert err.value.line == 2
    with pytest.raises(DatasetFormatError):
        parse_points(["", "  "])


@settings(max_examples=50, deadline=None)
@given(point_sets())
def test_points_round_trip_through_text_exactly(pts):
    back = parse_points(format_points(pts).splitlines())
    assert np.array_equal(back, pts)


def test_save_and_load(tmp_path):
    ds = Dataset(np.array([[0.1, 2.0], [1e-300, -3.5]]))
    ds.save(tmp_path / "p.txt")
    assert np.array_equal(Dataset.load(tmp_path / "p.txt").points, ds.points)


# --- cost models ---


def test_distance_examples():
    assert distance(SQUARED_EUCLIDEAN, [0, 0], [3, 4]) == 25.0
    assert distance(CostModel.euclidean(), [0, 0], [3, 4]) == 5.0
    assert distance(CostModel.l1(), [0, 0], [3, -4]) == 7.0
    assert distance(CostModel.lp_to_the_p(3), [0, 0], [1, 2]) == 9.0
    with pytest.raises(ValueError):
        distance(SQUARED_EUCLIDEAN, [0, 0], [1, 2, 3])


def test_triangle_constants():
    assert SQUARED_EUCLIDEAN.triangle_constant == 2.0
    assert CostModel.l1().triangle_constant == 1.0
    assert CostModel.euclidean().triangle_constant == 1.0
    assert CostModel.lp_to_the_p(3).triangle_constant == 4.0
    with pytest.raises(ValueError):
        CostModel.lp_to_the_p(0.5)


def test_check_triangle_constant_examples():
    pts = np.array([[0.0], [1.0], [2.0]])
    assert check_triangle_constant(SQUARED_EUCLIDEAN, pts)
    assert not check_triangle_constant(CostModel(CostKind.SQUARED_EUCLIDEAN, triangle_constant=1.0), pts)


@settings(max_examples=60, deadline=None)
@given(point_sets(), st.sampled_from(MODELS))
def test_default_triangle_constant_holds(pts, model):
    scale = max(1.0, float(np.abs(pts).max()))
    tol = 1e-9 * scale ** max(2.0, model.p)
    assert check_triangle_constant(model, pts, tol=tol)


@settings(max_examples=60, deadline=None)
@given(point_sets(), st.sampled_from(MODELS))
def test_scalar_and_vector_distances_agree_bitwise(pts, model):
    P = model.pairwise(pts)
    for i in range(pts.shape[0]):
        row = model.to_point(pts, pts[i])
        for j in range(pts.shape[0]):
            d = model.distance(pts[j], pts[i])
            assert d == row[j] == P[j, i]
            assert d >= 0


def test_parse_model_names():
    assert CostModel.parse("squared_euclidean") == SQUARED_EUCLIDEAN
    assert CostModel.parse("lp:3").p == 3.0
    assert CostModel.parse({"kind": "lp", "p": 4}).triangle_constant == 8.0
    assert CostModel.parse("lp:2.5").name == "lp:2.5"
    with pytest.raises(ValueError):
        CostModel.parse("lp")
    with pytest.raises(ValueError):
        CostModel.parse("cosine")


# --- randomness and orders ---


def test_rng_reproducible_and_split():
    a, b = Rng(7, 3), Rng(7, 3)
    assert np.array_equal(a.random(10**6), b.random(10**6))
    assert not np.array_equal(Rng(7, 3).random(8), Rng(7, 4).random(8))
    assert not np.array_equal(Rng(7, 3).child(0).random(8), Rng(7, 3).child(1).random(8))
    assert np.array_equal(Rng(7, 3).child(2).random(8), Rng(7, 3).child(2).random(8))
    with pytest.raises(ValueError):
        Rng(-1)


def test_stream_order_validation_and_provenance():
    assert StreamOrder.as_given(3).provenance == "given"
    assert StreamOrder.explicit([2, 0, 1]).kind is OrderKind.EXPLICIT
    with pytest.raises(ValueError):
        StreamOrder.explicit([0, 0, 1])
    o = uniform_permutation(5, Rng(4, 9))
    assert o.provenance == "random:4:9"
    assert o == uniform_permutation(5, Rng(4, 9))
    with pytest.raises(ValueError):
        uniform_permutation(0, Rng(0))


def test_dataset_in_order():
    ds = Dataset([10.0, 20.0, 30.0])
    assert ds.in_order(StreamOrder.explicit([2, 0, 1]))[:, 0].tolist() == [30.0, 10.0, 20.0]
    with pytest.raises(ValueError):
        ds.in_order(StreamOrder.as_given(2))


def test_uniform_permutation_is_uniform_on_three_items():
    # chi-square against 6 equally likely permutations
    counts = {}
    for s in range(6000):
        key = tuple(uniform_permutation(3, Rng(s)).perm.tolist())
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 6
    chi2 = sum((c - 1000) ** 2 / 1000 for c in counts.values())
    assert chi2 < 20.5  # p ~ 0.001 for 5 degrees of freedom


def test_uniform_permutation_position_marginals():
    n, trials = 6, 3000
    hits = np.zeros((n, n))
    for s in range(trials):
        perm = uniform_permutation(n, Rng(11, s)).perm
        hits[perm, np.arange(n)] += 1
    expected = trials / n
    assert np.all(np.abs(hits - expected) < 6 * math.sqrt(expected))
