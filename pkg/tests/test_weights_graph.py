import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import union_find_connected
from weighted_gt.errors import DimensionMismatch, NonPositiveWeight, TooFewNodes
from weighted_gt.topology import ring
from weighted_gt.weights_graph import (
    DegreeSequence,
    Graph,
    graph_stats,
    is_connected,
    make_weights,
    read_edgelist,
    read_weights,
    uniform_weights,
    write_edgelist,
    write_weights,
)

positive_lists = st.lists(st.floats(min_value=1e-3, max_value=1e3), min_size=2, max_size=30)


def test_make_weights_uniform_unchanged():
    assert make_weights([1, 1, 1, 1]).values.tolist() == [1.0, 1.0, 1.0, 1.0]


def test_make_weights_lambda_A_unchanged(lam_A):
    from weighted_gt.config import LAMBDA_A

    np.testing.assert_allclose(lam_A.values, LAMBDA_A, rtol=0, atol=1e-15)
    assert abs(lam_A.values.sum() - 16) < 1e-12


def test_make_weights_rescales():
    # proportional to [1, 3] and summing to n = 2
    assert make_weights([2, 6]).values.tolist() == [0.5, 1.5]


def test_make_weights_errors():
    with pytest.raises(NonPositiveWeight):
        make_weights([1.0, 0.0, 2.0])
    with pytest.raises(NonPositiveWeight):
        make_weights([1.0, -2.0])
    with pytest.raises(TooFewNodes):
        make_weights([3.0])


def test_weight_vector_is_read_only(lam_A):
    with pytest.raises(ValueError):
        lam_A.values[0] = 5.0


@given(positive_lists)
def test_make_weights_normalizes_and_is_idempotent(raw):
    w = make_weights(raw)
    assert math.isclose(w.values.sum(), len(raw), rel_tol=1e-12)
    w2 = make_weights(w.values)
    np.testing.assert_allclose(w2.values, w.values, rtol=0, atol=1e-15 * len(raw))


@given(positive_lists)
def test_c_lambda_and_kappa_ranges(raw):
    w = make_weights(raw)
    n = w.n
    assert w.c_lambda >= 1.0 / n - 1e-15
    assert w.kappa >= 1.0
    if not np.allclose(w.values, 1.0, rtol=0, atol=1e-9):
        assert w.c_lambda > 1.0 / n
        assert w.kappa > 1.0
    assert w.c_lambda < 1.0


def test_graph_stats_uniform():
    s = graph_stats(ring(6), uniform_weights(6))
    assert s.c_lambda == pytest.approx(1 / 6, abs=1e-15)
    assert s.kappa == 1.0
    assert (s.min_degree, s.max_degree, s.mean_degree) == (2, 2, 2.0)


def test_graph_stats_lambda_A(lam_A):
    s = graph_stats(ring(16), lam_A)
    assert s.c_lambda == pytest.approx(20.38 / 256, abs=1e-12)
    assert s.c_lambda == pytest.approx(0.079609, abs=1e-6)
    assert s.kappa == pytest.approx(2.70801, abs=1e-5)


def test_graph_stats_two_nodes():
    s = graph_stats(Graph.from_edges(2, [(0, 1)]), make_weights([1.5, 0.5]))
    assert s.c_lambda == pytest.approx(0.625, abs=1e-15)
    assert s.kappa == pytest.approx(math.sqrt(3), abs=1e-15)


def test_graph_stats_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        graph_stats(ring(5), uniform_weights(4))


def test_is_connected_examples():
    assert is_connected(ring(4))
    assert not is_connected(Graph.from_edges(4, [(0, 1), (2, 3)]))
    assert is_connected(Graph.from_edges(16, [(i, i + 1) for i in range(15)]))


def test_is_connected_matches_union_find():
    rng = np.random.default_rng(12345)
    for _ in range(200):
        n = int(rng.integers(1, 13))
        p = rng.uniform(0.0, 0.6)
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
        g = Graph.from_edges(n, edges)
        assert is_connected(g) == union_find_connected(n, edges)


def test_graph_invariants():
    g = Graph.from_edges(5, [(0, 1), (1, 0), (3, 1), (4, 2)])
    assert g.edges == frozenset({(0, 1), (1, 3), (2, 4)})
    assert g.degrees.tolist() == [1, 2, 1, 1, 1]
    for i in range(5):
        for j in g.neighbors(i):
            assert i in g.neighbors(j)
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(1, 1)])
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 3)])


def test_degree_sequence_validation():
    assert DegreeSequence((1, 1)).degrees == (1, 1)
    with pytest.raises(ValueError):
        DegreeSequence((1, 2, 1, 1))  # odd sum
    with pytest.raises(ValueError):
        DegreeSequence((0, 2, 2))
    with pytest.raises(ValueError):
        DegreeSequence((3, 1, 1, 5))


def test_edgelist_round_trip(tmp_path):
    g = Graph.from_edges(5, [(0, 1), (1, 2), (3, 4), (0, 4)])
    path = tmp_path / "g.edges"
    write_edgelist(g, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n 5"
    assert "1 2" in lines and "4 5" in lines  # 1-based on disk
    assert read_edgelist(path) == g


def test_weights_round_trip(tmp_path, lam_A):
    path = tmp_path / "w.txt"
    write_weights(lam_A, path)
    assert len(path.read_text().split()) == 16
    assert read_weights(path) == lam_A
