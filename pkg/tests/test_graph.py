import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nnsp import (
    build_graph,
    chain_graph_experiment,
    incidence_adjoint,
    incidence_apply,
    operator_norm_bound,
    tv,
    tv_restricted,
)
from nnsp.errors import (
    DimensionMismatch,
    DuplicateEdge,
    InvalidEdgeSet,
    InvalidWeight,
    SelfLoop,
)


@st.composite
def graphs_with_signal(draw, max_nodes=12):
    n = draw(st.integers(2, max_nodes))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=len(pairs), unique=True))
    flips = draw(st.lists(st.booleans(), min_size=len(chosen), max_size=len(chosen)))
    weights = draw(
        st.lists(st.floats(0.01, 10.0), min_size=len(chosen), max_size=len(chosen))
    )
    triples = [((j, i) if f else (i, j)) + (w,) for (i, j), f, w in zip(chosen, flips, weights)]
    graph, _ = build_graph(triples)
    x = np.asarray(
        draw(st.lists(st.floats(-100, 100), min_size=graph.n_nodes, max_size=graph.n_nodes))
    )
    return graph, triples, x


def test_build_path_and_remap():
    g, remap = build_graph([(1, 2, 1.0), (2, 3, 1.0)])
    assert (g.n_nodes, g.n_edges) == (3, 2)
    assert remap == {1: 0, 2: 1, 3: 2}
    assert g.node_ids == (1, 2, 3)
    assert g.heads.tolist() == [0, 1] and g.tails.tolist() == [1, 2]


def test_ids_compacted_in_order_of_first_appearance():
    g, remap = build_graph([(7, 3, 1.0), (3, 40, 2.0)])
    assert remap == {7: 0, 3: 1, 40: 2}
    assert g.edge_triples() == [(7, 3, 1.0), (3, 40, 2.0)]


@pytest.mark.parametrize(
    "triples, exc",
    [
        ([(1, 2, 1.0), (2, 1, 3.0)], DuplicateEdge),
        ([(1, 2, 0.0)], InvalidWeight),
        ([(1, 2, -1.0)], InvalidWeight),
        ([(1, 2, math.inf)], InvalidWeight),
        ([(1, 2, math.nan)], InvalidWeight),
        ([(4, 4, 1.0)], SelfLoop),
    ],
)
def test_build_rejects(triples, exc):
    with pytest.raises(exc):
        build_graph(triples)


def test_chain_size():
    g, _, _ = chain_graph_experiment()
    assert (g.n_nodes, g.n_edges) == (100, 99)


def test_adjacency_consistent(chain):
    g = chain[0]
    for i in range(g.n_nodes):
        for e, s in g.incident(i):
            assert (g.heads[e] if s > 0 else g.tails[e]) == i
    counts = np.bincount(g.adj_edges, minlength=g.n_edges)
    assert np.all(counts == 2)
    for e in range(g.n_edges):
        signs = g.adj_signs[g.adj_edges == e]
        assert sorted(signs.tolist()) == [-1, 1]


def test_graph_arrays_are_read_only(path3):
    with pytest.raises(ValueError):
        path3.weights[0] = 5.0


def test_tv_examples(path3, two_chain):
    assert tv(path3, [3.0, 3.0, 3.0]) == 0.0
    assert tv(path3, [0.0, 0.0, 1.0]) == 1.0
    g, _, x = two_chain(2.0)
    assert tv(g, x) == pytest.approx(0.5, abs=1e-15)


def test_tv_dimension_mismatch(path3):
    with pytest.raises(DimensionMismatch):
        tv(path3, [0.0, 1.0])


def test_tv_restricted_examples(two_chain, chain):
    g, _, x = two_chain(2.0)
    bnd = [4]  # the edge {5, 6}
    assert tv_restricted(g, x, []) == 0.0
    assert tv_restricted(g, x, bnd) == pytest.approx(0.5)
    assert tv_restricted(g, x, [e for e in range(g.n_edges) if e not in bnd]) == 0.0
    cg, _, cx, _, _ = chain
    boundary_edges = [e for e in range(cg.n_edges) if cg.weights[e] == 2.0]
    assert tv_restricted(cg, cx, boundary_edges) == 72.0


def test_tv_restricted_invalid_index(path3):
    with pytest.raises(InvalidEdgeSet):
        tv_restricted(path3, [0, 0, 1], [2])


def test_incidence_examples(path3):
    assert incidence_apply(path3, [2.0, 2.0, 2.0]).tolist() == [0.0, 0.0]
    assert incidence_apply(path3, [0.0, 0.0, 1.0]).tolist() == [0.0, -1.0]
    assert incidence_apply(path3, [1.0, 0.0, 0.0]).tolist() == [1.0, 0.0]
    assert incidence_adjoint(path3, [0.0, 0.0]).tolist() == [0.0, 0.0, 0.0]
    assert incidence_adjoint(path3, [1.0, 0.0]).tolist() == [1.0, -1.0, 0.0]
    with pytest.raises(DimensionMismatch):
        incidence_adjoint(path3, [1.0])


def test_adjointness_random_pairs(chain):
    g = chain[0]
    rng = np.random.default_rng(11)
    for _ in range(100):
        x = rng.standard_normal(g.n_nodes)
        d = rng.standard_normal(g.n_edges)
        lhs = np.dot(incidence_apply(g, x), d)
        rhs = np.dot(x, incidence_adjoint(g, d))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_operator_norm_single_edge():
    g, _ = build_graph([(0, 1, 1.0)])
    assert math.sqrt(2) <= operator_norm_bound(g) <= 1.5


def test_operator_norm_path3(path3):
    exact = math.sqrt(3.0)  # largest eigenvalue of the 3-node path Laplacian is 3
    assert exact - 1e-12 <= operator_norm_bound(path3) <= 1.01 * exact + 1e-9


def test_operator_norm_no_edges():
    g, _ = build_graph([], nodes=[0, 1])
    assert operator_norm_bound(g) == 1.0
    assert tv(g, [0.0, 5.0]) == 0.0


@settings(max_examples=60, deadline=None)
@given(graphs_with_signal())
def test_operator_norm_is_upper_bound(data):
    g, _, _ = data
    D = np.zeros((g.n_edges, g.n_nodes))
    D[np.arange(g.n_edges), g.heads] = 1.0
    D[np.arange(g.n_edges), g.tails] = -1.0
    assert operator_norm_bound(g) >= np.linalg.norm(D, 2) - 1e-9


@settings(max_examples=100, deadline=None)
@given(graphs_with_signal(), st.data())
def test_tv_additive_over_edge_split(data, draw):
    g, _, x = data
    S = draw.draw(st.sets(st.integers(0, g.n_edges - 1)))
    rest = set(range(g.n_edges)) - S
    total = tv(g, x)
    assert tv_restricted(g, x, S) + tv_restricted(g, x, rest) == pytest.approx(total, rel=1e-12, abs=1e-9)
    assert tv_restricted(g, x, range(g.n_edges)) == pytest.approx(total, rel=1e-12)
    assert np.dot(g.weights, np.abs(incidence_apply(g, x))) == pytest.approx(total, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(graphs_with_signal(), st.data())
def test_tv_orientation_invariant(data, draw):
    g, triples, x = data
    flips = draw.draw(st.lists(st.booleans(), min_size=len(triples), max_size=len(triples)))
    flipped = [((j, i, w) if f else (i, j, w)) for (i, j, w), f in zip(triples, flips)]
    g2, _ = build_graph(flipped, nodes=g.node_ids)
    assert g2.node_ids == g.node_ids
    assert tv(g2, x) == pytest.approx(tv(g, x), rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(graphs_with_signal(), st.floats(-1e3, 1e3))
def test_tv_shift_invariant(data, c):
    g, _, x = data
    assert tv(g, x + c) == pytest.approx(tv(g, x), rel=1e-9, abs=1e-6)


@settings(max_examples=100, deadline=None)
@given(graphs_with_signal(), st.data())
def test_adjointness_property(data, draw):
    g, _, x = data
    d = np.asarray(
        draw.draw(st.lists(st.floats(-100, 100), min_size=g.n_edges, max_size=g.n_edges))
    )
    lhs = float(np.dot(incidence_apply(g, x), d))
    rhs = float(np.dot(x, incidence_adjoint(g, d)))
    scale = float(np.abs(incidence_apply(g, x)).dot(np.abs(d))) + 1.0
    assert abs(lhs - rhs) <= 1e-12 * scale
