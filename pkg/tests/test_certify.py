import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nnsp import (
    Partition,
    boundary,
    build_graph,
    certify_nnsp,
    empirical_nsp_check,
    flow_feasible,
    max_kappa,
    verify_flow,
)
from nnsp.certify import signatures
from nnsp.errors import BoundaryTooLarge, EmptySamplingSet, InvalidEdge
from nnsp.maxflow import FlowNetwork
from oracles import feasible_by_vertices


def test_maxflow_textbook():
    # CLRS-style network, max flow 23
    net = FlowNetwork(6)
    for u, v, c in [(0, 1, 16), (0, 2, 13), (1, 3, 12), (2, 1, 4), (2, 4, 14), (3, 2, 9), (3, 5, 20), (4, 3, 7), (4, 5, 4)]:
        net.add_arc(u, v, c)
    assert net.max_flow(0, 5) == pytest.approx(23.0)


def test_maxflow_real_capacities():
    net = FlowNetwork(4)
    a = net.add_arc(0, 1, 0.3)
    net.add_arc(0, 2, 0.1)
    net.add_arc(1, 3, 0.25)
    net.add_arc(2, 3, 1.0)
    net.add_arc(1, 2, 0.2)
    assert net.max_flow(0, 3) == pytest.approx(0.4)
    assert net.flow(a) == pytest.approx(0.3)


def test_flow_feasible_empty_fixed(path3):
    f = flow_feasible(path3, {}, [0])
    assert f is not None and np.all(f.flow == 0.0)


def test_flow_feasible_two_chain(two_chain):
    g, _, _ = two_chain(2.0)
    fixed = {4: 1.0}  # kappa * sigma * W = 2 * 1 * 0.5
    f = flow_feasible(g, fixed, [0, 9])
    assert f is not None
    assert verify_flow(g, f, fixed, [0, 9])
    np.testing.assert_allclose(f.flow, np.ones(9), atol=1e-12)


def test_flow_feasible_capacity_blocked():
    # the fixed flow on (2,3) must leave node 2 through the unit edge (1,2)
    g, _ = build_graph([(1, 2, 1.0), (2, 3, 1.0)])
    assert flow_feasible(g, {1: 1.5}, [0, 2]) is None
    assert flow_feasible(g, {1: 1.0}, [0, 2]) is not None
    # with node 3 constrained nothing can feed the fixed edge
    assert flow_feasible(g, {1: 1.0}, [0]) is None


def test_flow_feasible_errors(path3):
    with pytest.raises(InvalidEdge):
        flow_feasible(path3, {5: 1.0}, [0])
    with pytest.raises(EmptySamplingSet):
        flow_feasible(path3, {0: 1.0}, [])


@st.composite
def small_flow_instances(draw):
    n = draw(st.integers(2, 5))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=min(5, len(pairs)), unique=True))
    weights = draw(st.lists(st.floats(0.1, 3.0), min_size=len(chosen), max_size=len(chosen)))
    flips = draw(st.lists(st.booleans(), min_size=len(chosen), max_size=len(chosen)))
    triples = [((j, i) if f else (i, j)) + (w,) for (i, j), w, f in zip(chosen, weights, flips)]
    g, _ = build_graph(triples, nodes=range(n))
    k = draw(st.integers(0, g.n_edges))
    fixed_edges = draw(st.permutations(range(g.n_edges)))[:k]
    fixed = {e: draw(st.floats(-4.0, 4.0)) for e in fixed_edges}
    free = draw(st.sets(st.integers(0, n - 1), min_size=1))
    return g, fixed, sorted(free)


@settings(max_examples=300, deadline=None)
@given(small_flow_instances())
def test_flow_feasible_matches_vertex_oracle(inst):
    g, fixed, free = inst
    got = flow_feasible(g, fixed, free)
    expected = feasible_by_vertices(g.heads, g.tails, g.weights, g.n_nodes, fixed, free)
    assert (got is not None) == expected
    if got is not None:
        assert verify_flow(g, got, fixed, free)


def test_signatures_enumeration():
    assert [s.tolist() for s in signatures(0)] == [[]]
    sigs = [tuple(s) for s in signatures(3)]
    assert len(sigs) == 4 and len(set(sigs)) == 4
    flipped = {tuple(-np.asarray(s)) for s in sigs}
    assert not flipped & set(sigs)


def test_certify_two_chain(two_chain):
    g, part, _ = two_chain(2.0)
    cert = certify_nnsp(g, part, [0, 9], 1.5)
    assert cert.certified and not cert.below_threshold
    g, part, _ = two_chain(0.5)
    cert = certify_nnsp(g, part, [0, 9], 1.01)
    assert not cert.certified
    assert json.loads(json.dumps(cert.to_dict()))["failing_signature"] == [1]


def test_certify_chain_m2_failing_signature(chain):
    g, part, _, _, m2 = chain
    cert = certify_nnsp(g, part, m2, 1.0)
    assert not cert.certified
    bnd = cert.boundary.tolist()
    sig = dict(zip(bnd, cert.failing_signature.tolist()))
    c2 = 1
    c = part.cluster_of
    for e in bnd:
        h, t = c[g.heads[e]], c[g.tails[e]]
        if c2 in (h, t):
            # positive flow enters the head: inward iff the head side is C2
            inward = sig[e] > 0 if h == c2 else sig[e] < 0
            assert inward


def test_certify_boundary_cap(chain):
    g, part = chain[0], chain[1]
    with pytest.raises(BoundaryTooLarge):
        certify_nnsp(g, part, chain[3], 1.0, signature_cap=8)


def test_certificate_witnesses_verify(chain):
    g, part, _, m1, _ = chain
    cert = certify_nnsp(g, part, m1, 2.0)
    assert cert.certified and cert.witness_count == 2 ** 8
    bnd = cert.boundary
    for sig, flow in cert.witnesses:
        fixed = dict(zip(bnd.tolist(), (2.0 * sig * g.weights[bnd]).tolist()))
        assert verify_flow(g, flow, fixed, m1)
        # negated witness serves the globally flipped signature
        neg = {e: -v for e, v in fixed.items()}
        assert verify_flow(g, flow.negated(), neg, m1)
    assert "witness_count" in cert.to_dict()


def test_certificate_deterministic(chain):
    g, part, _, m1, _ = chain
    a = certify_nnsp(g, part, m1, 1.7)
    b = certify_nnsp(g, part, m1, 1.7)
    assert a.to_dict() == b.to_dict()
    for (s1, f1), (s2, f2) in zip(a.witnesses, b.witnesses):
        assert np.array_equal(s1, s2) and np.array_equal(f1.flow, f2.flow)


@pytest.mark.parametrize("delta", [2.0, 4.0])
def test_max_kappa_two_chain(two_chain, delta):
    g, part, _ = two_chain(delta)
    assert max_kappa(g, part, [0, 9]) == pytest.approx(delta, abs=1e-3)


def test_max_kappa_chain(chain):
    g, part, _, m1, m2 = chain
    kstar = max_kappa(g, part, m1)
    assert kstar == pytest.approx(2.0, abs=1e-3)
    for k in np.linspace(0.05, kstar - 1e-3, 7):
        assert certify_nnsp(g, part, m1, k, keep_witnesses=False).certified
    assert max_kappa(g, part, m2) < 1e-3


def test_max_kappa_no_boundary(path3):
    part = Partition(np.zeros(3, dtype=int), 1)
    assert max_kappa(path3, part, [0]) == 2.0**20


def test_empirical_full_sampling(path3):
    rep = empirical_nsp_check(path3, [0], [0, 1, 2], 5.0, trials=50, seed=1)
    assert rep.violations == [] and rep.checked >= 50


def test_empirical_finds_c2_indicator(chain):
    g, part, _, _, m2 = chain
    bnd = boundary(g, part)
    rep = empirical_nsp_check(g, bnd, m2, 1.0, trials=10, seed=0, part=part)
    c2 = (part.cluster_of == 1).astype(float)
    assert any(np.array_equal(u, c2) for u in rep.violations)


def test_empirical_chain_m1_clean(chain):
    g, part, _, m1, _ = chain
    rep = empirical_nsp_check(g, boundary(g, part), m1, 2.0, trials=1000, seed=7, part=part)
    assert rep.violations == []
    assert rep.checked >= 1000
