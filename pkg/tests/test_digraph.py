import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from digavoid.constructions import bipartite_gadget
from digavoid.digraph import (
    DegreeStats,
    MultiDigraph,
    back_degrees,
    build_digraph,
    degeneracy,
    degeneracy_ordering,
    degree_stats,
    min_out_degree,
    out_core,
    reachable_set,
    subsample_arcs,
)
from digavoid.errors import InvalidArc, InvalidVertex

from conftest import induced_subsets, small_digraphs

TRIANGLE = build_digraph(3, [(0, 1), (1, 2), (2, 0)])


def test_build_triangle():
    assert TRIANGLE.m == 3
    assert TRIANGLE.arcs == {(0, 1), (1, 2), (2, 0)}


def test_duplicates_collapse():
    D = build_digraph(2, [(0, 1), (0, 1)])
    assert D.arc_list() == [(0, 1)]


def test_self_loop_rejected():
    with pytest.raises(InvalidArc):
        build_digraph(2, [(0, 0)])


def test_out_of_range_rejected():
    with pytest.raises(InvalidVertex):
        build_digraph(2, [(0, 2)])


@given(small_digraphs())
def test_adjacency_agrees_with_arcs(D):
    from_out = {(u, v) for u in range(D.n) for v in D.out_adj[u]}
    from_in = {(u, v) for v in range(D.n) for u in D.in_adj[v]}
    assert from_out == from_in == set(D.arcs)
    assert all(u != v for u, v in D.arcs)


def test_degree_stats_examples():
    assert degree_stats(TRIANGLE) == DegreeStats(1, 1, 1, 1)
    assert degree_stats(build_digraph(2, [(0, 1)])) == DegreeStats(0, 0, 1, 1)
    assert degree_stats(build_digraph(0, [])) == DegreeStats(0, 0, 0, 0)
    G = bipartite_gadget(1, 2, 2, 2)
    assert degree_stats(G).min_out == min(len(r) for r in G.out_adj) == 2


def test_reachable_examples():
    assert reachable_set(TRIANGLE, {0}, 2) == {2}
    assert reachable_set(TRIANGLE, {0, 1}, 0) == {0, 1}
    path = build_digraph(3, [(0, 1), (1, 2)])
    assert reachable_set(path, {2}, 1, "backward") == {1}


@given(small_digraphs(), st.integers(0, 3), st.integers(0, 3), st.data())
def test_reachable_composes(D, i, j, data):
    if D.n == 0:
        return
    S = set(data.draw(st.sets(st.integers(0, D.n - 1), max_size=D.n)))
    assert reachable_set(D, S, i + j) == reachable_set(D, reachable_set(D, S, i), j)
    back = reachable_set(D, S, i + j, "backward")
    assert back == reachable_set(D, reachable_set(D, S, i, "backward"), j, "backward")


def test_out_core_examples():
    assert out_core(build_digraph(3, [(0, 1), (1, 2)]), 1).order == 0
    assert out_core(TRIANGLE, 1).arcs == TRIANGLE.arcs
    with_pendant = build_digraph(4, [(0, 1), (1, 2), (2, 0), (3, 0)])
    assert out_core(with_pendant, 1).vertex_list() == [0, 1, 2, 3]


@settings(max_examples=60)
@given(small_digraphs(max_n=7), st.integers(0, 3))
def test_out_core_fixed_point_and_maximal(D, k):
    core = out_core(D, k)
    assert core.order == 0 or min_out_degree(core) >= k
    kept = set(core.vertex_list())
    for S in induced_subsets(D.n):
        if not S:
            continue
        sub = D.induced(S)
        if min_out_degree(sub) >= k:
            assert set(S) <= kept


def _exhaustive_degeneracy(M):
    """Max over vertex subsets of the min total degree, counting multiplicity."""
    verts = M.vertex_list()
    best = 0
    for r in range(1, len(verts) + 1):
        for S in itertools.combinations(verts, r):
            S = set(S)
            deg = {v: 0 for v in S}
            for u, v, _ in M.arcs:
                if u in S and v in S:
                    deg[u] += 1
                    deg[v] += 1
            best = max(best, min(deg.values()))
    return best


def test_degeneracy_directed_four_cycle():
    M = MultiDigraph(4, [(0, 1, None), (1, 2, None), (2, 3, None), (3, 0, None)])
    order = degeneracy_ordering(M)
    assert sorted(order) == [0, 1, 2, 3]
    assert max(back_degrees(M, order).values()) <= 2


def test_degeneracy_single_arc():
    M = MultiDigraph(2, [(0, 1, None)])
    order = degeneracy_ordering(M)
    assert back_degrees(M, order)[order[1]] == 1


@st.composite
def small_multidigraphs(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    if not pairs:
        return MultiDigraph(n, [])
    arcs = draw(st.lists(st.sampled_from(pairs), max_size=14))
    return MultiDigraph(n, [(u, v, i) for i, (u, v) in enumerate(arcs)])


@settings(max_examples=80)
@given(small_multidigraphs())
def test_degeneracy_matches_exhaustive(M):
    order = degeneracy_ordering(M)
    bound = degeneracy(M)
    assert bound == _exhaustive_degeneracy(M)
    assert max(back_degrees(M, order).values(), default=0) <= bound
    # bounded out-multidegree gives degeneracy at most twice that bound
    assert bound <= 2 * M.max_out_multidegree()


def test_subsample_extremes_and_determinism():
    assert subsample_arcs(TRIANGLE, None, 1.0, 3).arcs == TRIANGLE.arcs
    assert subsample_arcs(TRIANGLE, None, 0.0, 3).m == 0
    a = subsample_arcs(TRIANGLE, None, 0.5, 11)
    b = subsample_arcs(TRIANGLE, None, 0.5, 11)
    assert a.arcs == b.arcs


def test_subsample_predicate_protects_arcs():
    out = subsample_arcs(TRIANGLE, lambda u, v: u != 0, 0.0, 1)
    assert out.arcs == {(0, 1)}


def test_subsample_order_independent():
    # the same arc gets the same coin whatever else is in the graph
    big = build_digraph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)])
    small = build_digraph(5, [(0, 1), (2, 3)])
    kb = subsample_arcs(big, None, 0.5, 99).arcs
    ks = subsample_arcs(small, None, 0.5, 99).arcs
    for a in small.arcs:
        assert (a in kb) == (a in ks)
