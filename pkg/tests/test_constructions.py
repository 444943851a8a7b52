import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from digavoid.constructions import (
    bipartite_gadget,
    build_bipartite_gadget,
    build_forest_gadget,
    forest_gadget,
    layered_gadget,
    layered_gadget_size,
    out_arborescence,
    random_cayley_lift,
    random_regular_digraph,
    random_tripartite_digraph,
)
from digavoid.cycles import closed_walks, has_directed_cycle
from digavoid.digraph import build_digraph, degree_stats, is_regular, out_core
from digavoid.errors import NotATree, ParameterInfeasible, RetryBudgetExceeded, TooLarge
from digavoid.patterns import cycle_orientation, find_pattern, single_arc


def check_layered(L):
    g = L.graph
    where = {v: i for i, layer in enumerate(L.layers) for v in layer}
    assert L.layers[0] == frozenset({L.root})
    assert set(where) == set(g.vertex_list())
    assert all(where[v] == where[u] + 1 for u, v in g.arcs)
    sinks = {v for v in g.vertex_list() if g.out_degree(v) == 0}
    assert sinks == set(L.bottom) == set(L.layers[-1])


def test_arborescence_sizes():
    a = out_arborescence(2, 3)
    assert a.graph.n == 15 and len(a.bottom) == 8
    assert out_arborescence(5, 0).graph.n == 1
    b = out_arborescence(3, 2)
    assert b.graph.n == 13 and len(b.bottom) == 9
    check_layered(a)


def test_arborescence_cap():
    with pytest.raises(TooLarge):
        out_arborescence(10, 7, cap=1000)


def test_bipartite_gadget_k1_infeasible():
    with pytest.raises(ParameterInfeasible):
        bipartite_gadget(1, 1, 1, 2)


def test_bipartite_gadget_2222():
    G = bipartite_gadget(2, 2, 2, 2)
    assert G.n == 6 and G.m == 12
    assert degree_stats(G).min_out == 2


@pytest.mark.parametrize("a,b,k,d", [(1, 2, 2, 2), (2, 2, 2, 3), (1, 1, 2, 3), (3, 2, 3, 3)])
def test_bipartite_gadget_invariants(a, b, k, d):
    gad = build_bipartite_gadget(a, b, k, d)
    G = gad.graph
    assert min(G.out_degree(v) for v in G.vertex_list()) == d
    rest = G.induced(v for v in G.vertex_list() if v not in gad.roots)
    assert not has_directed_cycle(rest)
    assert gad.sidecar()["faithful"]


def test_bipartite_gadget_parameter_checks():
    with pytest.raises(ParameterInfeasible):
        bipartite_gadget(1, 3, 2, 3)  # k < b
    with pytest.raises(ParameterInfeasible):
        bipartite_gadget(1, 2, 3, 2)  # d < k


def test_layered_gadget_base_case():
    L = layered_gadget(2, 2, 1)
    assert L.graph.n == 1 and L.bottom == frozenset({L.root})


def test_layered_gadget_222():
    L = layered_gadget(2, 2, 2)
    check_layered(L)
    # 15-vertex arborescence, its 8 leaves are the t=1 copies, plus B of size 2
    assert L.graph.n == 17
    assert len(L.bottom) == 2
    assert L.graph.m == 14 + 8 * 2
    assert all(L.graph.out_degree(v) == 2 for v in L.graph.vertex_list() if v not in L.bottom)


@pytest.mark.parametrize("k,d,t", [(2, 2, 3), (2, 3, 2), (3, 3, 2)])
def test_layered_gadget_invariants(k, d, t):
    L = layered_gadget(k, d, t)
    check_layered(L)
    assert L.graph.n == layered_gadget_size(k, d, t)
    assert all(L.graph.out_degree(v) == d for v in L.graph.vertex_list() if v not in L.bottom)
    # leaves of T_0 number at least 2^d k
    assert len(L.layers[layered_gadget_height(k, d)]) >= 2**d * k


from digavoid.constructions import layered_gadget_height  # noqa: E402


def test_layered_gadget_k_too_small():
    with pytest.raises(ParameterInfeasible):
        layered_gadget(1, 2, 2)


def test_forest_gadget_single_arc():
    gad = build_forest_gadget(single_arc(), 2)
    G = gad.graph
    assert G.n == 2 * layered_gadget_size(2, 2, 4)
    assert all(G.out_degree(v) == 2 for v in G.vertex_list())
    assert out_core(G, 2).order == G.order
    rest = G.induced(v for v in G.vertex_list() if v not in gad.roots)
    assert not has_directed_cycle(rest)


def test_forest_gadget_path3_reports_size():
    path3 = build_digraph(3, [(0, 1), (1, 2)])
    need = 3 * layered_gadget_size(3, 3, 6)
    with pytest.raises(TooLarge) as info:
        forest_gadget(path3, 3)
    assert str(need) in str(info.value) or getattr(info.value, "required", None) == need


def test_forest_gadget_needs_tree():
    with pytest.raises(NotATree):
        forest_gadget(cycle_orientation("C3_1"), 3)
    with pytest.raises(NotATree):
        forest_gadget(build_digraph(4, [(0, 1), (2, 3)]), 4)


def test_random_regular_examples():
    D = random_regular_digraph(12, 1, 4)
    assert is_regular(D) == 1
    assert has_directed_cycle(D)
    assert is_regular(random_regular_digraph(5, 2, 0)) == 2
    assert random_regular_digraph(100, 10, 1).arcs == random_regular_digraph(100, 10, 1).arcs
    assert random_regular_digraph(100, 10, 1).arcs != random_regular_digraph(100, 10, 2).arcs


def test_random_regular_infeasible():
    with pytest.raises(RetryBudgetExceeded):
        random_regular_digraph(4, 4, 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.data(), st.integers(0, 10**6))
def test_random_regular_is_regular(n, data, seed):
    d = data.draw(st.integers(0, n - 1))
    assert is_regular(random_regular_digraph(n, d, seed)) == d


def test_random_tripartite():
    D, classes = random_tripartite_digraph(60, 9, 3)
    assert all(classes[u] != classes[v] for u, v in D.arcs)
    assert degree_stats(D).min_out == degree_stats(D).max_out == 9


def test_cayley_lift_is_regular_and_has_no_short_dicycles():
    D = random_cayley_lift(21, (1, 2, 4), blob=20, copies=3, seed=0)
    assert D.n == 420 and is_regular(D) == 9
    assert closed_walks(D, 3) == 0 and closed_walks(D, 5) == 0
    for name in ("C3_2", "C5_2", "C5_3", "C5_4"):
        assert find_pattern(D, cycle_orientation(name)) is not None
