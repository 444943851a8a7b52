import math

import pytest

from digavoid.constructions import random_cayley_lift, random_regular_digraph, random_tripartite_digraph
from digavoid.cycles import find_directed_cycle
from digavoid.digraph import build_digraph, min_out_degree, reachable_set
from digavoid.errors import (
    ColoringInvalid,
    NotTripartite,
    ParameterInfeasible,
    ResampleBudgetExceeded,
    VNotIndependent,
)
from digavoid.patterns import cycle_orientation, find_pattern
from digavoid.reductions import (
    PipelineFailed,
    PipelinePlan,
    TypedPartition,
    avoid_c5_from_class,
    avoid_directed_cycles,
    build_aux_H,
    c5_sources_violations,
    check_claim,
    claim_order_and_sample,
    earlier_in_neighbours,
    extract_typed,
    majority_3_coloring,
    majority_violations,
    pipeline_avoid_c3_c5,
    sequential_restriction,
    trim_out_degrees,
    tripartite_restrict,
)
from digavoid.resample import ResampleConfig

from instances import claim_instance

TRIANGLE = build_digraph(3, [(0, 1), (1, 2), (2, 0)])
DESK = ResampleConfig(d_trim=192, p=0.5)


# -- trimming ---------------------------------------------------------------


def test_trim_is_seeded_and_exact():
    D = random_regular_digraph(50, 10, 0)
    a = trim_out_degrees(D, 4, seed=1)
    assert all(a.out_degree(v) == 4 for v in a.vertex_list())
    assert a.arcs <= D.arcs
    assert a.arcs == trim_out_degrees(D, 4, seed=1).arcs
    assert a.arcs != trim_out_degrees(D, 4, seed=2).arcs


# -- majority colouring -----------------------------------------------------


def test_majority_triangle_and_empty():
    col = majority_3_coloring(TRIANGLE, ResampleConfig())
    assert not majority_violations(TRIANGLE, col)
    empty = build_digraph(4, [])
    assert set(majority_3_coloring(empty, ResampleConfig())) == {0, 1, 2, 3}


def test_majority_random_regular():
    D = random_regular_digraph(300, 12, 5)
    col = majority_3_coloring(D, ResampleConfig(seed=5))
    for v in D.vertex_list():
        diff = sum(1 for u in D.out_adj[v] if col[u] != col[v])
        assert diff >= math.ceil(D.out_degree(v) / 3)


def test_two_colour_variant_is_checked_at_half():
    D = random_regular_digraph(200, 8, 1)
    try:
        col = majority_3_coloring(D, ResampleConfig(seed=1), two_colors=True)
    except ResampleBudgetExceeded:
        return
    assert set(col.values()) <= {"A", "B"}
    assert not majority_violations(D, col, fraction=2)


# -- tripartite restriction and typing ---------------------------------------


def test_tripartite_triangle_unchanged():
    out, tp = tripartite_restrict(TRIANGLE, {0: "A", 1: "B", 2: "C"})
    assert out.arcs == TRIANGLE.arcs and tp.s == 0


def test_tripartite_drops_internal_arc():
    D = build_digraph(3, [(0, 1), (0, 2)])
    out, _ = tripartite_restrict(D, {0: "A", 1: "A", 2: "B"})
    assert out.arcs == {(0, 2)}


def test_tripartite_rejects_bad_colouring():
    with pytest.raises(ColoringInvalid):
        tripartite_restrict(TRIANGLE, {0: "A", 1: "A", 2: "A"})


def test_tripartite_ratio_on_random_instance():
    D = random_regular_digraph(400, 15, 3)
    out, tp = tripartite_restrict(D, majority_3_coloring(D, ResampleConfig(seed=3)))
    assert min_out_degree(out) >= math.ceil(15 / 3)
    assert not tp.violations(out)


def test_typed_triangle():
    tp = TypedPartition({0: "A", 1: "B", 2: "C"})
    out, typed = extract_typed(TRIANGLE, tp, 1)
    assert out.arcs == TRIANGLE.arcs
    assert typed.types == {0: ("B",), 1: ("C",), 2: ("A",)}


def test_typed_s0_unchanged():
    D, classes = random_tripartite_digraph(90, 6, 0)
    out, _ = extract_typed(D, TypedPartition(classes), 0)
    assert out.arcs == D.arcs


def test_typed_rejects_non_tripartite():
    with pytest.raises(NotTripartite):
        extract_typed(TRIANGLE, TypedPartition({0: "A", 1: "A", 2: "B"}), 1)


def test_typed_s2_bound_and_sampled_walks():
    D, classes = random_tripartite_digraph(501, 27, 4)
    out, tp = extract_typed(D, TypedPartition(classes), 2)
    assert min_out_degree(out) >= 3
    import random

    for v in random.Random(0).sample(out.vertex_list(), 100):
        for i in (1, 2):
            reach = reachable_set(out, {v}, i)
            assert {classes[u] for u in reach} <= {tp.types[v][i - 1]}


def test_typed_handles_sinks():
    # vertex 2 has no out-arcs; its type positions are wildcards
    D = build_digraph(3, [(0, 1), (1, 2)])
    out, tp = extract_typed(D, TypedPartition({0: "A", 1: "B", 2: "C"}), 2)
    assert out.arcs == D.arcs
    assert not tp.violations(out)


@pytest.mark.parametrize("seed", range(5))
def test_two_typed_outputs_avoid_easy_orientations(seed):
    D, classes = random_tripartite_digraph(201, 18, seed)
    out, _ = extract_typed(D, TypedPartition(classes), 2)
    for name in ("C3_2", "C5_3", "C5_4"):
        assert find_pattern(out, cycle_orientation(name)) is None


# -- directed cycles ----------------------------------------------------------


def test_dicycles_already_free_zero_rounds():
    D = random_cayley_lift(21, (1, 2, 4), 20, 2, seed=1)
    stats = {}
    out = avoid_directed_cycles(D, {3, 5}, 1, ResampleConfig(p=1.0, d_trim=4), stats)
    assert stats["rounds"] == 0 and stats["cycles"] == 0
    assert all(out.out_degree(v) == 4 for v in out.vertex_list())


def test_dicycles_triangle_impossible():
    with pytest.raises(ResampleBudgetExceeded):
        avoid_directed_cycles(TRIANGLE, {3}, 1, ResampleConfig(p=0.5, d_trim=1, max_rounds=200, restarts=2, override=True))


def test_dicycles_gate():
    D = random_regular_digraph(30, 4, 0)
    with pytest.raises(ParameterInfeasible):
        avoid_directed_cycles(D, {3}, 3, ResampleConfig(p=0.5, d_trim=4))
    with pytest.raises(ParameterInfeasible):
        avoid_directed_cycles(D, {3}, 1, ResampleConfig(p=0.5, d_trim=5))


def test_dicycles_60_regular():
    D = random_regular_digraph(600, 60, 2)
    out = avoid_directed_cycles(D, {3, 5}, 2, ResampleConfig(p=0.5, d_trim=8, seed=2))
    assert min_out_degree(out) >= 2
    assert find_directed_cycle(out, 3) is None and find_directed_cycle(out, 5) is None


# -- auxiliary multidigraph ---------------------------------------------------


def test_aux_H_example():
    u, v, a, w, x = range(5)
    D = build_digraph(5, [(u, a), (v, a), (u, w), (w, x), (x, v)])
    H = build_aux_H(D, {u, v})
    assert H.arcs == ((u, v, w),)


def test_aux_H_trivial_cases():
    assert len(build_aux_H(TRIANGLE, set())) == 0
    star = build_digraph(4, [(0, 3), (1, 3), (2, 3)])
    assert len(build_aux_H(star, {0, 1})) == 0


def test_aux_H_rejects_dependent_V():
    with pytest.raises(VNotIndependent):
        build_aux_H(TRIANGLE, {0, 1})


def test_aux_H_matches_definition():
    D, tp, V = claim_instance(1)
    H = build_aux_H(D, V)
    want = []
    for u in sorted(V):
        for w in D.out_adj[u]:
            for v in sorted(V - {u}):
                if reachable_set(D, {w}, 2) & {v} and D.out_set(u) & D.out_set(v):
                    want.append((u, v, w))
    assert sorted(H.arcs) == sorted(want)


# -- claim and sequential restriction ----------------------------------------


def test_claim_empty_V():
    D = random_regular_digraph(40, 5, 0)
    F, order = claim_order_and_sample(D, set(), 2, DESK)
    assert order == [] and all(F.out_degree(v) == 2 for v in F.vertex_list())


def test_claim_gate():
    D, _, V = claim_instance(0)
    with pytest.raises(ParameterInfeasible):
        claim_order_and_sample(D, V, 2, ResampleConfig(d_trim=100, p=0.5))
    with pytest.raises(ParameterInfeasible):
        claim_order_and_sample(D, V, 2, ResampleConfig(d_trim=192, p=0.5, profile="paper_faithful"))


@pytest.mark.parametrize("seed", range(3))
def test_claim_desk_preset(seed):
    D, tp, V = claim_instance(seed)
    assert find_pattern(D, cycle_orientation("C3_1")) is None
    assert len(build_aux_H(D, V)) > 0
    F, order = claim_order_and_sample(D, V, 2, ResampleConfig(d_trim=192, p=0.5, seed=seed))
    assert F.arcs <= D.arcs and sorted(order) == sorted(V)
    # the three postconditions, rechecked from scratch
    for v in F.vertex_list():
        if v in V:
            assert F.out_degree(v) >= 3 * 2**4
        else:
            assert F.out_degree(v) == 2
    for v, ins in earlier_in_neighbours(build_aux_H(F, V), order).items():
        assert len(ins) <= 4
    assert check_claim(F, V, order, 2, 48) == []


def test_sequential_restriction_empty_V():
    D = random_regular_digraph(30, 3, 0)
    assert sequential_restriction(D, [], set(), 2) is D


def test_sequential_restriction_no_conflicts():
    D = build_digraph(5, [(0, 1), (0, 2), (0, 3), (1, 4)])
    out = sequential_restriction(D, [0], {0}, 2)
    assert out.out_degree(0) == 2 and out.out_set(0) <= {1, 2, 3}


@pytest.mark.parametrize("seed", range(3))
def test_sequential_restriction_prefix_soundness(seed):
    D, tp, V = claim_instance(seed)
    F, order = claim_order_and_sample(D, V, 2, ResampleConfig(d_trim=192, p=0.5, seed=seed))
    out = sequential_restriction(F, order, V, 2)
    assert all(out.out_degree(v) == 2 for v in V)
    H = build_aux_H(out, V)
    # no H-arcs at all inside V, so in particular none inside any prefix
    for i in range(len(order) + 1):
        prefix = set(order[:i])
        assert not [a for a in H.arcs if a[0] in prefix and a[1] in prefix]
    assert c5_sources_violations(out, V) == []


def test_avoid_c5_from_class_desk():
    D, tp, V = claim_instance(2)
    out = avoid_c5_from_class(D, tp, "A", 2, ResampleConfig(d_trim=192, p=0.5, seed=2))
    assert all(out.out_degree(v) == 2 for v in out.vertex_list())
    assert find_pattern(out, cycle_orientation("C5_2"), anchors={0: V}) is None


def test_avoid_c5_empty_sources_trims():
    # B <-> C complete bipartite; nothing points into A, so the source set is empty
    arcs = [(b, c) for b in (0, 1, 2) for c in (3, 4, 5)] + [(c, b) for b in (0, 1, 2) for c in (3, 4, 5)]
    D = build_digraph(6, arcs)
    classes = {0: "B", 1: "B", 2: "B", 3: "C", 4: "C", 5: "C"}
    types = {v: ("C",) if classes[v] == "B" else ("B",) for v in classes}
    out = avoid_c5_from_class(D, TypedPartition(classes, 1, types), "A", 2, DESK)
    assert out.arcs <= D.arcs
    assert all(out.out_degree(v) == 2 for v in out.vertex_list())


def test_avoid_c5_paper_constants_gate():
    D, tp, V = claim_instance(0)
    with pytest.raises(ParameterInfeasible):
        avoid_c5_from_class(D, tp, "A", 100, ResampleConfig(d_trim=192, p=0.5, profile="paper_faithful"))


def test_avoid_c5_rejects_triangles():
    tp = TypedPartition({0: "A", 1: "B", 2: "C"}, 1, {0: ("B",), 1: ("C",), 2: ("A",)})
    with pytest.raises(ParameterInfeasible):
        avoid_c5_from_class(TRIANGLE, tp, "A", 1, DESK)


# -- pipeline ----------------------------------------------------------------


@pytest.mark.slow
def test_pipeline_desk_end_to_end():
    D = random_cayley_lift(21, (1, 2, 4), 300, 16, seed=3)
    out, reports = pipeline_avoid_c3_c5(D, 2, PipelinePlan.desk(2, seed=3))
    assert len(reports) == 6 and all(r.verified for r in reports)
    assert min_out_degree(out) >= 2
    for name in ("C3_1", "C3_2", "C5_1", "C5_2", "C5_3", "C5_4"):
        assert find_pattern(out, cycle_orientation(name)) is None


def test_pipeline_insufficient_degree_names_stage():
    D = random_regular_digraph(60, 3, 0)
    with pytest.raises(PipelineFailed) as info:
        pipeline_avoid_c3_c5(D, 2, PipelinePlan.paper_faithful(2))
    assert info.value.reports[-1].stage == "D1_avoid_directed_cycles"
    assert not info.value.reports[-1].verified
    assert isinstance(info.value.cause, ParameterInfeasible)


def test_report_consistency():
    from digavoid.reductions import ReductionReport

    with pytest.raises(ValueError):
        ReductionReport("x", 1, 0, 0, 0, 0, 0, 0, verified=True, violations=["bad"])
    r = ReductionReport("x", 1, 0, 0, 0, 0, 0, 0, verified=False, violations=["bad"])
    assert set(r.to_json()) >= {"stage", "n", "m", "min_out_before", "min_out_after", "rounds", "restarts", "seed", "verified", "violations"}
