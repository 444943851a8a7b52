import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from digavoid.constructions import random_regular_digraph
from digavoid.cycles import underlying_arc_cycles
from digavoid.errors import ParameterInfeasible, ResampleBudgetExceeded
from digavoid.resample import BadEvent, ResampleConfig, all_present, count_outside, mt_resample
from digavoid.rng import arc_uniforms, derive_seed, stream


def test_arc_uniforms_pinned():
    # fixed values guard cross-platform reproducibility of every seeded choice
    got = arc_uniforms(7, [0, 1, 2, 12345], "subsample")
    want = [0.9608837018950185, 0.3608663331216432, 0.07817289085967383, 0.5901176170051912]
    assert got.tolist() == want
    assert derive_seed(7, "x") == 8933364072711442094


def test_arc_uniforms_depend_on_key_only():
    a = arc_uniforms(3, [5, 9, 11], "L")
    b = arc_uniforms(3, [11, 5], "L")
    assert a[0] == b[1] and a[2] == b[0]
    assert arc_uniforms(3, [5], "M")[0] != a[0]


def test_stream_labels_separate():
    x = stream(1, "a").random(4)
    assert np.array_equal(x, stream(1, "a").random(4))
    assert not np.array_equal(x, stream(1, "b").random(4))


def test_config_validation():
    for bad in (dict(p=0.0), dict(p=1.5), dict(max_rounds=0), dict(restarts=0), dict(profile="x")):
        with pytest.raises(ParameterInfeasible):
            ResampleConfig(**bad)


def test_no_events_zero_rounds():
    res = mt_resample(10, [], ResampleConfig(p=0.3, seed=4))
    assert res.rounds == 0 and res.transcript == []
    assert len(res.assignment) == 10


def test_single_event_p1():
    ev = BadEvent("arc_absent", 0, (0,), lambda x: not x[0])
    res = mt_resample(1, [ev], ResampleConfig(p=1.0))
    assert res.assignment == [True] and res.rounds == 0


def test_impossible_raises_with_survivors():
    ev = all_present("cycle_survives", 0, [0])
    low = count_outside("out_degree_low", 1, [0], 1)
    with pytest.raises(ResampleBudgetExceeded) as info:
        mt_resample(1, [ev, low], ResampleConfig(p=0.5, max_rounds=50, restarts=2))
    assert info.value.surviving and info.value.restarts == 2


def test_unregistered_variable_rejected():
    with pytest.raises(ValueError):
        mt_resample(2, [all_present("x", 0, [5])], ResampleConfig())


def _regular_cycle_events(D, k):
    arcs = D.arc_list()
    index = {a: i for i, a in enumerate(arcs)}
    events = [count_outside("out_degree_low", v, [index[(v, u)] for u in D.out_adj[v]], k) for v in D.vertex_list()]
    for cyc in underlying_arc_cycles(D, 3):
        events.append(all_present("cycle_survives", cyc, [index[a] for a in cyc]))
    return arcs, events


def test_regular_cycle_system_terminates_and_rechecks():
    D = random_regular_digraph(300, 16, 2)
    arcs, events = _regular_cycle_events(D, 2)
    res = mt_resample(len(arcs), events, ResampleConfig(p=0.25, seed=9))
    assert not any(ev.holds(res.assignment) for ev in events)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32))
def test_transcript_deterministic(seed):
    D = random_regular_digraph(60, 8, 1)
    arcs, events = _regular_cycle_events(D, 1)
    cfg = ResampleConfig(p=0.3, seed=seed)
    a = mt_resample(len(arcs), events, cfg)
    b = mt_resample(len(arcs), events, cfg)
    assert a.transcript == b.transcript and a.assignment == b.assignment


def test_lowest_violated_event_first():
    # the first draw sets everything, so both events hold; index 0 must go first
    evs = [all_present("e", 0, [0]), all_present("e", 1, [1])]
    calls = []

    def sampler(rng, idx):
        calls.append(tuple(idx))
        return [len(calls) == 1] * len(idx)

    res = mt_resample(2, evs, ResampleConfig(max_rounds=5, restarts=1), sampler=sampler)
    assert res.transcript == [0, 1]
    assert calls == [(0, 1), (0,), (1,)]
