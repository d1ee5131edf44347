import random

import pytest

import fixtures
from oracles import all_traces
from procframe.automata import Dfa, equivalent, includes, product
from procframe.declare import compile_constraint
from procframe.declare import parse_constraint as pc
from procframe.frame import (
    NotSplittable,
    ProcessFrame,
    Specification,
    UnknownActivity,
    UnknownSpec,
    all_tasks,
    common_tasks,
    first_violation,
    frame_accepts,
    global_dfa,
    merge_all,
    merge_specs,
    spec_dfa,
    split_all,
    split_spec,
)

FRAMES = fixtures.fixture_frames()


def test_task_sets():
    f = ProcessFrame((Specification("s1", set(), {"A", "B"}), Specification("s2", set(), {"B", "C"})))
    assert all_tasks(f) == {"A", "B", "C"}
    assert common_tasks(f) == {"B"}
    single = ProcessFrame((Specification("s1", set(), {"A"}),))
    assert all_tasks(single) == common_tasks(single) == {"A"}
    disjoint = ProcessFrame((Specification("s1", set(), {"A"}), Specification("s2", set(), {"B"})))
    assert common_tasks(disjoint) == frozenset()


def test_spec_dfa_ignores_activities_outside_alphabet():
    d = spec_dfa(Specification("r", {pc("Response[A,B]")}, {"A", "B", "C"}))
    assert d.accepts(("A", "C", "B")) and not d.accepts(("A", "C"))
    assert equivalent(spec_dfa(Specification("e", set(), {"A"})), Dfa.universal())


def test_spec_alphabet_must_cover_body():
    with pytest.raises(ValueError):
        Specification("r", {pc("Response[A,B]")}, {"A"})


def test_explicit_relation_net():
    d = spec_dfa(Specification("bk", fixtures.explicit_b_k()))
    accepted = {t for t in all_traces(["B", "K"], 4) if d.accepts(t)}
    assert accepted == {(), ("K",), ("B", "K")}


def test_interplay_examples():
    f = FRAMES["interplay"]
    assert frame_accepts(f, ("A", "B", "K", "L"))
    assert not frame_accepts(f, ("K", "L", "A", "B"))
    assert frame_accepts(f, ("K", "A", "C", "L"))
    assert first_violation(f, ("K", "L", "A", "B")) == "response"


def test_starting_with_k_rules_out_b():
    f = FRAMES["interplay"]
    g = global_dfa(f)
    for t in all_traces(["A", "B", "C", "K", "L"], 5):
        if t and t[0] == "K" and "B" in t:
            assert not g.accepts(t)


def test_foreign_activity_is_an_error():
    with pytest.raises(UnknownActivity):
        frame_accepts(FRAMES["interplay"], ("A", "Z"))


@pytest.mark.parametrize("name", sorted(FRAMES))
def test_global_dfa_agrees_with_projection(name):
    f = FRAMES[name]
    g = global_dfa(f)
    rng = random.Random(name)
    tasks = sorted(all_tasks(f))
    for _ in range(300):
        t = tuple(rng.choice(tasks) for _ in range(rng.randint(0, 12)))
        assert frame_accepts(f, t) == g.accepts(t)


def test_interplay_exhaustive():
    f = FRAMES["interplay"]
    g = global_dfa(f)
    for t in all_traces(sorted(all_tasks(f)), 6):
        assert frame_accepts(f, t) == g.accepts(t)


def test_single_spec_frame():
    s = Specification("r", {pc("Response[A,B]")})
    assert equivalent(global_dfa(ProcessFrame((s,))), spec_dfa(s))


def test_explicit_relation_does_not_change_language():
    assert equivalent(global_dfa(FRAMES["interplay"]), global_dfa(FRAMES["interplay_relation"]))


@pytest.mark.parametrize("name", sorted(FRAMES))
def test_merge_and_split_keep_language(name):
    f = FRAMES[name]
    g = global_dfa(f)
    assert equivalent(global_dfa(merge_all(f)), g)
    assert equivalent(global_dfa(split_all(f)), g)


def test_split_examples():
    s = Specification("d", {pc("Response[A,B]"), pc("Response[C,D]")})
    f = ProcessFrame((s,))
    g = split_spec(f, "d", [[pc("Response[A,B]")], [pc("Response[C,D]")]])
    assert len(g) == 2
    assert equivalent(global_dfa(g), global_dfa(f))
    single = ProcessFrame((Specification("one", {pc("Response[A,B]")}),))
    assert split_spec(single, "one", [[pc("Response[A,B]")]]) == single


def test_split_errors():
    f = FRAMES["interplay"]
    with pytest.raises(NotSplittable):
        split_spec(f, "m1", [[]])
    with pytest.raises(UnknownSpec):
        split_spec(f, "nope", [[]])
    with pytest.raises(ValueError):
        split_spec(f, "response", [[pc("Response[K,B]")]])


def test_merge_places_spec_first():
    f = merge_specs(FRAMES["interplay"], ["m2", "response"], "merged")
    assert [s.name for s in f.specs] == ["m1", "merged"]


@pytest.mark.parametrize("name", sorted(FRAMES))
def test_adding_a_spec_never_grows_language(name):
    f = FRAMES[name]
    tasks = sorted(all_tasks(f))
    extra = Specification("extra", {pc(f"AlternateResponse[{tasks[0]},{tasks[-1]}]")})
    g, h = global_dfa(f), global_dfa(f.with_spec(extra))
    assert includes(g, h)
    assert equivalent(product([g, spec_dfa(extra)]), h)


def test_raw_spec_is_embedded():
    d = compile_constraint(pc("NotChainSuccession[A,B]"))
    wide = Specification("w", d, {"A", "B", "C"})
    assert spec_dfa(wide).accepts(("A", "C", "B"))
    assert spec_dfa(wide).accepts(("A", "Z", "B")) is False
