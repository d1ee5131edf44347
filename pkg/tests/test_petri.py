import pytest

import fixtures
from procframe.automata import enumerate_traces
from procframe.petri import (
    Marking,
    NetStructureError,
    NotEnabled,
    PetriNet,
    Unbounded,
    enabled,
    fire,
    is_safe,
    net_accepts,
    net_to_dfa,
    net_to_dot,
)

build = fixtures.build


def ab_net(skip=False):
    moves = [("tA", "A", ["p0"], ["p1"]), ("tB", "B", ["p1"], ["p2"])]
    if skip:
        moves.append(("tau", None, ["p1"], ["p2"]))
    return build("ab", moves, final=(("p2",),))


def all_fixture_nets():
    nets = [fixtures.block_net(c, v) for c in fixtures.CONSTRUCTS for v in fixtures.VARIANTS]
    nets += [f() for f in fixtures.NON_BLOCK.values()]
    nets += [fixtures.sequence4(), fixtures.interplay_m1(), fixtures.interplay_m2(), fixtures.explicit_b_k()]
    return nets


def test_enabled():
    net = ab_net()
    assert enabled(net, Marking.of("p0")) == {"tA"}
    assert enabled(net, Marking()) == frozenset()


def test_parallel_split_enables_both_branches():
    net = fixtures.parallel("mandatory")
    m = fire(net, fire(net, net.initial, "tA"), "split")
    assert enabled(net, m) == {"tB1", "tC1"}


def test_fire():
    net = ab_net(skip=True)
    assert fire(net, Marking.of("p0"), "tA") == Marking.of("p1")
    with pytest.raises(NotEnabled):
        fire(net, Marking.of("p0"), "tB")
    assert fire(net, Marking.of("p1"), "tau") == Marking.of("p2")


def test_net_to_dfa_examples():
    d = net_to_dfa(ab_net())
    assert enumerate_traces(d, 3) == {("A", "B")}
    d = net_to_dfa(ab_net(skip=True))
    assert enumerate_traces(d, 3) == {("A",), ("A", "B")}


def test_unbounded_net():
    net = build("pump", [("t", "A", ["p0"], ["p0", "p1"])], final=(("p0",),))
    with pytest.raises(Unbounded):
        net_to_dfa(net, state_cap=50)


def test_net_accepts_examples():
    net = fixtures.sequence4()
    assert net_accepts(net, ("A", "B", "C", "D"))
    assert net_accepts(net, ("A", "B", "C", "D", "A", "B", "C", "D"))
    assert not net_accepts(net, ("A", "C"))
    assert not net_accepts(net, ("A", "B", "X", "C", "D"))


def _silent_closure(net, markings):
    seen = set(markings)
    todo = list(seen)
    while todo:
        m = todo.pop()
        for t in enabled(net, m):
            if net.label(t) is None:
                n = fire(net, m, t)
                if n not in seen:
                    seen.add(n)
                    todo.append(n)
    return frozenset(seen)


@pytest.mark.parametrize("net", all_fixture_nets(), ids=lambda n: n.name)
def test_simulation_agrees_with_automaton(net):
    # every trace up to length 8, walked as a prefix tree; a prefix with no
    # reachable marking has only rejected extensions, so its subtree is cut
    d = net_to_dfa(net)
    labels = sorted(net.visible_labels)
    finals = set(net.final)
    trap = d.trap_states()
    stack = [((), _silent_closure(net, [net.initial]))]
    while stack:
        trace, markings = stack.pop()
        expected = bool(markings & finals)
        assert net_accepts(net, trace) == expected, trace
        assert d.accepts(trace) == expected, trace
        if not markings:
            assert d.run(trace) in trap
            continue
        if len(trace) == 8:
            continue
        for a in labels:
            nxt = {fire(net, m, t) for m in markings for t in enabled(net, m) if net.label(t) == a}
            stack.append((trace + (a,), _silent_closure(net, nxt)))


@pytest.mark.parametrize("net", all_fixture_nets(), ids=lambda n: n.name)
def test_fixture_nets_are_safe(net):
    assert is_safe(net)


@pytest.mark.parametrize("net", all_fixture_nets()[:16], ids=lambda n: n.name)
def test_enumerated_traces_replay(net):
    traces = enumerate_traces(net_to_dfa(net), 2)
    assert traces
    assert all(net_accepts(net, t) for t in traces)


def test_structure_errors():
    with pytest.raises(NetStructureError):
        PetriNet({"p"}, {"t": "A"}, {("p", "t")}, Marking.of("p"), (Marking.of("p"),))
    with pytest.raises(NetStructureError):
        PetriNet({"p"}, {"t": "A"}, {("p", "t"), ("t", "q")}, Marking.of("p"), (Marking.of("p"),))
    with pytest.raises(NetStructureError):
        PetriNet({"p"}, {"t": "A"}, {("p", "t"), ("t", "p")}, Marking.of("p"), ())


def test_marking_text():
    assert str(Marking({"a": 2, "b": 1})) == "a*2 b"
    assert str(Marking()) == "{}"


def test_net_to_dot_marks_silent_transitions():
    text = net_to_dot(ab_net(skip=True))
    assert "fillcolor=black" in text
    assert text == net_to_dot(ab_net(skip=True))
