import pytest
from hypothesis import given
from hypothesis import strategies as st

from procframe.core import (
    START,
    EventLog,
    InvalidActivity,
    StartSymbolClash,
    check_activity,
    intern,
    log_alphabet,
    prepend_start,
    project,
)

acts = st.sampled_from("ABCDE")
traces = st.lists(acts, max_size=10).map(tuple)
alphabets = st.frozensets(acts)


def test_project_examples():
    assert project(("a", "b", "c"), {"a", "c"}) == ("a", "c")
    assert project((), {"a"}) == ()
    assert project(("b", "b", "b"), {"a"}) == ()


def test_log_alphabet():
    assert log_alphabet(EventLog.from_traces([("a", "b"), ("b", "c")])) == {"a", "b", "c"}
    assert log_alphabet(EventLog.from_traces([()])) == frozenset()
    assert log_alphabet(EventLog.from_traces([("a", "a")])) == {"a"}


def test_prepend_start():
    assert prepend_start(EventLog.from_traces([("a",)]), ">").traces == ((">", "a"),)
    assert prepend_start(EventLog.from_traces([()]), ">").traces == ((">",),)
    with pytest.raises(StartSymbolClash):
        prepend_start(EventLog.from_traces([(">",)]), ">")


def test_default_start_name():
    log = prepend_start(EventLog.from_traces([("a",)]))
    assert log.traces[0][0] == START


def test_log_keeps_order_and_multiplicity():
    log = EventLog.from_traces([("b",), ("a",), ("b",)])
    assert log.traces == (("b",), ("a",), ("b",))
    assert log.unique() == (("b",), ("a",))
    assert len(log) == 3


@pytest.mark.parametrize("bad", ["", "a,b", "a;b", "a\nb", 3])
def test_invalid_activity_names(bad):
    with pytest.raises(InvalidActivity):
        check_activity(bad)


def test_intern_is_sorted_and_stable():
    assert intern(["c", "a", "b", "a"]) == {"a": 0, "b": 1, "c": 2}


@given(traces, alphabets)
def test_projection_idempotent(t, sigma):
    assert project(project(t, sigma), sigma) == project(t, sigma)


@given(traces)
def test_projection_identity(t):
    assert project(t, set(t)) == t


@given(traces, alphabets)
def test_projection_shrinks(t, sigma):
    assert len(project(t, sigma)) <= len(t)


@given(st.lists(traces, min_size=1, max_size=5))
def test_prepend_start_sizes(ts):
    log = EventLog.from_traces(ts)
    out = prepend_start(log, "S")
    assert [len(t) for t in out] == [len(t) + 1 for t in log]
    assert len(out.alphabet) == len(log.alphabet) + 1
