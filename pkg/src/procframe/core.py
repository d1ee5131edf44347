"""Activities, traces, event logs and trace projection.

Activities are plain strings and traces are tuples of them, so both are
hashable and immutable out of the box.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

Activity = str
Trace = tuple  # tuple[Activity, ...]

START = "__START__"
RESERVED_CHARS = (",", ";", "\n", "\r")


class StartSymbolClash(ValueError):
    """The artificial start activity already occurs in the log."""


class InvalidActivity(ValueError):
    pass


def check_activity(name: Activity) -> Activity:
    if not isinstance(name, str) or not name:
        raise InvalidActivity(f"activity name must be a non-empty string, got {name!r}")
    for ch in RESERVED_CHARS:
        if ch in name:
            raise InvalidActivity(f"activity name {name!r} contains reserved character {ch!r}")
    return name


def project(trace: Sequence[Activity], alphabet: Iterable[Activity]) -> Trace:
    """Keep only the events whose activity is in `alphabet`, preserving order."""
    keep = alphabet if isinstance(alphabet, (set, frozenset)) else frozenset(alphabet)
    return tuple(a for a in trace if a in keep)


@dataclass(frozen=True)
class EventLog:
    """An ordered multiset of traces.

    Multiplicity and order are kept even though mining at full support
    ignores them.
    """

    traces: tuple = ()
    alphabet: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        traces = tuple(tuple(t) for t in self.traces)
        object.__setattr__(self, "traces", traces)
        object.__setattr__(self, "alphabet", frozenset(a for t in traces for a in t))

    @classmethod
    def from_traces(cls, traces: Iterable[Sequence[Activity]]) -> "EventLog":
        return cls(tuple(tuple(t) for t in traces))

    def __len__(self):
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    def unique(self) -> tuple:
        """Distinct traces in first-occurrence order."""
        return tuple(dict.fromkeys(self.traces))


def log_alphabet(log: EventLog) -> frozenset:
    return log.alphabet


def prepend_start(log: EventLog, start: Activity = START) -> EventLog:
    if start in log.alphabet:
        raise StartSymbolClash(f"start activity {start!r} already occurs in the log")
    return EventLog(tuple((start,) + t for t in log.traces))


def intern(alphabet: Iterable[Activity]) -> dict:
    """Stable activity -> integer id mapping (lexicographic order)."""
    return {a: i for i, a in enumerate(sorted(set(alphabet)))}
