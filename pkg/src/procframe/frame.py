"""Process frames: specifications over their own alphabets, composed by projection.

A frame accepts a global trace iff every specification accepts the
projection of that trace onto the specification's alphabet.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .automata import DEFAULT_STATE_CAP, Dfa, conjoin, embed
from .core import project
from .declare import Constraint, compile_constraint
from .petri import PetriNet, net_accepts, net_to_dfa


class UnknownActivity(ValueError):
    pass


class UnknownSpec(KeyError):
    pass


class NotSplittable(ValueError):
    pass


@dataclass(frozen=True)
class Specification:
    """A named behaviour description with its alphabet.

    `body` is a set of Declare constraints, a :class:`PetriNet`, or a raw
    :class:`Dfa`.  When `alphabet` is omitted it is inferred from the body.
    """

    name: str
    body: object
    alphabet: frozenset = None

    def __post_init__(self):
        body = self.body
        if isinstance(body, (set, frozenset, list, tuple)):
            body = frozenset(body)
            if not all(isinstance(c, Constraint) for c in body):
                raise TypeError("a declare body must contain only constraints")
            object.__setattr__(self, "body", body)
        elif not isinstance(body, (PetriNet, Dfa)):
            raise TypeError(f"unsupported specification body {type(body).__name__}")
        used = self.referenced()
        alphabet = used if self.alphabet is None else frozenset(self.alphabet)
        if not used <= alphabet:
            raise ValueError(f"spec {self.name}: activities {sorted(used - alphabet)} missing from alphabet")
        object.__setattr__(self, "alphabet", alphabet)

    @property
    def kind(self) -> str:
        if isinstance(self.body, PetriNet):
            return "net"
        if isinstance(self.body, Dfa):
            return "dfa"
        return "declare"

    def referenced(self) -> frozenset:
        if isinstance(self.body, PetriNet):
            return self.body.visible_labels
        if isinstance(self.body, Dfa):
            return self.body.explicit_symbols
        return frozenset(a for c in self.body for a in c.args)

    def accepts(self, local_trace: Sequence) -> bool:
        """Acceptance of a trace already projected onto this spec's alphabet."""
        if isinstance(self.body, PetriNet):
            return net_accepts(self.body, local_trace)
        if isinstance(self.body, Dfa):
            return self.body.accepts(local_trace)
        return all(compile_constraint(c).accepts(local_trace) for c in self.body)


@dataclass(frozen=True)
class ProcessFrame:
    specs: tuple = ()

    def __post_init__(self):
        specs = tuple(self.specs)
        names = [s.name for s in specs]
        if len(set(names)) != len(names):
            raise ValueError("specification names must be unique within a frame")
        object.__setattr__(self, "specs", specs)

    def __getitem__(self, name: str) -> Specification:
        for s in self.specs:
            if s.name == name:
                return s
        raise UnknownSpec(name)

    def __len__(self):
        return len(self.specs)

    def with_spec(self, spec: Specification) -> "ProcessFrame":
        return ProcessFrame(self.specs + (spec,))


def all_tasks(frame: ProcessFrame) -> frozenset:
    return frozenset().union(*(s.alphabet for s in frame.specs))


def common_tasks(frame: ProcessFrame) -> frozenset:
    if not frame.specs:
        return frozenset()
    return frozenset.intersection(*(s.alphabet for s in frame.specs))


@lru_cache(maxsize=256)
def spec_dfa(spec: Specification, state_cap: int = DEFAULT_STATE_CAP) -> Dfa:
    """The spec's automaton, ignoring every activity outside its alphabet."""
    if isinstance(spec.body, PetriNet):
        local = net_to_dfa(spec.body, state_cap)
    elif isinstance(spec.body, Dfa):
        local = spec.body
    else:
        local = conjoin((compile_constraint(c) for c in sorted(spec.body)), state_cap)
    # chain-like templates see every activity of the spec's alphabet
    # through embed, since those become explicit symbols here
    return embed(local, spec.alphabet)


def frame_accepts(frame: ProcessFrame, trace: Sequence) -> bool:
    known = all_tasks(frame)
    foreign = [a for a in trace if a not in known]
    if foreign:
        raise UnknownActivity(f"activities {sorted(set(foreign))} are not part of the frame")
    return all(s.accepts(project(trace, s.alphabet)) for s in frame.specs)


def first_violation(frame: ProcessFrame, trace: Sequence) -> str | None:
    """Name of the first specification rejecting `trace`, or None."""
    for s in frame.specs:
        if not s.accepts(project(trace, s.alphabet)):
            return s.name
    return None


def global_dfa(frame: ProcessFrame, state_cap: int = DEFAULT_STATE_CAP) -> Dfa:
    return conjoin((spec_dfa(s, state_cap) for s in frame.specs), state_cap)


def merge_specs(frame: ProcessFrame, names: Iterable[str], merged_name: str | None = None) -> ProcessFrame:
    """Replace the named specs by one raw-automaton spec over the union alphabet."""
    names = list(names)
    chosen = [frame[n] for n in names]
    alphabet = frozenset().union(*(s.alphabet for s in chosen))
    body = conjoin(spec_dfa(s) for s in chosen)
    merged = Specification(merged_name or "+".join(names), body, alphabet)
    out, placed = [], False
    for s in frame.specs:
        if s.name in names:
            if not placed:
                out.append(merged)
                placed = True
        else:
            out.append(s)
    return ProcessFrame(tuple(out))


def split_spec(frame: ProcessFrame, name: str, parts: Sequence[Iterable[Constraint]]) -> ProcessFrame:
    """Partition a Declare spec into several specs sharing its alphabet."""
    spec = frame[name]
    if spec.kind != "declare":
        raise NotSplittable(f"spec {name} is a {spec.kind}, only declare specs can be split")
    parts = [frozenset(p) for p in parts]
    flat = [c for p in parts for c in p]
    if len(flat) != len(set(flat)) or set(flat) != set(spec.body):
        raise ValueError("parts must partition the spec's constraints")
    if len(parts) == 1:
        return frame
    new = [Specification(f"{name}.{i}", p, spec.alphabet) for i, p in enumerate(parts, 1)]
    out = []
    for s in frame.specs:
        out.extend(new if s.name == name else [s])
    return ProcessFrame(tuple(out))


def merge_all(frame: ProcessFrame) -> ProcessFrame:
    return merge_specs(frame, [s.name for s in frame.specs])


def split_all(frame: ProcessFrame) -> ProcessFrame:
    """Split every Declare spec into one spec per constraint."""
    for s in frame.specs:
        if s.kind == "declare" and len(s.body) > 1:
            frame = split_spec(frame, s.name, [[c] for c in sorted(s.body)])
    return frame
