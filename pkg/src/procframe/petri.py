"""Labelled Petri nets with silent transitions and explicit final markings."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .automata import DEFAULT_STATE_CAP, Dfa, StateBudgetExceeded, minimize


class NetStructureError(ValueError):
    pass


class NotEnabled(ValueError):
    pass


class Unbounded(StateBudgetExceeded):
    """Reachable markings exceed the state cap (taken as unboundedness)."""


@dataclass(frozen=True)
class Marking:
    """Multiset of places, stored as sorted ``(place, count)`` pairs."""

    tokens: tuple = ()

    def __post_init__(self):
        items = self.tokens
        if isinstance(items, Mapping):
            items = items.items()
        elif isinstance(items, str):
            items = (items,)
        counts = {}
        for item in items:
            p, k = (item, 1) if isinstance(item, str) else item
            if k < 0:
                raise ValueError("negative token count")
            counts[p] = counts.get(p, 0) + k
        object.__setattr__(self, "tokens", tuple(sorted((p, k) for p, k in counts.items() if k)))

    @classmethod
    def of(cls, *places: str) -> "Marking":
        return cls(places)

    def __getitem__(self, place: str) -> int:
        return dict(self.tokens).get(place, 0)

    def places(self) -> frozenset:
        return frozenset(p for p, _ in self.tokens)

    def __str__(self):
        return " ".join(p if k == 1 else f"{p}*{k}" for p, k in self.tokens) or "{}"


SILENT = None


@dataclass(frozen=True)
class PetriNet:
    """Labelled net.  A transition label of ``None`` marks a silent transition."""

    places: tuple
    transitions: tuple  # sorted (id, label) pairs
    arcs: frozenset  # (source, target) pairs
    initial: Marking
    final: tuple  # Markings
    name: str = ""
    _pre: dict = field(init=False, repr=False, compare=False, hash=False)
    _post: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        places = tuple(sorted(set(self.places)))
        trans = self.transitions
        if isinstance(trans, Mapping):
            trans = trans.items()
        trans = tuple(sorted(trans))
        object.__setattr__(self, "places", places)
        object.__setattr__(self, "transitions", trans)
        object.__setattr__(self, "arcs", frozenset(self.arcs))
        initial = self.initial if isinstance(self.initial, Marking) else Marking(self.initial)
        object.__setattr__(self, "initial", initial)
        final = tuple(sorted({m if isinstance(m, Marking) else Marking(m) for m in self.final},
                             key=lambda m: m.tokens))
        object.__setattr__(self, "final", final)

        pset = set(places)
        tids = [t for t, _ in trans]
        if len(set(tids)) != len(tids):
            raise NetStructureError("duplicate transition id")
        if pset & set(tids):
            raise NetStructureError("place and transition ids overlap")
        pre = {t: set() for t in tids}
        post = {t: set() for t in tids}
        for src, dst in self.arcs:
            if src in pset and dst in pre:
                pre[dst].add(src)
            elif src in pre and dst in pset:
                post[src].add(dst)
            else:
                raise NetStructureError(f"arc {src} -> {dst} does not connect a place and a transition")
        for t in tids:
            if not pre[t] or not post[t]:
                raise NetStructureError(f"transition {t} needs at least one input and one output place")
        if not final:
            raise NetStructureError("at least one final marking is required")
        for m in (initial,) + final:
            if not m.places() <= pset:
                raise NetStructureError(f"marking {m} references unknown places")
        object.__setattr__(self, "_pre", {t: frozenset(v) for t, v in pre.items()})
        object.__setattr__(self, "_post", {t: frozenset(v) for t, v in post.items()})

    def label(self, t: str):
        return dict(self.transitions)[t]

    def preset(self, t: str) -> frozenset:
        return self._pre[t]

    def postset(self, t: str) -> frozenset:
        return self._post[t]

    @property
    def visible_labels(self) -> frozenset:
        return frozenset(lbl for _, lbl in self.transitions if lbl is not None)

    def silent(self) -> list:
        return [t for t, lbl in self.transitions if lbl is None]


def enabled(net: PetriNet, m: Marking) -> frozenset:
    have = m.places()
    return frozenset(t for t, _ in net.transitions if net.preset(t) <= have)


def fire(net: PetriNet, m: Marking, t: str) -> Marking:
    if t not in enabled(net, m):
        raise NotEnabled(f"transition {t} is not enabled in {m}")
    counts = dict(m.tokens)
    for p in net.preset(t):
        counts[p] -= 1
    for p in net.postset(t):
        counts[p] = counts.get(p, 0) + 1
    return Marking(counts)


class _Engine:
    """Vector-based firing used by the reachability and simulation code."""

    def __init__(self, net: PetriNet):
        self.net = net
        idx = {p: i for i, p in enumerate(net.places)}
        self.moves = []
        for t, lbl in net.transitions:
            pre = tuple(sorted(idx[p] for p in net.preset(t)))
            post = tuple(sorted(idx[p] for p in net.postset(t)))
            self.moves.append((t, lbl, pre, post))
        self.initial = self.vector(net.initial)
        self.final = {self.vector(m) for m in net.final}

    def vector(self, m: Marking) -> tuple:
        return tuple(m[p] for p in self.net.places)

    def successors(self, v: tuple):
        for t, lbl, pre, post in self.moves:
            if all(v[i] for i in pre):
                w = list(v)
                for i in pre:
                    w[i] -= 1
                for i in post:
                    w[i] += 1
                yield t, lbl, tuple(w)


def reachability_graph(net: PetriNet, state_cap: int = DEFAULT_STATE_CAP):
    """Markings (as count vectors) and labelled edges reachable from the initial marking."""
    eng = _Engine(net)
    index = {eng.initial: 0}
    order = [eng.initial]
    edges = []
    i = 0
    while i < len(order):
        v = order[i]
        out = []
        for _, lbl, w in eng.successors(v):
            if w not in index:
                if len(index) >= state_cap:
                    raise Unbounded(f"more than {state_cap} reachable markings")
                index[w] = len(order)
                order.append(w)
            out.append((lbl, index[w]))
        edges.append(out)
        i += 1
    return order, edges, eng


def is_safe(net: PetriNet, state_cap: int = DEFAULT_STATE_CAP) -> bool:
    order, _, _ = reachability_graph(net, state_cap)
    return all(k <= 1 for v in order for k in v)


def _closure(states: Iterable[int], edges) -> frozenset:
    seen = set(states)
    todo = list(seen)
    while todo:
        s = todo.pop()
        for lbl, t in edges[s]:
            if lbl is None and t not in seen:
                seen.add(t)
                todo.append(t)
    return frozenset(seen)


def net_to_dfa(net: PetriNet, state_cap: int = DEFAULT_STATE_CAP) -> Dfa:
    """Minimal Dfa of the visible firing sequences ending in a final marking.

    Activities the net does not label lead to the trap state: within its own
    alphabet the net is closed.
    """
    order, edges, eng = reachability_graph(net, state_cap)
    final = {i for i, v in enumerate(order) if v in eng.final}
    symbols = tuple(sorted(net.visible_labels))

    start = _closure([0], edges)
    ids = {start: 0}
    subsets = [start]
    delta, default = [], []
    empty = None
    j = 0
    while j < len(subsets):
        cur = subsets[j]
        j += 1
        row = []
        for a in symbols:
            nxt = _closure({t for s in cur for lbl, t in edges[s] if lbl == a}, edges)
            if nxt not in ids:
                if len(ids) >= state_cap:
                    raise StateBudgetExceeded(f"more than {state_cap} subset states")
                ids[nxt] = len(subsets)
                subsets.append(nxt)
            row.append(ids[nxt])
        if empty is None:
            empty = frozenset()
            if empty not in ids:
                ids[empty] = len(subsets)
                subsets.append(empty)
        delta.append(tuple(row))
        default.append(ids[empty])
    accepting = {ids[s] for s in subsets if s & final}
    return minimize(Dfa(symbols, delta, default, accepting))


def net_accepts(net: PetriNet, trace: Iterable, state_cap: int = DEFAULT_STATE_CAP) -> bool:
    """Replay `trace` on the set of markings reachable so far, without building the full graph."""
    eng = _Engine(net)
    labels = net.visible_labels

    def closure(vs):
        seen = set(vs)
        todo = list(seen)
        while todo:
            v = todo.pop()
            for _, lbl, w in eng.successors(v):
                if lbl is None and w not in seen:
                    if len(seen) >= state_cap:
                        raise Unbounded(f"more than {state_cap} markings in a silent closure")
                    seen.add(w)
                    todo.append(w)
        return seen

    current = closure([eng.initial])
    for a in trace:
        if a not in labels:
            return False
        current = closure({w for v in current for _, lbl, w in eng.successors(v) if lbl == a})
        if not current:
            return False
    return bool(current & eng.final)


def _q(s) -> str:
    return '"' + str(s).replace('"', r"\"") + '"'


def net_to_dot(net: PetriNet) -> str:
    lines = [f"digraph {_q(net.name or 'net')} {{", "  rankdir=LR;"]
    finals = set().union(*(m.places() for m in net.final)) if net.final else set()
    for p in net.places:
        k = net.initial[p]
        label = "" if k == 0 else ("&#9679;" if k == 1 else str(k))
        shape = "doublecircle" if p in finals else "circle"
        lines.append(f"  {_q(p)} [shape={shape}, label={_q(label)}, xlabel={_q(p)}];")
    for t, lbl in net.transitions:
        if lbl is None:
            lines.append(f"  {_q(t)} [shape=box, style=filled, fillcolor=black, label=\"\", width=0.15];")
        else:
            lines.append(f"  {_q(t)} [shape=box, label={_q(lbl)}];")
    for src, dst in sorted(net.arcs):
        lines.append(f"  {_q(src)} -> {_q(dst)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
