"""Total DFAs over an open alphabet.

A :class:`Dfa` distinguishes a finite set of explicit symbols; every other
activity follows the per-state *default* successor.  This is how negated and
"any" arcs are represented, and it is what lets an automaton ignore
activities it has never heard of.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

DEFAULT_STATE_CAP = 100_000


class StateBudgetExceeded(RuntimeError):
    """Raised when a construction reaches more states than allowed."""


class AlphabetMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Dfa:
    """Deterministic automaton with a default successor per state.

    ``delta[s][i]`` is the successor of state ``s`` on ``symbols[i]``;
    ``default[s]`` is taken for any activity outside ``symbols``.
    States are ``0 .. n-1``.
    """

    symbols: tuple
    delta: tuple
    default: tuple
    accepting: frozenset
    initial: int = 0
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        symbols = tuple(self.symbols)
        if len(set(symbols)) != len(symbols):
            raise ValueError("duplicate explicit symbols")
        n = len(self.default)
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "delta", tuple(tuple(row) for row in self.delta))
        object.__setattr__(self, "default", tuple(self.default))
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(symbols)})
        if len(self.delta) != n or any(len(row) != len(symbols) for row in self.delta):
            raise ValueError("transition table is not total")
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")
        for row, d in zip(self.delta, self.default):
            if not all(0 <= t < n for t in row) or not 0 <= d < n:
                raise ValueError("successor out of range")
        if not self.accepting <= set(range(n)):
            raise ValueError("accepting state out of range")

    @property
    def n_states(self) -> int:
        return len(self.default)

    @property
    def states(self) -> range:
        return range(len(self.default))

    @property
    def explicit_symbols(self) -> frozenset:
        return frozenset(self.symbols)

    def step(self, state: int, activity) -> int:
        i = self._index.get(activity)
        if i is None:
            return self.default[state]
        return self.delta[state][i]

    def run(self, trace: Iterable) -> int:
        s = self.initial
        for a in trace:
            s = self.step(s, a)
        return s

    def accepts(self, trace: Iterable) -> bool:
        return self.run(trace) in self.accepting

    def columns(self) -> list:
        """Successor lists per letter: one per explicit symbol, then default."""
        cols = [[row[i] for row in self.delta] for i in range(len(self.symbols))]
        cols.append(list(self.default))
        return cols

    def live_states(self) -> set:
        """States from which an accepting state is reachable."""
        preds = [set() for _ in self.states]
        for s in self.states:
            for t in self.delta[s]:
                preds[t].add(s)
            preds[self.default[s]].add(s)
        live = set(self.accepting)
        todo = list(live)
        while todo:
            t = todo.pop()
            for s in preds[t]:
                if s not in live:
                    live.add(s)
                    todo.append(s)
        return live

    def trap_states(self) -> set:
        return set(self.states) - self.live_states()

    @classmethod
    def universal(cls, symbols: Iterable = ()) -> "Dfa":
        symbols = tuple(sorted(set(symbols)))
        return cls(symbols, ((0,) * len(symbols),), (0,), {0})

    @classmethod
    def empty(cls, symbols: Iterable = ()) -> "Dfa":
        symbols = tuple(sorted(set(symbols)))
        return cls(symbols, ((0,) * len(symbols),), (0,), set())

    @classmethod
    def from_step(
        cls,
        symbols: Iterable,
        initial: Hashable,
        step: Callable,
        accept: Callable,
        state_cap: int = DEFAULT_STATE_CAP,
    ) -> "Dfa":
        """Explore an abstract state machine and freeze it into a Dfa.

        ``step(state, symbol)`` is called with ``symbol=None`` for the
        default ("any other activity") letter.
        """
        symbols = tuple(sorted(set(symbols)))
        ids = {initial: 0}
        order = [initial]
        delta, default = [], []
        i = 0
        while i < len(order):
            q = order[i]
            i += 1
            row = []
            for a in symbols + (None,):
                r = step(q, a)
                if r not in ids:
                    if len(ids) >= state_cap:
                        raise StateBudgetExceeded(f"more than {state_cap} states")
                    ids[r] = len(order)
                    order.append(r)
                row.append(ids[r])
            delta.append(tuple(row[:-1]))
            default.append(row[-1])
        accepting = {ids[q] for q in order if accept(q)}
        return cls(symbols, delta, default, accepting)

    @classmethod
    def from_table(cls, symbols, transitions: dict, default: dict, initial, accepting) -> "Dfa":
        """Build from named states: ``transitions[(state, symbol)]`` and ``default[state]``."""
        symbols = tuple(sorted(set(symbols)))
        names = sorted(default, key=str)
        names.remove(initial)
        names.insert(0, initial)
        ids = {q: i for i, q in enumerate(names)}
        delta = [tuple(ids[transitions.get((q, a), default[q])] for a in symbols) for q in names]
        return cls(symbols, delta, [ids[default[q]] for q in names], {ids[q] for q in accepting})


def accepts(dfa: Dfa, trace: Iterable) -> bool:
    return dfa.accepts(trace)


def _with_symbols(dfa: Dfa, symbols: Sequence) -> list:
    """Transition rows of `dfa` re-indexed over a superset of its symbols."""
    cols = []
    for a in symbols:
        i = dfa._index.get(a)
        cols.append(i)
    return [
        tuple(dfa.default[s] if i is None else dfa.delta[s][i] for i in cols)
        for s in dfa.states
    ]


def embed(dfa: Dfa, local_alphabet: Iterable) -> Dfa:
    """Make `dfa` ignore every activity outside `local_alphabet`.

    Activities of the local alphabet that the automaton does not name keep
    its default behaviour; everything else becomes a self-loop.
    """
    local = frozenset(local_alphabet)
    if not dfa.explicit_symbols <= local:
        missing = sorted(dfa.explicit_symbols - local)
        raise AlphabetMismatch(f"explicit symbols {missing} not in local alphabet")
    symbols = tuple(sorted(local))
    delta = _with_symbols(dfa, symbols)
    return minimize(Dfa(symbols, delta, tuple(dfa.states), dfa.accepting, dfa.initial))


def complement(dfa: Dfa) -> Dfa:
    return Dfa(dfa.symbols, dfa.delta, dfa.default, frozenset(dfa.states) - dfa.accepting, dfa.initial)


def product(dfas: Sequence[Dfa], state_cap: int = DEFAULT_STATE_CAP) -> Dfa:
    """Synchronous product; the language is the intersection of the operands'.

    Only reachable states are built.  Tuples containing a dead component are
    collapsed into one trap state.
    """
    dfas = list(dfas)
    if not dfas:
        raise ValueError("product of an empty list")
    if len(dfas) == 1:
        return dfas[0]
    symbols = tuple(sorted(set().union(*(d.symbols for d in dfas))))
    rows = [_with_symbols(d, symbols) for d in dfas]
    dead = [d.trap_states() for d in dfas]
    k = len(symbols)

    start = tuple(d.initial for d in dfas)
    has_trap = False
    ids = {start: 0}
    order = [start]
    delta, default = [], []
    i = 0
    while i < len(order):
        q = order[i]
        i += 1
        if q == "trap":
            delta.append(None)
            default.append(None)
            continue
        row = []
        for c in range(k + 1):
            if c < k:
                r = tuple(rows[j][s][c] for j, s in enumerate(q))
            else:
                r = tuple(d.default[s] for d, s in zip(dfas, q))
            if any(s in dead[j] for j, s in enumerate(r)):
                r = "trap"
            if r not in ids:
                if len(ids) >= state_cap:
                    raise StateBudgetExceeded(f"product exceeds {state_cap} states")
                ids[r] = len(order)
                order.append(r)
                has_trap = has_trap or r == "trap"
            row.append(ids[r])
        delta.append(tuple(row[:-1]))
        default.append(row[-1])
    if has_trap:
        t = ids["trap"]
        delta[t] = (t,) * k
        default[t] = t
    accepting = {
        ids[q] for q in order
        if q != "trap" and all(s in d.accepting for d, s in zip(dfas, q))
    }
    return Dfa(symbols, delta, default, accepting)


def conjoin(dfas: Iterable[Dfa], state_cap: int = DEFAULT_STATE_CAP) -> Dfa:
    """Minimized intersection.

    One joint product rather than a pairwise fold: constraints over shared
    activities restrict each other, so the joint reachable set is usually far
    smaller than the intermediate results of a fold.
    """
    dfas = list(dfas)
    if not dfas:
        return Dfa.universal()
    return minimize(product(dfas, state_cap))


def _reachable(dfa: Dfa) -> list:
    seen = {dfa.initial}
    order = [dfa.initial]
    for s in order:
        for t in dfa.delta[s] + (dfa.default[s],):
            if t not in seen:
                seen.add(t)
                order.append(t)
    return order


def _hopcroft(n: int, cols: list, accepting: set) -> list:
    """Coarsest partition of states 0..n-1 compatible with `cols`; returns block ids."""
    inv = []
    for col in cols:
        pre = [[] for _ in range(n)]
        for s, t in enumerate(col):
            pre[t].append(s)
        inv.append(pre)

    blocks = [b for b in (set(accepting), set(range(n)) - set(accepting)) if b]
    block_of = [0] * n
    for b, members in enumerate(blocks):
        for s in members:
            block_of[s] = b
    work = {min(range(len(blocks)), key=lambda b: len(blocks[b]))} if len(blocks) == 2 else set()

    while work:
        splitter = set(blocks[work.pop()])
        for pre in inv:
            x = set()
            for t in splitter:
                x.update(pre[t])
            if not x:
                continue
            touched = {}
            for s in x:
                touched.setdefault(block_of[s], set()).add(s)
            for b, inside in touched.items():
                if len(inside) == len(blocks[b]):
                    continue
                outside = blocks[b] - inside
                new = len(blocks)
                if len(inside) <= len(outside):
                    blocks[b], moved = outside, inside
                else:
                    blocks[b], moved = inside, outside
                blocks.append(moved)
                for s in moved:
                    block_of[s] = new
                # `moved` is the smaller half, which suffices whether or not b is queued
                work.add(new)
    return block_of


def minimize(dfa: Dfa) -> Dfa:
    """Minimal equivalent Dfa with canonical breadth-first state numbering."""
    reach = _reachable(dfa)
    local = {s: i for i, s in enumerate(reach)}
    cols = [[local[c[s]] for s in reach] for c in dfa.columns()]
    acc = {local[s] for s in reach if s in dfa.accepting}
    block_of = _hopcroft(len(reach), cols, acc)

    rep = {}
    for i, b in enumerate(block_of):
        rep.setdefault(b, i)
    start = block_of[local[dfa.initial]]
    ids = {start: 0}
    order = [start]
    delta, default = [], []
    for b in order:
        s = rep[b]
        row = []
        for col in cols:
            t = block_of[col[s]]
            if t not in ids:
                ids[t] = len(order)
                order.append(t)
            row.append(ids[t])
        delta.append(tuple(row[:-1]))
        default.append(row[-1])
    accepting = {ids[block_of[s]] for s in acc}
    return Dfa(dfa.symbols, delta, default, accepting)


def _fresh_symbol(taken: Iterable) -> str:
    taken = set(taken)
    name = "_other"
    while name in taken:
        name = "_" + name
    return name


def find_counterexample(d1: Dfa, d2: Dfa) -> tuple | None:
    """Shortest trace accepted by exactly one of the automata, or None.

    The search runs over the union of explicit symbols (sorted) plus one
    fresh witness symbol standing for every other activity.
    """
    symbols = sorted(d1.explicit_symbols | d2.explicit_symbols)
    witness = _fresh_symbol(symbols)
    letters = symbols + [witness]
    start = (d1.initial, d2.initial)
    parent = {start: None}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        a, b = q
        if (a in d1.accepting) != (b in d2.accepting):
            trace = []
            while parent[q] is not None:
                q, letter = parent[q]
                trace.append(letter)
            return tuple(reversed(trace))
        for x in letters:
            r = (d1.step(a, x), d2.step(b, x))
            if r not in parent:
                parent[r] = (q, x)
                queue.append(r)
    return None


def equivalent(d1: Dfa, d2: Dfa) -> bool:
    return find_counterexample(d1, d2) is None


def includes(big: Dfa, small: Dfa) -> bool:
    """True iff every trace accepted by `small` is accepted by `big`."""
    return find_counterexample(product([small, big]), small) is None


def shortest_accepted(dfa: Dfa) -> tuple | None:
    """Shortest accepted trace over the explicit symbols (ties broken by symbol order)."""
    parent = {dfa.initial: None}
    queue = deque([dfa.initial])
    while queue:
        q = queue.popleft()
        if q in dfa.accepting:
            trace = []
            while parent[q] is not None:
                q, letter = parent[q]
                trace.append(letter)
            return tuple(reversed(trace))
        for x, r in zip(dfa.symbols, dfa.delta[q]):
            if r not in parent:
                parent[r] = (q, x)
                queue.append(r)
    return None


def enumerate_traces(dfa: Dfa, revisit_bound: int, limit: int | None = None) -> set:
    """All accepted traces whose run visits no state more than ``revisit_bound + 1`` times.

    Only explicit symbols are emitted.  `limit` caps the result size.
    """
    if revisit_bound < 1:
        raise ValueError("revisit_bound must be >= 1")
    live = dfa.live_states()
    result = set()
    if dfa.initial not in live:
        return result
    cap = revisit_bound + 1
    visits = [0] * dfa.n_states
    path = []
    # explicit stack of (state, next symbol index)
    visits[dfa.initial] = 1
    if dfa.initial in dfa.accepting:
        result.add(())
    stack = [(dfa.initial, 0)]
    symbols = dfa.symbols
    while stack:
        s, i = stack[-1]
        if i == len(symbols):
            stack.pop()
            visits[s] -= 1
            if path:
                path.pop()
            continue
        stack[-1] = (s, i + 1)
        t = dfa.delta[s][i]
        if t not in live or visits[t] >= cap:
            continue
        visits[t] += 1
        path.append(symbols[i])
        if t in dfa.accepting:
            result.add(tuple(path))
            if limit is not None and len(result) > limit:
                raise StateBudgetExceeded(f"more than {limit} traces")
        stack.append((t, 0))
    return result


def _quote(s) -> str:
    return '"' + str(s).replace('"', r"\"") + '"'


def to_dot(dfa: Dfa, hide_trap: bool = True, name: str = "dfa") -> str:
    """Graphviz text.  Default arcs are drawn as negations (``!{..}``) or ``*``."""
    traps = dfa.trap_states() if hide_trap else set()
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;"]
    for s in dfa.states:
        if s in traps:
            continue
        attrs = ["shape=doublecircle" if s in dfa.accepting else "shape=circle"]
        if s == dfa.initial:
            attrs.append("style=bold")
        lines.append(f"  s{s} [{', '.join(attrs)}];")
    for s in dfa.states:
        if s in traps:
            continue
        d = dfa.default[s]
        by_target = {}
        for a, t in zip(dfa.symbols, dfa.delta[s]):
            if t != d:
                by_target.setdefault(t, []).append(a)
        if d not in traps:
            outside = sorted(a for t, syms in by_target.items() for a in syms)
            label = "*" if not outside else "!{" + ",".join(outside) + "}"
            lines.append(f"  s{s} -> s{d} [label={_quote(label)}];")
        for t in sorted(by_target):
            if t in traps:
                continue
            lines.append(f"  s{s} -> s{t} [label={_quote(','.join(by_target[t]))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
