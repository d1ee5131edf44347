"""Declare discovery at 100% support, without vacuity detection or pruning.

A candidate constraint is kept iff no trace violates it and at least one
trace activates it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .automata import DEFAULT_STATE_CAP, Dfa, conjoin, embed
from .core import START, EventLog, prepend_start
from .declare import TERNARY, UNARY, Constraint, Template, compile_constraint

T = Template

DEFAULT_TEMPLATES = frozenset({
    T.ALTERNATE_SUCCESSION,
    T.SUCCESSION,
    T.ALTERNATE_RESPONSE,
    T.ALTERNATE_PRECEDENCE,
    T.PRECEDENCE,
    T.RESPONSE,
    T.NOT_CHAIN_SUCCESSION,
    T.INTERPOSITION,
    T.BALANCED_ENABLEMENT,
})


class EmptyLog(ValueError):
    pass


@dataclass(frozen=True)
class MinerConfig:
    templates: frozenset = DEFAULT_TEMPLATES
    support_threshold: float = 1.0
    include_start: bool = False
    start: str = START
    ternary_enabled: bool = True
    max_count: int = 3  # largest n tried for Existence/Absence/Exactly

    def __post_init__(self):
        object.__setattr__(self, "templates", frozenset(self.templates))
        if self.support_threshold != 1.0:
            raise ValueError("only a support threshold of 1.0 is supported")
        unknown = [t for t in self.templates if t.value.startswith("Chain")]
        if unknown:
            raise ValueError(f"templates {[t.value for t in unknown]} cannot be mined")


@dataclass(frozen=True)
class MinedModel:
    constraints: frozenset
    alphabet: frozenset
    # constraint -> (satisfying traces, activating traces), with multiplicity
    provenance: dict = field(default_factory=dict, compare=False, hash=False)
    start: str | None = None  # artificial start activity, when one was prepended

    def sorted(self) -> list:
        return sorted(self.constraints)

    def count(self, template: Template) -> int:
        return sum(1 for c in self.constraints if c.template is template)

    def __contains__(self, c):
        return c in self.constraints


class _EncodedLog:
    """Unique traces as a padded integer matrix plus per-symbol occurrence counts."""

    def __init__(self, log: EventLog):
        uniq = {}
        for t in log.traces:
            uniq[t] = uniq.get(t, 0) + 1
        self.traces = list(uniq)
        self.weights = np.array(list(uniq.values()), dtype=np.int64)
        self.symbols = sorted(log.alphabet)
        self.index = {a: i for i, a in enumerate(self.symbols)}
        m = len(self.symbols)
        width = max((len(t) for t in self.traces), default=0)
        self.matrix = np.full((len(self.traces), width), m, dtype=np.int64)
        for r, t in enumerate(self.traces):
            self.matrix[r, : len(t)] = [self.index[a] for a in t]
        self.counts = np.zeros((len(self.traces), m + 1), dtype=np.int64)
        for j in range(m):
            self.counts[:, j] = (self.matrix == j).sum(axis=1)
        self.lengths = np.array([len(t) for t in self.traces], dtype=np.int64)
        self.pad = m

    def table(self, dfa: Dfa) -> np.ndarray:
        tab = np.empty((dfa.n_states, self.pad + 1), dtype=np.int64)
        for s in dfa.states:
            for a, j in self.index.items():
                tab[s, j] = dfa.step(s, a)
            tab[s, self.pad] = s
        return tab

    def check(self, c: Constraint):
        """(satisfying weight, activating weight), or None when some trace violates `c`."""
        dfa = compile_constraint(c)
        tab = self.table(dfa)
        dead = np.zeros(dfa.n_states, dtype=bool)
        dead[list(dfa.trap_states())] = True
        accepting = np.zeros(dfa.n_states, dtype=bool)
        accepting[list(dfa.accepting)] = True
        state = np.full(len(self.traces), dfa.initial, dtype=np.int64)
        for col in range(self.matrix.shape[1]):
            state = tab[state, self.matrix[:, col]]
            if dead[state].any():
                return None
        if not accepting[state].all():
            return None
        acts = c.activation_symbols
        if acts is None:
            activations = self.lengths
        else:
            cols = [self.index[a] for a in acts if a in self.index]
            activations = self.counts[:, cols].sum(axis=1)
        activating = int(self.weights[activations > 0].sum())
        if activating == 0:
            return None
        return int(self.weights.sum()), activating


def candidates(alphabet, cfg: MinerConfig):
    acts = sorted(alphabet)
    for t in sorted(cfg.templates, key=lambda t: t.value):
        if t in UNARY:
            for a in acts:
                if t is T.INIT:
                    yield Constraint(t, (a,))
                else:
                    for n in range(1, cfg.max_count + 1):
                        yield Constraint(t, (a,), n)
        elif t in TERNARY:
            if cfg.ternary_enabled:
                for args in itertools.permutations(acts, 3):
                    yield Constraint(t, args)
        else:
            for args in itertools.permutations(acts, 2):
                yield Constraint(t, args)
            if t is T.NOT_CHAIN_SUCCESSION:
                for a in acts:
                    yield Constraint(t, (a, a))


def mine(log: EventLog, cfg: MinerConfig = MinerConfig()) -> MinedModel:
    if len(log) == 0:
        raise EmptyLog("cannot mine an empty log")
    if cfg.include_start:
        log = prepend_start(log, cfg.start)
    enc = _EncodedLog(log)
    found = {}
    for c in candidates(log.alphabet, cfg):
        res = enc.check(c)
        if res is not None:
            found[c] = res
    start = cfg.start if cfg.include_start else None
    return MinedModel(frozenset(found), log.alphabet, found, start)


def mined_dfa(model: MinedModel, state_cap: int = DEFAULT_STATE_CAP) -> Dfa:
    """Minimal automaton of the conjunction of the mined constraints."""
    dfa = conjoin((compile_constraint(c) for c in model.sorted()), state_cap)
    return embed(dfa, model.alphabet | dfa.explicit_symbols)
