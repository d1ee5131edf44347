"""Declare templates: compilation to automata and per-trace evaluation."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .automata import Dfa, minimize


class Template(enum.Enum):
    EXISTENCE = "Existence"
    ABSENCE = "Absence"
    EXACTLY = "Exactly"
    INIT = "Init"
    RESPONSE = "Response"
    PRECEDENCE = "Precedence"
    SUCCESSION = "Succession"
    ALTERNATE_RESPONSE = "AlternateResponse"
    ALTERNATE_PRECEDENCE = "AlternatePrecedence"
    ALTERNATE_SUCCESSION = "AlternateSuccession"
    CO_EXISTENCE = "CoExistence"
    NOT_CO_EXISTENCE = "NotCoExistence"
    NOT_SUCCESSION = "NotSuccession"
    NOT_CHAIN_SUCCESSION = "NotChainSuccession"
    INTERPOSITION = "Interposition"
    BALANCED_ENABLEMENT = "BalancedEnablement"
    # parsed and stored, but not compiled: they constrain what may sit
    # between two activities, so they do not compose by projection
    CHAIN_RESPONSE = "ChainResponse"
    CHAIN_PRECEDENCE = "ChainPrecedence"
    CHAIN_SUCCESSION = "ChainSuccession"

    @property
    def arity(self) -> int:
        if self in UNARY:
            return 1
        if self in TERNARY:
            return 3
        return 2

    @property
    def counted(self) -> bool:
        return self in (Template.EXISTENCE, Template.ABSENCE, Template.EXACTLY)


T = Template
UNARY = frozenset({T.EXISTENCE, T.ABSENCE, T.EXACTLY, T.INIT})
TERNARY = frozenset({T.INTERPOSITION, T.BALANCED_ENABLEMENT})
CHAIN = frozenset({T.CHAIN_RESPONSE, T.CHAIN_PRECEDENCE, T.CHAIN_SUCCESSION})
COMPILABLE = frozenset(Template) - CHAIN
# templates whose default arcs are not self-loops: a foreign activity can
# change the outcome, so projection must not hide it
OPAQUE = frozenset({T.NOT_CHAIN_SUCCESSION, T.INIT}) | CHAIN

_FIRST = frozenset({T.RESPONSE, T.ALTERNATE_RESPONSE, T.NOT_SUCCESSION, T.NOT_CHAIN_SUCCESSION, T.INTERPOSITION})
_SECOND = frozenset({T.PRECEDENCE, T.ALTERNATE_PRECEDENCE})
_EITHER = frozenset({T.SUCCESSION, T.ALTERNATE_SUCCESSION, T.CO_EXISTENCE, T.NOT_CO_EXISTENCE})


class UnsupportedTemplate(ValueError):
    pass


class MalformedConstraint(ValueError):
    pass


@dataclass(frozen=True)
class Constraint:
    template: Template
    args: tuple
    n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        t = self.template
        if not isinstance(t, Template):
            raise MalformedConstraint(f"unknown template {t!r}")
        if len(self.args) != t.arity:
            raise MalformedConstraint(f"{t.value} takes {t.arity} argument(s), got {len(self.args)}")
        if t.counted:
            if self.n is None:
                object.__setattr__(self, "n", 1)
            if self.n < 1:
                raise MalformedConstraint(f"{t.value} needs n >= 1")
        elif self.n is not None:
            raise MalformedConstraint(f"{t.value} takes no count")
        if t.arity > 1 and t is not T.NOT_CHAIN_SUCCESSION and len(set(self.args)) != len(self.args):
            raise MalformedConstraint(f"{t.value} needs distinct arguments")

    def __str__(self):
        count = str(self.n) if self.template.counted else ""
        return f"{self.template.value}{count}[{','.join(self.args)}]"

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def sort_key(self):
        return (self.template.value, self.n or 0, self.args)

    @property
    def activities(self) -> frozenset:
        return frozenset(self.args)

    @property
    def activation_symbols(self) -> frozenset:
        """Activities whose occurrences activate the constraint (None = every event)."""
        t, a = self.template, self.args
        if t in _FIRST:
            return frozenset(a[:1])
        if t in _SECOND:
            return frozenset(a[1:2])
        if t in _EITHER or t is T.BALANCED_ENABLEMENT:
            return frozenset(a)
        if t in UNARY:
            return None
        return frozenset(a[:1])


_SYNTAX = re.compile(r"^\s*([A-Za-z]+?)(\d*)\s*\[(.*)\]\s*$")
_BY_NAME = {t.value: t for t in Template}


def parse_constraint(text: str) -> Constraint:
    """Parse ``Template[A,B]`` / ``Existence3[A]``."""
    m = _SYNTAX.match(text)
    if not m:
        raise MalformedConstraint(f"cannot parse constraint {text!r}")
    name, count, body = m.groups()
    template = _BY_NAME.get(name)
    if template is None:
        raise MalformedConstraint(f"unknown template {name!r}")
    if count and not template.counted:
        raise MalformedConstraint(f"{name} takes no count")
    args = tuple(a.strip() for a in body.split(","))
    if any(not a for a in args):
        raise MalformedConstraint(f"empty argument in {text!r}")
    return Constraint(template, args, int(count) if count else None)


DEAD = "dead"


def _machine(c: Constraint):
    """(initial, step, accept) for the template's state machine.

    ``step(q, x)`` receives ``x=None`` for any activity not among the arguments.
    """
    t = c.template
    if t in UNARY:
        (a,) = c.args
        n = c.n
        if t is T.INIT:
            def step(q, x):
                if q == "start":
                    return "ok" if x == a else DEAD
                return q
            return "start", step, lambda q: q == "ok"
        if t is T.EXISTENCE:
            return 0, (lambda q, x: min(q + 1, n) if x == a else q), (lambda q: q >= n)
        if t is T.ABSENCE:
            def step(q, x):
                if q == DEAD or x != a:
                    return q
                return DEAD if q + 1 >= n else q + 1
            return 0, step, lambda q: q != DEAD
        def step(q, x):
            if q == DEAD or x != a:
                return q
            return DEAD if q + 1 > n else q + 1
        return 0, step, lambda q: q == n

    if t in TERNARY:
        a, b, x3 = c.args
        if t is T.INTERPOSITION:
            def step(q, x):
                if q == DEAD:
                    return q
                if x == a:
                    return True
                if x == b:
                    return False
                if x == x3 and q:
                    return DEAD
                return q
            return False, step, lambda q: q is False
        def step(q, x):
            if q == DEAD:
                return q
            if x == a:
                return q + 1 if q < 1 else DEAD
            if x == b:
                return q - 1 if q > -1 else DEAD
            if x == x3 and q != 0:
                return DEAD
            return q
        return 0, step, lambda q: q == 0

    a, b = c.args
    if t is T.RESPONSE:
        return False, (lambda q, x: True if x == a else False if x == b else q), (lambda q: not q)
    if t is T.PRECEDENCE:
        def step(q, x):
            if q == DEAD:
                return q
            if x == a:
                return 1
            if x == b and q == 0:
                return DEAD
            return q
        return 0, step, lambda q: q != DEAD
    if t is T.SUCCESSION:
        def step(q, x):
            if q == DEAD:
                return q
            seen, pending = q
            if x == a:
                return (True, True)
            if x == b:
                return (True, False) if seen else DEAD
            return q
        return (False, False), step, lambda q: q != DEAD and not q[1]
    if t is T.ALTERNATE_RESPONSE:
        def step(q, x):
            if q == DEAD:
                return q
            if x == a:
                return DEAD if q else True
            if x == b:
                return False
            return q
        return False, step, lambda q: q is False
    if t is T.ALTERNATE_PRECEDENCE:
        def step(q, x):
            if q == DEAD:
                return q
            if x == a:
                return True
            if x == b:
                return False if q else DEAD
            return q
        return False, step, lambda q: q != DEAD
    if t is T.ALTERNATE_SUCCESSION:
        def step(q, x):
            if q == DEAD:
                return q
            if x == a:
                return DEAD if q else True
            if x == b:
                return False if q else DEAD
            return q
        return False, step, lambda q: q is False
    if t is T.CO_EXISTENCE:
        def step(q, x):
            return (q[0] or x == a, q[1] or x == b)
        return (False, False), step, lambda q: q[0] == q[1]
    if t is T.NOT_CO_EXISTENCE:
        def step(q, x):
            if q == DEAD:
                return q
            r = (q[0] or x == a, q[1] or x == b)
            return DEAD if all(r) else r
        return (False, False), step, lambda q: q != DEAD
    if t is T.NOT_SUCCESSION:
        def step(q, x):
            if q == DEAD:
                return q
            if x == a:
                return True
            if x == b and q:
                return DEAD
            return q
        return False, step, lambda q: q != DEAD
    if t is T.NOT_CHAIN_SUCCESSION:
        def step(q, x):
            if q == DEAD:
                return q
            if x == b and q:
                return DEAD
            return x == a
        return False, step, lambda q: q != DEAD
    raise UnsupportedTemplate(f"{t.value} cannot be compiled")


@lru_cache(maxsize=None)
def compile_constraint(c: Constraint) -> Dfa:
    """Minimal Dfa of `c` over its own arguments plus the default letter."""
    initial, step, accept = _machine(c)
    return minimize(Dfa.from_step(c.args, initial, step, accept))


class Status(enum.Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    VACUOUSLY_SATISFIED = "vacuously satisfied"


@dataclass(frozen=True)
class EvaluationResult:
    status: Status
    activations: int

    @property
    def satisfied(self) -> bool:
        return self.status is not Status.VIOLATED


def count_activations(c: Constraint, trace: Sequence) -> int:
    acts = c.activation_symbols
    if acts is None:
        return len(trace)
    return sum(1 for x in trace if x in acts)


def evaluate(c: Constraint, trace: Sequence) -> EvaluationResult:
    activations = count_activations(c, trace)
    if not compile_constraint(c).accepts(trace):
        return EvaluationResult(Status.VIOLATED, activations)
    if activations == 0:
        return EvaluationResult(Status.VACUOUSLY_SATISFIED, 0)
    return EvaluationResult(Status.SATISFIED, activations)
