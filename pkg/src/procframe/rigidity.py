"""Pockets of rigidity: rewrite parts of a mined Declare model as Petri-net fragments.

Detection reads relative activity cardinalities off the mined constraints,
proposes block-structured fragments (sequence, parallel, exclusive and
inclusive choice in four cardinality variants), synthesizes a net for each
and keeps a fragment only if the resulting frame is still language
equivalent to the mined model.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace

from .automata import DEFAULT_STATE_CAP, Dfa, conjoin, find_counterexample, includes, product, shortest_accepted
from .core import EventLog
from .declare import Constraint, Template
from .frame import ProcessFrame, Specification, global_dfa, spec_dfa
from .miner import MinedModel, mined_dfa
from .petri import PetriNet

T = Template


class Card(enum.Enum):
    """Relative cardinality classes, most specific first."""

    ONE = "1..1"
    ZERO_ONE = "0..1"
    ONE_MANY = "1..n"
    ZERO_MANY = "0..n"

    @property
    def rank(self) -> int:
        return list(Card).index(self)

    @property
    def optional(self) -> bool:
        return self.value.startswith("0")

    @property
    def repeatable(self) -> bool:
        return self.value.endswith("n")


# (templates that must all hold, outgoing class, incoming class)
TABLE = (
    (frozenset({T.ALTERNATE_SUCCESSION}), Card.ONE, Card.ONE),
    (frozenset({T.SUCCESSION, T.ALTERNATE_RESPONSE}), Card.ONE_MANY, None),
    (frozenset({T.SUCCESSION, T.ALTERNATE_PRECEDENCE}), None, Card.ONE_MANY),
    (frozenset({T.ALTERNATE_PRECEDENCE}), Card.ZERO_ONE, Card.ONE_MANY),
    (frozenset({T.ALTERNATE_RESPONSE}), Card.ONE_MANY, Card.ZERO_ONE),
    (frozenset({T.PRECEDENCE}), Card.ZERO_MANY, None),
    (frozenset({T.RESPONSE}), None, Card.ZERO_MANY),
)


def classify(templates) -> tuple:
    """(outgoing, incoming) classes implied by the templates holding for one pair."""
    templates = set(templates)
    out = inc = None
    for needed, o, i in TABLE:
        if needed <= templates:
            if o is not None and (out is None or o.rank < out.rank):
                out = o
            if i is not None and (inc is None or i.rank < inc.rank):
                inc = i
    return out, inc


@dataclass(frozen=True)
class CardinalityProfile:
    outgoing: dict
    incoming: dict

    def out(self, a, b) -> Card | None:
        return self.outgoing.get((a, b))

    def inc(self, a, b) -> Card | None:
        return self.incoming.get((a, b))

    def same_cardinality(self, a, b) -> bool:
        return self.out(a, b) is Card.ONE and self.inc(a, b) is Card.ONE


def cardinality_profile(model: MinedModel) -> CardinalityProfile:
    held = {}
    for c in model.constraints:
        if c.template.arity == 2 and c.args[0] != c.args[1]:
            held.setdefault(c.args, set()).add(c.template)
    out, inc = {}, {}
    for pair, templates in held.items():
        o, i = classify(templates)
        if o is not None:
            out[pair] = o
        if i is not None:
            inc[pair] = i
    return CardinalityProfile(out, inc)


class Construct(enum.Enum):
    SEQUENCE = "Sequence"
    PARALLEL = "Parallel"
    XOR = "Xor"
    OR = "Or"


class Variant(enum.Enum):
    MANDATORY = "Mandatory"
    OPTIONAL = "Optional"
    MANDATORY_REPEATABLE = "MandatoryRepeatable"
    OPTIONAL_REPEATABLE = "OptionalRepeatable"

    @classmethod
    def of(cls, optional: bool, repeatable: bool) -> "Variant":
        return {
            (False, False): cls.MANDATORY,
            (True, False): cls.OPTIONAL,
            (False, True): cls.MANDATORY_REPEATABLE,
            (True, True): cls.OPTIONAL_REPEATABLE,
        }[optional, repeatable]

    @property
    def optional(self) -> bool:
        return self in (Variant.OPTIONAL, Variant.OPTIONAL_REPEATABLE)

    @property
    def repeatable(self) -> bool:
        return self in (Variant.MANDATORY_REPEATABLE, Variant.OPTIONAL_REPEATABLE)


@dataclass(frozen=True)
class DetectedFragment:
    """A block between a predecessor chain and a follower chain.

    The groups are ordered tuples; every branch is a sequence of activities.
    """

    construct: Construct
    variant: Variant
    predecessor_group: tuple
    body_branches: tuple
    follower_group: tuple
    consumed: frozenset = frozenset()
    net: PetriNet | None = field(default=None, compare=False)
    approximate: bool = False
    counterexample: tuple | None = None

    @property
    def activities(self) -> frozenset:
        return frozenset(self.predecessor_group) | frozenset(self.follower_group) | frozenset(
            a for b in self.body_branches for a in b)

    @property
    def name(self) -> str:
        body = "|".join(",".join(b) for b in self.body_branches)
        return f"{self.construct.value}{self.variant.value}[{body}]"

    def sort_key(self):
        return (-len(self.activities), sorted(self.activities), self.construct.value)


def synthesize_net(fragment: DetectedFragment, closed: bool = True) -> PetriNet:
    """Net for the fragment, using silent skip (optional) and loop-back (repeatable) transitions.

    The open form is a workflow net from ``src`` to ``sink``.  The closed
    form, used inside frames, lets the follower chain return to ``src``,
    which is then both initial and final: the fragment's activities may
    recur as a whole, as they do under an enclosing loop.
    """
    moves = []  # (id, label, inputs, outputs)

    def chain(acts, start, tag, end=None):
        """Activities in order from `start`; returns the place reached."""
        places = [start] + [f"{tag}_{i}" for i in range(1, len(acts) + 1)]
        if acts and end is not None:
            places[-1] = end
        for i, a in enumerate(acts):
            moves.append((f"t_{a}", a, [places[i]], [places[i + 1]]))
        return places[-1]

    split = chain(fragment.predecessor_group, "src", "pre", "split")
    join = "join"
    branches = fragment.body_branches
    c = fragment.construct
    if c is Construct.SEQUENCE:
        chain(branches[0], split, "body", join)
    elif c is Construct.XOR:
        for k, b in enumerate(branches):
            chain(b, split, f"x{k}", join)
    elif c is Construct.PARALLEL:
        starts = [f"b{k}_in" for k in range(len(branches))]
        ends = [f"b{k}_out" for k in range(len(branches))]
        moves.append(("tau_and_split", None, [split], starts))
        moves.append(("tau_and_join", None, ends, [join]))
        for k, b in enumerate(branches):
            chain(b, starts[k], f"b{k}", ends[k])
    else:
        ks = range(len(branches))
        for r in range(1, len(branches) + 1):
            for chosen in itertools.combinations(ks, r):
                outs = [f"b{k}_in" if k in chosen else f"b{k}_out" for k in ks]
                tag = "_".join(str(k) for k in chosen)
                moves.append((f"tau_or_split_{tag}", None, [split], outs))
        moves.append(("tau_or_join", None, [f"b{k}_out" for k in ks], [join]))
        for k, b in enumerate(branches):
            chain(b, f"b{k}_in", f"b{k}", f"b{k}_out")
    if fragment.variant.optional:
        moves.append(("tau_skip", None, [split], [join]))
    if fragment.variant.repeatable:
        moves.append(("tau_loop", None, [join], [split]))
    sink = "src" if closed else "sink"
    if fragment.follower_group:
        chain(fragment.follower_group, join, "post", sink)
    elif closed:
        moves.append(("tau_end", None, [join], [sink]))
    else:
        sink = join

    places, arcs, trans = set(), set(), {}
    for tid, label, ins, outs in moves:
        trans[tid] = label
        for p in ins:
            places.add(p)
            arcs.add((p, tid))
        for p in outs:
            places.add(p)
            arcs.add((tid, p))
    return PetriNet(places, trans, arcs, ["src"], [[sink]], name=fragment.name)


def _with_net(fragment: DetectedFragment) -> DetectedFragment:
    return replace(fragment, net=synthesize_net(fragment))


def mutate(fragment: DetectedFragment, variant: Variant) -> DetectedFragment:
    """Same fragment and consumed set, different variant and re-synthesized net."""
    return _with_net(replace(fragment, variant=variant, approximate=False, counterexample=None))


@dataclass(frozen=True)
class FrameRewrite:
    fragments: tuple  # accepted fragments first, then approximate ones
    residual: frozenset
    frame: ProcessFrame
    rejected: tuple = ()  # candidates rolled back by validation

    @property
    def accepted(self) -> tuple:
        return tuple(f for f in self.fragments if not f.approximate)


def build_frame(fragments, residual, alphabet) -> ProcessFrame:
    specs = [Specification(f"fragment{i}", f.net) for i, f in enumerate(fragments, 1)]
    if residual or not specs:
        specs.append(Specification("residual", frozenset(residual), frozenset(alphabet)))
    return ProcessFrame(tuple(specs))


def validate_rewrite(frame: ProcessFrame, reference: Dfa, state_cap: int = DEFAULT_STATE_CAP):
    """True when the frame's language equals `reference`, else a shortest counterexample."""
    ce = find_counterexample(global_dfa(frame, state_cap), reference)
    return True if ce is None else ce


class _Relations:
    """Lookups on the mined constraint set."""

    def __init__(self, model: MinedModel, activities):
        self.held = model.constraints
        self.activities = activities

    def has(self, template, *args) -> bool:
        if len(set(args)) != len(args) and template is not T.NOT_CHAIN_SUCCESSION:
            return False
        return Constraint(template, args) in self.held


def _blocks(acts, related):
    """Connected components of a symmetric relation, in sorted order."""
    parent = {a: a for a in acts}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in itertools.permutations(acts, 2):
        if related(a, b):
            parent[find(a)] = find(b)
    groups = {}
    for a in acts:
        groups.setdefault(find(a), []).append(a)
    return sorted((tuple(sorted(g)) for g in groups.values()), key=lambda g: g)


def _as_chain(block, less):
    """The block as a tuple in order if `less` orders it totally, else None."""
    ranked = sorted(block, key=lambda a: sum(less(b, a) for b in block))
    if all(less(x, y) for x, y in itertools.combinations(ranked, 2)):
        return tuple(ranked)
    return None


def _mandatory_candidates(block, less):
    """Sequence or parallel shapes read directly off a 1..1 block."""
    chain = _as_chain(block, less)
    if chain is not None:
        if len(chain) >= 3:
            yield DetectedFragment(Construct.SEQUENCE, Variant.MANDATORY, chain[:1], (chain[1:-1],), chain[-1:])
        return
    comparable = lambda a, b: less(a, b) or less(b, a)
    core = [a for a in block if all(a == b or comparable(a, b) for b in block)]
    middle = [a for a in block if a not in core]
    prefix = _as_chain([a for a in core if all(less(a, m) for m in middle)], less)
    suffix = _as_chain([a for a in core if all(less(m, a) for m in middle)], less)
    if not prefix or not suffix or len(prefix) + len(suffix) != len(core):
        return
    branches = []
    for group in _blocks(middle, comparable):
        ch = _as_chain(group, less)
        if ch is None:
            return
        branches.append(ch)
    if len(branches) >= 2:
        yield DetectedFragment(Construct.PARALLEL, Variant.MANDATORY, prefix, tuple(branches), suffix)


def _classify_branches(branches, p, f, rel: _Relations):
    if len(branches) == 1:
        return Construct.SEQUENCE
    pairs = [(x, y) for x, y in itertools.permutations(branches, 2)]
    if all(any(rel.has(T.BALANCED_ENABLEMENT, a, b, z) for z in rel.activities if z not in (a, b))
           for x, y in pairs for a in x for b in y):
        return Construct.PARALLEL
    # choices: no step from one branch straight into another, except
    # possibly last-to-first when the choice repeats
    if all(rel.has(T.NOT_CHAIN_SUCCESSION, a, b) or (a == x[-1] and b == y[0])
           for x, y in pairs for a in x for b in y):
        return Construct.XOR
    if all(len(b) < 2 or rel.has(T.INTERPOSITION, b[0], b[-1], f) for b in branches):
        return Construct.OR
    return None


def _nested_candidates(segments, acts, rel: _Relations, profile: CardinalityProfile):
    """Fragments whose branches sit between a shared predecessor and follower."""
    anchored = {}
    for seg in segments:
        first, last = seg[0], seg[-1]
        preds = [p for p in acts if p not in seg
                 and rel.has(T.PRECEDENCE, p, first) and not rel.has(T.NOT_CHAIN_SUCCESSION, p, first)]
        follows = [f for f in acts if f not in seg
                   and rel.has(T.RESPONSE, last, f) and not rel.has(T.NOT_CHAIN_SUCCESSION, last, f)]
        if len(preds) == 1 and len(follows) == 1 and preds[0] != follows[0]:
            anchored.setdefault((preds[0], follows[0]), []).append(seg)
    for (p, f), branches in sorted(anchored.items()):
        branches = tuple(sorted(branches))
        construct = _classify_branches(branches, p, f, rel)
        if construct is None:
            continue
        cards = {profile.out(p, b[0]) for b in branches}
        if None in cards:
            continue
        repeatable = any(c.repeatable for c in cards)
        optional = not rel.has(T.NOT_CHAIN_SUCCESSION, p, f)
        yield DetectedFragment(construct, Variant.of(optional, repeatable), (p,), branches, (f,))


def candidates(model: MinedModel) -> list:
    """Unvalidated fragment proposals, in canonical order."""
    acts = sorted(model.alphabet - {model.start})
    profile = cardinality_profile(model)
    rel = _Relations(model, acts)
    less = profile.same_cardinality
    related = lambda a, b: less(a, b) or less(b, a)
    found = []
    segments = []
    for block in _blocks(acts, related):
        found.extend(_mandatory_candidates(block, less))
        chain = _as_chain(block, less)
        if chain is not None:
            segments.append(chain)
    found.extend(_nested_candidates(segments, acts, rel, profile))
    unique = {(f.construct, f.variant, f.predecessor_group, f.body_branches, f.follower_group): f for f in found}
    return sorted(unique.values(), key=DetectedFragment.sort_key)


def implied_by(net_dfa: Dfa, c: Constraint, alphabet) -> bool:
    return includes(spec_dfa(Specification(str(c), frozenset([c]), alphabet)), net_dfa)


def _recurrence_monitor(branches, follower) -> Dfa:
    """Accepts once some branch's first activity occurs twice strictly inside
    another branch's window (from its first activity to its completion)."""
    firsts = [b[0] for b in branches]
    lasts = [b[-1] for b in branches]
    symbols = tuple(sorted(set(firsts) | set(lasts) | set(follower)))
    n = len(branches)
    pairs = [(x, y) for x in range(n) for y in range(n) if x != y]

    def step(q, a):
        if q == "hit":
            return q
        q = dict(q)
        for x, y in pairs:
            phase = q[x, y]
            if a in follower:
                phase = 0
            elif a == lasts[y] and phase:
                phase = 0
            elif a == firsts[x] and phase:
                phase += 1
            elif a == firsts[y] and not phase:
                phase = 1
            if phase == 3:
                return "hit"
            q[x, y] = phase
        return tuple(sorted(q.items()))

    init = tuple(sorted(((x, y), 0) for x, y in pairs))
    return Dfa.from_step(symbols, init, step, lambda q: q == "hit")


def recurrence_witness(reference: Dfa, fragment: DetectedFragment, state_cap: int = DEFAULT_STATE_CAP):
    """Shortest trace accepted by `reference` in which a branch restarts twice
    while another activated branch is still incomplete, or None."""
    monitor = _recurrence_monitor(fragment.body_branches, fragment.follower_group)
    return shortest_accepted(product([reference, monitor], state_cap))


def log_shows_recurrence(log: EventLog, fragment: DetectedFragment) -> bool:
    monitor = _recurrence_monitor(fragment.body_branches, fragment.follower_group)
    return any(monitor.accepts(t) for t in log.traces)


def _redundant_given(fragments, residual, touching, alphabet, state_cap) -> frozenset:
    """Residual constraints over `touching` activities that the frame no longer needs.

    Greedy in sorted order; each removal is checked against the remaining
    frame, so dropping the whole returned set keeps the language unchanged.
    """
    alphabet = frozenset(alphabet)
    nets = [spec_dfa(Specification(f.name, f.net), state_cap) for f in fragments]
    own = {c: spec_dfa(Specification(str(c), frozenset([c]), alphabet), state_cap) for c in residual}
    keep = set(residual)
    dropped = set()
    for c in sorted(residual):
        if c.activities.isdisjoint(touching):
            continue
        rest = nets + [own[o] for o in sorted(keep - {c})]
        if includes(own[c], conjoin(rest, state_cap)):
            keep.discard(c)
            dropped.add(c)
    return frozenset(dropped)


def detect(model: MinedModel, log: EventLog | None = None, state_cap: int = DEFAULT_STATE_CAP) -> FrameRewrite:
    """Rewrite as much of `model` as validation allows into net fragments.

    `log`, when given, must be the log the model was mined from; it backs the
    extra check on repeatable inclusive choices.
    """
    if log is not None:
        alphabet = log.alphabet | ({model.start} if model.start else set())
        if alphabet != model.alphabet:
            raise ValueError("model and log alphabets differ")
    reference = mined_dfa(model, state_cap)
    available = set(model.constraints)
    accepted, approximate, rejected = [], [], []
    for cand in candidates(model):
        frag = _with_net(cand)
        net_dfa = spec_dfa(Specification(frag.name, frag.net), state_cap)
        consumed = frozenset(c for c in available
                             if c.activities <= frag.activities and implied_by(net_dfa, c, frag.activities))
        if not consumed:
            continue
        frag = replace(frag, consumed=consumed)
        trial = build_frame(accepted + [frag], available - consumed, model.alphabet)
        verdict = validate_rewrite(trial, reference, state_cap)
        if frag.construct is Construct.OR and frag.variant.repeatable:
            witness = recurrence_witness(reference, frag, state_cap)
            in_log = log is not None and log_shows_recurrence(log, frag)
            if verdict is not True or (witness is not None and not in_log):
                ce = witness if witness is not None else verdict
                approximate.append(replace(frag, approximate=True, counterexample=ce))
                continue
        if verdict is True:
            absorbed = _redundant_given(accepted + [frag], available - consumed, frag.activities,
                                        model.alphabet, state_cap)
            frag = replace(frag, consumed=consumed | absorbed)
            accepted.append(frag)
            available -= frag.consumed
        else:
            rejected.append(replace(frag, counterexample=verdict))
    residual = frozenset(available)
    frame = build_frame(accepted, residual, model.alphabet)
    return FrameRewrite(tuple(accepted + approximate), residual, frame, tuple(rejected))


def rewrite_with(rewrite: FrameRewrite, old: DetectedFragment, new: DetectedFragment, alphabet) -> ProcessFrame:
    """The rewrite's frame with one accepted fragment swapped for another."""
    frags = [new if f is old else f for f in rewrite.accepted]
    return build_frame(frags, rewrite.residual, alphabet)
