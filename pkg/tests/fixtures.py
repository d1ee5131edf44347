"""Hand-built reference nets used across the test suite.

Every block-structured net runs inside an outer loop: a home place ``p0``
is both initial and final, ``A`` opens an iteration and ``D`` closes it.
Silent transition 1 skips the construct body and silent transition 2 loops
back to its start, so removing neither, one or both gives the four variants.
"""

from procframe.petri import PetriNet

VARIANTS = ("mandatory", "optional", "mandatory_repeatable", "optional_repeatable")


def build(name, moves, initial=("p0",), final=(("p0",),)):
    """`moves` is a list of (transition id, label or None, inputs, outputs)."""
    places, arcs, trans = set(), set(), {}
    for tid, label, ins, outs in moves:
        trans[tid] = label
        for p in ins:
            places.add(p)
            arcs.add((p, tid))
        for p in outs:
            places.add(p)
            arcs.add((tid, p))
    return PetriNet(places, trans, arcs, initial, final, name=name)


def _variant_moves(variant):
    extra = []
    if variant in ("optional", "optional_repeatable"):
        extra.append(("skip", None, ["p1"], ["p2"]))
    if variant in ("mandatory_repeatable", "optional_repeatable"):
        extra.append(("loop", None, ["p2"], ["p1"]))
    return extra


def _outer():
    return [("tA", "A", ["p0"], ["p1"]), ("tD", "D", ["p2"], ["p0"])]


def sequence(variant):
    body = [("tB", "B", ["p1"], ["pb"]), ("tC", "C", ["pb"], ["p2"])]
    return build(f"sequence_{variant}", _outer() + body + _variant_moves(variant))


def parallel(variant):
    body = [
        ("split", None, ["p1"], ["b0", "c0"]),
        ("tB1", "B1", ["b0"], ["b1"]),
        ("tB2", "B2", ["b1"], ["b2"]),
        ("tC1", "C1", ["c0"], ["c1"]),
        ("tC2", "C2", ["c1"], ["c2"]),
        ("join", None, ["b2", "c2"], ["p2"]),
    ]
    return build(f"parallel_{variant}", _outer() + body + _variant_moves(variant))


def xor(variant):
    body = [
        ("tB1", "B1", ["p1"], ["pb"]),
        ("tB2", "B2", ["pb"], ["p2"]),
        ("tC1", "C1", ["p1"], ["pc"]),
        ("tC2", "C2", ["pc"], ["p2"]),
    ]
    return build(f"xor_{variant}", _outer() + body + _variant_moves(variant))


def inclusive(variant):
    # the three silent splits choose both branches, only B, or only C;
    # an unchosen branch gets its done-token directly
    body = [
        ("split_bc", None, ["p1"], ["b0", "c0"]),
        ("split_b", None, ["p1"], ["b0", "c2"]),
        ("split_c", None, ["p1"], ["b2", "c0"]),
        ("tB1", "B1", ["b0"], ["b1"]),
        ("tB2", "B2", ["b1"], ["b2"]),
        ("tC1", "C1", ["c0"], ["c1"]),
        ("tC2", "C2", ["c1"], ["c2"]),
        ("join", None, ["b2", "c2"], ["p2"]),
    ]
    return build(f"or_{variant}", _outer() + body + _variant_moves(variant))


CONSTRUCTS = {"sequence": sequence, "parallel": parallel, "xor": xor, "or": inclusive}


def block_net(construct, variant):
    return CONSTRUCTS[construct](variant)


def detectable():
    """The 14 (construct, variant) pairs whose mined model matches the net."""
    for c in CONSTRUCTS:
        for v in VARIANTS:
            if c == "or" and v.endswith("repeatable"):
                continue
            yield c, v


def sequence4():
    """Mandatory sequence of four activities inside an outer loop."""
    return build("sequence4", [
        ("tA", "A", ["p0"], ["p1"]),
        ("tB", "B", ["p1"], ["p2"]),
        ("tC", "C", ["p2"], ["p3"]),
        ("tD", "D", ["p3"], ["p0"]),
    ])


# Non-block-structured nets, reconstructed from prose descriptions.  The
# layout of silent transitions is our reading; alternatives exist (noted
# per net) and would give different languages.

def overlapping_optional():
    """A, then end the iteration, do B..F with C,D,E skippable, or E then F.

    Reading: the chain A B C D E F with silent skips p1->p4 (A straight to E),
    p2->p5 (B straight to F) and p1->p6 (end after A), and p6->p0 closing
    the outer loop.
    """
    chain = [("t" + a, a, [f"p{i}"], [f"p{i + 1}"]) for i, a in enumerate("ABCDEF")]
    silents = [
        ("s14", None, ["p1"], ["p4"]),
        ("s25", None, ["p2"], ["p5"]),
        ("s16", None, ["p1"], ["p6"]),
        ("s60", None, ["p6"], ["p0"]),
    ]
    return build("overlapping_optional", chain + silents)


def overlapping_repeatable():
    """Same chain with the inner silents reversed: D, E and F may jump back.

    Reading: p4->p1 (after D back before B), p5->p2 (after E back before C),
    p6->p1 (after F back before B); p6->p0 still closes the outer loop.
    """
    chain = [("t" + a, a, [f"p{i}"], [f"p{i + 1}"]) for i, a in enumerate("ABCDEF")]
    silents = [
        ("s41", None, ["p4"], ["p1"]),
        ("s52", None, ["p5"], ["p2"]),
        ("s61", None, ["p6"], ["p1"]),
        ("s60", None, ["p6"], ["p0"]),
    ]
    return build("overlapping_repeatable", chain + silents)


def overlapping_parallel():
    """Branch B1,B2 merges into the middle of D1,D2; C1,C2,C3 runs freely.

    Reading: A forks B and C; C1 forks the D branch; D2 waits on B2; E joins.
    """
    return build("overlapping_parallel", [
        ("tA", "A", ["p0"], ["pb", "pc"]),
        ("tB1", "B1", ["pb"], ["pb1"]),
        ("tB2", "B2", ["pb1"], ["pbm"]),
        ("tC1", "C1", ["pc"], ["pc1", "pd"]),
        ("tC2", "C2", ["pc1"], ["pc2"]),
        ("tC3", "C3", ["pc2"], ["pc3"]),
        ("tD1", "D1", ["pd"], ["pd1"]),
        ("tD2", "D2", ["pd1", "pbm"], ["pd2"]),
        ("tE", "E", ["pc3", "pd2"], ["p0"]),
    ])


def overlapping_xor():
    """The parallel layout with every split and join turned into a choice.

    Reading: after A choose B1 (then B2, then D2) or C1; after C1 choose
    D1 (then D2) or C2 (then C3); E1 or E2 closes the iteration.
    """
    return build("overlapping_xor", [
        ("tA", "A", ["p0"], ["p1"]),
        ("tB1", "B1", ["p1"], ["pb1"]),
        ("tB2", "B2", ["pb1"], ["pm"]),
        ("tC1", "C1", ["p1"], ["pc"]),
        ("tD1", "D1", ["pc"], ["pm"]),
        ("tC2", "C2", ["pc"], ["pc2"]),
        ("tC3", "C3", ["pc2"], ["pe"]),
        ("tD2", "D2", ["pm"], ["pe"]),
        ("tE1", "E1", ["pe"], ["p0"]),
        ("tE2", "E2", ["pe"], ["p0"]),
    ])


NON_BLOCK = {
    "overlapping_optional": overlapping_optional,
    "overlapping_repeatable": overlapping_repeatable,
    "overlapping_parallel": overlapping_parallel,
    "overlapping_xor": overlapping_xor,
}


# Frames: the interplay example plus a few heterogeneous mixes.

def interplay_m1():
    """A, then exactly one of B or C; the net runs once."""
    return build("m1", [
        ("tA", "A", ["q0"], ["q1"]),
        ("tB", "B", ["q1"], ["q2"]),
        ("tC", "C", ["q1"], ["q2"]),
    ], initial=("q0",), final=(("q2",),))


def interplay_m2():
    """K then L, or neither: both at most once and equally often."""
    return build("m2", [
        ("tK", "K", ["r0"], ["r1"]),
        ("tL", "L", ["r1"], ["r2"]),
    ], initial=("r0",), final=(("r0",), ("r2",)))


def explicit_b_k():
    """The B-K relation drawn as its own net: B optional, then K."""
    return build("relation_B_K", [
        ("tB", "B", ["p0"], ["p1"]),
        ("skip", None, ["p0"], ["p1"]),
        ("tK", "K", ["p1"], ["p2"]),
    ], initial=("p0",), final=(("p0",), ("p2",)))


def interplay_frame():
    from procframe.declare import parse_constraint
    from procframe.frame import ProcessFrame, Specification

    return ProcessFrame((
        Specification("m1", interplay_m1()),
        Specification("m2", interplay_m2()),
        Specification("response", {parse_constraint("Response[B,K]")}),
    ))


def fixture_frames():
    """Five frames mixing nets, constraint sets and raw automata."""
    from procframe.declare import compile_constraint, parse_constraint as pc
    from procframe.frame import ProcessFrame, Specification

    fig3 = interplay_frame()
    with_relation = fig3.with_spec(Specification("relation_B_K", explicit_b_k()))
    declarative = ProcessFrame((
        Specification("d1", {pc("Response[A,B]"), pc("NotChainSuccession[B,B]")}, {"A", "B", "C"}),
        Specification("d2", {pc("AlternatePrecedence[B,C]"), pc("Interposition[A,B,C]")}),
        Specification("d3", {pc("BalancedEnablement[A,C,D]"), pc("Existence1[D]")}),
    ))
    seq = block_net("sequence", "optional")
    hybrid = ProcessFrame((
        Specification("seq", seq),
        Specification("glue", {pc("Succession[C,E]"), pc("NotCoExistence[E,F]")}),
        Specification("par", block_net("parallel", "mandatory"), {"A", "B1", "B2", "C1", "C2", "D"}),
    ))
    raw = ProcessFrame((
        Specification("raw", compile_constraint(pc("AlternateSuccession[X,Y]")), {"X", "Y", "Z"}),
        Specification("xor", block_net("xor", "optional_repeatable")),
        Specification("link", {pc("Precedence[D,X]"), pc("AlternateResponse[B1,Y]")}),
    ))
    return {"interplay": fig3, "interplay_relation": with_relation, "declarative": declarative,
            "hybrid": hybrid, "raw": raw}


def log_of(net, revisits=2):
    """Every trace of `net` whose run revisits no automaton state more than `revisits` times."""
    from procframe.automata import enumerate_traces
    from procframe.core import EventLog
    from procframe.petri import net_to_dfa

    traces = enumerate_traces(net_to_dfa(net), revisits)
    return EventLog.from_traces(sorted(traces, key=lambda t: (len(t), t)))


def reference_dfa(net):
    """The net's language, open to activities it does not label."""
    from procframe.frame import Specification, spec_dfa

    return spec_dfa(Specification(net.name, net))


def mined(net, start=True):
    """(log, model) for the usual pipeline: enumerate with two revisits, mine at full support."""
    from procframe.miner import MinerConfig, mine

    log = log_of(net)
    return log, mine(log, MinerConfig(include_start=start))
