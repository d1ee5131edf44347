"""Command line entry point.

Exit codes: 0 success or equivalent, 1 not equivalent or violations found,
2 usage, parse or processing error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import formats
from .automata import StateBudgetExceeded, enumerate_traces, find_counterexample
from .core import START, EventLog, StartSymbolClash
from .declare import Template
from .frame import ProcessFrame, UnknownActivity, first_violation, frame_accepts, global_dfa, spec_dfa
from .miner import DEFAULT_TEMPLATES, EmptyLog, MinedModel, MinerConfig, mine, mined_dfa
from .rigidity import detect, validate_rewrite

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


def _templates(text: str | None, ternary: bool):
    if text is None:
        chosen = set(DEFAULT_TEMPLATES)
    else:
        names = {t.value: t for t in Template}
        chosen = set()
        for name in (n.strip() for n in text.split(",") if n.strip()):
            if name not in names:
                raise CliError(f"unknown template {name!r}")
            chosen.add(names[name])
    if not ternary:
        chosen = {t for t in chosen if t.arity != 3}
    return frozenset(chosen)


def _model_dfa(model):
    if isinstance(model, ProcessFrame):
        return global_dfa(model)
    return spec_dfa(model)


def _start_arg(args, default_on: bool):
    if args.no_start:
        return None
    if args.start is not None:
        return args.start
    return START if default_on else None


def cmd_mine(args):
    log = formats.parse_log(args.log, args.format)
    start = _start_arg(args, default_on=False)
    cfg = MinerConfig(templates=_templates(args.templates, args.ternary),
                      include_start=start is not None, start=start or START)
    model = mine(log, cfg)
    formats.write_declare(model.constraints, args.output)
    print(f"{len(model.constraints)} constraints written to {args.output}")
    return EXIT_OK


def cmd_detect(args):
    from .report import plot_rewrite, validation_text, write_fragments_csv

    log = formats.parse_log(args.log, args.format)
    start = _start_arg(args, default_on=True)
    if args.constraints and args.mine:
        raise CliError("give either a constraints file or --mine, not both")
    if args.constraints:
        constraints = formats.read_declare(args.constraints)
        used = frozenset(a for c in constraints for a in c.args)
        model_start = start if start in used else None
        alphabet = log.alphabet | ({model_start} if model_start else set())
        if not used <= alphabet:
            raise CliError(f"constraints mention activities missing from the log: {sorted(used - alphabet)}")
        model = MinedModel(frozenset(constraints), frozenset(alphabet), {}, model_start)
    else:
        cfg = MinerConfig(include_start=start is not None, start=start or START)
        model = mine(log, cfg)
    rewrite = detect(model, log)
    out = Path(args.output)
    formats.write_frame(rewrite.frame, out)
    for i, f in enumerate((f for f in rewrite.fragments if f.approximate), 1):
        formats.write_net(f.net, out / f"approximate{i}.net")
    verdict = validate_rewrite(rewrite.frame, mined_dfa(model))
    (out / "report.txt").write_text(validation_text(rewrite, verdict), encoding="utf-8")
    write_fragments_csv(rewrite, out / "fragments.csv")
    plot_rewrite(rewrite, out / "fragments.png")
    print(f"{len(rewrite.accepted)} fragment(s), {len(rewrite.residual)} residual constraints; "
          f"equivalent: {'yes' if verdict is True else 'no'}")
    return EXIT_OK if verdict is True else EXIT_FAIL


def cmd_gen_log(args):
    model = formats.load_model(args.model)
    traces = enumerate_traces(_model_dfa(model), args.revisits, args.limit)
    log = EventLog.from_traces(sorted(traces, key=lambda t: (len(t), t)))
    formats.write_log(log, args.output, args.format)
    print(f"{len(log)} traces written to {args.output}")
    return EXIT_OK


def cmd_check(args):
    frame = formats.read_frame(args.frame)
    if not isinstance(frame, ProcessFrame):
        raise CliError("check needs a frame manifest")
    log = formats.parse_log(args.log, args.format)
    bad = 0
    print("trace\tverdict\tfirst_violation")
    for i, trace in enumerate(log.traces, 1):
        try:
            ok = frame_accepts(frame, trace)
            why = "" if ok else first_violation(frame, trace)
        except UnknownActivity as e:
            ok, why = False, str(e)
        bad += not ok
        print(f"{i}\t{'accept' if ok else 'reject'}\t{why}")
    return EXIT_OK if bad == 0 else EXIT_FAIL


def cmd_equiv(args):
    d1 = _model_dfa(formats.load_model(args.model1))
    d2 = _model_dfa(formats.load_model(args.model2))
    ce = find_counterexample(d1, d2)
    if ce is None:
        print("equivalent")
        return EXIT_OK
    print("not equivalent; counterexample: " + (",".join(ce) if ce else "<empty trace>"))
    return EXIT_FAIL


def cmd_compose(args):
    frame = formats.read_frame(args.frame)
    dfa = global_dfa(frame)
    formats.write_dfa(dfa, args.output)
    print(f"{dfa.n_states} states written to {args.output}")
    return EXIT_OK


def cmd_export_dot(args):
    text = formats.model_to_dot(formats.load_model(args.model), hide_trap=args.hide_trap)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _add_start(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--start", metavar="NAME", nargs="?", const=START, default=None,
                   help=f"prepend an artificial start activity (default name {START})")
    g.add_argument("--no-start", action="store_true", help="do not prepend a start activity")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="procframe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="discover Declare constraints at full support")
    p.add_argument("log")
    p.add_argument("--format", choices=formats.LOG_FORMATS)
    p.add_argument("--templates", help="comma-separated template names")
    p.add_argument("--ternary", action=argparse.BooleanOptionalAction, default=True)
    _add_start(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("detect", help="rewrite mined constraints into net fragments")
    p.add_argument("log")
    p.add_argument("constraints", nargs="?")
    p.add_argument("--mine", action="store_true", help="mine the log instead of reading constraints")
    p.add_argument("--format", choices=formats.LOG_FORMATS)
    _add_start(p)
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("gen-log", help="enumerate traces of a model with bounded state revisits")
    p.add_argument("model")
    p.add_argument("--revisits", type=int, default=2)
    p.add_argument("--limit", type=int, default=1_000_000)
    p.add_argument("--format", choices=formats.LOG_FORMATS)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_log)

    p = sub.add_parser("check", help="check each trace of a log against a frame")
    p.add_argument("frame")
    p.add_argument("log")
    p.add_argument("--format", choices=formats.LOG_FORMATS)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("equiv", help="compare the languages of two models")
    p.add_argument("model1")
    p.add_argument("model2")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("compose", help="build the automaton of a whole frame")
    p.add_argument("frame")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("export-dot", help="render a model as Graphviz DOT")
    p.add_argument("model")
    p.add_argument("--hide-trap", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_OK
    try:
        return args.func(args)
    except (CliError, formats.ParseError, EmptyLog, StartSymbolClash, StateBudgetExceeded,
            OSError, ValueError) as e:
        print(f"procframe: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
