"""Reading and writing logs, Declare models, nets, automata and frame manifests.

Every writer emits sorted, canonical text so that round trips are stable.
The formats are described in docs/formats.md.
"""

from __future__ import annotations

import csv
import io
import json
import re
import xml.parsers.expat
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .automata import Dfa, to_dot
from .core import EventLog, InvalidActivity, check_activity
from .declare import Constraint, MalformedConstraint, parse_constraint
from .frame import ProcessFrame, Specification, spec_dfa
from .petri import Marking, NetStructureError, PetriNet, net_to_dot


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        where = ":".join(str(x) for x in (source, line) if x is not None)
        super().__init__(f"{where}: {message}" if where else message)


def _read(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- event logs ---------------------------------------------------------------

LOG_FORMATS = ("lines", "csv", "xes")


def guess_log_format(path) -> str:
    suffix = Path(path).suffix.lower()
    return {".xes": "xes", ".csv": "csv"}.get(suffix, "lines")


def _activity(name: str, line: int, source) -> str:
    try:
        return check_activity(name)
    except InvalidActivity as e:
        raise ParseError(str(e), line, source) from None


def loads_log(text: str, fmt: str = "lines", source: str | None = None) -> EventLog:
    if fmt == "lines":
        return _loads_lines(text, source)
    if fmt == "csv":
        return _loads_csv(text, source)
    if fmt == "xes":
        return _loads_xes(text, source)
    raise ValueError(f"unknown log format {fmt!r}; expected one of {LOG_FORMATS}")


def parse_log(path, fmt: str | None = None) -> EventLog:
    return loads_log(_read(path), fmt or guess_log_format(path), str(path))


def _loads_lines(text, source):
    """One trace per line, activities separated by commas; a blank line is the empty trace."""
    traces = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if line.startswith("#"):
            continue
        if not line:
            traces.append(())
            continue
        traces.append(tuple(_activity(a.strip(), n, source) for a in line.split(",")))
    return EventLog.from_traces(traces)


def _loads_csv(text, source):
    rows = csv.reader(io.StringIO(text))
    try:
        header = next(rows)
    except StopIteration:
        raise ParseError("empty CSV file", 1, source) from None
    header = [h.strip() for h in header]
    if "case_id" not in header or "activity" not in header:
        raise ParseError("header must contain case_id and activity", 1, source)
    ci, ai = header.index("case_id"), header.index("activity")
    cases = {}
    for row in rows:
        n = rows.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", n, source)
        cases.setdefault(row[ci].strip(), []).append(_activity(row[ai].strip(), n, source))
    return EventLog.from_traces(cases.values())


@dataclass
class _Node:
    tag: str
    attrs: dict
    line: int
    children: list = field(default_factory=list)
    text: str = ""

    def find(self, tag):
        return [c for c in self.children if c.tag == tag]


def _xml_tree(text: str, source) -> _Node:
    """Parse XML into light nodes that remember their line; namespace prefixes are dropped."""
    parser = xml.parsers.expat.ParserCreate()
    root = _Node("#document", {}, 0)
    stack = [root]

    def start(tag, attrs):
        node = _Node(tag.split(":")[-1], attrs, parser.CurrentLineNumber)
        stack[-1].children.append(node)
        stack.append(node)

    def end(tag):
        stack.pop()

    def chars(data):
        stack[-1].text += data

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(text, True)
    except xml.parsers.expat.ExpatError as e:
        raise ParseError(f"malformed XML: {xml.parsers.expat.ErrorString(e.code)}", e.lineno, source) from None
    if not root.children:
        raise ParseError("no root element", 1, source)
    return root.children[0]


def _loads_xes(text, source):
    root = _xml_tree(text, source)
    traces = []
    for tr in _walk(root, "trace"):
        events = []
        for ev in tr.find("event"):
            names = [a for a in ev.children if a.attrs.get("key") == "concept:name"]
            if not names:
                raise ParseError("event without concept:name", ev.line, source)
            events.append(_activity(names[0].attrs.get("value", ""), names[0].line, source))
        traces.append(tuple(events))
    return EventLog.from_traces(traces)


def _walk(node, tag, skip=()):
    for c in node.children:
        if c.tag == tag:
            yield c
        elif c.tag not in skip:
            yield from _walk(c, tag, skip)


def dumps_log(log: EventLog, fmt: str = "lines") -> str:
    if fmt == "lines":
        return "".join(",".join(t) + "\n" for t in log.traces)
    if fmt == "csv":
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["case_id", "activity"])
        for i, t in enumerate(log.traces, 1):
            for a in t:
                w.writerow([f"case{i}", a])
        return out.getvalue()
    if fmt == "xes":
        lines = ['<?xml version="1.0" encoding="UTF-8"?>', '<log xes.version="1.0">']
        for i, t in enumerate(log.traces, 1):
            lines.append("  <trace>")
            lines.append(f'    <string key="concept:name" value="case{i}"/>')
            for a in t:
                lines.append(f'    <event><string key="concept:name" value={quoteattr(a)}/></event>')
            lines.append("  </trace>")
        lines.append("</log>")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown log format {fmt!r}")


def write_log(log: EventLog, path, fmt: str | None = None) -> None:
    _write(path, dumps_log(log, fmt or guess_log_format(path)))


# -- Declare ------------------------------------------------------------------

def loads_declare(text: str, source: str | None = None) -> frozenset:
    out = set()
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            c = parse_constraint(line)
        except MalformedConstraint as e:
            raise ParseError(str(e), n, source) from None
        for a in c.args:
            _activity(a, n, source)
        out.add(c)
    return frozenset(out)


def dumps_declare(constraints) -> str:
    return "".join(line + "\n" for line in sorted(str(c) for c in constraints))


def read_declare(path) -> frozenset:
    return loads_declare(_read(path), str(path))


def write_declare(constraints, path) -> None:
    _write(path, dumps_declare(constraints))


# -- nets: native text --------------------------------------------------------

_SECTIONS = ("places", "transitions", "arcs", "initial", "final")
_IDENT = re.compile(r"^[A-Za-z0-9_.\-]+$")


def _marking(text: str, n: int, source) -> Marking:
    text = text.strip()
    if text == "{}":
        return Marking()
    items = []
    for tok in text.split():
        place, _, count = tok.partition("*")
        if not _IDENT.match(place) or (count and not count.isdigit()):
            raise ParseError(f"bad marking token {tok!r}", n, source)
        items.append((place, int(count) if count else 1))
    return Marking(items)


def loads_net(text: str, source: str | None = None) -> PetriNet:
    name = ""
    sections = {s: [] for s in _SECTIONS}
    seen = set()
    current = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line[:-1] if line.endswith(":") else None
        if head in _SECTIONS:
            if head in seen:
                raise ParseError(f"duplicate section {head}:", n, source)
            seen.add(head)
            current = head
            continue
        if line.startswith("name:") and current is None:
            name = line[5:].strip()
            continue
        if current is None:
            raise ParseError(f"content outside a section: {line!r}", n, source)
        sections[current].append((n, line))
    for s in _SECTIONS:
        if s not in seen:
            raise ParseError(f"missing section {s}:", None, source)

    places = []
    for n, line in sections["places"]:
        if not _IDENT.match(line):
            raise ParseError(f"bad place id {line!r}", n, source)
        places.append(line)
    transitions = {}
    for n, line in sections["transitions"]:
        tid, _, rest = line.partition(" ")
        rest = rest.strip()
        if not _IDENT.match(tid):
            raise ParseError(f"bad transition id {tid!r}", n, source)
        if tid in transitions:
            raise ParseError(f"duplicate transition {tid}", n, source)
        if rest == "silent":
            transitions[tid] = None
        elif rest.startswith("label="):
            transitions[tid] = _activity(rest[6:].strip(), n, source)
        else:
            raise ParseError("transition needs 'label=NAME' or 'silent'", n, source)
    nodes = set(places) | set(transitions)
    arcs = []
    for n, line in sections["arcs"]:
        src, sep, dst = (x.strip() for x in line.partition("->"))
        if not sep:
            raise ParseError("arc must look like 'source -> target'", n, source)
        for x in (src, dst):
            if x not in nodes:
                raise ParseError(f"arc references undeclared node {x!r}", n, source)
        arcs.append((src, dst))
    if len(sections["initial"]) != 1:
        raise ParseError("initial: needs exactly one marking line", None, source)
    n0, line0 = sections["initial"][0]
    initial = _marking(line0, n0, source)
    final = [_marking(line, n, source) for n, line in sections["final"]]
    for n, line in sections["initial"] + sections["final"]:
        unknown = _marking(line, n, source).places() - set(places)
        if unknown:
            raise ParseError(f"marking references undeclared places {sorted(unknown)}", n, source)
    try:
        return PetriNet(places, transitions, arcs, initial, final, name=name)
    except NetStructureError as e:
        raise ParseError(str(e), None, source) from None


def dumps_net(net: PetriNet) -> str:
    lines = []
    if net.name:
        lines.append(f"name: {net.name}")
    lines.append("places:")
    lines += [f"  {p}" for p in net.places]
    lines.append("transitions:")
    lines += [f"  {t} silent" if lbl is None else f"  {t} label={lbl}" for t, lbl in net.transitions]
    lines.append("arcs:")
    lines += [f"  {s} -> {d}" for s, d in sorted(net.arcs)]
    lines.append("initial:")
    lines.append(f"  {net.initial}")
    lines.append("final:")
    lines += [f"  {m}" for m in net.final]
    return "\n".join(lines) + "\n"


def read_net(path) -> PetriNet:
    if Path(path).suffix.lower() == ".pnml":
        return read_pnml(path)
    return loads_net(_read(path), str(path))


def write_net(net: PetriNet, path) -> None:
    if Path(path).suffix.lower() == ".pnml":
        write_pnml(net, path)
    else:
        _write(path, dumps_net(net))


# -- nets: PNML subset --------------------------------------------------------

INVISIBLE = "$invisible$"


def _text_of(node: _Node, child: str) -> str | None:
    for c in node.find(child):
        for t in c.find("text"):
            return t.text.strip()
    return None


def loads_pnml(text: str, source: str | None = None) -> PetriNet:
    root = _xml_tree(text, source)
    nets = list(_walk(root, "net")) if root.tag != "net" else [root]
    if not nets:
        raise ParseError("no <net> element", root.line, source)
    net = nets[0]
    places, initial, transitions, arcs = [], {}, {}, []
    finals = []
    for node in _walk(net, "place", skip=("finalmarkings",)):
        pid = node.attrs.get("id")
        if not pid:
            raise ParseError("place without id", node.line, source)
        places.append(pid)
        k = _text_of(node, "initialMarking")
        if k:
            if not k.isdigit():
                raise ParseError(f"bad initial marking {k!r}", node.line, source)
            initial[pid] = int(k)
    for node in _walk(net, "transition"):
        tid = node.attrs.get("id")
        if not tid:
            raise ParseError("transition without id", node.line, source)
        silent = any(t.attrs.get("activity") == INVISIBLE for t in node.find("toolspecific"))
        label = _text_of(node, "name")
        if silent or not label:
            transitions[tid] = None
        else:
            transitions[tid] = _activity(label, node.line, source)
    nodes = set(places) | set(transitions)
    for node in _walk(net, "arc"):
        s, d = node.attrs.get("source"), node.attrs.get("target")
        for x in (s, d):
            if x not in nodes:
                raise ParseError(f"arc references undeclared node {x!r}", node.line, source)
        arcs.append((s, d))
    for fm in _walk(root, "finalmarkings"):
        for m in fm.find("marking"):
            tokens = {}
            for p in m.find("place"):
                ref = p.attrs.get("idref")
                if ref not in places:
                    raise ParseError(f"final marking references undeclared place {ref!r}", p.line, source)
                k = p.find("text")[0].text.strip() if p.find("text") else "1"
                if not k.isdigit():
                    raise ParseError(f"bad token count {k!r}", p.line, source)
                tokens[ref] = int(k)
            finals.append(Marking(tokens))
    name = _text_of(net, "name") or net.attrs.get("id", "")
    try:
        return PetriNet(places, transitions, arcs, Marking(initial), finals, name=name)
    except NetStructureError as e:
        raise ParseError(str(e), net.line, source) from None


def dumps_pnml(net: PetriNet) -> str:
    q = quoteattr
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<pnml>",
             f'  <net id={q(net.name or "net")} type="http://www.pnml.org/version-2009/grammar/ptnet">']
    if net.name:
        lines.append(f"    <name><text>{escape(net.name)}</text></name>")
    lines.append('    <page id="page">')
    for p in net.places:
        k = net.initial[p]
        mark = f"<initialMarking><text>{k}</text></initialMarking>" if k else ""
        lines.append(f"      <place id={q(p)}><name><text>{escape(p)}</text></name>{mark}</place>")
    for t, lbl in net.transitions:
        if lbl is None:
            lines.append(f'      <transition id={q(t)}><name><text>{escape(t)}</text></name>'
                         f'<toolspecific tool="ProM" version="6.4" activity="{INVISIBLE}"/></transition>')
        else:
            lines.append(f"      <transition id={q(t)}><name><text>{escape(lbl)}</text></name></transition>")
    for i, (s, d) in enumerate(sorted(net.arcs)):
        lines.append(f"      <arc id=\"a{i}\" source={q(s)} target={q(d)}/>")
    lines.append("    </page>")
    lines.append("    <finalmarkings>")
    for m in net.final:
        lines.append("      <marking>")
        for p, k in m.tokens:
            lines.append(f"        <place idref={q(p)}><text>{k}</text></place>")
        lines.append("      </marking>")
    lines.append("    </finalmarkings>")
    lines.append("  </net>")
    lines.append("</pnml>")
    return "\n".join(lines) + "\n"


def read_pnml(path) -> PetriNet:
    return loads_pnml(_read(path), str(path))


def write_pnml(net: PetriNet, path) -> None:
    _write(path, dumps_pnml(net))


# -- automata -----------------------------------------------------------------

def dumps_dfa(dfa: Dfa) -> str:
    data = {
        "symbols": list(dfa.symbols),
        "initial": dfa.initial,
        "accepting": sorted(dfa.accepting),
        "delta": [list(row) for row in dfa.delta],
        "default": list(dfa.default),
    }
    return json.dumps(data, indent=1) + "\n"


def loads_dfa(text: str, source: str | None = None) -> Dfa:
    try:
        data = json.loads(text)
        return Dfa(tuple(data["symbols"]), [tuple(r) for r in data["delta"]], tuple(data["default"]),
                   frozenset(data["accepting"]), data.get("initial", 0))
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e.msg}", e.lineno, source) from None
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"invalid automaton: {e}", None, source) from None


def read_dfa(path) -> Dfa:
    return loads_dfa(_read(path), str(path))


def write_dfa(dfa: Dfa, path) -> None:
    _write(path, dumps_dfa(dfa))


# -- specifications and frame manifests ---------------------------------------

KINDS = {".decl": "declare", ".net": "net", ".pnml": "net", ".json": "dfa"}


def kind_of(path) -> str:
    kind = KINDS.get(Path(path).suffix.lower())
    if kind is None:
        raise ParseError(f"cannot tell model kind from extension of {path}")
    return kind


def load_spec(path, name: str | None = None, kind: str | None = None, alphabet=None) -> Specification:
    kind = kind or kind_of(path)
    if kind == "declare":
        body = read_declare(path)
    elif kind == "net":
        body = read_net(path)
    elif kind == "dfa":
        body = read_dfa(path)
    else:
        raise ParseError(f"unknown spec kind {kind!r}", None, str(path))
    name = name or Path(path).stem
    try:
        return Specification(name, body, None if alphabet is None else frozenset(alphabet))
    except ValueError as e:
        raise ParseError(str(e), None, str(path)) from None


def save_spec(spec: Specification, path) -> None:
    if spec.kind == "declare":
        write_declare(spec.body, path)
    elif spec.kind == "net":
        write_net(spec.body, path)
    else:
        write_dfa(spec.body, path)


def read_frame(manifest) -> ProcessFrame:
    """Load a TOML manifest listing ``[[spec]]`` tables with name, kind, path and optional alphabet."""
    manifest = Path(manifest)
    try:
        data = tomllib.loads(_read(manifest))
    except tomllib.TOMLDecodeError as e:
        raise ParseError(f"malformed manifest: {e}", None, str(manifest)) from None
    entries = data.get("spec", [])
    if not isinstance(entries, list):
        raise ParseError("'spec' must be an array of tables", None, str(manifest))
    specs, names = [], set()
    for i, entry in enumerate(entries, 1):
        for key in ("name", "path"):
            if key not in entry:
                raise ParseError(f"spec #{i} lacks '{key}'", None, str(manifest))
        if entry["name"] in names:
            raise ParseError(f"duplicate spec name {entry['name']!r}", None, str(manifest))
        names.add(entry["name"])
        path = manifest.parent / entry["path"]
        if not path.exists():
            raise ParseError(f"spec {entry['name']!r}: file {entry['path']} not found", None, str(manifest))
        specs.append(load_spec(path, entry["name"], entry.get("kind"), entry.get("alphabet")))
    return ProcessFrame(tuple(specs))


_EXT = {"declare": ".decl", "net": ".net", "dfa": ".json"}


def _toml_str(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def dumps_manifest(entries) -> str:
    """`entries`: (name, kind, relative path, alphabet) tuples."""
    chunks = []
    for name, kind, path, alphabet in entries:
        lines = ["[[spec]]", f"name = {_toml_str(name)}", f"kind = {_toml_str(kind)}",
                 f"path = {_toml_str(path)}"]
        lines.append("alphabet = [" + ", ".join(_toml_str(a) for a in sorted(alphabet)) + "]")
        chunks.append("\n".join(lines) + "\n")
    return "\n".join(chunks)


def write_frame(frame: ProcessFrame, directory, manifest_name: str = "frame.toml") -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for spec in frame.specs:
        filename = _safe_filename(spec.name) + _EXT[spec.kind]
        save_spec(spec, directory / filename)
        entries.append((spec.name, spec.kind, filename, spec.alphabet))
    path = directory / manifest_name
    _write(path, dumps_manifest(entries))
    return path


def _safe_filename(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.\-]+", "_", name) or "spec"


def load_model(path):
    """A frame for ``.toml`` manifests, otherwise a single specification."""
    if Path(path).suffix.lower() == ".toml":
        return read_frame(path)
    return load_spec(path)


# -- DOT ----------------------------------------------------------------------

def _q(s) -> str:
    return '"' + str(s).replace('"', r"\"") + '"'


def frame_to_dot(frame: ProcessFrame) -> str:
    """Specs as boxes linked to the activities of their alphabets."""
    lines = ["graph frame {", "  rankdir=LR;"]
    for a in sorted(frozenset().union(*(s.alphabet for s in frame.specs)) if frame.specs else ()):
        lines.append(f"  {_q('act:' + a)} [shape=ellipse, label={_q(a)}];")
    for s in frame.specs:
        lines.append(f"  {_q('spec:' + s.name)} [shape=box, label={_q(s.name + chr(10) + s.kind)}];")
        for a in sorted(s.alphabet):
            lines.append(f"  {_q('spec:' + s.name)} -- {_q('act:' + a)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def model_to_dot(model, hide_trap: bool = True) -> str:
    if isinstance(model, ProcessFrame):
        return frame_to_dot(model)
    if isinstance(model, Specification) and model.kind == "net":
        return net_to_dot(model.body)
    if isinstance(model, Specification):
        return to_dot(spec_dfa(model), hide_trap=hide_trap, name=model.name)
    if isinstance(model, PetriNet):
        return net_to_dot(model)
    return to_dot(model, hide_trap=hide_trap)

