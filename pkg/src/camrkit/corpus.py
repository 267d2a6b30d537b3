"""Reader and writer for the CAMR-T line format.

One block per sentence, blank-line terminated::

    #id qt-1
    #snt 钱塘江 大潮 被 称为 天下 奇观
    #func 3
    instance x1_2 钱塘江大潮 | align=1,2 kind=cont
    instance z1 Event | kind=null
    instance x4 称为-01 | align=4 kind=norm
    instance x5_6 天下奇观 | align=5,6 kind=cont
    relation x4 arg1 z1 | ralign=3
    relation x4 arg2 x5_6
    relation z1 mod x1_2
    attribute x4 polarity -
    root x4

Blocks without triple lines carry a bare sentence (no gold graph).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

from .graph import (
    AmrGraph,
    ConceptNode,
    ContinuousMultiword,
    Direct,
    DiscontinuousMultiword,
    Normalization,
    NullAligned,
    RelationEdge,
    Sentence,
    Split,
    validate_graph,
)

TRIPLE_KINDS = ("instance", "relation", "attribute", "root")


class CorpusFormatError(ValueError):
    """Malformed CAMR-T input; carries a 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        self.reason = message
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass
class CorpusDocument:
    entries: List[Tuple[Sentence, Optional[AmrGraph]]] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    @property
    def sentences(self) -> List[Sentence]:
        return [s for s, _ in self.entries]

    @property
    def graphs(self) -> List[AmrGraph]:
        return [g for _, g in self.entries if g is not None]

    @classmethod
    def from_graphs(cls, graphs: Iterable[AmrGraph]) -> "CorpusDocument":
        return cls([(g.sentence, g) for g in graphs])


def _parse_fields(text: str, lineno: int, col: int) -> Dict[str, str]:
    out = {}
    for item in text.split():
        key, sep, value = item.partition("=")
        if not sep or not key or not value:
            raise CorpusFormatError(f"bad key=value field {item!r}", lineno, col)
        if key in out:
            raise CorpusFormatError(f"repeated field {key!r}", lineno, col)
        out[key] = value
    return out


def _parse_ints(text: str, lineno: int, col: int) -> Tuple[int, ...]:
    try:
        values = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise CorpusFormatError(f"expected comma-separated integers, got {text!r}", lineno, col) from None
    if any(x < 1 for x in values):
        raise CorpusFormatError("word indices are 1-based", lineno, col)
    return values


def _make_alignment(fields: Dict[str, str], sent: Sentence, lineno: int, col: int):
    kind = fields.get("kind")
    if kind is None:
        raise CorpusFormatError("instance is missing kind=", lineno, col)
    words = _parse_ints(fields["align"], lineno, col) if "align" in fields else ()
    allowed = {"kind", "align"}

    def single():
        if len(words) != 1:
            raise CorpusFormatError(f"kind={kind} needs exactly one aligned word", lineno, col)
        if words[0] > len(sent):
            raise CorpusFormatError(f"word {words[0]} beyond sentence length {len(sent)}", lineno, col)
        return words[0]

    if kind == "direct":
        a = Direct(single())
    elif kind == "norm":
        w = single()
        a = Normalization(w, sent.token(w).surface)
    elif kind == "cont":
        a = ContinuousMultiword(words)
    elif kind == "disc":
        a = DiscontinuousMultiword(words)
    elif kind == "split":
        allowed.add("part")
        try:
            part = int(fields.get("part", ""))
        except ValueError:
            raise CorpusFormatError("kind=split needs an integer part=", lineno, col) from None
        a = Split(single(), part)
    elif kind == "null":
        if words:
            raise CorpusFormatError("null-aligned instance cannot carry align=", lineno, col)
        allowed.add("trigger")
        trig = None
        if "trigger" in fields:
            trig = _parse_ints(fields["trigger"], lineno, col)
            if len(trig) != 1:
                raise CorpusFormatError("trigger= takes one word index", lineno, col)
            trig = trig[0]
        a = NullAligned(trig)
    else:
        raise CorpusFormatError(f"unknown alignment kind {kind!r}", lineno, col)
    extra = set(fields) - allowed
    if extra:
        raise CorpusFormatError(f"unexpected field(s) {', '.join(sorted(extra))}", lineno, col)
    return a


class _Block:
    def __init__(self):
        self.start = 0
        self.id: Optional[str] = None
        self.words: Optional[List[str]] = None
        self.functional: Tuple[int, ...] = ()
        self.func_line = 0
        self.triples: List[Tuple[int, str, List[str], str, int]] = []

    def empty(self):
        return self.id is None and self.words is None and not self.triples


def _build_graph(block: _Block) -> Tuple[Sentence, Optional[AmrGraph]]:
    if block.id is None:
        raise CorpusFormatError("block has no #id header", block.start, 1)
    if block.words is None:
        raise CorpusFormatError("block has no #snt header", block.start, 1)
    n = len(block.words)
    for f in block.functional:
        if f > n:
            raise CorpusFormatError(f"functional word {f} beyond sentence length {n}", block.func_line, 7)
    sent = Sentence.from_words(block.id, block.words, block.functional)
    if not block.triples:
        return sent, None

    concepts: List[ConceptNode] = []
    declared = set()
    edges: List[RelationEdge] = []
    roots: List[Tuple[int, str]] = []
    for lineno, kind, args, tail, tail_col in block.triples:
        if kind == "instance":
            if len(args) != 2:
                raise CorpusFormatError("instance takes <var> <concept>", lineno, 1)
            var, label = args
            if var in declared:
                raise CorpusFormatError(f"variable {var} declared twice", lineno, 10)
            fields = _parse_fields(tail, lineno, tail_col)
            concepts.append(ConceptNode(var, label, _make_alignment(fields, sent, lineno, tail_col)))
            declared.add(var)
        elif kind in ("relation", "attribute"):
            if len(args) != 3:
                raise CorpusFormatError(f"{kind} takes <src> <rel> <dst>", lineno, 1)
            fields = _parse_fields(tail, lineno, tail_col)
            ralign = None
            if kind == "attribute" and fields:
                raise CorpusFormatError("attributes take no fields", lineno, tail_col)
            if set(fields) - {"ralign"}:
                raise CorpusFormatError(f"unexpected field(s) {sorted(set(fields) - {'ralign'})}", lineno, tail_col)
            if "ralign" in fields:
                r = _parse_ints(fields["ralign"], lineno, tail_col)
                if len(r) != 1:
                    raise CorpusFormatError("ralign= takes one word index", lineno, tail_col)
                ralign = r[0]
            edges.append(RelationEdge(args[0], args[1], args[2], ralign, kind == "attribute"))
        elif kind == "root":
            if len(args) != 1 or tail:
                raise CorpusFormatError("root takes exactly one variable", lineno, 1)
            roots.append((lineno, args[0]))
    if len(roots) != 1:
        line = roots[1][0] if len(roots) > 1 else block.start
        raise CorpusFormatError(f"expected exactly one root line, found {len(roots)}", line, 1)

    # dangling references are reported at the referencing line
    for lineno, kind, args, _, _ in block.triples:
        refs = []
        if kind == "relation":
            refs = [(args[0], 1), (args[2], 3)]
        elif kind == "attribute":
            refs = [(args[0], 1)]
        elif kind == "root":
            refs = [(args[0], 1)]
        for name, pos in refs:
            if name not in declared:
                raise CorpusFormatError(f"reference to undeclared variable {name}", lineno, 1 + pos)

    graph = AmrGraph(sent, tuple(concepts), tuple(edges), roots[0][1])
    problems = validate_graph(graph)
    if problems:
        raise CorpusFormatError(f"invalid graph {block.id}: {problems[0]}", block.start, 1)
    return sent, graph


def parse_corpus(data: Union[bytes, str]) -> CorpusDocument:
    """Parse CAMR-T text into a document; raises CorpusFormatError with a position."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            line = data[: exc.start].count(b"\n") + 1
            col = exc.start - (data.rfind(b"\n", 0, exc.start) + 1) + 1
            raise CorpusFormatError("input is not valid UTF-8", line, col) from None
    else:
        text = data
    if text.startswith("﻿"):
        text = text[1:]

    doc = CorpusDocument()
    ids = set()
    block = _Block()

    def flush():
        nonlocal block
        if not block.empty():
            sent, graph = _build_graph(block)
            if sent.id in ids:
                raise CorpusFormatError(f"duplicate sentence id {sent.id!r}", block.start, 5)
            ids.add(sent.id)
            doc.entries.append((sent, graph))
        block = _Block()

    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.rstrip("\r")
        if not line.strip():
            flush()
            continue
        if block.empty():
            block.start = lineno
        if line.startswith("#"):
            key, _, rest = line.partition(" ")
            rest = rest.strip()
            if key == "#id":
                if block.id is not None or not rest or len(rest.split()) != 1:
                    raise CorpusFormatError("malformed #id header", lineno, 1)
                block.id = rest
            elif key == "#snt":
                if block.words is not None or not rest:
                    raise CorpusFormatError("malformed #snt header", lineno, 1)
                block.words = rest.split()
            elif key == "#func":
                if block.func_line:
                    raise CorpusFormatError("repeated #func header", lineno, 1)
                block.func_line = lineno
                block.functional = _parse_ints(rest, lineno, 7) if rest else ()
            else:
                raise CorpusFormatError(f"unknown header {key!r}", lineno, 1)
            continue
        if block.words is None:
            raise CorpusFormatError("triple before #snt header", lineno, 1)
        head, bar, tail = line.partition("|")
        parts = head.split()
        if not parts or parts[0] not in TRIPLE_KINDS:
            raise CorpusFormatError(f"unknown triple kind {parts[0] if parts else ''!r}", lineno, 1)
        tail_col = len(head) + 2 if bar else len(line) + 1
        block.triples.append((lineno, parts[0], parts[1:], tail.strip(), tail_col))
    flush()
    return doc


def _alignment_fields(c: ConceptNode) -> str:
    a = c.alignment
    if isinstance(a, NullAligned):
        return "kind=null" + (f" trigger={a.trigger_word}" if a.trigger_word is not None else "")
    words = ",".join(str(w) for w in a.words)
    if isinstance(a, Split):
        return f"align={words} kind=split part={a.part}"
    return f"align={words} kind={a.kind}"


def _check_atom(text: str, what: str):
    if not text or any(ch.isspace() for ch in text) or "|" in text:
        raise ValueError(f"{what} {text!r} cannot be written in CAMR-T")


def serialize_graph_block(sent: Sentence, graph: Optional[AmrGraph]) -> List[str]:
    for w in sent.words:
        _check_atom(w, "token")
    _check_atom(sent.id, "sentence id")
    lines = [f"#id {sent.id}", "#snt " + " ".join(sent.words)]
    func = sent.functional
    lines.append("#func " + ",".join(map(str, func)) if func else "#func")
    if graph is None:
        return lines
    problems = validate_graph(graph)
    if problems:
        raise ValueError(f"cannot serialize invalid graph {graph.id}: {problems[0]}")
    for c in graph.concepts:
        _check_atom(c.var, "variable")
        _check_atom(c.label, "concept")
        lines.append(f"instance {c.var} {c.label} | {_alignment_fields(c)}")
    for e in sorted(graph.relations, key=lambda e: (e.src, e.rel, e.dst)):
        _check_atom(e.rel, "relation")
        tail = f" | ralign={e.rel_alignment}" if e.rel_alignment is not None else ""
        lines.append(f"relation {e.src} {e.rel} {e.dst}{tail}")
    for e in sorted(graph.attributes, key=lambda e: (e.src, e.rel, e.dst)):
        _check_atom(e.rel, "relation")
        _check_atom(e.dst, "constant")
        lines.append(f"attribute {e.src} {e.rel} {e.dst}")
    lines.append(f"root {graph.root}")
    return lines


def serialize_corpus(doc: CorpusDocument) -> bytes:
    """Deterministic UTF-8 CAMR-T with LF line endings."""
    out = []
    for sent, graph in doc.entries:
        if graph is not None and graph.sentence != sent:
            raise ValueError(f"entry {sent.id}: graph sentence differs from entry sentence")
        out.extend(serialize_graph_block(sent, graph))
        out.append("")
    return "\n".join(out).encode("utf-8") + (b"\n" if out else b"")


def read_corpus(path: Union[str, Path]) -> CorpusDocument:
    return parse_corpus(Path(path).read_bytes())


def write_corpus(doc: CorpusDocument, path: Union[str, Path]) -> None:
    Path(path).write_bytes(serialize_corpus(doc))
