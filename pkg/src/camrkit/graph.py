"""In-memory Chinese AMR graphs with explicit concept and relation alignment.

A graph holds a tokenized sentence, a list of concepts (each carrying exactly
one alignment record), labelled relation edges and a single root. Aligned
concepts use deterministic variable names derived from their word indices::

    Direct / Normalization      x4
    ContinuousMultiword         x1_2
    DiscontinuousMultiword      x2_4
    Split (part 1, 2, ...)      x3_a, x3_b
    NullAligned                 z1, z2, ... (free)
"""
from __future__ import annotations

import string
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union


@dataclass(frozen=True)
class Token:
    index: int
    surface: str
    is_functional: bool = False

    @property
    def name(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: Tuple[Token, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    @classmethod
    def from_words(cls, id: str, words: Sequence[str], functional: Iterable[int] = ()) -> "Sentence":
        functional = set(functional)
        return cls(id, tuple(Token(i, w, i in functional) for i, w in enumerate(words, 1)))

    def __len__(self):
        return len(self.tokens)

    def token(self, index: int) -> Token:
        return self.tokens[index - 1]

    @property
    def words(self) -> List[str]:
        return [t.surface for t in self.tokens]

    @property
    def functional(self) -> List[int]:
        return [t.index for t in self.tokens if t.is_functional]

    def with_functional(self, functional: Iterable[int]) -> "Sentence":
        return Sentence.from_words(self.id, self.words, functional)


# -- alignments ---------------------------------------------------------------

@dataclass(frozen=True)
class Direct:
    word: int
    kind = "direct"

    @property
    def words(self) -> Tuple[int, ...]:
        return (self.word,)


@dataclass(frozen=True)
class Normalization:
    word: int
    surface_form: str
    kind = "norm"

    @property
    def words(self) -> Tuple[int, ...]:
        return (self.word,)


@dataclass(frozen=True)
class ContinuousMultiword:
    words: Tuple[int, ...]
    kind = "cont"

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))


@dataclass(frozen=True)
class DiscontinuousMultiword:
    words: Tuple[int, ...]
    kind = "disc"

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))


@dataclass(frozen=True)
class Split:
    word: int
    part: int
    kind = "split"

    @property
    def words(self) -> Tuple[int, ...]:
        return (self.word,)


@dataclass(frozen=True)
class NullAligned:
    trigger_word: Optional[int] = None
    kind = "null"

    @property
    def words(self) -> Tuple[int, ...]:
        return ()


Alignment = Union[Direct, Normalization, ContinuousMultiword, DiscontinuousMultiword, Split, NullAligned]
ALIGNMENT_KINDS = ("direct", "norm", "cont", "disc", "split", "null")


def split_suffix(part: int) -> str:
    """1 -> 'a', 26 -> 'z', 27 -> 'aa' (bijective base 26)."""
    out = ""
    while part > 0:
        part, rem = divmod(part - 1, 26)
        out = string.ascii_lowercase[rem] + out
    return out


def aligned_var(alignment: Alignment) -> Optional[str]:
    """The standard variable name for an aligned concept, None for NullAligned."""
    if isinstance(alignment, NullAligned):
        return None
    base = "x" + "_".join(str(w) for w in alignment.words)
    if isinstance(alignment, Split):
        return f"{base}_{split_suffix(alignment.part)}"
    return base


def anchor(alignment: Alignment) -> Optional[int]:
    """Sentence position used to order concepts: first aligned word or trigger."""
    if isinstance(alignment, NullAligned):
        return alignment.trigger_word
    return alignment.words[0]


@dataclass(frozen=True)
class ConceptNode:
    var: str
    label: str
    alignment: Alignment

    @property
    def is_aligned(self) -> bool:
        return not isinstance(self.alignment, NullAligned)


@dataclass(frozen=True, order=True)
class RelationEdge:
    src: str
    rel: str
    dst: str
    rel_alignment: Optional[int] = None
    is_constant: bool = False

    def sort_key(self):
        return (self.is_constant, self.src, self.rel, self.dst, self.rel_alignment or 0)


@dataclass(frozen=True)
class AmrGraph:
    sentence: Sentence
    concepts: Tuple[ConceptNode, ...]
    edges: Tuple[RelationEdge, ...]
    root: str

    def __post_init__(self):
        object.__setattr__(self, "concepts", tuple(self.concepts))
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=RelationEdge.sort_key)))

    @property
    def id(self) -> str:
        return self.sentence.id

    def concept(self, var: str) -> ConceptNode:
        for c in self.concepts:
            if c.var == var:
                return c
        raise KeyError(var)

    @property
    def variables(self) -> List[str]:
        return [c.var for c in self.concepts]

    @property
    def relations(self) -> List[RelationEdge]:
        return [e for e in self.edges if not e.is_constant]

    @property
    def attributes(self) -> List[RelationEdge]:
        return [e for e in self.edges if e.is_constant]

    def children(self, var: str) -> List[str]:
        return [e.dst for e in self.relations if e.src == var]

    def parents(self, var: str) -> List[str]:
        return [e.src for e in self.relations if e.dst == var]


# -- relation inventory -------------------------------------------------------

def load_inventory(path: Union[str, Path]) -> List[str]:
    """One label per line; blank lines and '#' comments ignored, order kept."""
    labels = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#") and line not in labels:
            labels.append(line)
    return labels


# -- validation ---------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    rule: str
    target: str
    message: str

    def __str__(self):
        return f"{self.rule} [{self.target}]: {self.message}"


def find_cycle(nodes: Iterable[str], edges: Iterable[Tuple[str, str]]) -> Optional[List[str]]:
    """Return one directed cycle as a node list (first node repeated at the end), or None."""
    adj: Dict[str, List[str]] = defaultdict(list)
    for s, d in edges:
        adj[s].append(d)
    color: Dict[str, int] = {}
    for start in nodes:
        if color.get(start):
            continue
        # iterative DFS; path mirrors the grey stack
        stack = [(start, iter(adj[start]))]
        path = [start]
        color[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                color[node] = 2
                continue
            state = color.get(nxt, 0)
            if state == 1:
                return path[path.index(nxt):] + [nxt]
            if state == 0:
                color[nxt] = 1
                stack.append((nxt, iter(adj[nxt])))
                path.append(nxt)
    return None


def _check_alignment(c: ConceptNode, sent: Sentence) -> List[Violation]:
    a = c.alignment
    out = []
    n = len(sent)
    bad = lambda msg: out.append(Violation("alignment", c.var, msg))
    for w in a.words:
        if not 1 <= w <= n:
            bad(f"word index {w} outside 1..{n}")
            return out
    if isinstance(a, ContinuousMultiword):
        if len(a.words) < 2:
            bad("continuous multiword needs at least two words")
        elif any(b != x + 1 for x, b in zip(a.words, a.words[1:])):
            bad("continuous multiword indices must be consecutive")
    elif isinstance(a, DiscontinuousMultiword):
        if len(a.words) < 2:
            bad("discontinuous multiword needs at least two words")
        elif any(b <= x for x, b in zip(a.words, a.words[1:])):
            bad("discontinuous multiword indices must increase")
        elif all(b == x + 1 for x, b in zip(a.words, a.words[1:])):
            bad("discontinuous multiword has no gap")
    elif isinstance(a, Split):
        if a.part < 1:
            bad("split part must be >= 1")
    elif isinstance(a, Direct):
        if c.label != sent.token(a.word).surface:
            bad(f"direct concept label {c.label!r} differs from word {sent.token(a.word).surface!r}")
    elif isinstance(a, Normalization):
        surface = sent.token(a.word).surface
        if a.surface_form != surface:
            bad(f"normalization surface {a.surface_form!r} differs from word {surface!r}")
        if c.label == surface:
            bad("normalization concept equals its word; use a direct alignment")
    elif isinstance(a, NullAligned):
        if a.trigger_word is not None and not 1 <= a.trigger_word <= n:
            bad(f"trigger word {a.trigger_word} outside 1..{n}")
    return out


def validate_graph(g: AmrGraph, inventory: Optional[Iterable[str]] = None) -> List[Violation]:
    """Check every structural invariant of ``g``; an empty list means well-formed."""
    v: List[Violation] = []
    sent = g.sentence
    for pos, tok in enumerate(sent.tokens, 1):
        if tok.index != pos:
            v.append(Violation("token-index", f"token {pos}", f"expected index {pos}, got {tok.index}"))
        if not tok.surface:
            v.append(Violation("token-surface", f"x{pos}", "empty surface"))

    seen = Counter(c.var for c in g.concepts)
    for var, k in seen.items():
        if k > 1:
            v.append(Violation("duplicate-var", var, f"declared {k} times"))
    if not g.concepts:
        v.append(Violation("empty-graph", g.id, "graph has no concepts"))

    claims: Dict[int, List[ConceptNode]] = defaultdict(list)
    split_parts: Dict[int, List[int]] = defaultdict(list)
    shape_ok = True
    for c in g.concepts:
        if not c.label:
            v.append(Violation("empty-label", c.var, "concept label is empty"))
        problems = _check_alignment(c, sent)
        v.extend(problems)
        if problems:
            shape_ok = False
            continue
        expected = aligned_var(c.alignment)
        if expected is not None and c.var != expected:
            v.append(Violation("var-scheme", c.var, f"aligned concept should be named {expected}"))
        if expected is None and c.var.startswith("x"):
            v.append(Violation("var-scheme", c.var, "null-aligned concept uses an aligned-style name"))
        for w in c.alignment.words:
            claims[w].append(c)
        if isinstance(c.alignment, Split):
            split_parts[c.alignment.word].append(c.alignment.part)

    if shape_ok:
        for w, cs in sorted(claims.items()):
            if len(cs) > 1 and not all(isinstance(c.alignment, Split) for c in cs):
                v.append(Violation("alignment-conflict", f"x{w}",
                                   "word aligned to " + ", ".join(c.var for c in cs)))
            if sent.token(w).is_functional:
                v.append(Violation("functional-conflict", f"x{w}",
                                   "functional word is also aligned to a concept"))
        for w, parts in sorted(split_parts.items()):
            if sorted(parts) != list(range(1, len(parts) + 1)) or len(parts) < 2:
                v.append(Violation("split-parts", f"x{w}",
                                   f"split parts must be 1..n with n >= 2, got {sorted(parts)}"))

    names = set(seen)
    inventory = set(inventory) if inventory is not None else None
    edge_seen = set()
    for e in g.edges:
        tag = f"{e.src} {e.rel} {e.dst}"
        if e.src not in names:
            v.append(Violation("dangling-source", tag, f"no concept named {e.src}"))
        if not e.is_constant and e.dst not in names:
            v.append(Violation("dangling-destination", tag, f"no concept named {e.dst}"))
        if not e.rel:
            v.append(Violation("empty-relation", tag, "relation label is empty"))
        elif inventory is not None and e.rel not in inventory:
            v.append(Violation("unknown-relation", tag, f"{e.rel!r} not in the relation inventory"))
        key = (e.src, e.rel, e.dst, e.is_constant)
        if key in edge_seen:
            v.append(Violation("duplicate-edge", tag, "parallel edge with the same label"))
        edge_seen.add(key)
        if e.rel_alignment is not None:
            if e.is_constant:
                v.append(Violation("relation-alignment", tag, "attributes cannot carry relation alignment"))
            elif not 1 <= e.rel_alignment <= len(sent):
                v.append(Violation("relation-alignment", tag, f"word {e.rel_alignment} not in sentence"))
            elif not sent.token(e.rel_alignment).is_functional:
                v.append(Violation("relation-alignment", tag,
                                   f"word x{e.rel_alignment} is not flagged functional"))

    if g.root not in names:
        v.append(Violation("root", g.root, "root names no concept"))
    rel_pairs = [(e.src, e.dst) for e in g.relations if e.src in names and e.dst in names]
    cycle = find_cycle([c.var for c in g.concepts], rel_pairs)
    if cycle:
        v.append(Violation("cycle", " -> ".join(cycle), "graph is not acyclic"))
    elif g.root in names:
        reached = {g.root}
        frontier = [g.root]
        adj = defaultdict(list)
        for s, d in rel_pairs:
            adj[s].append(d)
        while frontier:
            for d in adj[frontier.pop()]:
                if d not in reached:
                    reached.add(d)
                    frontier.append(d)
        for c in g.concepts:
            if c.var not in reached:
                v.append(Violation("unreachable", c.var, f"not reachable from root {g.root}"))
    return v


# -- corpus statistics --------------------------------------------------------

@dataclass
class AlignmentStats:
    concepts: int
    counts: Dict[str, int]
    fractions: Dict[str, float]
    aligned_fraction: float
    of_aligned: Dict[str, float]
    tokens: int
    words_covered: int
    relation_alignments: int = 0
    functional_vocab: Dict[str, int] = field(default_factory=dict)

    @property
    def words_covered_fraction(self) -> float:
        return self.words_covered / self.tokens if self.tokens else 0.0


def alignment_stats(corpus: Sequence[AmrGraph]) -> AlignmentStats:
    """Per-variant concept counts/fractions and word coverage over a corpus."""
    if not corpus:
        raise ValueError("alignment_stats needs a non-empty corpus")
    counts = Counter({k: 0 for k in ALIGNMENT_KINDS})
    tokens = covered = ralign = 0
    func_words: Counter = Counter()
    for g in corpus:
        tokens += len(g.sentence)
        words = set()
        for c in g.concepts:
            counts[c.alignment.kind] += 1
            words.update(c.alignment.words)
        covered += len(words)
        for e in g.relations:
            if e.rel_alignment is not None:
                ralign += 1
                func_words[g.sentence.token(e.rel_alignment).surface] += 1
    total = sum(counts.values())
    aligned = total - counts["null"]
    fractions = {k: (counts[k] / total if total else 0.0) for k in ALIGNMENT_KINDS}
    of_aligned = {k: (counts[k] / aligned if aligned else 0.0) for k in ALIGNMENT_KINDS if k != "null"}
    return AlignmentStats(
        concepts=total,
        counts=dict(counts),
        fractions=fractions,
        aligned_fraction=aligned / total if total else 0.0,
        of_aligned=of_aligned,
        tokens=tokens,
        words_covered=covered,
        relation_alignments=ralign,
        functional_vocab=dict(func_words),
    )
