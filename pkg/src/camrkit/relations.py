"""Relation matrix codec.

Matrix participants are the concepts (graph order) followed by the
functional words (sentence order). Cell ``labels[row][col]`` holds the
relation from the start node ``col`` to the end node ``row``, or "O".
A relation aligned to functional word ``w`` is written twice: once between
the two concepts and once between the source concept and ``w``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .graph import AmrGraph, ConceptNode, RelationEdge, Sentence, anchor, find_cycle

NO_RELATION = "O"
Item = Union[str, int]


@dataclass
class RelationMatrix:
    items: Tuple[Item, ...]
    labels: List[List[str]]
    diagnostics: List[str] = field(default_factory=list)

    @classmethod
    def empty(cls, items: Sequence[Item]) -> "RelationMatrix":
        n = len(items)
        return cls(tuple(items), [[NO_RELATION] * n for _ in range(n)])

    def __len__(self):
        return len(self.items)

    def index(self, item: Item) -> int:
        return self.items.index(item)

    def get(self, src: Item, dst: Item) -> str:
        return self.labels[self.index(dst)][self.index(src)]

    def set(self, src: Item, dst: Item, rel: str) -> None:
        self.labels[self.index(dst)][self.index(src)] = rel

    def cells(self) -> Iterable[Tuple[Item, Item, str]]:
        """Non-O cells as (src, dst, label)."""
        for r, row in enumerate(self.labels):
            for c, lbl in enumerate(row):
                if lbl != NO_RELATION:
                    yield self.items[c], self.items[r], lbl

    def to_indices(self, vocab: Sequence[str]) -> np.ndarray:
        """Integer gold array indexed [src, dst]; ``vocab[0]`` must be "O"."""
        lookup = {lbl: i for i, lbl in enumerate(vocab)}
        arr = np.array([[lookup[lbl] for lbl in row] for row in self.labels], dtype=np.int64)
        return arr.T.copy() if len(arr) else arr.reshape(0, 0)

    @classmethod
    def from_indices(cls, items: Sequence[Item], arr: np.ndarray, vocab: Sequence[str]) -> "RelationMatrix":
        m = cls.empty(items)
        for s in range(len(items)):
            for d in range(len(items)):
                if s != d:
                    m.labels[d][s] = vocab[int(arr[s, d])]
        return m

    def to_tsv(self, names: Optional[Dict[Item, str]] = None) -> str:
        """Debug dump: columns are start nodes, rows are end nodes."""
        names = names or {}
        head = [names.get(i, f"x{i}" if isinstance(i, int) else i) for i in self.items]
        lines = ["\t" + "\t".join(head)]
        for h, row in zip(head, self.labels):
            lines.append(h + "\t" + "\t".join(row))
        return "\n".join(lines) + "\n"


def participant_names(concepts: Sequence[ConceptNode], sentence: Sentence) -> Dict[Item, str]:
    names: Dict[Item, str] = {c.var: f"{c.var}/{c.label}" for c in concepts}
    for t in sentence.tokens:
        names[t.index] = f"x{t.index}/{t.surface}"
    return names


def encode_matrix(g: AmrGraph) -> RelationMatrix:
    """Gold relation matrix for a graph, relation alignments included.

    Attribute edges (constant destinations) have no participant and are not
    encoded. A second relation over an already filled cell is dropped with a
    diagnostic.
    """
    func = g.sentence.functional
    m = RelationMatrix.empty([c.var for c in g.concepts] + func)
    func_set = set(func)
    for e in g.relations:
        if m.get(e.src, e.dst) != NO_RELATION:
            m.diagnostics.append(f"parallel relation {e.src} {e.rel} {e.dst} dropped")
            continue
        m.set(e.src, e.dst, e.rel)
    for e in g.relations:
        w = e.rel_alignment
        if w is None:
            continue
        if w not in func_set:
            raise ValueError(f"{g.id}: relation {e.src} {e.rel} {e.dst} aligned to x{w}, "
                             "which is not a functional word of the sentence")
        if m.get(e.src, w) not in (NO_RELATION, e.rel):
            m.diagnostics.append(f"alignment x{w} of {e.src} {e.rel} {e.dst} dropped (cell taken)")
            continue
        m.set(e.src, w, e.rel)
    return m


def matrix_recoverable(g: AmrGraph) -> bool:
    """True when decode_matrix(encode_matrix(g)) is guaranteed to give back g's relations.

    Requires at most one relation per concept pair, no attributes, and every
    aligned relation to be the only one with its (source, label) pair and its
    (source, word) cell.
    """
    if g.attributes:
        return False
    pairs = set()
    src_rel = defaultdict(int)
    src_word = defaultdict(int)
    for e in g.relations:
        if (e.src, e.dst) in pairs:
            return False
        pairs.add((e.src, e.dst))
        src_rel[(e.src, e.rel)] += 1
        if e.rel_alignment is not None:
            src_word[(e.src, e.rel_alignment)] += 1
    for e in g.relations:
        if e.rel_alignment is not None and (src_rel[(e.src, e.rel)] > 1 or src_word[(e.src, e.rel_alignment)] > 1):
            return False
    return True


@dataclass
class MatrixDecoding:
    edges: List[RelationEdge]
    root: Optional[str]
    diagnostics: List[str] = field(default_factory=list)


def _span(c: ConceptNode) -> Tuple[float, float]:
    words = c.alignment.words
    if words:
        return min(words), max(words)
    pos = anchor(c.alignment)
    return (pos, pos) if pos is not None else (float("inf"), float("inf"))


def _distance(w: int, span: Tuple[float, float]) -> float:
    lo, hi = span
    if lo == float("inf"):
        return lo
    return 0 if lo <= w <= hi else min(abs(w - lo), abs(w - hi))


def decode_matrix(
    m: RelationMatrix,
    concepts: Sequence[ConceptNode],
    functional: Sequence[int],
    scores: Optional[np.ndarray] = None,
    vocab: Optional[Sequence[str]] = None,
    fallback_relation: str = "mod",
) -> MatrixDecoding:
    """Read relations, relation alignments and a root off a label matrix.

    ``scores`` (optional, shape [src, dst, class] over ``m.items`` with
    labels ``vocab``) are used to break cycles and label attachment edges.
    Every returned graph is a connected DAG rooted at ``root``.
    """
    diags: List[str] = []
    by_var = {c.var: c for c in concepts}
    pos = {it: k for k, it in enumerate(m.items)}
    func_set = set(functional)
    if scores is not None and vocab is None:
        raise ValueError("scores need the label vocabulary")
    label_ix = {lbl: k for k, lbl in enumerate(vocab)} if vocab is not None else {}

    def score(src, dst, rel):
        if scores is None:
            return None
        return float(scores[pos[src], pos[dst], label_ix[rel]])

    edges: Dict[Tuple[str, str], str] = {}
    align_cells: List[Tuple[str, int, str]] = []
    for src, dst, rel in m.cells():
        if src not in by_var:
            if dst in by_var or dst in func_set:
                diags.append(f"relation from functional word x{src} dropped")
            continue
        if dst in by_var:
            if src != dst:
                edges[(src, dst)] = rel
        elif dst in func_set:
            align_cells.append((src, dst, rel))
        else:
            diags.append(f"relation to unknown participant {dst} dropped")

    def position(var):
        p = anchor(by_var[var].alignment)
        return p if p is not None else float("inf")

    while True:
        cycle = find_cycle(list(by_var), list(edges))
        if not cycle:
            break
        ring = list(zip(cycle, cycle[1:]))
        if scores is not None:
            victim = min(ring, key=lambda e: (score(e[0], e[1], edges[e]), e))
        else:
            victim = max(ring, key=lambda e: (position(e[1]), e[1], e[0]))
        diags.append(f"cycle broken at {victim[0]} {edges[victim]} {victim[1]}")
        del edges[victim]

    # relation alignment: functional cell (c, w, r) -> one edge (c, *, r)
    options = []
    for src, w, rel in align_cells:
        for (s, d), r in edges.items():
            if s == src and r == rel:
                key = (_distance(w, _span(by_var[s])), _distance(w, _span(by_var[d])), w, d)
                options.append((key, (src, w, rel), (s, d)))
    options.sort(key=lambda o: o[0])
    aligned: Dict[Tuple[str, str], int] = {}
    used = set()
    for _, cell, edge in options:
        if cell in used or edge in aligned:
            continue
        used.add(cell)
        aligned[edge] = cell[1]
    for cell in align_cells:
        if cell not in used:
            diags.append(f"alignment x{cell[1]} for {cell[0]} {cell[2]} dropped")

    root = None
    if by_var:
        indeg = {v: 0 for v in by_var}
        outdeg = {v: 0 for v in by_var}
        for s, d in edges:
            indeg[d] += 1
            outdeg[s] += 1
        heads = [v for v in by_var if indeg[v] == 0]
        root = min(heads, key=lambda v: (-outdeg[v], position(v), v))
        for h in sorted(heads, key=lambda v: (position(v), v)):
            if h == root:
                continue
            rel = fallback_relation
            if scores is not None:
                row = [(scores[pos[root], pos[h], k], lbl) for lbl, k in label_ix.items() if lbl != NO_RELATION]
                if row:
                    rel = max(row)[1]
            edges[(root, h)] = rel
            diags.append(f"attached {h} to root {root} via {rel}")

    out = [RelationEdge(s, r, d, aligned.get((s, d))) for (s, d), r in edges.items()]
    out.sort(key=RelationEdge.sort_key)
    return MatrixDecoding(out, root, diags)
