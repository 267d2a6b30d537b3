"""Concept tagging: gold graphs <-> three per-token label sequences.

Surface tags decide which words become concepts and under which alignment,
normalization tags flag words whose concept differs from the word, and
null-concept tags place each null-aligned concept on a trigger word.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .graph import (
    AmrGraph,
    ConceptNode,
    ContinuousMultiword,
    Direct,
    DiscontinuousMultiword,
    Normalization,
    NullAligned,
    Sentence,
    Split,
    aligned_var,
)
from .normalizer import NormalizationDictionaries, normalize_word, read_tsv

O = "O"
B_SINGLE = "B-Single"
B_CONT, I_CONT = "B-ContMW", "I-ContMW"
B_DISC, I_DISC = "B-DiscMW", "I-DiscMW"
B_SPLIT = "B-Split"
B_VIRTUAL = "B-Virtual"
SURFACE_TAGS = (O, B_SINGLE, B_CONT, I_CONT, B_DISC, I_DISC, B_SPLIT, B_VIRTUAL)

VERBATIM, NEEDS_NORM = "Verbatim", "NeedsNorm"
NORM_TAGS = (VERBATIM, NEEDS_NORM)

NO_CONCEPT = "None"
DISC_JOINER = "…"


class TaggingError(ValueError):
    pass


@dataclass(frozen=True)
class TagSequences:
    surface: Tuple[str, ...]
    norm: Tuple[str, ...]
    nullc: Tuple[str, ...]
    # null-aligned concepts whose trigger word was already taken
    unencoded: Tuple[str, ...] = ()

    def __post_init__(self):
        if not len(self.surface) == len(self.norm) == len(self.nullc):
            raise ValueError("tag sequences differ in length")
        for s, n in zip(self.surface, self.norm):
            if n == NEEDS_NORM and s not in (B_SINGLE, B_SPLIT):
                raise ValueError(f"NeedsNorm on a {s} token")

    def __len__(self):
        return len(self.surface)


SplitLexicon = Dict[str, Tuple[str, ...]]


def load_split_lexicon(path: Union[str, Path]) -> SplitLexicon:
    lex = {}
    for row in read_tsv(path):
        parts = tuple(p for p in row[1].split(",") if p)
        if len(parts) < 2:
            raise ValueError(f"split lexicon entry {row[0]!r} needs at least two concepts")
        lex[row[0]] = parts
    return lex


def save_split_lexicon(lex: Mapping[str, Sequence[str]], path: Union[str, Path]) -> None:
    rows = [f"{w}\t{','.join(parts)}\n" for w, parts in sorted(lex.items())]
    Path(path).write_text("".join(rows), encoding="utf-8")


def multiword_label(words: Sequence[str], discontinuous: bool) -> str:
    return (DISC_JOINER if discontinuous else "").join(words)


# -- trigger words ------------------------------------------------------------

def _last_word(c: ConceptNode) -> int:
    return max(c.alignment.words)


def trigger_candidates(g: AmrGraph, var: str) -> List[int]:
    """Trigger words for a null-aligned concept, most preferred first.

    Preference: aligned children (rightmost word first); then aligned
    concepts found by tracing down through null-aligned children, level by
    level; then the same two steps over parents. The first entry is the
    canonical trigger; the rest are fallbacks when it is already taken.
    """
    by_var = {c.var: c for c in g.concepts}
    out: List[int] = []

    def walk(step: Callable[[str], List[str]]):
        seen = {var}
        level = [var]
        while level:
            hits, nxt = [], []
            for v in level:
                for u in step(v):
                    if u in seen or u not in by_var:
                        continue
                    seen.add(u)
                    if by_var[u].is_aligned:
                        hits.append(_last_word(by_var[u]))
                    else:
                        nxt.append(u)
            for w in sorted(set(hits), reverse=True):
                if w not in out:
                    out.append(w)
            level = sorted(nxt)

    walk(g.children)
    walk(g.parents)
    return out


def assign_triggers(g: AmrGraph) -> Tuple[Dict[str, int], List[str]]:
    """Give every null-aligned concept its own trigger word.

    Concepts are handled in graph order; each takes its first candidate not
    already claimed. Returns (var -> word, vars left without a free word).
    Raises TaggingError when a concept has no candidate at all.
    """
    claimed: Dict[int, str] = {}
    out: Dict[str, int] = {}
    unencoded: List[str] = []
    for c in g.concepts:
        if c.is_aligned:
            continue
        cands = trigger_candidates(g, c.var)
        if not cands:
            raise TaggingError(f"{g.id}: null-aligned concept {c.var} ({c.label}) has no trigger word")
        free = [w for w in cands if w not in claimed]
        if not free:
            unencoded.append(c.var)
            continue
        claimed[free[0]] = c.var
        out[c.var] = free[0]
    return out, unencoded


# -- encoding -----------------------------------------------------------------

def encode_tags(g: AmrGraph) -> TagSequences:
    """Derive the three gold tag sequences from an aligned graph."""
    n = len(g.sentence)
    surface = [O] * n
    norm = [VERBATIM] * n
    nullc = [NO_CONCEPT] * n
    for tok in g.sentence.tokens:
        if tok.is_functional:
            surface[tok.index - 1] = B_VIRTUAL
    for c in g.concepts:
        a = c.alignment
        if isinstance(a, (Direct, Normalization)):
            surface[a.word - 1] = B_SINGLE
            if isinstance(a, Normalization):
                norm[a.word - 1] = NEEDS_NORM
        elif isinstance(a, ContinuousMultiword):
            surface[a.words[0] - 1] = B_CONT
            for w in a.words[1:]:
                surface[w - 1] = I_CONT
        elif isinstance(a, DiscontinuousMultiword):
            surface[a.words[0] - 1] = B_DISC
            for w in a.words[1:]:
                surface[w - 1] = I_DISC
        elif isinstance(a, Split):
            surface[a.word - 1] = B_SPLIT
    triggers, unencoded = assign_triggers(g)
    labels = {c.var: c.label for c in g.concepts}
    for var, w in triggers.items():
        nullc[w - 1] = labels[var]
    return TagSequences(tuple(surface), tuple(norm), tuple(nullc), tuple(unencoded))


# -- decoding -----------------------------------------------------------------

def repair_bio(tags: Sequence[str]) -> Tuple[List[str], List[int]]:
    """Promote ill-formed I- tags to B-; returns (tags, repaired 1-based positions).

    I-ContMW must directly follow B-ContMW or I-ContMW; I-DiscMW needs an
    earlier B-DiscMW somewhere to its left.
    """
    out = list(tags)
    fixed = []
    disc_open = False
    for i, t in enumerate(out):
        if t == I_CONT and (i == 0 or out[i - 1] not in (B_CONT, I_CONT)):
            out[i] = B_CONT
            fixed.append(i + 1)
        elif t == I_DISC and not disc_open:
            out[i] = B_DISC
            fixed.append(i + 1)
        if out[i] == B_DISC:
            disc_open = True
    return out, fixed


def is_well_formed(tags: Sequence[str]) -> bool:
    return not repair_bio(tags)[1]


@dataclass
class SurfaceDecoding:
    concepts: List[ConceptNode]
    functional: List[int]
    sentence: Sentence
    diagnostics: List[str] = field(default_factory=list)


Normalizer = Union[NormalizationDictionaries, Callable[[str], str], None]


def _normalize_fn(normalizer: Normalizer) -> Callable[[str], str]:
    if normalizer is None:
        return lambda w: w
    if isinstance(normalizer, NormalizationDictionaries):
        return lambda w: normalize_word(w, normalizer)
    return normalizer


def decode_surface(
    s: Sentence,
    tags: Sequence[str],
    norm: Sequence[str],
    lex: Mapping[str, Sequence[str]],
    normalizer: Normalizer = None,
    strict: bool = True,
) -> SurfaceDecoding:
    """Turn surface + normalization tags into aligned concepts.

    With ``strict=False`` a B-Split word missing from the lexicon becomes a
    single-word concept instead of raising.
    """
    if not len(tags) == len(norm) == len(s):
        raise ValueError("tag sequence length differs from sentence length")
    normalize = _normalize_fn(normalizer)
    tags, repaired = repair_bio(tags)
    diags = [f"bio-repair x{i}" for i in repaired]
    words = s.words
    concepts: List[ConceptNode] = []
    functional: List[int] = []

    def single(i: int):
        w = words[i - 1]
        if norm[i - 1] == NEEDS_NORM:
            label = normalize(w)
            if label != w:
                concepts.append(ConceptNode(f"x{i}", label, Normalization(i, w)))
                return
            diags.append(f"unnormalized x{i} {w}")
        concepts.append(ConceptNode(f"x{i}", w, Direct(i)))

    def multi(idx: List[int]):
        if len(idx) == 1:
            diags.append(f"singleton multiword x{idx[0]}")
            single(idx[0])
            return
        consecutive = all(b == a + 1 for a, b in zip(idx, idx[1:]))
        a = ContinuousMultiword(tuple(idx)) if consecutive else DiscontinuousMultiword(tuple(idx))
        label = multiword_label([words[i - 1] for i in idx], not consecutive)
        concepts.append(ConceptNode(aligned_var(a), label, a))

    disc_groups: List[List[int]] = []
    i = 1
    while i <= len(tags):
        t = tags[i - 1]
        if t == B_SINGLE:
            single(i)
        elif t == B_CONT:
            j = i
            while j < len(tags) and tags[j] == I_CONT:
                j += 1
            multi(list(range(i, j + 1)))
            i = j
        elif t == B_DISC:
            disc_groups.append([i])
        elif t == I_DISC:
            disc_groups[-1].append(i)
        elif t == B_SPLIT:
            parts = lex.get(words[i - 1])
            if not parts:
                if strict:
                    raise TaggingError(f"split word {words[i - 1]!r} is not in the split lexicon")
                diags.append(f"unknown split word x{i} {words[i - 1]}")
                single(i)
            else:
                for k, label in enumerate(parts, 1):
                    a = Split(i, k)
                    concepts.append(ConceptNode(aligned_var(a), label, a))
        elif t == B_VIRTUAL:
            functional.append(i)
        i += 1
    for grp in disc_groups:
        if len(grp) > 1 and all(b == a + 1 for a, b in zip(grp, grp[1:])):
            diags.append(f"gapless discontinuous group x{grp[0]}")
        multi(grp)

    concepts.sort(key=lambda c: (c.alignment.words[0], getattr(c.alignment, "part", 0)))
    return SurfaceDecoding(concepts, functional, s.with_functional(functional), diags)


def decode_null_concepts(
    s: Sentence, nullc: Sequence[str], aligned: Sequence[ConceptNode] = ()
) -> List[ConceptNode]:
    """One null-aligned concept per non-None tag, named z1, z2, ... in token order."""
    if len(nullc) != len(s):
        raise ValueError("tag sequence length differs from sentence length")
    taken = {c.var for c in aligned}
    out = []
    k = 0
    for i, label in enumerate(nullc, 1):
        if label == NO_CONCEPT:
            continue
        k += 1
        while f"z{k}" in taken:
            k += 1
        out.append(ConceptNode(f"z{k}", label, NullAligned(i)))
    return out


# -- oracle comparison helpers ------------------------------------------------

def concept_signature(concepts: Iterable[ConceptNode], triggers: Optional[Mapping[str, int]] = None) -> Counter:
    """Multiset of (label, kind, words, part, trigger) ignoring null-concept names."""
    sig: Counter = Counter()
    for c in concepts:
        a = c.alignment
        if isinstance(a, NullAligned):
            trig = triggers.get(c.var) if triggers is not None else a.trigger_word
            sig[(c.label, a.kind, (), 0, trig)] += 1
        else:
            sig[(c.label, a.kind, tuple(a.words), getattr(a, "part", 0), None)] += 1
    return sig


def lexicon_gaps(g: AmrGraph, lex: Mapping[str, Sequence[str]], dicts: Optional[NormalizationDictionaries]) -> List[str]:
    """Split words or normalizations the resources cannot reproduce."""
    gaps = []
    words = g.sentence.words
    parts: Dict[int, Dict[int, str]] = {}
    for c in g.concepts:
        a = c.alignment
        if isinstance(a, Split):
            parts.setdefault(a.word, {})[a.part] = c.label
        elif isinstance(a, Normalization):
            got = normalize_word(a.surface_form, dicts) if dicts is not None else a.surface_form
            if got != c.label:
                gaps.append(f"normalization x{a.word}: {a.surface_form} -> {got}, gold {c.label}")
    for w, ps in sorted(parts.items()):
        gold = tuple(ps[k] for k in sorted(ps))
        if tuple(lex.get(words[w - 1], ())) != gold:
            gaps.append(f"split x{w}: {words[w - 1]} not in lexicon as {','.join(gold)}")
    return gaps


def oracle_concepts(g: AmrGraph, lex, dicts) -> Tuple[List[ConceptNode], Sentence, List[str]]:
    """Decode the gold tags of ``g`` back into concepts (stage-1 oracle)."""
    tags = encode_tags(g)
    dec = decode_surface(g.sentence, tags.surface, tags.norm, lex, dicts, strict=False)
    nulls = decode_null_concepts(g.sentence, tags.nullc, dec.concepts)
    return dec.concepts + nulls, dec.sentence, dec.diagnostics


def build_null_inventory(corpus: Iterable[AmrGraph]) -> List[str]:
    """Null-aligned concept labels, most frequent first (ties alphabetical)."""
    cnt = Counter(c.label for g in corpus for c in g.concepts if not c.is_aligned)
    return [lbl for lbl, _ in sorted(cnt.items(), key=lambda kv: (-kv[1], kv[0]))]
