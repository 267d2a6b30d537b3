"""Statistical word normalization for concepts that differ from their word.

Four cases are covered, tried in this order by :func:`normalize_word`:

1. special concepts (不 -> "-", 在 -> be-located-at-91) from a curated map,
2. numerals converted to Arabic digits,
3. the most frequent gold concept for the word in the training corpus,
4. spelling correction against a lexicon using phonological and
   calligraphical character codes.

A word matching none of them is returned unchanged.
"""
from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .graph import AmrGraph, Direct, Normalization
from .numerals import has_fraction, normalize_number

log = logging.getLogger(__name__)

PathLike = Union[str, Path]


def read_tsv(path: PathLike) -> List[List[str]]:
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        rows.append(line.rstrip("\n").split("\t"))
    return rows


def load_codes(path: PathLike) -> Dict[str, Tuple[str, ...]]:
    """Code file: ``word<TAB>code`` where a multi-character code is space separated per character."""
    return {row[0]: tuple(row[1].split()) for row in read_tsv(path) if len(row) >= 2}


def _latin_initial_match(a: str, b: str) -> bool:
    # an abbreviation letter (J) stands for any syllable starting with it (jing1)
    if len(a) == 1 and a.isascii() and a.isalpha():
        return b[:1].lower() == a.lower()
    if len(b) == 1 and b.isascii() and b.isalpha():
        return a[:1].lower() == b.lower()
    return False


def code_distance(a: Sequence[str], b: Sequence[str], initials: bool = False) -> int:
    """Levenshtein distance between two per-character code sequences."""
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            same = x == y or (initials and _latin_initial_match(x, y))
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (0 if same else 1)))
        prev = cur
    return prev[-1]


@dataclass
class ErrorIndex:
    """Lexicon searchable by phonological and calligraphical code distance."""

    lexicon: Dict[str, str] = field(default_factory=dict)
    phonological: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    calligraphical: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    threshold: int = 1

    def encode(self, word: str, table: Mapping[str, Tuple[str, ...]]) -> Tuple[str, ...]:
        if word in table:
            return table[word]
        out: List[str] = []
        for ch in word:
            out.extend(table.get(ch, (ch,)))
        return tuple(out)

    def distance(self, a: str, b: str) -> Tuple[int, int]:
        """(min, sum) of the two code distances."""
        dp = code_distance(self.encode(a, self.phonological), self.encode(b, self.phonological), initials=True)
        dc = code_distance(self.encode(a, self.calligraphical), self.encode(b, self.calligraphical))
        return min(dp, dc), dp + dc

    def nearest(self, word: str) -> Optional[Tuple[str, int]]:
        if word in self.lexicon:
            return word, 0
        best = None
        for entry in self.lexicon:
            d, tie = self.distance(word, entry)
            key = (d, tie, entry)
            if best is None or key < best:
                best = key
        if best is None or best[0] > self.threshold:
            return None
        return best[2], best[0]


@dataclass
class NormalizationDictionaries:
    counts: Dict[str, Dict[str, int]] = field(default_factory=dict)
    special_map: Dict[str, str] = field(default_factory=dict)
    error_index: ErrorIndex = field(default_factory=ErrorIndex)

    @property
    def freq_map(self) -> Dict[str, Tuple[str, int]]:
        """word -> (modal concept, its count); ties go to the smallest concept string."""
        out = {}
        for word, cnt in self.counts.items():
            concept, n = min(cnt.items(), key=lambda kv: (-kv[1], kv[0]))
            out[word] = (concept, n)
        return out

    def save(self, directory: PathLike) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        rows = [f"{w}\t{c}\t{n}" for w in sorted(self.counts) for c, n in sorted(self.counts[w].items())]
        (d / "freq.tsv").write_text("".join(r + "\n" for r in rows), encoding="utf-8")
        rows = [f"{w}\t{c}" for w, c in sorted(self.special_map.items())]
        (d / "special.tsv").write_text("".join(r + "\n" for r in rows), encoding="utf-8")
        ix = self.error_index
        rows = [f"{w}\t{c}" for w, c in sorted(ix.lexicon.items())]
        (d / "error_lexicon.tsv").write_text("".join(r + "\n" for r in rows), encoding="utf-8")
        for name, table in (("phonological.tsv", ix.phonological), ("calligraphical.tsv", ix.calligraphical)):
            rows = [f"{w}\t{' '.join(c)}" for w, c in sorted(table.items())]
            (d / name).write_text("".join(r + "\n" for r in rows), encoding="utf-8")
        (d / "threshold.txt").write_text(f"{ix.threshold}\n", encoding="utf-8")

    @classmethod
    def load(cls, directory: PathLike) -> "NormalizationDictionaries":
        d = Path(directory)
        counts: Dict[str, Dict[str, int]] = defaultdict(dict)
        for row in read_tsv(d / "freq.tsv"):
            counts[row[0]][row[1]] = int(row[2])
        special = {r[0]: r[1] for r in read_tsv(d / "special.tsv")}
        ix = ErrorIndex(
            lexicon={r[0]: r[1] for r in read_tsv(d / "error_lexicon.tsv")},
            phonological=load_codes(d / "phonological.tsv"),
            calligraphical=load_codes(d / "calligraphical.tsv"),
            threshold=int((d / "threshold.txt").read_text().strip()),
        )
        return cls(dict(counts), special, ix)


def build_dictionaries(
    corpus: Sequence[AmrGraph],
    special_map: Optional[Mapping[str, str]] = None,
    error_lexicon: Optional[Mapping[str, str]] = None,
    phonological: Optional[Mapping[str, Tuple[str, ...]]] = None,
    calligraphical: Optional[Mapping[str, Tuple[str, ...]]] = None,
    threshold: int = 1,
) -> NormalizationDictionaries:
    """Count word -> concept over Normalization alignments of a training corpus.

    The error-correction lexicon is the union of ``error_lexicon``, every
    normalized word (mapped to its modal concept) and every directly aligned
    word (mapped to itself).
    """
    if not corpus:
        raise ValueError("build_dictionaries needs a non-empty corpus")
    counts: Dict[str, Counter] = defaultdict(Counter)
    direct_words = set()
    for g in corpus:
        for c in g.concepts:
            a = c.alignment
            if isinstance(a, Normalization):
                counts[a.surface_form][c.label] += 1
            elif isinstance(a, Direct):
                direct_words.add(c.label)
    d = NormalizationDictionaries(
        counts={w: dict(cnt) for w, cnt in counts.items()},
        special_map=dict(special_map or {}),
    )
    lexicon = {w: w for w in direct_words}
    lexicon.update({w: c for w, (c, _) in d.freq_map.items()})
    lexicon.update(error_lexicon or {})
    d.error_index = ErrorIndex(
        lexicon=lexicon,
        phonological=dict(phonological or {}),
        calligraphical=dict(calligraphical or {}),
        threshold=threshold,
    )
    return d


def correct_error(word: str, d: NormalizationDictionaries) -> Optional[str]:
    """Concept of the closest lexicon entry within the distance threshold."""
    hit = d.error_index.nearest(word)
    if hit is None:
        return None
    return d.error_index.lexicon[hit[0]]


def normalize_word_traced(word: str, d: NormalizationDictionaries) -> Tuple[str, str]:
    """Like :func:`normalize_word` but also names the rule that fired."""
    if word in d.special_map:
        return d.special_map[word], "special"
    if has_fraction(word):
        log.warning("fraction numeral %r is not converted", word)
    else:
        num = normalize_number(word)
        if num is not None:
            return num, "number"
    freq = d.counts.get(word)
    if freq:
        return min(freq.items(), key=lambda kv: (-kv[1], kv[0]))[0], "frequency"
    fixed = correct_error(word, d)
    if fixed is not None:
        return fixed, "correction"
    return word, "unresolved"


def normalize_word(word: str, d: NormalizationDictionaries) -> str:
    return normalize_word_traced(word, d)[0]


def load_special_map(path: PathLike) -> Dict[str, str]:
    return {row[0]: row[1] for row in read_tsv(path) if len(row) >= 2}


def load_error_lexicon(path: PathLike) -> Dict[str, str]:
    """``word<TAB>concept`` rows; a bare word maps to itself."""
    out = {}
    for row in read_tsv(path):
        out[row[0]] = row[1] if len(row) > 1 and row[1] else row[0]
    return out
