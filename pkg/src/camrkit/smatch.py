"""Alignment-aware Smatch.

Triples carry alignment payloads: an instance triple carries its concept's
aligned word set, and a relation aligned to a functional word contributes
either an extra relation-alignment triple (``relation_alignment="separate"``,
the default) or must match as part of the relation triple itself
(``"joint"``). ``instance_alignment="ignore"`` drops the word sets and
recovers classic Smatch on instances.
"""
from __future__ import annotations

import hashlib
import itertools
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

from .graph import AmrGraph

TOP = "TOP"
ROWS = ("AlignSmatch", "Only Instance", "Only Attribute", "Only Relation")


@dataclass(frozen=True)
class TripleBag:
    instances: FrozenSet[Tuple[str, str, Tuple[int, ...]]]
    attributes: FrozenSet[Tuple[str, str, str]]
    relations: FrozenSet[Tuple[str, str, str, Optional[int]]]

    @property
    def variables(self) -> List[str]:
        return sorted({v for v, _, _ in self.instances})

    def __len__(self):
        return len(self.instances) + len(self.attributes) + len(self.relations)


def extract_triples(g: AmrGraph) -> TripleBag:
    """Instance triples with word-set payloads, attributes plus the root, relations with alignment."""
    inst = frozenset((c.var, c.label, tuple(sorted(c.alignment.words))) for c in g.concepts)
    attrs = {(e.src, e.rel, e.dst) for e in g.attributes}
    attrs.add((g.root, TOP, g.concept(g.root).label))
    rels = frozenset((e.src, e.rel, e.dst, e.rel_alignment) for e in g.relations)
    return TripleBag(inst, frozenset(attrs), rels)


@dataclass(frozen=True)
class MatchConfig:
    instance_alignment: str = "exact"       # exact | ignore
    relation_alignment: str = "separate"    # separate | joint | ignore

    def __post_init__(self):
        if self.instance_alignment not in ("exact", "ignore"):
            raise ValueError(f"instance_alignment must be exact or ignore, got {self.instance_alignment!r}")
        if self.relation_alignment not in ("separate", "joint", "ignore"):
            raise ValueError(f"relation_alignment must be separate, joint or ignore, got {self.relation_alignment!r}")


class Prepared(NamedTuple):
    # unary[var] = list of (kind, key) matched against the other side's var; kind: i/a
    unary: Dict[str, List[Tuple[str, tuple]]]
    # binary triples: (kind, v1, key, v2); kind: r (relation) or l (relation alignment)
    binary: List[Tuple[str, str, tuple, str]]
    counts: Dict[str, int]


def prepare(bag: TripleBag, cfg: MatchConfig) -> Prepared:
    unary: Dict[str, List[Tuple[str, tuple]]] = defaultdict(list)
    counts = {"instance": 0, "attribute": 0, "relation": 0}
    seen = set()
    for v, lbl, words in bag.instances:
        key = (lbl, words if cfg.instance_alignment == "exact" else ())
        if (v, "i", key) not in seen:
            seen.add((v, "i", key))
            unary[v].append(("i", key))
            counts["instance"] += 1
    for v, rel, const in bag.attributes:
        unary[v].append(("a", (rel, const)))
        counts["attribute"] += 1
    binary = set()
    for v1, rel, v2, w in bag.relations:
        if cfg.relation_alignment == "joint":
            binary.add(("r", v1, (rel, w), v2))
        else:
            binary.add(("r", v1, (rel,), v2))
            if cfg.relation_alignment == "separate" and w is not None:
                binary.add(("l", v1, (rel, w), v2))
    counts["relation"] = len(binary)
    return Prepared(dict(unary), sorted(binary, key=repr), counts)


CATEGORY = {"i": "instance", "a": "attribute", "r": "relation", "l": "relation"}


class _Scorer:
    """Match counting between two prepared bags for a given mapping."""

    def __init__(self, pred: Prepared, gold: Prepared):
        self.pred = pred
        self.gold = gold
        gold_unary = {v: set(items) for v, items in gold.unary.items()}
        # unary gain of mapping p -> g, per category
        self.unary: Dict[Tuple[str, str], Dict[str, int]] = {}
        for p, items in pred.unary.items():
            for g, gitems in gold_unary.items():
                got: Dict[str, int] = defaultdict(int)
                for kind, key in items:
                    if (kind, key) in gitems:
                        got[CATEGORY[kind]] += 1
                if got:
                    self.unary[(p, g)] = dict(got)
        self.gold_binary = set(gold.binary)

    def categories(self, mapping: Dict[str, Optional[str]]) -> Dict[str, int]:
        out = {"instance": 0, "attribute": 0, "relation": 0}
        for p, g in mapping.items():
            if g is None:
                continue
            for cat, n in self.unary.get((p, g), {}).items():
                out[cat] += n
        for kind, v1, key, v2 in self.pred.binary:
            g1, g2 = mapping.get(v1), mapping.get(v2)
            if g1 is not None and g2 is not None and (kind, g1, key, g2) in self.gold_binary:
                out["relation"] += 1
        return out

    def total(self, mapping) -> int:
        return sum(self.categories(mapping).values())


class Score(NamedTuple):
    precision: float
    recall: float
    f1: float


def prf(matched: int, n_pred: int, n_gold: int) -> Score:
    if n_pred == 0 and n_gold == 0:
        return Score(1.0, 1.0, 1.0)
    p = matched / n_pred if n_pred else 0.0
    r = matched / n_gold if n_gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return Score(p, r, f)


@dataclass
class MatchResult:
    score: Score
    mapping: Dict[str, Optional[str]]
    matched: int
    n_pred: int
    n_gold: int
    by_category: Dict[str, Tuple[int, int, int]] = field(default_factory=dict)  # matched, pred, gold

    def __iter__(self):
        # unpacks as (P, R, F1, mapping)
        return iter((*self.score, self.mapping))


def _hill_climb(sc: _Scorer, pvars: List[str], gvars: List[str], start: Dict[str, Optional[str]]):
    mapping = dict(start)
    best = sc.total(mapping)
    while True:
        used = {g for g in mapping.values() if g is not None}
        free = [g for g in gvars if g not in used]
        best_move, best_gain = None, 0
        for p in pvars:
            cur = mapping[p]
            for g in free + ([None] if cur is not None else []):
                mapping[p] = g
                gain = sc.total(mapping) - best
                if gain > best_gain:
                    best_gain, best_move = gain, ("set", p, g)
                mapping[p] = cur
        for a, b in itertools.combinations(pvars, 2):
            ga, gb = mapping[a], mapping[b]
            if ga == gb:
                continue
            mapping[a], mapping[b] = gb, ga
            gain = sc.total(mapping) - best
            if gain > best_gain:
                best_gain, best_move = gain, ("swap", a, b)
            mapping[a], mapping[b] = ga, gb
        if best_move is None:
            return mapping, best
        if best_move[0] == "set":
            mapping[best_move[1]] = best_move[2]
        else:
            _, a, b = best_move
            mapping[a], mapping[b] = mapping[b], mapping[a]
        best += best_gain


def canonical_order(bag: TripleBag, rounds: int = 3) -> List[str]:
    """Variables ordered by a name-free structural fingerprint.

    Colors start from each variable's instances and attributes and are
    refined over neighbouring colors; names only break ties between
    structurally identical variables. Searching in this order makes the
    matcher independent of how either side names its variables.
    """
    def digest(x) -> str:
        return hashlib.blake2b(repr(x).encode("utf-8"), digest_size=8).hexdigest()

    inst, attrs = defaultdict(list), defaultdict(list)
    for v, lbl, words in bag.instances:
        inst[v].append((lbl, words))
    for v, rel, const in bag.attributes:
        attrs[v].append((rel, const))
    color = {v: digest((sorted(inst[v]), sorted(attrs[v]))) for v in bag.variables}
    for _ in range(rounds):
        out, into = defaultdict(list), defaultdict(list)
        for a, rel, b, w in bag.relations:
            w = -1 if w is None else w
            out[a].append((rel, w, color.get(b, "")))
            into[b].append((rel, w, color.get(a, "")))
        color = {v: digest((color[v], sorted(out[v]), sorted(into[v]))) for v in color}
    return sorted(color, key=lambda v: (color[v], v))


def _label_init(pred: TripleBag, gold: TripleBag, cfg: MatchConfig, rng: Optional[random.Random],
                porder: List[str], gorder: List[str]):
    """Map predicted vars to gold vars with the same concept label (and word set)."""
    gold_by_key = defaultdict(list)
    grank = {v: k for k, v in enumerate(gorder)}
    prank = {v: k for k, v in enumerate(porder)}
    for v, lbl, words in sorted(gold.instances, key=lambda t: (grank[t[0]], t[1:])):
        gold_by_key[(lbl, words if cfg.instance_alignment == "exact" else ())].append(v)
        if cfg.instance_alignment == "exact":
            gold_by_key[(lbl, None)].append(v)
    used = set()
    mapping: Dict[str, Optional[str]] = {}
    order = sorted(pred.instances, key=lambda t: (prank[t[0]], t[1:]))
    if rng is not None:
        rng.shuffle(order)
    for v, lbl, words in order:
        key = (lbl, words if cfg.instance_alignment == "exact" else ())
        cands = [g for g in gold_by_key.get(key, []) + gold_by_key.get((lbl, None), []) if g not in used]
        if rng is not None:
            rng.shuffle(cands)
        mapping[v] = cands[0] if cands else None
        if cands:
            used.add(cands[0])
    for v in porder:
        mapping.setdefault(v, None)
    return mapping


def _random_init(pvars, gvars, rng: random.Random):
    order = list(gvars) + [None] * max(0, len(pvars) - len(gvars))
    rng.shuffle(order)
    return {p: order[k] for k, p in enumerate(pvars)}


def _result(sc: _Scorer, mapping, pred: Prepared, gold: Prepared) -> MatchResult:
    cats = sc.categories(mapping)
    matched = sum(cats.values())
    n_pred = sum(pred.counts.values())
    n_gold = sum(gold.counts.values())
    by_cat = {c: (cats[c], pred.counts[c], gold.counts[c]) for c in cats}
    return MatchResult(prf(matched, n_pred, n_gold), mapping, matched, n_pred, n_gold, by_cat)


def match_score(
    pred: TripleBag,
    gold: TripleBag,
    restarts: int = 16,
    seed: int = 0,
    cfg: MatchConfig = MatchConfig(),
) -> MatchResult:
    """Best variable mapping by restarted hill climbing; deterministic for a seed.

    The first start maps equal concept labels; the others are biased-random
    (half label-seeded with shuffling, half uniform).
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    pp, gp = prepare(pred, cfg), prepare(gold, cfg)
    sc = _Scorer(pp, gp)
    pvars, gvars = canonical_order(pred), canonical_order(gold)
    rng = random.Random(seed)
    best_map, best = None, -1
    for k in range(restarts):
        if k == 0:
            start = _label_init(pred, gold, cfg, None, pvars, gvars)
        elif k % 2:
            start = _label_init(pred, gold, cfg, rng, pvars, gvars)
        else:
            start = _random_init(pvars, gvars, rng)
        mapping, total = _hill_climb(sc, pvars, gvars, start)
        if total > best:
            best, best_map = total, mapping
        if best == min(sum(pp.counts.values()), sum(gp.counts.values())):
            break
    return _result(sc, best_map, pp, gp)


class MappingLimitError(ValueError):
    pass


def _count_matches(pred: Prepared, gold: Prepared, mapping: Dict[str, str]) -> int:
    gold_unary = {(v, kind, key) for v, items in gold.unary.items() for kind, key in items}
    gold_bin = set(gold.binary)
    n = 0
    for v, items in pred.unary.items():
        g = mapping.get(v)
        if g is not None:
            n += sum((g, kind, key) in gold_unary for kind, key in items)
    for kind, v1, key, v2 in pred.binary:
        if v1 in mapping and v2 in mapping and (kind, mapping[v1], key, mapping[v2]) in gold_bin:
            n += 1
    return n


def brute_force_score(pred: TripleBag, gold: TripleBag, cfg: MatchConfig = MatchConfig(), max_vars: int = 8) -> Score:
    """Exact optimum by enumerating every maximal injective mapping.

    Mapping an extra variable never lowers the match count, so non-maximal
    mappings are dominated and skipped.
    """
    pvars, gvars = pred.variables, gold.variables
    if max(len(pvars), len(gvars)) > max_vars:
        raise MappingLimitError(f"brute force limited to {max_vars} variables per graph")
    pp, gp = prepare(pred, cfg), prepare(gold, cfg)
    best = 0
    if len(pvars) <= len(gvars):
        for image in itertools.permutations(gvars, len(pvars)):
            best = max(best, _count_matches(pp, gp, dict(zip(pvars, image))))
    else:
        for chosen in itertools.permutations(pvars, len(gvars)):
            best = max(best, _count_matches(pp, gp, dict(zip(chosen, gvars))))
    return prf(best, sum(pp.counts.values()), sum(gp.counts.values()))


def fine_grained(pred: TripleBag, gold: TripleBag, mapping: Dict[str, Optional[str]],
                 cfg: MatchConfig = MatchConfig()) -> Dict[str, Score]:
    """Instance / attribute / relation rows under one fixed mapping."""
    pp, gp = prepare(pred, cfg), prepare(gold, cfg)
    cats = _Scorer(pp, gp).categories(mapping)
    return {
        "Only Instance": prf(cats["instance"], pp.counts["instance"], gp.counts["instance"]),
        "Only Attribute": prf(cats["attribute"], pp.counts["attribute"], gp.counts["attribute"]),
        "Only Relation": prf(cats["relation"], pp.counts["relation"], gp.counts["relation"]),
    }


@dataclass
class CorpusScore:
    """Micro-averaged counts over sentences."""

    counts: Dict[str, List[int]] = field(default_factory=lambda: {
        "instance": [0, 0, 0], "attribute": [0, 0, 0], "relation": [0, 0, 0]})
    sentences: int = 0

    def add(self, result: MatchResult) -> None:
        self.sentences += 1
        for cat, (m, p, g) in result.by_category.items():
            row = self.counts[cat]
            row[0] += m
            row[1] += p
            row[2] += g

    def rows(self) -> Dict[str, Score]:
        tot = [sum(self.counts[c][k] for c in self.counts) for k in range(3)]
        return {
            "AlignSmatch": prf(*tot),
            "Only Instance": prf(*self.counts["instance"]),
            "Only Attribute": prf(*self.counts["attribute"]),
            "Only Relation": prf(*self.counts["relation"]),
        }


def score_corpus(pred: Sequence[AmrGraph], gold: Sequence[AmrGraph], restarts: int = 16, seed: int = 0,
                 cfg: MatchConfig = MatchConfig()) -> CorpusScore:
    if len(pred) != len(gold):
        raise ValueError(f"{len(pred)} predicted graphs vs {len(gold)} gold graphs")
    total = CorpusScore()
    for p, g in zip(pred, gold):
        if p.id != g.id:
            raise ValueError(f"sentence id mismatch: {p.id} vs {g.id}")
        total.add(match_score(extract_triples(p), extract_triples(g), restarts, seed, cfg))
    return total


def format_report(rows: Dict[str, Score], style: str = "tsv", digits: int = 4) -> str:
    if style == "tsv":
        lines = ["Task\tPrecision\tRecall\tF1"]
        for name in ROWS:
            s = rows[name]
            lines.append(f"{name}\t{s.precision:.{digits}f}\t{s.recall:.{digits}f}\t{s.f1:.{digits}f}")
        return "\n".join(lines) + "\n"
    width = max(len(r) for r in ROWS) + 4
    lines = [f"{'Task':<{width}}{'Precision':>10}{'Recall':>10}{'F1':>10}"]
    for name in ROWS:
        s = rows[name]
        label = name if name == "AlignSmatch" else "  - " + name
        lines.append(f"{label:<{width}}{s.precision:>10.{digits}f}{s.recall:>10.{digits}f}{s.f1:>10.{digits}f}")
    return "\n".join(lines) + "\n"
