"""Seeded synthetic corpus of aligned Chinese AMR graphs.

Sentences are instantiated from a handful of templates that together use
every alignment kind, functional words with relation alignment, null-aligned
concepts with direct and traced-back triggers, and unaligned filler words.
The generator records its own counts in a manifest so corpus statistics can
be checked against ground truth.
"""
from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

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
    aligned_var,
)
from .tagging import multiword_label

NOUNS = ["学生", "老师", "公司", "城市", "问题", "计划", "朋友", "政府", "工人", "孩子",
         "医院", "学校", "报告", "市场", "技术", "农民", "科学家", "项目"]
NAMES = [("钱塘江", "大潮"), ("北京", "大学"), ("中国", "银行"), ("长江", "大桥"),
         ("上海", "博物馆"), ("黄河", "流域")]
VERBS = {"喜欢": "喜欢-01", "支持": "支持-01", "研究": "研究-01", "参加": "参加-01",
         "发展": "发展-01", "完成": "完成-01", "提出": "提出-01", "讨论": "讨论-01",
         "称为": "称为-01", "合作": "合作-01", "了解": "了解-01", "保护": "保护-01"}
NAMING_VERBS = ["称为", "叫做"]
NUMBERS = {"三": "3", "五": "5", "一万": "10000", "两千": "2000", "十五": "15", "一百": "100",
           "二十": "20", "七": "7"}
ORDINALS = {"第一": "1", "第二": "2", "第三": "3"}
MEASURES = ["个", "位", "项", "批"]
NEGATIONS = ["不", "没有"]
MISSPELT = {"暴光": "曝光-01"}
DISC_PATTERNS = [("在", "上"), ("在", "中"), ("从", "起")]
SPLITS = {"歌手": ("person", "唱-01"), "作者": ("person", "写-01"), "记者": ("person", "报道-01")}
# words whose gold concepts the shipped resources cannot reproduce
GAP_SPLITS = {"画家": ("person", "画-01")}
GAP_SENSES = {"支持": "支持-02", "发展": "发展-02"}

VERBS["叫做"] = "叫做-01"


@dataclass
class Manifest:
    sentences: int = 0
    tokens: int = 0
    alignment_counts: Counter = field(default_factory=Counter)
    relations: int = 0
    relation_alignments: int = 0
    attributes: int = 0
    null_labels: Counter = field(default_factory=Counter)
    templates: Counter = field(default_factory=Counter)
    gaps: int = 0
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "sentences": self.sentences,
            "tokens": self.tokens,
            "alignment_counts": dict(sorted(self.alignment_counts.items())),
            "relations": self.relations,
            "relation_alignments": self.relation_alignments,
            "attributes": self.attributes,
            "null_labels": dict(sorted(self.null_labels.items())),
            "templates": dict(sorted(self.templates.items())),
            "gaps": self.gaps,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n"


class _Builder:
    def __init__(self):
        self.words: List[str] = []
        self.functional: List[int] = []
        self.concepts: List[ConceptNode] = []
        self.edges: List[RelationEdge] = []
        self._z = 0

    def word(self, w: str, functional: bool = False) -> int:
        self.words.append(w)
        if functional:
            self.functional.append(len(self.words))
        return len(self.words)

    def add(self, label: str, alignment) -> str:
        var = aligned_var(alignment)
        if var is None:
            self._z += 1
            var = f"z{self._z}"
        self.concepts.append(ConceptNode(var, label, alignment))
        return var

    def direct(self, i: int) -> str:
        return self.add(self.words[i - 1], Direct(i))

    def norm(self, i: int, label: str) -> str:
        return self.add(label, Normalization(i, self.words[i - 1]))

    def null(self, label: str) -> str:
        return self.add(label, NullAligned())

    def rel(self, src: str, rel: str, dst: str, ralign: Optional[int] = None):
        self.edges.append(RelationEdge(src, rel, dst, ralign))

    def graph(self, sid: str, root: str) -> AmrGraph:
        return AmrGraph(Sentence.from_words(sid, self.words, self.functional), self.concepts, self.edges, root)


class SyntheticCorpus:
    """Template sampler. ``gap_rate`` > 0 plants split words and senses the shipped resources miss."""

    def __init__(self, seed: int = 0, gap_rate: float = 0.0):
        self.rng = random.Random(seed)
        self.gap_rate = gap_rate
        self.manifest = Manifest(seed=seed)
        self.templates = [
            self.t_naming, self.t_negation, self.t_coordination, self.t_location,
            self.t_split, self.t_null_chain, self.t_correction, self.t_ba, self.t_copula,
        ]

    # helpers ---------------------------------------------------------------
    def _gap(self) -> bool:
        return self.gap_rate > 0 and self.rng.random() < self.gap_rate

    def _verb(self, b: _Builder, pool=None) -> str:
        w = self.rng.choice(pool or [v for v in VERBS if v not in NAMING_VERBS])
        i = b.word(w)
        label = VERBS[w]
        if w in GAP_SENSES and self._gap():
            label = GAP_SENSES[w]
            self.manifest.gaps += 1
        return b.norm(i, label)

    def _noun(self, b: _Builder, exclude=()) -> str:
        return b.direct(b.word(self.rng.choice([n for n in NOUNS if n not in exclude])))

    def _name(self, b: _Builder) -> str:
        a, c = self.rng.choice(NAMES)
        i, j = b.word(a), b.word(c)
        return b.add(a + c, ContinuousMultiword((i, j)))

    # templates ---------------------------------------------------------------
    def t_naming(self, b: _Builder) -> str:
        # NAME 被 称为 NOUN
        name = self._name(b)
        bei = b.word("被", functional=True)
        verb = self._verb(b, NAMING_VERBS)
        obj = self._noun(b)
        event = b.null("Event")
        b.rel(verb, "arg1", event, bei)
        b.rel(event, "mod", name)
        b.rel(verb, "arg2", obj)
        return verb

    def t_negation(self, b: _Builder) -> str:
        # NOUN 不 VERB NOUN
        subj = self._noun(b)
        neg_word = self.rng.choice(NEGATIONS)
        neg = b.norm(b.word(neg_word), "-")
        verb = self._verb(b)
        obj = self._noun(b, exclude=[b.words[0]])
        b.rel(verb, "arg0", subj)
        b.rel(verb, "arg1", obj)
        b.rel(verb, "polarity", neg)
        return verb

    def t_coordination(self, b: _Builder) -> str:
        # NOUN 和 NOUN VERB NUM MEASURE NOUN
        left = self._noun(b)
        he = b.word("和", functional=True)
        right = self._noun(b, exclude=[b.words[0]])
        verb = self._verb(b)
        num_word = self.rng.choice(list(NUMBERS))
        num = b.norm(b.word(num_word), NUMBERS[num_word])
        b.word(self.rng.choice(MEASURES))
        obj = self._noun(b)
        conj = b.null("and")
        b.rel(conj, "op1", left)
        b.rel(conj, "op2", right, he)
        b.rel(verb, "arg0", conj)
        b.rel(verb, "arg1", obj)
        b.rel(obj, "quant", num)
        return verb

    def t_location(self, b: _Builder) -> str:
        # NOUN 在 NOUN 上 VERB
        subj = self._noun(b)
        pre, post = self.rng.choice(DISC_PATTERNS)
        i = b.word(pre)
        place = self._noun(b, exclude=[b.words[0]])
        j = b.word(post)
        verb = self._verb(b)
        loc = b.add(multiword_label([pre, post], True), DiscontinuousMultiword((i, j)))
        b.rel(verb, "arg0", subj)
        b.rel(verb, "location", loc)
        b.rel(loc, "op1", place)
        return verb

    def t_split(self, b: _Builder) -> str:
        # SPLITWORD VERB NOUN
        table = SPLITS
        if self._gap():
            table = GAP_SPLITS
            self.manifest.gaps += 1
        w = self.rng.choice(sorted(table))
        i = b.word(w)
        person = b.add(table[w][0], Split(i, 1))
        act = b.add(table[w][1], Split(i, 2))
        verb = self._verb(b)
        obj = self._noun(b)
        b.rel(person, "arg0-of", act)
        b.rel(verb, "arg0", person)
        b.rel(verb, "arg1", obj)
        return verb

    def t_null_chain(self, b: _Builder) -> str:
        # NOUN VERB 的 NOUN, with thing -> person -> NOUN (trigger traced through person)
        subj = self._noun(b)
        verb = self._verb(b)
        de = b.word("的", functional=True)
        obj = self._noun(b, exclude=[b.words[0]])
        thing = b.null("thing")
        person = b.null("person")
        b.rel(verb, "arg0", subj)
        b.rel(verb, "arg1", thing)
        b.rel(thing, "mod", person)
        b.rel(person, "mod", obj, de)
        return verb

    def t_correction(self, b: _Builder) -> str:
        # NOUN 暴光 ORDINAL MEASURE NOUN
        subj = self._noun(b)
        w = self.rng.choice(sorted(MISSPELT))
        verb = b.norm(b.word(w), MISSPELT[w])
        ow = self.rng.choice(sorted(ORDINALS))
        ordv = b.norm(b.word(ow), ORDINALS[ow])
        b.word(self.rng.choice(MEASURES))
        obj = self._noun(b)
        b.rel(verb, "arg0", subj)
        b.rel(verb, "arg1", obj)
        b.rel(obj, "ord", ordv)
        return verb

    def t_ba(self, b: _Builder) -> str:
        # NOUN 把 NOUN VERB
        subj = self._noun(b)
        ba = b.word("把", functional=True)
        obj = self._noun(b, exclude=[b.words[0]])
        verb = self._verb(b)
        b.rel(verb, "arg0", subj)
        b.rel(verb, "arg1", obj, ba)
        return verb

    def t_copula(self, b: _Builder) -> str:
        # NAME 是 NOUN
        name = self._name(b)
        shi = b.word("是", functional=True)
        pred = self._noun(b)
        b.rel(pred, "domain", name, shi)
        return pred

    # sampling ----------------------------------------------------------------
    def sample(self, sid: str) -> AmrGraph:
        t = self.rng.choice(self.templates)
        b = _Builder()
        root = t(b)
        g = b.graph(sid, root)
        m = self.manifest
        m.sentences += 1
        m.tokens += len(g.sentence)
        m.templates[t.__name__[2:]] += 1
        for c in g.concepts:
            m.alignment_counts[c.alignment.kind] += 1
            if not c.is_aligned:
                m.null_labels[c.label] += 1
        m.relations += len(g.relations)
        m.attributes += len(g.attributes)
        m.relation_alignments += sum(e.rel_alignment is not None for e in g.relations)
        return g

    def generate(self, n: int, prefix: str = "syn") -> List[AmrGraph]:
        width = max(4, len(str(n)))
        return [self.sample(f"{prefix}-{k:0{width}d}") for k in range(1, n + 1)]


def generate_corpus(n: int, seed: int = 0, gap_rate: float = 0.0, prefix: str = "syn") -> Tuple[List[AmrGraph], Manifest]:
    gen = SyntheticCorpus(seed, gap_rate)
    graphs = gen.generate(n, prefix)
    return graphs, gen.manifest


def qiantang_example() -> AmrGraph:
    """钱塘江 大潮 被 称为 天下 奇观 with its Event node and 被 on arg1."""
    b = _Builder()
    name = b.add("钱塘江大潮", ContinuousMultiword((b.word("钱塘江"), b.word("大潮"))))
    bei = b.word("被", functional=True)
    verb = b.norm(b.word("称为"), "称为-01")
    wonder = b.add("天下奇观", ContinuousMultiword((b.word("天下"), b.word("奇观"))))
    event = b.null("Event")
    b.rel(verb, "arg1", event, bei)
    b.rel(verb, "arg2", wonder)
    b.rel(event, "mod", name)
    return b.graph("qiantang", verb)


# -- unconstrained random graphs ------------------------------------------------

CHARS = "天地人山水火木金土日月星风云雨雪春夏秋冬东西南北上下左右大小多少"
CONSTANTS = ["-", "3", "10000", "2.5", "+", "奇观"]
ATTR_RELATIONS = ["quant", "polarity", "mode", "ord", "aspect"]


def random_graph(rng: random.Random, sid: str = "g", max_words: int = 8, relations: Optional[List[str]] = None,
                 attributes: bool = True, recoverable: bool = False) -> AmrGraph:
    """A random valid graph mixing every alignment kind.

    With ``recoverable=True`` the graph has no attributes and its relation
    alignments never share a (source, label) pair or a (source, word) cell,
    so the relation matrix encodes it without loss.
    """
    rels = relations or ["arg0", "arg1", "arg2", "arg3", "mod", "op1", "op2", "op3", "location", "time",
                         "domain", "manner", "poss", "quant", "name", "degree"]
    n = rng.randint(1, max_words)
    words = ["".join(rng.choice(CHARS) for _ in range(rng.randint(1, 3))) for _ in range(n)]
    b = _Builder()
    for w in words:
        b.words.append(w)
    free = set(range(1, n + 1))
    for i in range(1, n + 1):
        if i not in free:
            continue
        roll = rng.random()
        if roll < 0.12:
            continue  # unaligned or functional
        if roll < 0.2 and i + 1 in free:
            free -= {i, i + 1}
            b.add(words[i - 1] + words[i], ContinuousMultiword((i, i + 1)))
        elif roll < 0.28 and any(j in free for j in range(i + 2, n + 1)):
            j = rng.choice([j for j in range(i + 2, n + 1) if j in free])
            free -= {i, j}
            b.add(multiword_label([words[i - 1], words[j - 1]], True), DiscontinuousMultiword((i, j)))
        elif roll < 0.36:
            free.discard(i)
            for k in range(1, rng.randint(2, 3) + 1):
                b.add(f"{words[i - 1]}-p{k}", Split(i, k))
        elif roll < 0.55:
            free.discard(i)
            b.norm(i, words[i - 1] + "-01")
        else:
            free.discard(i)
            b.direct(i)
    b.functional = sorted(w for w in free if rng.random() < 0.6)
    for _ in range(rng.randint(0 if b.concepts else 1, 2)):
        b.null(rng.choice(["and", "thing", "person", "Event"]))
    order = [c.var for c in b.concepts]
    rng.shuffle(order)
    used_pair, used_src_rel, used_cell = set(), set(), set()

    def edge(s, d):
        choices = [r for r in rels if (s, r) not in used_src_rel] if recoverable else rels
        if not choices:
            return False
        rel = rng.choice(choices)
        w = None
        if b.functional and rng.random() < 0.35:
            w = rng.choice(b.functional)
            if recoverable and (s, w) in used_cell:
                w = None
        used_cell.add((s, w))
        used_src_rel.add((s, rel))
        used_pair.add((s, d))
        b.rel(s, rel, d, w)
        return True

    for k in range(1, len(order)):
        parents = order[:k]
        rng.shuffle(parents)
        if not any(edge(p, order[k]) for p in parents):
            raise RuntimeError("relation labels exhausted")
    for _ in range(rng.randint(0, len(order))):
        if len(order) < 2:
            break
        i, j = sorted(rng.sample(range(len(order)), 2))
        if (order[i], order[j]) not in used_pair:
            edge(order[i], order[j])
    if attributes and not recoverable:
        for _ in range(rng.randint(0, 2)):
            b.edges.append(RelationEdge(rng.choice(order), rng.choice(ATTR_RELATIONS), rng.choice(CONSTANTS),
                                        is_constant=True))
        seen, uniq = set(), []
        for e in b.edges:
            key = (e.src, e.rel, e.dst, e.is_constant)
            if key not in seen:
                seen.add(key)
                uniq.append(e)
        b.edges = uniq
    return b.graph(sid, order[0])
