"""Two-stage parser: concept tagging, then relation classification.

Stage 1 runs the surface, normalization and null-concept tag heads over word
embeddings and decodes the tags into concepts. Stage 2 runs the biaffine
relation head over the concepts plus the functional words and decodes the
label matrix into edges. Training feeds the relation head gold concepts
(teacher forcing); prediction never looks at gold graphs unless one of the
injection modes is asked for.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
import shutil
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import tagging as T
from .config import HEADS, dump_config, train_config
from .corpus import CorpusDocument
from .embeddings import EmbeddingProvider, make_provider
from .graph import AmrGraph, ConceptNode, Direct, NullAligned, Sentence, alignment_stats, load_inventory, validate_graph
from .heads import BiaffineHead, Head, LinearTagHead, load_head
from .normalizer import (
    NormalizationDictionaries,
    build_dictionaries,
    load_codes,
    load_error_lexicon,
    load_special_map,
)
from .relations import NO_RELATION, RelationMatrix, decode_matrix, encode_matrix
from .smatch import MatchConfig, score_corpus
from .training import Trainer, TrainingError

log = logging.getLogger(__name__)

RESOURCE_DIR = Path(__file__).resolve().parent / "resources"
MODEL_VERSION = 1


def resource_path(name: str) -> Path:
    return RESOURCE_DIR / name


def _path(cfg: dict, key: str, default: str) -> Path:
    p = cfg["paths"].get(key)
    return Path(p) if p else resource_path(default)


# -- resources ------------------------------------------------------------------

@dataclass
class Resources:
    relations: List[str]
    split_lexicon: T.SplitLexicon
    dicts: NormalizationDictionaries

    @classmethod
    def build(cls, cfg: dict, corpus: Sequence[AmrGraph]) -> "Resources":
        """Relation inventory and split lexicon from config paths (or shipped files), dictionaries from ``corpus``."""
        relations = load_inventory(_path(cfg, "relations", "relations.txt"))
        lex = T.load_split_lexicon(_path(cfg, "split_lexicon", "split_lexicon.tsv"))
        if cfg["paths"].get("dictionaries"):
            dicts = NormalizationDictionaries.load(cfg["paths"]["dictionaries"])
        else:
            dicts = build_dictionaries(
                corpus,
                special_map=load_special_map(_path(cfg, "special_map", "special.tsv")),
                error_lexicon=load_error_lexicon(_path(cfg, "error_lexicon", "error_lexicon.tsv")),
                phonological=load_codes(_path(cfg, "phonological", "phonological.tsv")),
                calligraphical=load_codes(_path(cfg, "calligraphical", "calligraphical.tsv")),
                threshold=cfg["normalizer"]["threshold"],
            )
        return cls(relations, lex, dicts)


# -- features ---------------------------------------------------------------------

def concept_order_key(c: ConceptNode, triggers: Optional[Dict[str, int]] = None):
    a = c.alignment
    if c.is_aligned:
        return (min(a.words), 0, getattr(a, "part", 0), c.var)
    trig = triggers.get(c.var) if triggers is not None else a.trigger_word
    return (trig if trig is not None else math.inf, 1, 0, c.var)


def order_concepts(concepts: Iterable[ConceptNode], triggers: Optional[Dict[str, int]] = None) -> List[ConceptNode]:
    """Aligned concepts by first word, null concepts by trigger word; the relation head sees this order."""
    return sorted(concepts, key=lambda c: concept_order_key(c, triggers))


def word_features(provider: EmbeddingProvider, words: Sequence[str]) -> np.ndarray:
    return provider.embed(list(words))


def participant_features(provider: EmbeddingProvider, concepts: Sequence[ConceptNode],
                         sentence: Sentence, functional: Sequence[int]) -> np.ndarray:
    """Label embeddings of the concepts, then surface embeddings of functional words, plus a type bit pair."""
    units = [c.label for c in concepts] + [sentence.token(w).surface for w in functional]
    E = provider.embed(units)
    kind = np.zeros((len(units), 2))
    kind[:len(concepts), 0] = 1.0
    kind[len(concepts):, 1] = 1.0
    return np.hstack([E, kind])


def _weights(spec, labels: Sequence[str]) -> Optional[List[float]]:
    if spec is None:
        return None
    if isinstance(spec, dict):
        return [float(spec.get(lbl, 1.0)) for lbl in labels]
    if len(spec) != len(labels):
        raise ValueError(f"class_weights has {len(spec)} entries for {len(labels)} labels")
    return [float(x) for x in spec]


# -- model ---------------------------------------------------------------------------

@dataclass
class ParserModel:
    heads: Dict[str, Head]
    labels: Dict[str, List[str]]
    provider: EmbeddingProvider
    resources: Resources
    cfg: dict

    @classmethod
    def initialize(cls, cfg: dict, resources: Resources, null_inventory: Sequence[str]) -> "ParserModel":
        provider = make_provider(cfg["embedding"])
        labels = {
            "surface": list(T.SURFACE_TAGS),
            "norm": list(T.NORM_TAGS),
            "nullc": [T.NO_CONCEPT] + [lbl for lbl in null_inventory if lbl != T.NO_CONCEPT],
            "relation": [NO_RELATION] + [r for r in resources.relations if r != NO_RELATION],
        }
        heads: Dict[str, Head] = {}
        for k, name in enumerate(HEADS):
            h = cfg["heads"][name]
            seed = cfg["seed"] * 100 + k
            if name == "relation":
                heads[name] = BiaffineHead(provider.dim + 2, len(labels[name]), h["context_hidden"], seed)
            else:
                heads[name] = LinearTagHead(provider.dim, len(labels[name]), h["context_hidden"], seed)
        return cls(heads, labels, provider, resources, cfg)

    def save(self, directory: Union[str, Path]) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        for name, head in self.heads.items():
            head.save(d / f"{name}.json", self.cfg["heads"][name])
        meta = {
            "version": MODEL_VERSION,
            "seed": self.cfg["seed"],
            "labels": self.labels,
            "embedding": self.cfg["embedding"],
            "config": self.cfg,
        }
        (d / "model.json").write_text(json.dumps(meta, ensure_ascii=False, indent=1, sort_keys=True) + "\n",
                                      encoding="utf-8")
        self.resources.dicts.save(d / "dictionaries")
        T.save_split_lexicon(self.resources.split_lexicon, d / "split_lexicon.tsv")
        (d / "relations.txt").write_text("".join(r + "\n" for r in self.resources.relations), encoding="utf-8")

    @classmethod
    def load(cls, directory: Union[str, Path]) -> "ParserModel":
        d = Path(directory)
        meta = json.loads((d / "model.json").read_text(encoding="utf-8"))
        if meta.get("version") != MODEL_VERSION:
            raise ValueError(f"{d}: unsupported model version {meta.get('version')!r}")
        heads = {name: load_head(d / f"{name}.json") for name in HEADS}
        res = Resources(
            relations=load_inventory(d / "relations.txt"),
            split_lexicon=T.load_split_lexicon(d / "split_lexicon.tsv"),
            dicts=NormalizationDictionaries.load(d / "dictionaries"),
        )
        return cls(heads, meta["labels"], make_provider(meta["embedding"]), res, meta["config"])


# -- gold targets -------------------------------------------------------------------------

@dataclass
class GoldExample:
    words: List[str]
    tags: T.TagSequences
    concepts: List[ConceptNode]
    functional: List[int]
    matrix: RelationMatrix


def gold_example(g: AmrGraph) -> GoldExample:
    """Tag targets and the relation matrix over gold concepts in head order."""
    tags = T.encode_tags(g)
    triggers, _ = T.assign_triggers(g)
    ordered = order_concepts(g.concepts, triggers)
    m = encode_matrix(dataclasses.replace(g, concepts=tuple(ordered)))
    return GoldExample(g.sentence.words, tags, ordered, g.sentence.functional, m)


def tag_datasets(model: ParserModel, examples: Sequence[GoldExample]) -> Dict[str, list]:
    out: Dict[str, list] = {name: [] for name in HEADS}
    lookup = {name: {lbl: i for i, lbl in enumerate(model.labels[name])} for name in HEADS}
    for ex in examples:
        X = word_features(model.provider, ex.words)
        for name, seq in (("surface", ex.tags.surface), ("norm", ex.tags.norm), ("nullc", ex.tags.nullc)):
            out[name].append((X, np.array([lookup[name].get(t, 0) for t in seq], dtype=np.int64)))
        sent = Sentence.from_words("", ex.words, ex.functional)
        Xr = participant_features(model.provider, ex.concepts, sent, ex.functional)
        rel = ex.matrix.to_indices(model.labels["relation"]) if len(ex.matrix) else np.zeros((0, 0), np.int64)
        out["relation"].append((Xr, rel))
    return out


# -- prediction ----------------------------------------------------------------------------------

@dataclass
class Prediction:
    graph: AmrGraph
    diagnostics: List[str] = field(default_factory=list)
    fallback: Optional[str] = None

    def record(self) -> dict:
        return {"id": self.graph.id, "fallback": self.fallback, "diagnostics": self.diagnostics}


def fallback_graph(sid: str, words: Sequence[str]) -> AmrGraph:
    """Single-concept graph on the first word (or a null ``thing`` for an empty sentence)."""
    sent = Sentence.from_words(sid, words)
    if words:
        c = ConceptNode("x1", words[0], Direct(1))
    else:
        c = ConceptNode("z1", "thing", NullAligned())
    return AmrGraph(sent, (c,), (), c.var)


def _map_gold_relations(gold: AmrGraph, concepts: Sequence[ConceptNode], functional: Sequence[int],
                        diags: List[str]) -> RelationMatrix:
    """Gold relations written onto a matrix over predicted concepts and functional words."""
    items = [c.var for c in concepts] + list(functional)
    m = RelationMatrix.empty(items)
    by_var = {c.var for c in concepts}
    triggers, _ = T.assign_triggers(gold)
    nulls = {(c.label, c.alignment.trigger_word): c.var for c in concepts if not c.is_aligned}
    mapping: Dict[str, str] = {}
    for c in gold.concepts:
        if c.is_aligned:
            if c.var in by_var:
                mapping[c.var] = c.var
        else:
            hit = nulls.get((c.label, triggers.get(c.var)))
            if hit is not None:
                mapping[c.var] = hit
    func = set(functional)
    for e in gold.relations:
        s, d = mapping.get(e.src), mapping.get(e.dst)
        if s is None or d is None:
            diags.append(f"gold relation {e.src} {e.rel} {e.dst} has no predicted endpoint")
            continue
        if m.get(s, d) == NO_RELATION:
            m.set(s, d, e.rel)
        if e.rel_alignment is not None:
            if e.rel_alignment in func and m.get(s, e.rel_alignment) == NO_RELATION:
                m.set(s, e.rel_alignment, e.rel)
            else:
                diags.append(f"gold alignment x{e.rel_alignment} of {e.src} {e.rel} {e.dst} not placed")
    return m


class Parser:
    """Runs a :class:`ParserModel` over sentences."""

    def __init__(self, model: ParserModel):
        self.model = model

    def _tags(self, name: str, X: np.ndarray) -> List[str]:
        if len(X) == 0:
            return []
        return [self.model.labels[name][i] for i in self.model.heads[name].predict(X)]

    def stage1(self, words: Sequence[str], sid: str = "", gold: Optional[AmrGraph] = None):
        """Concepts, functional words and decoder diagnostics for one sentence."""
        res = self.model.resources
        sent = Sentence.from_words(sid, words)
        if gold is not None:
            tags = T.encode_tags(gold)
            surface, norm, nullc = list(tags.surface), list(tags.norm), list(tags.nullc)
        else:
            X = word_features(self.model.provider, words)
            surface, norm, nullc = self._tags("surface", X), self._tags("norm", X), self._tags("nullc", X)
            # NeedsNorm only means something on single or split words
            norm = [n if s in (T.B_SINGLE, T.B_SPLIT) else T.VERBATIM for s, n in zip(surface, norm)]
        dec = T.decode_surface(sent, surface, norm, res.split_lexicon, res.dicts, strict=False)
        nulls = T.decode_null_concepts(dec.sentence, nullc, dec.concepts)
        return order_concepts(dec.concepts + nulls), dec.functional, dec.sentence, list(dec.diagnostics)

    def predict(self, words: Sequence[str], sid: str = "", gold: Optional[AmrGraph] = None,
                inject_concepts: bool = False, inject_relations: bool = False) -> Prediction:
        """Parse one sentence. ``gold`` is read only when an injection flag is set."""
        words = list(words)
        if (inject_concepts or inject_relations) and gold is None:
            raise ValueError("injection modes need the gold graph")
        try:
            concepts, functional, sent, diags = self.stage1(words, sid, gold if inject_concepts else None)
        except T.TaggingError as e:
            return Prediction(fallback_graph(sid, words), [str(e)], "tagging")
        if not concepts:
            return Prediction(fallback_graph(sid, words), diags + ["no concepts predicted"], "no-concepts")
        if inject_relations:
            m = _map_gold_relations(gold, concepts, functional, diags)
            dec = decode_matrix(m, concepts, functional,
                                fallback_relation=self.model.cfg["decode"]["fallback_relation"])
        else:
            X = participant_features(self.model.provider, concepts, sent, functional)
            scores = self.model.heads["relation"].scores(X)
            items = [c.var for c in concepts] + list(functional)
            pred = scores.argmax(axis=2)
            np.fill_diagonal(pred, 0)
            m = RelationMatrix.from_indices(items, pred, self.model.labels["relation"])
            dec = decode_matrix(m, concepts, functional, scores, self.model.labels["relation"],
                                self.model.cfg["decode"]["fallback_relation"])
        diags += dec.diagnostics
        g = AmrGraph(sent, tuple(concepts), tuple(dec.edges), dec.root)
        problems = validate_graph(g)
        if problems:
            return Prediction(fallback_graph(sid, words), diags + [str(p) for p in problems], "invalid")
        return Prediction(g, diags)

    def predict_corpus(self, sentences: Sequence[Sentence], gold: Optional[Sequence[AmrGraph]] = None,
                       inject_concepts: bool = False, inject_relations: bool = False) -> List[Prediction]:
        if (inject_concepts or inject_relations) and gold is None:
            raise ValueError("injection modes need gold graphs")
        golds = {g.id: g for g in gold} if gold is not None else {}
        out = []
        for s in sentences:
            g = golds.get(s.id)
            if (inject_concepts or inject_relations) and g is None:
                raise ValueError(f"no gold graph for sentence {s.id}")
            out.append(self.predict(s.words, s.id, g, inject_concepts, inject_relations))
        return out


def match_config(cfg: dict) -> MatchConfig:
    sc = cfg["scorer"]
    return MatchConfig(sc["instance_alignment"], sc["relation_alignment"])


def evaluate(parser: Parser, gold: Sequence[AmrGraph], cfg: dict) -> float:
    preds = [p.graph for p in parser.predict_corpus([g.sentence for g in gold])]
    sc = cfg["scorer"]
    return score_corpus(preds, list(gold), sc["restarts"], sc["seed"], match_config(cfg)).rows()["AlignSmatch"].f1


# -- training ------------------------------------------------------------------------------------

@dataclass
class TrainReport:
    model: ParserModel
    log_rows: List[dict]
    skipped: List[Tuple[str, str]]
    best_epoch: int
    best_score: Optional[float]


def train_parser(cfg: dict, train_graphs: Sequence[AmrGraph], dev_graphs: Sequence[AmrGraph] = (),
                 out_dir: Optional[Union[str, Path]] = None) -> TrainReport:
    """Train all four heads side by side, one epoch at a time.

    Sentences whose gold tags or matrix cannot be encoded are skipped and
    reported. With a dev set, Align-Smatch of full predictions is computed
    after every epoch and the best epoch is kept. ``out_dir`` receives
    ``final/``, ``best/``, ``best.json`` and ``train_log.tsv``.
    """
    if not train_graphs:
        raise ValueError("training corpus has no graphs")
    resources = Resources.build(cfg, train_graphs)
    examples, skipped = [], []
    for g in train_graphs:
        try:
            examples.append(gold_example(g))
        except (T.TaggingError, ValueError) as e:
            skipped.append((g.id, str(e)))
    if not examples:
        raise TrainingError("no trainable sentences")
    model = ParserModel.initialize(cfg, resources, T.build_null_inventory(train_graphs))
    data = tag_datasets(model, examples)
    trainers: Dict[str, Trainer] = {}
    for name in HEADS:
        tc = train_config(cfg, name)
        tc.class_weights = _weights(cfg["heads"][name]["class_weights"], model.labels[name])
        trainers[name] = Trainer(model.heads[name], data[name], tc)
    parser = Parser(model)
    out = Path(out_dir) if out_dir is not None else None
    rows: List[dict] = []
    best_epoch, best_score = 0, None
    if out is not None:
        model.save(out / "best")
    n_epochs = max(trainers[n].cfg.epochs for n in HEADS)
    for epoch in range(1, n_epochs + 1):
        row = {"epoch": epoch}
        for name in HEADS:
            tr = trainers[name]
            row[f"loss_{name}"] = tr.run_epoch() if epoch <= tr.cfg.epochs else float("nan")
        if dev_graphs:
            row["dev_f1"] = evaluate(parser, dev_graphs, cfg)
            if best_score is None or row["dev_f1"] > best_score:
                best_epoch, best_score = epoch, row["dev_f1"]
                if out is not None:
                    model.save(out / "best")
        rows.append(row)
        log.info("epoch %d %s", epoch, " ".join(f"{k}={v:.4f}" for k, v in row.items() if k != "epoch"))
    if not dev_graphs:
        best_epoch = n_epochs
    if out is not None:
        model.save(out / "final")
        if not dev_graphs:
            shutil.rmtree(out / "best")
            shutil.copytree(out / "final", out / "best")
        cols = ["epoch"] + [f"loss_{n}" for n in HEADS] + (["dev_f1"] if dev_graphs else [])
        lines = ["\t".join(cols)] + ["\t".join(_fmt(r[c]) for c in cols) for r in rows]
        (out / "train_log.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        best = {"epoch": best_epoch, "dev_f1": best_score, "seed": cfg["seed"],
                "skipped": [{"id": i, "reason": r} for i, r in skipped]}
        (out / "best.json").write_text(json.dumps(best, ensure_ascii=False, indent=1, sort_keys=True) + "\n",
                                       encoding="utf-8")
        (out / "config.json").write_text(dump_config(cfg), encoding="utf-8")
    return TrainReport(model, rows, skipped, best_epoch, best_score)


def _fmt(v) -> str:
    return str(v) if isinstance(v, int) else f"{v:.6f}"


# -- corpus statistics ----------------------------------------------------------------------------

def corpus_stats(doc: CorpusDocument, relation_inventory: Optional[Sequence[str]] = None) -> Dict[str, object]:
    """Flat statistics dictionary; every count is zero for an empty corpus."""
    graphs = doc.graphs
    out: Dict[str, object] = {
        "sentences": len(doc),
        "tokens": sum(len(s) for s in doc.sentences),
        "graphs": len(graphs),
    }
    kinds = ("direct", "norm", "cont", "disc", "split", "null")
    if graphs:
        st = alignment_stats(graphs)
        counts, fractions = st.counts, st.fractions
        out["concepts"] = st.concepts
        out["relation_alignments"] = st.relation_alignments
    else:
        counts, fractions = {k: 0 for k in kinds}, {k: 0.0 for k in kinds}
        out["concepts"] = 0
        out["relation_alignments"] = 0
    for k in kinds:
        out[f"align.{k}"] = counts.get(k, 0)
    for k in kinds:
        out[f"align.{k}.fraction"] = round(fractions.get(k, 0.0), 6)
    out["relations"] = sum(len(g.relations) for g in graphs)
    out["attributes"] = sum(len(g.attributes) for g in graphs)
    out["distinct_concepts"] = len({c.label for g in graphs for c in g.concepts})
    out["null_inventory"] = len(T.build_null_inventory(graphs))
    out["relation_labels_used"] = len({e.rel for g in graphs for e in g.relations})
    if relation_inventory is not None:
        out["relation_inventory"] = len(relation_inventory)
    return out


def format_stats(stats: Dict[str, object]) -> str:
    return "".join(f"{k}\t{v}\n" for k, v in stats.items())


def oracle_roundtrip(graphs: Sequence[AmrGraph], resources: Resources) -> List[dict]:
    """Per-sentence stage-1 and stage-2 oracle checks."""
    rows = []
    for g in graphs:
        row = {"id": g.id, "gaps": T.lexicon_gaps(g, resources.split_lexicon, resources.dicts)}
        try:
            triggers, _ = T.assign_triggers(g)
            concepts, _, _ = T.oracle_concepts(g, resources.split_lexicon, resources.dicts)
            row["concepts_ok"] = T.concept_signature(concepts) == T.concept_signature(g.concepts, triggers)
        except T.TaggingError as e:
            row["concepts_ok"] = False
            row["gaps"].append(str(e))
        m = encode_matrix(g)
        dec = decode_matrix(m, g.concepts, g.sentence.functional)
        row["relations_ok"] = dec.edges == list(g.relations) and dec.root == g.root
        rows.append(row)
    return rows


def diagnostics_jsonl(preds: Sequence[Prediction]) -> str:
    return "".join(json.dumps(p.record(), ensure_ascii=False, sort_keys=True) + "\n" for p in preds)


def summarize_fallbacks(preds: Sequence[Prediction]) -> Counter:
    return Counter(p.fallback for p in preds if p.fallback)
