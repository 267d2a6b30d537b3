import copy
import json

import pytest

from camrkit import tagging as T
from camrkit.config import DEFAULTS, apply_override
from camrkit.graph import validate_graph
from camrkit.pipeline import (
    Parser,
    ParserModel,
    Resources,
    corpus_stats,
    diagnostics_jsonl,
    fallback_graph,
    gold_example,
    oracle_roundtrip,
    order_concepts,
    train_parser,
)
from camrkit.corpus import CorpusDocument
from camrkit.smatch import score_corpus
from camrkit.synthetic import generate_corpus


def small_cfg(epochs=30):
    cfg = copy.deepcopy(DEFAULTS)
    for h in cfg["heads"]:
        cfg = apply_override(cfg, f"heads.{h}.epochs={epochs}")
    return cfg


@pytest.fixture(scope="module")
def corpus():
    return generate_corpus(60, seed=21)[0]


@pytest.fixture(scope="module")
def untrained(corpus):
    cfg = small_cfg()
    res = Resources.build(cfg, corpus)
    return Parser(ParserModel.initialize(cfg, res, T.build_null_inventory(corpus)))


def test_oracle_injection_scores_one(untrained, corpus):
    preds = untrained.predict_corpus([g.sentence for g in corpus], corpus, True, True)
    assert all(p.fallback is None for p in preds)
    rows = score_corpus([p.graph for p in preds], corpus).rows()
    assert all(s.f1 == 1.0 for s in rows.values())


def test_gold_concepts_only(untrained, corpus):
    preds = untrained.predict_corpus([g.sentence for g in corpus], corpus, inject_concepts=True)
    rows = score_corpus([p.graph for p in preds], corpus).rows()
    assert rows["Only Instance"].f1 == 1.0


def test_predictions_always_valid(untrained, corpus):
    for p in untrained.predict_corpus([g.sentence for g in corpus]):
        assert validate_graph(p.graph) == []


def test_prediction_ignores_gold_functional_flags(untrained, corpus):
    g = corpus[0]
    a = untrained.predict(g.sentence.words, g.id)
    b = untrained.predict(g.sentence.words, g.id, gold=g)
    assert a.graph == b.graph


def test_all_o_gives_fallback(untrained):
    model = untrained.model
    W = model.heads["surface"].params["W"]
    saved = W.copy()
    W[...] = 0.0
    W[-1, 0] = 10.0  # bias toward O
    try:
        nullw = model.heads["nullc"].params["W"]
        saved_null = nullw.copy()
        nullw[...] = 0.0
        nullw[-1, 0] = 10.0
        p = untrained.predict(["猫", "睡"], "s")
    finally:
        W[...] = saved
        nullw[...] = saved_null
    assert p.fallback == "no-concepts"
    assert validate_graph(p.graph) == []
    assert p.record()["diagnostics"]


def test_fallback_graph_shapes():
    assert validate_graph(fallback_graph("a", ["猫"])) == []
    assert fallback_graph("a", ["猫"]).concepts[0].var == "x1"


def test_empty_input(untrained):
    assert untrained.predict_corpus([]) == []


def test_injection_requires_gold(untrained):
    with pytest.raises(ValueError):
        untrained.predict(["猫"], inject_concepts=True)


def test_diagnostics_are_json_lines(untrained, corpus):
    preds = untrained.predict_corpus([g.sentence for g in corpus[:5]])
    lines = diagnostics_jsonl(preds).splitlines()
    assert len(lines) == 5
    assert [json.loads(x)["id"] for x in lines] == [g.id for g in corpus[:5]]


def test_gold_example_orders_concepts(corpus):
    for g in corpus[:20]:
        ex = gold_example(g)
        assert len(ex.tags) == len(g.sentence)
        assert len(ex.matrix) == len(g.concepts) + len(g.sentence.functional)
        assert ex.concepts == order_concepts(g.concepts, T.assign_triggers(g)[0])


def test_stats_match_manifest():
    gs, man = generate_corpus(80, seed=13)
    st = corpus_stats(CorpusDocument.from_graphs(gs))
    assert st["sentences"] == man.sentences and st["tokens"] == man.tokens
    assert st["relations"] == man.relations and st["relation_alignments"] == man.relation_alignments
    for k, v in man.alignment_counts.items():
        assert st[f"align.{k}"] == v
    assert st["null_inventory"] == len(man.null_labels)


def test_stats_empty_corpus():
    st = corpus_stats(CorpusDocument())
    assert st["sentences"] == 0 and st["align.direct"] == 0


def test_oracle_roundtrip_rows(corpus):
    rows = oracle_roundtrip(corpus, Resources.build(DEFAULTS, corpus))
    assert all(r["concepts_ok"] and r["relations_ok"] and not r["gaps"] for r in rows)


def test_training_improves_dev_score(tmp_path):
    train, _ = generate_corpus(20, seed=31)
    dev, _ = generate_corpus(10, seed=32, prefix="dev")
    rep = train_parser(small_cfg(30), train, dev, tmp_path / "m")
    scores = [r["dev_f1"] for r in rep.log_rows]
    assert len(scores) == 30
    assert scores[-1] > scores[0]
    assert rep.best_score == max(scores)
    for name in ("final", "best"):
        assert (tmp_path / "m" / name / "relation.json").exists()
    assert (tmp_path / "m" / "train_log.tsv").read_text().count("\n") == 31
    best = Parser(ParserModel.load(tmp_path / "m" / "best"))
    got = [p.graph for p in best.predict_corpus([g.sentence for g in dev])]
    assert score_corpus(got, dev).rows()["AlignSmatch"].f1 == pytest.approx(rep.best_score)


def test_training_is_byte_deterministic(tmp_path):
    train, _ = generate_corpus(10, seed=41)
    for k in range(2):
        train_parser(small_cfg(2), train, [], tmp_path / str(k))
    for name in ("surface", "norm", "nullc", "relation", "model"):
        a = (tmp_path / "0" / "final" / f"{name}.json").read_bytes()
        b = (tmp_path / "1" / "final" / f"{name}.json").read_bytes()
        assert a == b


def test_zero_epochs(tmp_path, corpus):
    rep = train_parser(small_cfg(0), corpus[:10], corpus[10:15], tmp_path / "z")
    assert rep.log_rows == []
    parser = Parser(ParserModel.load(tmp_path / "z" / "final"))
    assert len(parser.predict_corpus([g.sentence for g in corpus[:3]])) == 3


def test_untrainable_sentences_are_skipped(tmp_path):
    from camrkit.graph import AmrGraph, ConceptNode, Direct, NullAligned, RelationEdge, Sentence
    s = Sentence.from_words("bad", ["猫"])
    # a null concept whose only neighbour is another null concept with no aligned word
    bad = AmrGraph(s, (ConceptNode("z1", "thing", NullAligned()), ConceptNode("z2", "person", NullAligned())),
                   (RelationEdge("z1", "mod", "z2"),), "z1")
    good, _ = generate_corpus(5, seed=3)
    rep = train_parser(small_cfg(1), good + [bad], [], None)
    assert [sid for sid, _ in rep.skipped] == ["bad"]
