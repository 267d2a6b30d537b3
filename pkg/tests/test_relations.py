import graphlib
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from camrkit.graph import AmrGraph, ConceptNode, Direct, RelationEdge, Sentence, validate_graph
from camrkit.relations import (
    NO_RELATION,
    RelationMatrix,
    decode_matrix,
    encode_matrix,
    matrix_recoverable,
    participant_names,
)

from conftest import graphs


def test_qiantang_matrix(qiantang):
    m = encode_matrix(qiantang)
    assert m.items == ("x1_2", "x4", "x5_6", "z1", 3)
    assert m.get("x4", "z1") == "arg1"
    assert m.get("x4", 3) == "arg1"
    assert m.get("z1", "x1_2") == "mod"
    assert sum(1 for _ in m.cells()) == 4


def test_qiantang_matrix_decodes_to_gold_edges(qiantang):
    dec = decode_matrix(encode_matrix(qiantang), qiantang.concepts, qiantang.sentence.functional)
    assert dec.edges == list(qiantang.relations)
    assert dec.root == "x4"
    assert [e.rel_alignment for e in dec.edges if e.rel == "arg1"] == [3]


def test_index_round_trip(qiantang):
    vocab = ["O", "arg1", "arg2", "mod"]
    m = encode_matrix(qiantang)
    arr = m.to_indices(vocab)
    assert arr[1, 3] == 1  # [src=x4, dst=z1]
    back = RelationMatrix.from_indices(m.items, arr, vocab)
    assert back.labels == m.labels


def test_tsv_dump(qiantang):
    m = encode_matrix(qiantang)
    text = m.to_tsv(participant_names(qiantang.concepts, qiantang.sentence))
    assert "x3/被" in text and "z1/Event" in text


def test_unflagged_alignment_word_raises():
    s = Sentence.from_words("a", ["猫", "被", "抓"])
    g = AmrGraph(s, (ConceptNode("x1", "猫", Direct(1)), ConceptNode("x3", "抓", Direct(3))),
                 (RelationEdge("x3", "arg1", "x1", 2),), "x3")
    with pytest.raises(ValueError):
        encode_matrix(g)


@given(graphs(recoverable=True))
def test_round_trip_on_recoverable_graphs(g):
    assert matrix_recoverable(g)
    dec = decode_matrix(encode_matrix(g), g.concepts, g.sentence.functional)
    assert dec.edges == list(g.relations)
    assert dec.root == g.root
    assert dec.diagnostics == []


def test_cycle_broken_at_later_destination():
    s = Sentence.from_words("a", ["甲", "乙", "丙"])
    cs = [ConceptNode(f"x{i}", w, Direct(i)) for i, w in enumerate(["甲", "乙", "丙"], 1)]
    m = RelationMatrix.empty(["x1", "x2", "x3"])
    m.set("x1", "x2", "arg0")
    m.set("x2", "x3", "arg1")
    m.set("x3", "x1", "mod")
    dec = decode_matrix(m, cs, [])
    assert ("x2", "x3") not in {(e.src, e.dst) for e in dec.edges}
    assert dec.root == "x3"
    assert any("cycle" in d for d in dec.diagnostics)


def test_cycle_broken_at_lowest_score():
    cs = [ConceptNode(f"x{i}", w, Direct(i)) for i, w in enumerate(["甲", "乙"], 1)]
    m = RelationMatrix.empty(["x1", "x2"])
    m.set("x1", "x2", "arg0")
    m.set("x2", "x1", "arg1")
    vocab = ["O", "arg0", "arg1"]
    scores = np.zeros((2, 2, 3))
    scores[0, 1, 1] = 5.0
    scores[1, 0, 2] = 1.0
    dec = decode_matrix(m, cs, [], scores, vocab)
    assert [(e.src, e.rel, e.dst) for e in dec.edges] == [("x1", "arg0", "x2")]


def test_orphans_attach_to_root():
    cs = [ConceptNode(f"x{i}", w, Direct(i)) for i, w in enumerate(["甲", "乙", "丙"], 1)]
    m = RelationMatrix.empty(["x1", "x2", "x3"])
    m.set("x2", "x1", "arg0")
    dec = decode_matrix(m, cs, [], fallback_relation="mod")
    assert dec.root == "x2"
    assert ("x2", "mod", "x3") in {(e.src, e.rel, e.dst) for e in dec.edges}


def test_alignment_goes_to_nearest_edge():
    words = ["甲", "把", "乙", "丙", "丁"]
    cs = [ConceptNode(f"x{i}", w, Direct(i)) for i, w in enumerate(words, 1) if i != 2]
    m = RelationMatrix.empty([c.var for c in cs] + [2])
    m.set("x1", "x3", "arg1")
    m.set("x1", "x5", "arg1")
    m.set("x1", 2, "arg1")
    m.set("x1", "x4", "mod")
    dec = decode_matrix(m, cs, [2])
    aligned = [(e.src, e.dst) for e in dec.edges if e.rel_alignment == 2]
    assert aligned == [("x1", "x3")]


@st.composite
def label_matrices(draw):
    n = draw(st.integers(1, 6))
    k = draw(st.integers(0, 3))
    words = [f"w{i}" for i in range(1, n + k + 1)]
    rng = random.Random(draw(st.integers(0, 2**16)))
    concept_words = sorted(rng.sample(range(1, n + k + 1), n))
    functional = [w for w in range(1, n + k + 1) if w not in concept_words]
    cs = [ConceptNode(f"x{i}", words[i - 1], Direct(i)) for i in concept_words]
    items = [c.var for c in cs] + functional
    m = RelationMatrix.empty(items)
    labels = ["O", "arg0", "arg1", "mod"]
    for s in items:
        for d in items:
            if s != d and rng.random() < 0.3:
                m.set(s, d, rng.choice(labels[1:]))
    use_scores = draw(st.booleans())
    scores = np.array([[[rng.random() for _ in labels] for _ in items] for _ in items]) if use_scores else None
    s = Sentence.from_words("r", words, functional)
    return m, cs, functional, s, scores, labels


@given(label_matrices())
def test_any_matrix_decodes_to_valid_graph(args):
    m, cs, functional, s, scores, labels = args
    dec = decode_matrix(m, cs, functional, scores, labels if scores is not None else None)
    g = AmrGraph(s, tuple(cs), tuple(dec.edges), dec.root)
    assert validate_graph(g) == []
    ts = graphlib.TopologicalSorter({c.var: set() for c in cs})
    for e in dec.edges:
        ts.add(e.dst, e.src)
    assert len(list(ts.static_order())) == len(cs)
    # every alignment cell is used at most once and only on a matching label
    for e in dec.edges:
        if e.rel_alignment is not None:
            assert m.get(e.src, e.rel_alignment) == e.rel
    assert len([e for e in dec.edges if e.rel_alignment is not None]) <= sum(
        1 for src, dst, _ in m.cells() if isinstance(dst, int))


@given(graphs())
def test_matrix_holds_one_label_per_pair(g):
    try:
        m = encode_matrix(g)
    except ValueError:
        return
    n_cells = sum(1 for _ in m.cells())
    pairs = {(e.src, e.dst) for e in g.relations}
    cells = {(e.src, e.rel_alignment) for e in g.relations if e.rel_alignment is not None}
    assert n_cells <= len(pairs) + len(cells)
    assert all(lbl == NO_RELATION for i, row in enumerate(m.labels) for j, lbl in enumerate(row) if i == j)
