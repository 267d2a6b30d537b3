import random

from camrkit.graph import alignment_stats, load_inventory, validate_graph
from camrkit.pipeline import resource_path
from camrkit.relations import matrix_recoverable
from camrkit.synthetic import generate_corpus, qiantang_example, random_graph

INVENTORY = load_inventory(resource_path("relations.txt"))


def test_corpus_is_valid_and_recoverable():
    gs, _ = generate_corpus(200, seed=0)
    for g in gs:
        assert validate_graph(g, INVENTORY) == []
        assert matrix_recoverable(g)


def test_all_six_variants_and_functional_words():
    gs, man = generate_corpus(200, seed=0)
    assert set(man.alignment_counts) == {"direct", "norm", "cont", "disc", "split", "null"}
    assert man.relation_alignments > 0
    assert alignment_stats(gs).counts == dict(man.alignment_counts)


def test_seeded_generation_is_reproducible():
    a, ma = generate_corpus(50, seed=5)
    b, mb = generate_corpus(50, seed=5)
    assert a == b and ma.to_json() == mb.to_json()
    c, _ = generate_corpus(50, seed=6)
    assert a != c


def test_gap_injection_counts():
    _, man = generate_corpus(200, seed=1, gap_rate=0.5)
    assert man.gaps > 0
    _, man0 = generate_corpus(200, seed=1)
    assert man0.gaps == 0


def test_qiantang_example():
    g = qiantang_example()
    assert g.sentence.words == ["钱塘江", "大潮", "被", "称为", "天下", "奇观"]
    assert validate_graph(g, INVENTORY) == []


def test_random_graph_recoverable_flag():
    rng = random.Random(0)
    for k in range(200):
        g = random_graph(rng, f"r{k}", recoverable=True)
        assert matrix_recoverable(g)
        assert validate_graph(g, INVENTORY) == []
