import numpy as np
import pytest

from camrkit.embeddings import HashEmbedding, TableEmbedding, make_provider


def test_hash_is_deterministic_and_normalized():
    a = HashEmbedding(16).embed(["钱塘江", "大潮"])
    b = HashEmbedding(16).embed(["钱塘江", "大潮"])
    assert a.shape == (2, 16)
    assert np.array_equal(a, b)
    assert np.allclose(np.linalg.norm(a, axis=1), 1.0)


def test_first_character_pooling():
    e = HashEmbedding(16)
    chars = e.embed_chars(["钱塘江", "大潮"])
    assert chars.shape == (5, 16)
    assert np.array_equal(e.embed(["钱塘江", "大潮"]), chars[[0, 3]])


def test_distinct_words_differ():
    v = HashEmbedding(32).embed(["称为", "称为-01", "被"])
    assert not np.allclose(v[0], v[1]) and not np.allclose(v[0], v[2])


def test_empty():
    assert HashEmbedding(8).embed([]).shape == (0, 8)


def test_table(tmp_path):
    p = tmp_path / "v.txt"
    p.write_text("3 2\n猫 1 0\n狗 0 1\n大 0.5 0.5\n", encoding="utf-8")
    t = TableEmbedding.load(p)
    assert t.dim == 2
    assert np.array_equal(t.embed(["猫", "大猫", "鱼"]), [[1, 0], [0.5, 0.5], [0, 0]])
    assert make_provider({"kind": "table", "path": str(p)}).dim == 2


def test_table_dimension_mismatch(tmp_path):
    p = tmp_path / "v.txt"
    p.write_text("猫 1 0\n狗 0\n", encoding="utf-8")
    with pytest.raises(ValueError):
        TableEmbedding.load(p)


def test_unknown_kind():
    with pytest.raises(ValueError):
        make_provider({"kind": "bert"})
