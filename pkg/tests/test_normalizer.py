import pytest
from hypothesis import given, strategies as st

from camrkit.normalizer import (
    ErrorIndex,
    NormalizationDictionaries,
    build_dictionaries,
    code_distance,
    load_codes,
    load_error_lexicon,
    load_special_map,
    normalize_word,
    normalize_word_traced,
)
from camrkit.pipeline import resource_path
from camrkit.synthetic import generate_corpus

from oracles import levenshtein


@pytest.fixture(scope="module")
def dicts():
    gs, _ = generate_corpus(300, seed=11)
    # keep the misspelling out of the counts so it must go through correction
    gs = [g for g in gs if "暴光" not in g.sentence.words]
    return build_dictionaries(
        gs,
        special_map=load_special_map(resource_path("special.tsv")),
        error_lexicon=load_error_lexicon(resource_path("error_lexicon.tsv")),
        phonological=load_codes(resource_path("phonological.tsv")),
        calligraphical=load_codes(resource_path("calligraphical.tsv")),
    )


@pytest.mark.parametrize("word,concept,source", [
    ("第一", "1", "number"),
    ("一万", "10000", "number"),
    ("不", "-", "special"),
    ("合作", "合作-01", "frequency"),
    ("暴光", "曝光-01", "correction"),
])
def test_table_cases(dicts, word, concept, source):
    assert normalize_word_traced(word, dicts) == (concept, source)


def test_unresolved_word_is_returned_unchanged(dicts):
    assert normalize_word_traced("斑马", dicts) == ("斑马", "unresolved")


def test_frequency_tie_breaks_on_smallest_concept():
    d = NormalizationDictionaries(counts={"打": {"打-02": 2, "打-01": 2, "打-03": 1}})
    assert normalize_word("打", d) == "打-01"
    assert d.freq_map["打"] == ("打-01", 2)


def test_special_map_wins_over_numbers():
    d = NormalizationDictionaries(special_map={"一": "一-special"})
    assert normalize_word("一", d) == "一-special"


def test_correction_respects_threshold():
    ix = ErrorIndex(lexicon={"曝光": "曝光-01"}, phonological={"暴": ("bao4",), "曝": ("bao4",), "光": ("guang1",)})
    assert ix.nearest("暴光") == ("曝光", 0)
    assert ix.nearest("暴露") == ("曝光", 1)
    strict = ErrorIndex(ix.lexicon, ix.phonological, {}, threshold=0)
    assert strict.nearest("暴露") is None


def test_calligraphical_route():
    ix = ErrorIndex(lexicon={"惊慌": "惊慌-01"}, calligraphical={"慌": ("忄", "荒"), "谎": ("讠", "荒")})
    # 惊谎 differs from 惊慌 by one radical
    assert ix.distance("惊谎", "惊慌")[0] == 1


def test_initial_abbreviation_matches_syllable():
    assert code_distance(["J", "ying1"], ["jing1", "ying1"], initials=True) == 0
    assert code_distance(["J", "ying1"], ["jing1", "ying1"]) == 1


codes = st.lists(st.sampled_from(["a", "b", "c", "bao4", "guang1"]), max_size=6)


@given(codes, codes)
def test_code_distance_matches_reference(a, b):
    assert code_distance(a, b) == levenshtein(a, b)


@given(codes, codes, codes)
def test_code_distance_is_a_metric(a, b, c):
    assert code_distance(a, b) == code_distance(b, a)
    assert (code_distance(a, b) == 0) == (a == b)
    assert code_distance(a, c) <= code_distance(a, b) + code_distance(b, c)


def test_save_load_round_trip(dicts, tmp_path):
    dicts.save(tmp_path / "d")
    back = NormalizationDictionaries.load(tmp_path / "d")
    assert back.counts == dicts.counts
    assert back.special_map == dicts.special_map
    assert back.error_index == dicts.error_index
    for w in ["第一", "不", "合作", "暴光", "斑马"]:
        assert normalize_word(w, back) == normalize_word(w, dicts)


def test_build_needs_corpus():
    with pytest.raises(ValueError):
        build_dictionaries([])
