"""
Word normalization
==================

Numerals, the special map, frequency dictionaries and typo correction by
phonological and shape codes.
"""
from camrkit.numerals import normalize_number
from camrkit.normalizer import (build_dictionaries, load_codes, load_error_lexicon,
                                load_special_map, normalize_word_traced)
from camrkit.pipeline import resource_path
from camrkit.synthetic import generate_corpus

for w in ["三", "十五", "两千", "一万二千三百", "3.5万", "第三", "百分之五"]:
    print(w, "->", normalize_number(w))

graphs, _ = generate_corpus(200, seed=0)
d = build_dictionaries(
    graphs,
    special_map=load_special_map(resource_path("special.tsv")),
    error_lexicon=load_error_lexicon(resource_path("error_lexicon.tsv")),
    phonological=load_codes(resource_path("phonological.tsv")),
    calligraphical=load_codes(resource_path("calligraphical.tsv")),
)
# 精鹰 is unseen, so it is matched against the error lexicon by sound and shape
for w in ["称为", "一百", "没有", "精鹰", "不知道的词"]:
    print(w, "->", normalize_word_traced(w, d))
