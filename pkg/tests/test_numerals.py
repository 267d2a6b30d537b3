import random

import pytest
from hypothesis import given, strategies as st

from camrkit.numerals import has_fraction, normalize_number

from oracles import DIGITS, int_to_chinese


@pytest.mark.parametrize("word,value", [
    ("第一", "1"),
    ("一万", "10000"),
    ("十五", "15"),
    ("一百零五", "105"),
    ("一千零五十", "1050"),
    ("一万五", "15000"),
    ("三千五", "3500"),
    ("二〇二二", "2022"),
    ("1,000", "1000"),
    ("三点五", "3.5"),
    ("3万", "30000"),
    ("零", "0"),
    ("第3", "3"),
    ("两亿三千四百五十六万七千八百九十", "234567890"),
])
def test_known_readings(word, value):
    assert normalize_number(word) == value


@pytest.mark.parametrize("word", ["狗", "万一", "百", "", "第", "一点", "1.2.3"])
def test_non_numerals(word):
    assert normalize_number(word) is None


def test_fraction_is_flagged():
    assert has_fraction("三分之一")
    assert not has_fraction("三百")


def test_oracle_self_check():
    assert int_to_chinese(105) == "一百零五"
    assert int_to_chinese(10) == "十"
    assert int_to_chinese(110) == "一百一十"
    assert int_to_chinese(100000005) == "一亿零五"


def test_round_trip_on_sampled_integers():
    rng = random.Random(2024)
    values = [rng.randrange(10 ** rng.randint(1, 13)) for _ in range(10_000)]
    bad = [n for n in values if normalize_number(int_to_chinese(n)) != str(n)]
    assert bad == []


@given(st.integers(0, 10**15))
def test_round_trip_property(n):
    assert normalize_number(int_to_chinese(n)) == str(n)


@given(st.integers(1, 10**12))
def test_ordinal_prefix_is_transparent(n):
    assert normalize_number("第" + int_to_chinese(n)) == str(n)


@given(st.integers(0, 10**12))
def test_digit_by_digit_strings(n):
    word = "".join(DIGITS[int(d)] for d in str(n))
    assert normalize_number(word) == str(n)


@given(st.integers(0, 10**9))
def test_arabic_with_separators(n):
    assert normalize_number(f"{n:,}") == str(n)
    assert normalize_number(str(n)) == str(n)
