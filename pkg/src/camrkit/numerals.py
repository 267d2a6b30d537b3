"""Chinese / mixed numeral expressions to Arabic numeral strings."""
from __future__ import annotations

import re
import unicodedata
from decimal import Decimal, InvalidOperation
from typing import List, Optional, Tuple

DIGITS = {
    "零": 0, "〇": 0, "○": 0,
    "一": 1, "壹": 1,
    "二": 2, "两": 2, "贰": 2, "兩": 2,
    "三": 3, "叁": 3,
    "四": 4, "肆": 4,
    "五": 5, "伍": 5,
    "六": 6, "陆": 6, "陸": 6,
    "七": 7, "柒": 7,
    "八": 8, "捌": 8,
    "九": 9, "玖": 9,
}
SMALL_UNITS = {"十": 10, "拾": 10, "百": 100, "佰": 100, "千": 1000, "仟": 1000}
LARGE_UNITS = {"万": 10 ** 4, "萬": 10 ** 4, "亿": 10 ** 8, "億": 10 ** 8}
ZEROS = {"零", "〇", "○"}
ORDINAL_PREFIX = "第"
DECIMAL_POINT = "点"

_ARABIC = re.compile(r"^[0-9]+(\.[0-9]+)?$")
_ARABIC_SEP = re.compile(r"^[0-9]{1,3}([,，][0-9]{3})+(\.[0-9]+)?$")


def _ascii_digits(text: str) -> str:
    # fullwidth and other Unicode decimal digits -> ASCII
    out = []
    for ch in text:
        if ch.isdigit() and not ch.isascii():
            d = unicodedata.digit(ch, None)
            out.append(str(d) if d is not None else ch)
        else:
            out.append(ch)
    return "".join(out)


def _render(value: Decimal) -> str:
    if value == value.to_integral_value():
        return str(int(value))
    return format(value.normalize(), "f")


def _tokenize(text: str) -> Optional[List[Tuple[str, object]]]:
    """Split into ('num', Decimal) runs of Arabic digits, ('digit', int),
    ('zero', 0), ('small', unit) and ('large', unit) tokens."""
    toks: List[Tuple[str, object]] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isascii() and ch.isdigit():
            j = i
            while j < len(text) and (text[j].isascii() and text[j].isdigit() or text[j] == "."):
                j += 1
            chunk = text[i:j]
            if not _ARABIC.match(chunk):
                return None
            toks.append(("num", Decimal(chunk)))
            i = j
            continue
        if ch in ZEROS:
            toks.append(("zero", 0))
        elif ch in DIGITS:
            toks.append(("digit", DIGITS[ch]))
        elif ch in SMALL_UNITS:
            toks.append(("small", SMALL_UNITS[ch]))
        elif ch in LARGE_UNITS:
            toks.append(("large", LARGE_UNITS[ch]))
        else:
            return None
        i += 1
    return toks


def _digit_string(toks) -> Optional[Decimal]:
    # 一八三零 / 二〇二二: positional digits without units
    if not toks or any(k not in ("digit", "zero") for k, _ in toks):
        return None
    return Decimal("".join(str(v) for _, v in toks))


def _unit_expression(toks) -> Optional[Decimal]:
    total = Decimal(0)      # committed at the 亿 level
    mid = Decimal(0)        # committed at the 万 level inside the current 亿 group
    small = Decimal(0)      # below 万
    pending: Optional[Decimal] = None
    last_unit = 0
    zero_since_unit = False
    for kind, val in toks:
        if kind in ("digit", "num"):
            if pending is not None:
                return None
            pending = Decimal(val)
        elif kind == "zero":
            if pending is not None:
                return None
            zero_since_unit = True
        elif kind == "small":
            small += (pending if pending is not None else Decimal(1)) * val
            pending = None
            last_unit = val
            zero_since_unit = False
        else:
            group = small + (pending if pending is not None else 0)
            if val == 10 ** 4:
                if group == 0:
                    group = Decimal(1)
                mid += group * val
            else:
                group += mid
                if group == 0 and total == 0:
                    group = Decimal(1)
                total = (total + group) * val
                mid = Decimal(0)
            small = Decimal(0)
            pending = None
            last_unit = val
            zero_since_unit = False
    tail = Decimal(0)
    if pending is not None:
        # 一万五 = 15000, 三千五 = 3500; but 十五 = 15 and 一百零五 = 105
        if last_unit >= 100 and not zero_since_unit and pending < 10 and pending == pending.to_integral_value():
            tail = pending * last_unit // 10
        else:
            tail = pending
    return total + mid + small + tail


def normalize_number(word: str) -> Optional[str]:
    """Arabic-numeral concept for a numeral word, or None.

    Handles an ordinal 第 prefix, digit characters (including 两 and 〇),
    the magnitudes 十百千万亿, Arabic digits mixed with magnitudes (3万),
    thousands separators (1,000) and decimals (3.5, 三点五).
    """
    text = _ascii_digits(word.strip())
    if text.startswith(ORDINAL_PREFIX):
        text = text[len(ORDINAL_PREFIX):]
    if not text:
        return None
    if _ARABIC_SEP.match(text):
        text = text.replace(",", "").replace("，", "")
    if _ARABIC.match(text):
        return _render(Decimal(text))

    frac = ""
    if DECIMAL_POINT in text:
        whole, _, after = text.partition(DECIMAL_POINT)
        digits = []
        for ch in after:
            if ch in DIGITS:
                digits.append(str(DIGITS[ch]))
            elif ch.isascii() and ch.isdigit():
                digits.append(ch)
            else:
                return None
        if not digits or not whole:
            return None
        frac = "".join(digits)
        text = whole

    toks = _tokenize(text)
    if not toks:
        return None
    # a bare magnitude (万, 百万) or 万一 is not a numeral; 十五 is
    if toks[0][0] == "large" or (toks[0][0] == "small" and toks[0][1] != 10):
        return None
    if any(k in ("small", "large") for k, _ in toks):
        value = _unit_expression(toks)
    elif len(toks) == 1 and toks[0][0] == "num":
        value = toks[0][1]
    else:
        value = _digit_string(toks)
    if value is None:
        return None
    if frac:
        if value != value.to_integral_value():
            return None
        try:
            value = Decimal(f"{int(value)}.{frac}")
        except InvalidOperation:
            return None
    return _render(value)


def has_fraction(word: str) -> bool:
    """True for 分之 fraction expressions, which are not converted."""
    return "分之" in word
