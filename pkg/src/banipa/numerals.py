"""Bangla numeral spell-out from the bundled number-name table."""
from __future__ import annotations

import functools
from importlib import resources

DIGITS = "০১২৩৪৫৬৭৮৯"
_DIGIT_VALUE = {d: i for i, d in enumerate(DIGITS)}

# values above this cannot be composed from the 0-99 table and the crore unit
MAX_COMPOSABLE = 99_99_99_999


@functools.lru_cache(maxsize=1)
def number_table() -> tuple[dict[int, str], dict[str, str]]:
    names: dict[int, str] = {}
    units: dict[str, str] = {}
    text = resources.files("banipa").joinpath("data/bn_numerals.tsv").read_text("utf-8")
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        key, word = line.split("\t")
        if key.isdigit():
            names[int(key)] = word
        else:
            units[key] = word
    missing = set(range(100)) - set(names)
    if missing or set(units) != {"hundred", "thousand", "lakh", "crore"}:
        raise RuntimeError("bundled numeral table is incomplete")
    return names, units


def _check(digits: str) -> None:
    if not digits:
        raise ValueError("empty numeral")
    bad = [c for c in digits if c not in _DIGIT_VALUE]
    if bad:
        raise ValueError(f"not a Bangla digit string: {digits!r}")


def digit_words(digits: str) -> list[str]:
    _check(digits)
    names, _ = number_table()
    return [names[_DIGIT_VALUE[c]] for c in digits]


def spell_out_numeral(digits: str, digit_by_digit: bool = False) -> str:
    """Bangla words for a Bangla digit string, space separated.

    Values are named with the crore/lakh/thousand/hundred grouping. Strings with
    a leading zero, and values past the crore range, are read digit by digit.
    """
    _check(digits)
    value = int("".join(str(_DIGIT_VALUE[c]) for c in digits))
    if digit_by_digit or (len(digits) > 1 and digits[0] == DIGITS[0]) or value > MAX_COMPOSABLE:
        return " ".join(digit_words(digits))
    names, units = number_table()
    if value == 0:
        return names[0]
    words = []
    for size, unit in ((10**7, "crore"), (10**5, "lakh"), (1000, "thousand"), (100, "hundred")):
        count, value = divmod(value, size)
        if count:
            words += [names[count], units[unit]]
    if value:
        words.append(names[value])
    return " ".join(words)
