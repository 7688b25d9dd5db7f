"""Position-preserving tokenization of Bangla text by codepoint class."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from banipa import _fallback
from banipa._kernels import char_runs, classify_code


class CharClass(enum.IntEnum):
    BANGLA_LETTER = _fallback.BANGLA_LETTER
    BANGLA_DIGIT = _fallback.BANGLA_DIGIT
    WHITESPACE = _fallback.WHITESPACE
    PUNCTUATION = _fallback.PUNCTUATION
    FOREIGN_LETTER = _fallback.FOREIGN_LETTER
    OTHER_SYMBOL = _fallback.OTHER_SYMBOL


class TokenKind(enum.Enum):
    BANGLA_WORD = "BanglaWord"
    BANGLA_NUMERAL = "BanglaNumeral"
    PUNCTUATION = "Punctuation"
    FOREIGN = "Foreign"
    WHITESPACE = "Whitespace"
    OTHER_SYMBOL = "OtherSymbol"


_KIND_OF_CLASS = {
    CharClass.BANGLA_LETTER: TokenKind.BANGLA_WORD,
    CharClass.BANGLA_DIGIT: TokenKind.BANGLA_NUMERAL,
    CharClass.WHITESPACE: TokenKind.WHITESPACE,
    CharClass.PUNCTUATION: TokenKind.PUNCTUATION,
    CharClass.FOREIGN_LETTER: TokenKind.FOREIGN,
    CharClass.OTHER_SYMBOL: TokenKind.OTHER_SYMBOL,
}

PUNCTUATION = _fallback.BASE_PUNCTUATION

_WS_RUN = re.compile(r"\s{2,}")
_ESCAPES = str.maketrans({"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"})


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    start: int
    end: int

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


def classify_char(c: str, extra_punctuation: Iterable[str] = ()) -> CharClass:
    """Class of a single codepoint.

    ASCII digits land in FOREIGN_LETTER so they merge with Latin words.
    """
    if len(c) != 1:
        raise ValueError(f"expected a single codepoint, got {c!r}")
    return CharClass(classify_code(c, frozenset(extra_punctuation)))


def segment(text: str, extra_punctuation: Iterable[str] = ()) -> list[Token]:
    """Cut ``text`` into maximal same-class runs; punctuation marks stand alone.

    Concatenating the token texts always reproduces ``text``.
    """
    extra = frozenset(extra_punctuation)
    return [
        Token(_KIND_OF_CLASS[CharClass(cls)], text[start:end], start, end)
        for cls, start, end in char_runs(text, extra)
    ]


def reassemble(tokens: Sequence[Token], replacements: Sequence[Optional[str]]) -> str:
    """Join tokens in order, substituting each non-None replacement.

    Whitespace runs are then squeezed to one space and the ends trimmed, which
    cleans up the gaps left by empty replacements.
    """
    if len(tokens) != len(replacements):
        raise ValueError(
            f"got {len(replacements)} replacements for {len(tokens)} tokens"
        )
    joined = "".join(
        tok.text if rep is None else rep for tok, rep in zip(tokens, replacements)
    )
    return _WS_RUN.sub(" ", joined).strip()


def format_tokens(tokens: Sequence[Token]) -> str:
    """One ``kind<TAB>start<TAB>end<TAB>text`` line per token.

    Backslash, tab, CR and LF inside the text are backslash-escaped.
    """
    return "".join(
        f"{tok.kind.value}\t{tok.start}\t{tok.end}\t{tok.text.translate(_ESCAPES)}\n"
        for tok in tokens
    )
