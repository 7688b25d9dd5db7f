"""Character vocabularies with fixed special ids."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PAD, UNK, BOS, EOS = 0, 1, 2, 3
N_SPECIALS = 4
REPLACEMENT_CHAR = "\ufffd"
_HEADER = "charvocab v1"


class VocabOverflowError(ValueError):
    """A word does not fit in the encoded length."""


@dataclass(frozen=True)
class CharVocab:
    chars: tuple[str, ...]
    index_of: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.chars)) != len(self.chars):
            raise ValueError("duplicate characters in vocabulary")
        for c in self.chars:
            if len(c) != 1:
                raise ValueError(f"vocabulary entry {c!r} is not a single codepoint")
        object.__setattr__(
            self, "index_of", {c: i + N_SPECIALS for i, c in enumerate(self.chars)}
        )

    @property
    def size(self) -> int:
        return N_SPECIALS + len(self.chars)

    def __len__(self) -> int:
        return self.size

    def __contains__(self, c: str) -> bool:
        return c in self.index_of


def build_vocab(words: Iterable[str]) -> CharVocab:
    """Characters by descending frequency, ties by ascending codepoint."""
    counts = Counter()
    for w in words:
        counts.update(w)
    ordered = sorted(counts, key=lambda c: (-counts[c], ord(c)))
    return CharVocab(tuple(ordered))


def encode(vocab: CharVocab, word: str, max_len: int) -> np.ndarray:
    if max_len < 2:
        raise ValueError("max_len must be at least 2")
    if len(word) > max_len - 2:
        raise VocabOverflowError(
            f"word of length {len(word)} exceeds max_len {max_len} (limit {max_len - 2})"
        )
    ids = np.full(max_len, PAD, dtype=np.int64)
    ids[0] = BOS
    ids[1 : len(word) + 1] = [vocab.index_of.get(c, UNK) for c in word]
    ids[len(word) + 1] = EOS
    return ids


def encode_batch(vocab: CharVocab, words: Sequence[str], max_len: int) -> np.ndarray:
    out = np.full((len(words), max_len), PAD, dtype=np.int64)
    for i, w in enumerate(words):
        out[i] = encode(vocab, w, max_len)
    return out


def decode(vocab: CharVocab, ids: Iterable[int]) -> str:
    out = []
    size = vocab.size
    for i in ids:
        i = int(i)
        if not 0 <= i < size:
            raise ValueError(f"id {i} outside vocabulary of size {size}")
        if i == EOS:
            break
        if i == UNK:
            out.append(REPLACEMENT_CHAR)
        elif i >= N_SPECIALS:
            out.append(vocab.chars[i - N_SPECIALS])
    return "".join(out)


def save_vocab(vocab: CharVocab, path) -> None:
    lines = [f"{_HEADER} {vocab.size}", *vocab.chars]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_vocab(path) -> CharVocab:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith(_HEADER + " "):
        raise ValueError(f"{path}: missing '{_HEADER} <size>' header")
    try:
        size = int(lines[0][len(_HEADER) + 1 :])
    except ValueError:
        raise ValueError(f"{path}: bad size in header {lines[0]!r}") from None
    chars = tuple(lines[1:])
    if size != N_SPECIALS + len(chars):
        raise ValueError(
            f"{path}: header says size {size} but file holds {len(chars)} characters"
        )
    return CharVocab(chars)
