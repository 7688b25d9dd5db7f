"""Corpus loading, word-pair extraction, splitting and dataset statistics."""
from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np


class CorpusError(ValueError):
    pass


class MissingColumnError(CorpusError):
    pass


@dataclass(frozen=True)
class Sample:
    text: str
    ipa: Optional[str] = None


class WordPair(NamedTuple):
    grapheme_word: str
    ipa_word: str


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.90
    val_frac: float = 0.05
    test_frac: float = 0.05
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(not 0.0 <= f <= 1.0 for f in fracs):
            raise ValueError(f"split fractions must lie in [0, 1], got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {sum(fracs)}")

    @classmethod
    def from_ratio(cls, ratio: str, seed: int = 0) -> "SplitSpec":
        """Parse ``"90:5:5"`` style ratios."""
        parts = ratio.split(":")
        if len(parts) != 3:
            raise ValueError(f"split ratio needs three parts, got {ratio!r}")
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            raise ValueError(f"bad split ratio {ratio!r}") from None
        total = sum(nums)
        if total <= 0 or any(x < 0 for x in nums):
            raise ValueError(f"bad split ratio {ratio!r}")
        return cls(*(x / total for x in nums), seed=seed)


@dataclass
class CorpusStats:
    sample_count: int = 0
    unique_word_count: int = 0
    unique_text_chars: int = 0
    unique_ipa_chars: int = 0
    max_text_word_len: int = 0
    max_ipa_word_len: int = 0
    word_count_histogram: dict[int, int] = field(default_factory=dict)
    mismatched_samples: int = 0
    unique_pair_count: int = 0

    def format(self) -> str:
        lines = [
            f"sample_count: {self.sample_count}",
            f"unique_word_count: {self.unique_word_count}",
            f"unique_text_chars: {self.unique_text_chars}",
            f"unique_ipa_chars: {self.unique_ipa_chars}",
            f"max_text_word_len: {self.max_text_word_len}",
            f"max_ipa_word_len: {self.max_ipa_word_len}",
            f"mismatched_samples: {self.mismatched_samples}",
            f"unique_pair_count: {self.unique_pair_count}",
            "histogram",
        ]
        lines += [f"{k}\t{v}" for k, v in sorted(self.word_count_histogram.items())]
        return "\n".join(lines) + "\n"


def _decode_utf8(raw: bytes, path) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        line = raw.count(b"\n", 0, e.start) + 1
        raise CorpusError(f"{path}: invalid UTF-8 on line {line}") from None


def load_corpus(path, has_ipa: Optional[bool] = True) -> list[Sample]:
    """Read a headed CSV with a ``text`` column and, if ``has_ipa``, an ``ipa`` column.

    ``has_ipa=None`` reads the ``ipa`` column only when the header has one.
    Rows are kept verbatim. Row numbers in errors count the header as row 1.
    """
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"{path}: no such file")
    text = _decode_utf8(path.read_bytes(), path)
    if text.startswith("\ufeff"):
        text = text[1:]
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise CorpusError(f"{path}: empty file, expected a header row") from None
    except csv.Error as e:
        raise CorpusError(f"{path}: row 1: {e}") from None
    if "text" not in header:
        raise MissingColumnError(f"{path}: header lacks a 'text' column")
    if has_ipa is None:
        has_ipa = "ipa" in header
    elif has_ipa and "ipa" not in header:
        raise MissingColumnError(f"{path}: header lacks an 'ipa' column")
    ti = header.index("text")
    ii = header.index("ipa") if has_ipa else None

    samples = []
    row_no = 1
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as e:
            raise CorpusError(f"{path}: row {row_no + 1}: {e}") from None
        row_no += 1
        if not row:
            continue
        if len(row) != len(header):
            raise CorpusError(
                f"{path}: row {row_no}: expected {len(header)} fields, got {len(row)}"
            )
        if not row[ti].strip():
            raise CorpusError(f"{path}: row {row_no}: empty text")
        samples.append(Sample(row[ti], row[ii] if ii is not None else None))
    return samples


def extract_word_pairs(samples: Iterable[Sample]) -> tuple[list[WordPair], int]:
    """Align text and IPA words position by position.

    Samples whose word counts differ are skipped whole. Returns the
    first-occurrence-deduplicated pairs and the number of skipped samples.
    """
    seen: dict[str, str] = {}
    skipped = 0
    for s in samples:
        if s.ipa is None:
            raise CorpusError(f"sample without ipa: {s.text!r}")
        words, ipas = s.text.split(), s.ipa.split()
        if len(words) != len(ipas):
            skipped += 1
            continue
        for w, p in zip(words, ipas):
            seen.setdefault(w, p)
    return [WordPair(w, p) for w, p in seen.items()], skipped


def split_pairs(
    pairs: Sequence[WordPair], spec: SplitSpec
) -> tuple[list[WordPair], list[WordPair], list[WordPair]]:
    n = len(pairs)
    order = np.random.default_rng(spec.seed).permutation(n)
    shuffled = [pairs[i] for i in order]
    # tolerance keeps 0.29 * 100 from flooring to 28
    n_train = math.floor(n * spec.train_frac + 1e-9)
    n_val = min(math.floor(n * spec.val_frac + 1e-9), n - n_train)
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_val],
        shuffled[n_train + n_val :],
    )


def compute_stats(samples: Sequence[Sample]) -> CorpusStats:
    """Dataset statistics; character inventories exclude whitespace."""
    words: set[str] = set()
    text_chars: set[str] = set()
    ipa_chars: set[str] = set()
    hist: Counter = Counter()
    max_t = max_i = 0
    for s in samples:
        tw = s.text.split()
        hist[len(tw)] += 1
        words.update(tw)
        for w in tw:
            text_chars.update(w)
            max_t = max(max_t, len(w))
        if s.ipa is not None:
            for w in s.ipa.split():
                ipa_chars.update(w)
                max_i = max(max_i, len(w))
    stats = CorpusStats(
        sample_count=len(samples),
        unique_word_count=len(words),
        unique_text_chars=len(text_chars),
        unique_ipa_chars=len(ipa_chars),
        max_text_word_len=max_t,
        max_ipa_word_len=max_i,
        word_count_histogram=dict(sorted(hist.items())),
    )
    if samples and all(s.ipa is not None for s in samples):
        pairs, skipped = extract_word_pairs(samples)
        stats.mismatched_samples = skipped
        stats.unique_pair_count = len(pairs)
    return stats
