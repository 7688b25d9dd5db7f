"""Sentence transcription: token policies, memoized word IPA, numeral handling."""
from __future__ import annotations

import enum
import threading
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Protocol, Sequence

import numpy as np

from banipa import model as M
from banipa.numerals import spell_out_numeral
from banipa.segmenter import Token, TokenKind, reassemble, segment
from banipa.vocab import CharVocab, decode, encode


class NumeralPolicy(enum.Enum):
    PASSTHROUGH = "passthrough"
    SPELL_OUT = "spell_out"
    DROP = "drop"


@dataclass(frozen=True)
class PipelineConfig:
    numeral_policy: NumeralPolicy = NumeralPolicy.PASSTHROUGH
    drop_foreign: bool = False
    punctuation_passthrough: bool = False
    filter_unknown_chars: bool = False
    name: str = "custom"


PRESETS = {
    "A": PipelineConfig(NumeralPolicy.PASSTHROUGH, False, False, False, name="A"),
    "B": PipelineConfig(NumeralPolicy.PASSTHROUGH, True, True, False, name="B"),
    "C": PipelineConfig(NumeralPolicy.SPELL_OUT, True, True, False, name="C"),
    "D": PipelineConfig(NumeralPolicy.DROP, True, True, True, name="D"),
}


def preset(name: str) -> PipelineConfig:
    try:
        return PRESETS[name.upper()]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


class IpaDictionary:
    """Write-once word -> IPA map with hit/miss counters.

    Lookups may run concurrently; inserts are serialized and never overwrite.
    """

    def __init__(self, entries: Optional[dict[str, str]] = None):
        self._entries: dict[str, str] = dict(entries or {})
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def __contains__(self, word):
        return word in self._entries

    def __len__(self):
        return len(self._entries)

    def get(self, word: str) -> Optional[str]:
        return self._entries.get(word)

    def insert(self, word: str, ipa: str) -> str:
        """Store ``ipa`` unless ``word`` is already present; returns the stored value."""
        with self._lock:
            return self._entries.setdefault(word, ipa)

    def entries(self) -> dict[str, str]:
        return dict(self._entries)

    def copy(self) -> "IpaDictionary":
        return IpaDictionary(self._entries)

    def _count(self, hit: bool):
        with self._lock:
            if hit:
                self.hits += 1
            else:
                self.misses += 1


class WordModel(Protocol):
    """Anything that turns one grapheme word into IPA."""

    invocations: int

    def predict(self, word: str) -> tuple[str, bool]:
        """Return ``(ipa, truncated)``."""

    @property
    def known_chars(self) -> Optional[frozenset]:
        ...


class ModelContext:
    """A trained transformer plus its vocabularies, counting decoded words."""

    def __init__(self, params, config: M.ModelConfig, src_vocab: CharVocab, tgt_vocab: CharVocab):
        if src_vocab.size != config.src_vocab_size or tgt_vocab.size != config.tgt_vocab_size:
            raise ValueError("vocabulary sizes do not match the model configuration")
        self.params = params
        self.config = config
        self.src_vocab = src_vocab
        self.tgt_vocab = tgt_vocab
        self.invocations = 0
        self._lock = threading.Lock()

    @property
    def known_chars(self) -> frozenset:
        return frozenset(self.src_vocab.chars)

    def predict(self, word: str) -> tuple[str, bool]:
        return self.predict_many([word])[0]

    def predict_many(self, words: Sequence[str], batch_size: int = 64) -> list[tuple[str, bool]]:
        out = []
        for lo in range(0, len(words), batch_size):
            chunk = words[lo : lo + batch_size]
            src = np.stack([encode(self.src_vocab, w, self.config.max_len) for w in chunk])
            for res in M.greedy_decode_batch(self.params, self.config, src):
                out.append((decode(self.tgt_vocab, res.ids), res.truncated))
        with self._lock:
            self.invocations += len(words)
        return out


@dataclass
class RunReport:
    token_counts: Counter = field(default_factory=Counter)
    hits: int = 0
    misses: int = 0
    model_invocations: int = 0
    null_output_words: list[str] = field(default_factory=list)
    truncated_words: list[str] = field(default_factory=list)

    def format(self) -> str:
        lines = [f"tokens_{kind.value}: {self.token_counts.get(kind, 0)}" for kind in TokenKind]
        lines += [
            f"dictionary_hits: {self.hits}",
            f"dictionary_misses: {self.misses}",
            f"model_invocations: {self.model_invocations}",
            f"null_outputs: {len(self.null_output_words)}",
            f"truncated_outputs: {len(self.truncated_words)}",
        ]
        lines += [f"null_output_word: {w}" for w in self.null_output_words]
        lines += [f"truncated_word: {w}" for w in self.truncated_words]
        return "\n".join(lines) + "\n"


def transcribe_word(word: str, dictionary: IpaDictionary, model: WordModel, report: Optional[RunReport] = None) -> str:
    """Dictionary first; on a miss run the model once and remember the result.

    An empty model output is stored as-is and flagged in ``report``.
    """
    stored = dictionary.get(word)
    if stored is not None:
        dictionary._count(True)
        if report is not None:
            report.hits += 1
        return stored
    before = model.invocations
    ipa, truncated = model.predict(word)
    ipa = dictionary.insert(word, ipa)
    dictionary._count(False)
    if report is not None:
        report.misses += 1
        report.model_invocations += model.invocations - before
        if not ipa:
            report.null_output_words.append(word)
        if truncated:
            report.truncated_words.append(word)
    return ipa


def _filter_word(word: str, known: Optional[frozenset]) -> str:
    if known is None:
        return word
    return "".join(c for c in word if c in known)


def _bangla_word(word, config, dictionary, model, report):
    if config.filter_unknown_chars:
        word = _filter_word(word, model.known_chars)
        if not word:
            return ""
    return transcribe_word(word, dictionary, model, report)


def token_replacement(tok: Token, config: PipelineConfig, dictionary, model, report=None) -> Optional[str]:
    """Replacement text for one token; None keeps the source text."""
    kind = tok.kind
    if kind is TokenKind.BANGLA_WORD:
        return _bangla_word(tok.text, config, dictionary, model, report)
    if kind is TokenKind.BANGLA_NUMERAL:
        if config.numeral_policy is NumeralPolicy.PASSTHROUGH:
            return None
        if config.numeral_policy is NumeralPolicy.DROP:
            return ""
        return " ".join(
            _bangla_word(w, config, dictionary, model, report)
            for w in spell_out_numeral(tok.text).split()
        )
    if kind is TokenKind.FOREIGN:
        return "" if config.drop_foreign else None
    if kind is TokenKind.PUNCTUATION:
        return None if config.punctuation_passthrough else ""
    if kind is TokenKind.WHITESPACE:
        return None
    return "" if config.filter_unknown_chars else None


def transcribe_text(
    text: str,
    config: PipelineConfig,
    dictionary: IpaDictionary,
    model: WordModel,
    report: Optional[RunReport] = None,
    extra_punctuation: Iterable[str] = (),
) -> str:
    tokens = segment(text, extra_punctuation)
    if report is not None:
        report.token_counts.update(t.kind for t in tokens)
    return reassemble(tokens, [token_replacement(t, config, dictionary, model, report) for t in tokens])


def words_needed(text: str, config: PipelineConfig, known: Optional[frozenset], extra_punctuation=()) -> list[str]:
    """Words ``transcribe_text`` would look up for ``text``, in order."""
    out = []
    for tok in segment(text, extra_punctuation):
        if tok.kind is TokenKind.BANGLA_WORD:
            words = [tok.text]
        elif tok.kind is TokenKind.BANGLA_NUMERAL and config.numeral_policy is NumeralPolicy.SPELL_OUT:
            words = spell_out_numeral(tok.text).split()
        else:
            continue
        for w in words:
            if config.filter_unknown_chars:
                w = _filter_word(w, known)
            if w:
                out.append(w)
    return out


class _Prefetched:
    # replays batch-decoded results so per-word bookkeeping stays unchanged
    def __init__(self, model, results):
        self._model = model
        self._results = results
        self.invocations = 0

    @property
    def known_chars(self):
        return self._model.known_chars

    def predict(self, word):
        self.invocations += 1
        return self._results[word]


def transcribe_many(
    texts: Sequence[str],
    config: PipelineConfig,
    dictionary: IpaDictionary,
    model: ModelContext,
    report: Optional[RunReport] = None,
    batch_size: int = 64,
) -> list[str]:
    """Transcribe many sentences, decoding unseen words in batches.

    Gives the same output and counters as calling ``transcribe_text`` per line.
    """
    missing: dict[str, None] = {}
    for text in texts:
        for w in words_needed(text, config, model.known_chars):
            if w not in dictionary:
                missing.setdefault(w)
    words = list(missing)
    results = dict(zip(words, model.predict_many(words, batch_size))) if words else {}
    replay = _Prefetched(model, results)
    return [transcribe_text(t, config, dictionary, replay, report) for t in texts]
