"""Word error rate and the preset ablation report."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from banipa._kernels import edit_ops
from banipa.corpus import Sample
from banipa.pipeline import IpaDictionary, PipelineConfig, transcribe_many


@dataclass(frozen=True)
class WerResult:
    substitutions: int
    insertions: int
    deletions: int
    ref_words: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def wer(self) -> float:
        return self.errors / self.ref_words

    def __add__(self, other: "WerResult") -> "WerResult":
        return WerResult(
            self.substitutions + other.substitutions,
            self.insertions + other.insertions,
            self.deletions + other.deletions,
            self.ref_words + other.ref_words,
        )


def _as_ids(ref: list[str], hyp: list[str]):
    ids: dict[str, int] = {}
    return [ids.setdefault(w, len(ids)) for w in ref], [ids.setdefault(w, len(ids)) for w in hyp]


def wer(reference: str, hypothesis: str) -> WerResult:
    """Word-level edit counts between two whitespace-tokenized strings.

    On ties the backtrace prefers substitution, then deletion, then insertion.
    """
    ref, hyp = reference.split(), hypothesis.split()
    if not ref:
        raise ValueError("reference has no words")
    s, d, i = edit_ops(*_as_ids(ref, hyp))
    return WerResult(s, i, d, len(ref))


def corpus_counts(pairs: Iterable[tuple[str, str]]) -> WerResult:
    total = None
    for ref, hyp in pairs:
        r = wer(ref, hyp)
        total = r if total is None else total + r
    if total is None:
        raise ValueError("no (reference, hypothesis) pairs")
    return total


def corpus_wer(pairs: Iterable[tuple[str, str]]) -> float:
    """Micro-averaged WER: all edits over all reference words."""
    return corpus_counts(pairs).wer


@dataclass(frozen=True)
class AblationRow:
    preset: str
    result: WerResult

    def format(self) -> str:
        r = self.result
        return (
            f"{self.preset}\t{r.wer:.6f}\t{r.substitutions}\t{r.insertions}"
            f"\t{r.deletions}\t{r.ref_words}"
        )


REPORT_HEADER = "preset\twer\tsubstitutions\tinsertions\tdeletions\tref_words"


def ablation_report(
    presets: Sequence[PipelineConfig],
    samples: Sequence[Sample],
    dictionary: IpaDictionary,
    model,
) -> list[AblationRow]:
    """Corpus WER per preset; each preset starts from its own copy of ``dictionary``."""
    if any(s.ipa is None for s in samples):
        raise ValueError("ablation needs reference IPA for every sample")
    rows = []
    for cfg in presets:
        hyps = transcribe_many([s.text for s in samples], cfg, dictionary.copy(), model)
        rows.append(AblationRow(cfg.name, corpus_counts((s.ipa, h) for s, h in zip(samples, hyps))))
    return rows


def format_report(rows: Sequence[AblationRow]) -> str:
    return "\n".join([REPORT_HEADER, *(r.format() for r in rows)]) + "\n"
