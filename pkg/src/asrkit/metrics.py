"""Word and character error rates with insertion/substitution/deletion
breakdowns.

Both rates are the same unit-cost Levenshtein computation at two
tokenizations: whitespace-separated words for WER, Unicode code points
(including the single inter-word spaces) for CER. Corpus-level rates pool
summed edit counts over summed reference lengths; they are not means of
per-utterance rates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import EmptyReference
from .textnorm import DEFAULT_CONFIG, NormalizationConfig, normalize

MATCH = "match"
SUB = "sub"
DEL = "del"
INS = "ins"


@dataclass(frozen=True)
class EditCounts:
    """Minimal-alignment edit counts against a reference of length N."""

    insertions: int
    substitutions: int
    deletions: int
    reference_length: int

    @property
    def errors(self) -> int:
        return self.insertions + self.substitutions + self.deletions

    def __add__(self, other: "EditCounts") -> "EditCounts":
        return EditCounts(
            self.insertions + other.insertions,
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.reference_length + other.reference_length,
        )

    def rate(self) -> float:
        """Error percentage 100*(I+S+D)/N; undefined for an empty reference."""
        if self.reference_length == 0:
            raise EmptyReference("error rate undefined for empty reference")
        return 100.0 * self.errors / self.reference_length


@dataclass(frozen=True)
class AlignStep:
    """One alignment step; ref/hyp hold the tokens consumed by the step."""

    op: str
    ref: str | None = None
    hyp: str | None = None


Alignment = list[AlignStep]


def edit_counts(
    ref_tokens: Sequence[str], hyp_tokens: Sequence[str]
) -> tuple[EditCounts, list[AlignStep]]:
    """Unit-cost Levenshtein alignment between token sequences.

    Among equal-cost alignments the backtrace prefers
    match > substitute > delete > insert, making the I/S/D split
    deterministic. Empty sequences are allowed; an empty reference against a
    non-empty hypothesis raises EmptyReference (its rate is undefined).
    """
    n, m = len(ref_tokens), len(hyp_tokens)
    if n == 0 and m > 0:
        raise EmptyReference("reference is empty but hypothesis is not")

    dp = [list(range(m + 1))] + [[i] + [0] * m for i in range(1, n + 1)]
    for i in range(1, n + 1):
        row = dp[i]
        prev = dp[i - 1]
        r = ref_tokens[i - 1]
        for j in range(1, m + 1):
            cost = 0 if r == hyp_tokens[j - 1] else 1
            row[j] = min(prev[j - 1] + cost, prev[j] + 1, row[j - 1] + 1)

    steps: list[AlignStep] = []
    i, j = n, m
    while i > 0 or j > 0:
        here = dp[i][j]
        if i > 0 and j > 0 and ref_tokens[i - 1] == hyp_tokens[j - 1] and here == dp[i - 1][j - 1]:
            steps.append(AlignStep(MATCH, ref_tokens[i - 1], hyp_tokens[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and here == dp[i - 1][j - 1] + 1:
            steps.append(AlignStep(SUB, ref_tokens[i - 1], hyp_tokens[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and here == dp[i - 1][j] + 1:
            steps.append(AlignStep(DEL, ref=ref_tokens[i - 1]))
            i -= 1
        else:
            steps.append(AlignStep(INS, hyp=hyp_tokens[j - 1]))
            j -= 1
    steps.reverse()

    counts = EditCounts(
        insertions=sum(s.op == INS for s in steps),
        substitutions=sum(s.op == SUB for s in steps),
        deletions=sum(s.op == DEL for s in steps),
        reference_length=n,
    )
    return counts, steps


def _counts_at(ref: str, hyp: str, config: NormalizationConfig, chars: bool) -> EditCounts:
    nref = normalize(ref, config)
    nhyp = normalize(hyp, config)
    if not nref:
        raise EmptyReference("reference is empty after normalization")
    if chars:
        ref_toks: Sequence[str] = list(nref)
        hyp_toks: Sequence[str] = list(nhyp)
    else:
        ref_toks = nref.split()
        hyp_toks = nhyp.split()
    counts, _ = edit_counts(ref_toks, hyp_toks)
    return counts


def wer(ref: str, hyp: str, config: NormalizationConfig = DEFAULT_CONFIG) -> float:
    """Word error percentage 100*(I+S+D)/N over normalized word tokens."""
    return _counts_at(ref, hyp, config, chars=False).rate()


def cer(ref: str, hyp: str, config: NormalizationConfig = DEFAULT_CONFIG) -> float:
    """Character error percentage; spaces between words count as characters."""
    return _counts_at(ref, hyp, config, chars=True).rate()


@dataclass(frozen=True)
class UtteranceScore:
    source_id: str
    wer: float
    cer: float
    word_counts: EditCounts
    char_counts: EditCounts


@dataclass
class ScoreReport:
    """Per-utterance scores plus pooled corpus aggregates."""

    utterances: list[UtteranceScore] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)
    word_totals: EditCounts = EditCounts(0, 0, 0, 0)
    char_totals: EditCounts = EditCounts(0, 0, 0, 0)

    @property
    def corpus_wer(self) -> float | None:
        return self.word_totals.rate() if self.word_totals.reference_length else None

    @property
    def corpus_cer(self) -> float | None:
        return self.char_totals.rate() if self.char_totals.reference_length else None

    def to_records(self) -> Iterable[dict]:
        """One plain dict per utterance, for line-delimited serialization."""
        for u in self.utterances:
            yield {
                "source_id": u.source_id,
                "wer": round(u.wer, 4),
                "cer": round(u.cer, 4),
                "word_i": u.word_counts.insertions,
                "word_s": u.word_counts.substitutions,
                "word_d": u.word_counts.deletions,
                "word_n": u.word_counts.reference_length,
                "char_i": u.char_counts.insertions,
                "char_s": u.char_counts.substitutions,
                "char_d": u.char_counts.deletions,
                "char_n": u.char_counts.reference_length,
            }

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(r, ensure_ascii=False) for r in self.to_records())

    def summary_record(self) -> dict:
        return {
            "utterances": len(self.utterances),
            "skipped": len(self.skipped),
            "wer": None if self.corpus_wer is None else round(self.corpus_wer, 4),
            "cer": None if self.corpus_cer is None else round(self.corpus_cer, 4),
            "word_errors": self.word_totals.errors,
            "word_n": self.word_totals.reference_length,
            "char_errors": self.char_totals.errors,
            "char_n": self.char_totals.reference_length,
        }

    def to_table(self, per_utterance: bool = False) -> str:
        lines = []
        if per_utterance:
            lines.append(f"{'source_id':<32} {'WER%':>8} {'CER%':>8}")
            for u in self.utterances:
                lines.append(f"{u.source_id:<32} {u.wer:>8.2f} {u.cer:>8.2f}")
            lines.append("")
        w = "undefined" if self.corpus_wer is None else f"{self.corpus_wer:.2f}"
        c = "undefined" if self.corpus_cer is None else f"{self.corpus_cer:.2f}"
        lines.append(f"corpus WER: {w}%  ({self.word_totals.errors}/{self.word_totals.reference_length} words)")
        lines.append(f"corpus CER: {c}%  ({self.char_totals.errors}/{self.char_totals.reference_length} chars)")
        if self.skipped:
            lines.append(f"skipped utterances (empty reference): {len(self.skipped)}")
        return "\n".join(lines)


def score_corpus(
    pairs: Iterable[tuple[str, str, str]],
    config: NormalizationConfig = DEFAULT_CONFIG,
) -> ScoreReport:
    """Score (source_id, reference, hypothesis) triples.

    Utterances whose reference normalizes to empty are collected under
    ``skipped`` rather than failing or polluting the pooled rates.
    """
    report = ScoreReport()
    for source_id, ref, hyp in pairs:
        try:
            wc = _counts_at(ref, hyp, config, chars=False)
            cc = _counts_at(ref, hyp, config, chars=True)
        except EmptyReference:
            report.skipped.append((source_id, "EmptyReference"))
            continue
        report.utterances.append(UtteranceScore(source_id, wc.rate(), cc.rate(), wc, cc))
        report.word_totals = report.word_totals + wc
        report.char_totals = report.char_totals + cc
    return report
