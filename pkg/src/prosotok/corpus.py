"""Corpus-scale passes: token frequencies, extremity scores, data cleaning,
and speaker statistics.

Frequency counts cover every prosody token in parsed prosody sections
(silence-duration tokens included, ``<PINV>`` and global tokens excluded) and
merge associatively, so sharded builds equal sequential ones exactly. The
extremity score of a sentence is the mean log corpus frequency of its prosody
tokens under additive smoothing, so lower means rarer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .features import WordProsodyVector
from .quantizer import (
    N_BINS,
    Dimension,
    QuantizerSpec,
    ProsodyToken,
    WORD_DIMENSIONS,
    quantize,
    silence_log_duration,
)
from .sequence import ParseError, SentenceSequence, parse_sequence


@dataclass
class FrequencyTable:
    """Smoothed occurrence frequencies over the shared 512-token vocabulary."""

    counts: np.ndarray = field(default_factory=lambda: np.zeros(N_BINS, dtype=np.int64))
    alpha: float = 1.0

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (N_BINS,):
            raise ValueError(f"counts must have shape ({N_BINS},)")
        if np.any(self.counts < 0):
            raise ValueError("negative count")
        if self.alpha <= 0:
            raise ValueError("smoothing alpha must be positive")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def frequency(self, token: ProsodyToken) -> float:
        if not 0 <= token < N_BINS:
            raise ValueError(f"bin out of range: {token}")
        return (self.counts[token] + self.alpha) / (self.total + N_BINS * self.alpha)

    def frequencies(self) -> np.ndarray:
        return (self.counts + self.alpha) / (self.total + N_BINS * self.alpha)

    def add_sentence(self, sentence: SentenceSequence) -> None:
        for token in sentence.prosody_tokens():
            self.counts[token] += 1

    def merge(self, other: "FrequencyTable") -> "FrequencyTable":
        if other.alpha != self.alpha:
            raise ValueError("cannot merge tables with different smoothing")
        return FrequencyTable(counts=self.counts + other.counts, alpha=self.alpha)


def build_frequency_table(
    streams: Iterable[Sequence[str]],
    include_global: bool = False,
    alpha: float = 1.0,
) -> tuple[FrequencyTable, int]:
    """Count prosody tokens over a corpus of token streams.

    Unparseable streams are skipped; the second return value is how many.
    """
    table = FrequencyTable(alpha=alpha)
    skipped = 0
    for stream in streams:
        try:
            sentences = parse_sequence(stream, include_global=include_global)
        except ParseError:
            skipped += 1
            continue
        for sentence in sentences:
            table.add_sentence(sentence)
    return table, skipped


def extremity_score(sentence: SentenceSequence, table: FrequencyTable) -> float:
    """Mean log corpus frequency of the sentence's prosody tokens; strictly
    increasing in each token's frequency, so lower means rarer prosody."""
    tokens = sentence.prosody_tokens()
    if not tokens:
        raise ValueError("sentence has no prosody tokens")
    return math.fsum(math.log(table.frequency(t)) for t in tokens) / len(tokens)


def global_token(score: float, spec: QuantizerSpec) -> ProsodyToken:
    """Quantize an extremity score with the calibrated extremity caps."""
    if not spec.has(Dimension.EXTREMITY):
        raise ValueError("extremity dimension not calibrated")
    return quantize(score, Dimension.EXTREMITY, spec)


# ---------------------------------------------------------------------------
# Data cleaning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CleaningReport:
    utterance_id: str
    token_count: int
    invalid_or_extreme_count: int
    dropped: bool
    reason: str


def _outside_caps(value: float, dimension: Dimension, spec: QuantizerSpec) -> bool:
    ds = spec.dim(dimension)
    return not (ds.lower_cap <= value <= ds.upper_cap)


def clean_utterance(
    utterance_id: str,
    words: Sequence[WordProsodyVector],
    spec: QuantizerSpec,
    threshold: float = 0.2,
) -> CleaningReport:
    """Flag an utterance whose prosody tokens are too often extreme or invalid.

    Token slots mirror the serialized stream: one silence-duration token per
    word plus five word tokens (or one ``<PINV>``). A slot is flagged when its
    word was invalid or when its pre-clipping value falls outside the caps.
    Dropped iff the flagged fraction strictly exceeds ``threshold``.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")
    token_count = 0
    flagged = 0
    for word in words:
        token_count += 1
        if _outside_caps(
            silence_log_duration(word.preceding_silence_frames), Dimension.SILENCE, spec
        ):
            flagged += 1
        if not word.valid:
            token_count += 1
            flagged += 1
            continue
        token_count += 5
        for dimension, value in zip(WORD_DIMENSIONS, word.values()):
            if _outside_caps(value, dimension, spec):
                flagged += 1
    if token_count == 0:
        raise ValueError(f"utterance {utterance_id} has no prosody tokens")
    dropped = flagged / token_count > threshold
    reason = f"{flagged}/{token_count} tokens extreme or invalid" if dropped else ""
    return CleaningReport(
        utterance_id=utterance_id,
        token_count=token_count,
        invalid_or_extreme_count=flagged,
        dropped=dropped,
        reason=reason,
    )


# ---------------------------------------------------------------------------
# Speaker statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpeakerStats:
    speaker_id: str
    total_speech_seconds: float
    mean_log_f0: float
    utterance_count: int

    def __post_init__(self):
        if self.total_speech_seconds < 0:
            raise ValueError("negative speech duration")


def filter_speakers(stats: Iterable[SpeakerStats], min_seconds: float = 3600.0) -> set[str]:
    """Keep speakers with at least ``min_seconds`` of speech (an exact hour
    stays in; strictly less is excluded)."""
    return {s.speaker_id for s in stats if s.total_speech_seconds >= min_seconds}
