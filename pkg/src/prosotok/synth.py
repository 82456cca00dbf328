"""Deterministic reference realization of word-level prosody tokens.

Expands a tokenized sentence into phone-level durations and frame-level
log-F0 / log-energy contours built as fixed points of the word-level
extractor: re-extracting the plan's contours reproduces the dequantized
inputs (duration, median, energy exactly; range and slope to the root-find
tolerance when the triple is feasible).

The F0 contour is a straight line of the requested slope plus a half-cosine
arch whose scale is root-found so the 95-5 percentile range matches; the
intercept then pins the median. A range smaller than the slope-forced range
is infeasible: the arch scale stays 0 and the word is flagged. Silences carry
reserved values (unvoiced, floor energy); all synthesized word frames are
voiced.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .features import LOG_ENERGY_FLOOR, FrameTracks
from .ingest import WordAlignment
from .quantizer import Dimension, QuantizerSpec, dequantize
from .sequence import SentenceSequence

RANGE_TOLERANCE = 1e-6
_FALLBACK_INVALID_FRAMES = 8


@dataclass(frozen=True)
class SilencePlan:
    n_frames: int
    from_invalid_word: bool = False


@dataclass(frozen=True)
class WordPlan:
    word: str
    n_phones: int
    frames_per_phone: tuple[int, ...]
    log_f0: np.ndarray
    log_energy: np.ndarray
    feasible: bool

    @property
    def n_frames(self) -> int:
        return sum(self.frames_per_phone)


@dataclass(frozen=True)
class SynthPlan:
    """Alternating silence/word realizations for one sentence."""

    entries: tuple[SilencePlan | WordPlan, ...]

    @property
    def n_frames(self) -> int:
        return sum(e.n_frames for e in self.entries)

    def to_tracks(self) -> tuple[FrameTracks, list[WordAlignment]]:
        """Materialize the plan as FrameTracks plus word alignments, ready to
        feed back through the word-level extractor."""
        n = self.n_frames
        log_f0 = np.full(n, np.nan)
        voiced = np.zeros(n, dtype=bool)
        log_energy = np.full(n, LOG_ENERGY_FLOOR)
        words: list[WordAlignment] = []
        cursor = 0
        silence = 0
        for entry in self.entries:
            if isinstance(entry, SilencePlan):
                cursor += entry.n_frames
                silence += entry.n_frames
                continue
            start = cursor
            end = cursor + entry.n_frames
            log_f0[start:end] = entry.log_f0
            voiced[start:end] = True
            log_energy[start:end] = entry.log_energy
            spans = []
            phone_start = start
            for frames in entry.frames_per_phone:
                spans.append((phone_start, phone_start + frames))
                phone_start += frames
            words.append(
                WordAlignment(
                    word_normalized=entry.word,
                    symbol_count=entry.n_phones,
                    start_frame=start,
                    end_frame=end,
                    phone_spans=tuple(spans),
                    preceding_silence_frames=silence,
                )
            )
            cursor = end
            silence = 0
        return FrameTracks(log_f0=log_f0, voiced=voiced, log_energy=log_energy), words

    def to_csv(self) -> str:
        """Frame table (frame, log_f0, voiced, log_energy, word_index);
        word_index is -1 on silence frames."""
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["frame", "log_f0", "voiced", "log_energy", "word_index"])
        frame = 0
        word_index = -1
        for entry in self.entries:
            if isinstance(entry, SilencePlan):
                for _ in range(entry.n_frames):
                    writer.writerow([frame, "nan", 0, repr(LOG_ENERGY_FLOOR), -1])
                    frame += 1
                continue
            word_index += 1
            for f0, en in zip(entry.log_f0, entry.log_energy):
                writer.writerow([frame, repr(float(f0)), 1, repr(float(en)), word_index])
                frame += 1
        return buf.getvalue()


def synth_phone_durations(duration_value: float, n_phones: int) -> tuple[list[int], bool]:
    """Distribute round(exp(duration_value) * n_phones) frames over the
    phones as evenly as possible (largest remainder, max-min <= 1).

    A total below one frame per phone cannot be honored: every phone gets one
    frame and the flag comes back False.
    """
    if n_phones < 1:
        raise ValueError("n_phones must be >= 1")
    total = round(float(np.exp(duration_value)) * n_phones)
    if total < n_phones:
        return [1] * n_phones, False
    base, remainder = divmod(total, n_phones)
    return [base + 1] * remainder + [base] * (n_phones - remainder), True


def _percentile_range(values: np.ndarray) -> float:
    p5, p95 = np.percentile(values, [5.0, 95.0])
    return float(p95 - p5)


def synth_f0_contour(
    f0_range: float,
    f0_median: float,
    f0_slope: float,
    n_frames: int,
) -> tuple[np.ndarray, bool]:
    """Log-F0 contour whose percentile range, median, and OLS slope match the
    inputs; returns (contour, feasible)."""
    if n_frames < 2:
        raise ValueError("n_frames must be >= 2")
    if f0_range < 0:
        raise ValueError("f0_range must be >= 0")
    t = np.arange(n_frames, dtype=np.float64)
    line = f0_slope * (t - (n_frames - 1) / 2.0)
    arch = np.sin(np.pi * t / (n_frames - 1))

    def excursion_range(scale: float) -> float:
        return _percentile_range(line + scale * arch)

    base_range = excursion_range(0.0)
    feasible = True
    scale = 0.0
    if arch.max() < 1e-9:
        # two-frame contours have no arch; range is slope-forced
        feasible = abs(f0_range - base_range) <= RANGE_TOLERANCE
    elif f0_range <= base_range:
        # the arch can only widen the range; below the slope-forced floor
        # (beyond tolerance) the triple is infeasible
        feasible = f0_range >= base_range - RANGE_TOLERANCE
    else:
        hi = 1.0
        for _ in range(80):
            if excursion_range(hi) >= f0_range:
                break
            hi *= 2.0
        scale = float(
            brentq(lambda a: excursion_range(a) - f0_range, 0.0, hi, xtol=1e-12, rtol=1e-15)
        )
    contour = line + scale * arch
    contour = contour + (f0_median - float(np.median(contour)))
    if feasible and abs(_percentile_range(contour) - f0_range) > RANGE_TOLERANCE:
        feasible = False
    return contour, feasible


def synth_energy_contour(energy_value: float, n_frames: int) -> np.ndarray:
    """Constant contour: the mean is the only constraint on word energy."""
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    return np.full(n_frames, float(energy_value))


def synth_sentence(
    sentence: SentenceSequence,
    spec: QuantizerSpec,
    phone_counts: Sequence[int],
) -> SynthPlan:
    """Realize one tokenized sentence as a SynthPlan.

    Silences become round(exp(dequantized duration)) reserved frames; invalid
    words are realized as silence of the median valid-word length in the same
    sentence (flagged via ``from_invalid_word``).
    """
    if len(phone_counts) != len(sentence.items):
        raise ValueError(
            f"phone_counts length {len(phone_counts)} != {len(sentence.items)} words"
        )
    if any(p < 1 for p in phone_counts):
        raise ValueError("phone counts must be positive")

    valid_lengths: list[int] = []
    word_plans: dict[int, WordPlan] = {}
    for idx, (item, n_phones) in enumerate(zip(sentence.items, phone_counts)):
        if item.tokens is None:
            continue
        d_bin, r_bin, m_bin, s_bin, e_bin = item.tokens
        duration = dequantize(d_bin, Dimension.DURATION, spec)
        frames_per_phone, dur_ok = synth_phone_durations(duration, n_phones)
        total = sum(frames_per_phone)
        f0_median = dequantize(m_bin, Dimension.F0_MEDIAN, spec)
        if total < 2:
            contour = np.full(total, f0_median)
            f0_ok = False
        else:
            contour, f0_ok = synth_f0_contour(
                dequantize(r_bin, Dimension.F0_RANGE, spec),
                f0_median,
                dequantize(s_bin, Dimension.F0_SLOPE, spec),
                total,
            )
        word_plans[idx] = WordPlan(
            word=item.word,
            n_phones=n_phones,
            frames_per_phone=tuple(frames_per_phone),
            log_f0=contour,
            log_energy=synth_energy_contour(dequantize(e_bin, Dimension.ENERGY, spec), total),
            feasible=dur_ok and f0_ok,
        )
        valid_lengths.append(total)

    invalid_frames = (
        max(int(round(float(np.median(valid_lengths)))), 1)
        if valid_lengths
        else _FALLBACK_INVALID_FRAMES
    )

    entries: list[SilencePlan | WordPlan] = []
    for idx, item in enumerate(sentence.items):
        sil_value = dequantize(item.silence_token, Dimension.SILENCE, spec)
        entries.append(SilencePlan(n_frames=round(float(np.exp(sil_value)))))
        if idx in word_plans:
            entries.append(word_plans[idx])
        else:
            entries.append(SilencePlan(n_frames=invalid_frames, from_invalid_word=True))
    return SynthPlan(entries=tuple(entries))
