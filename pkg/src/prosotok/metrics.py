"""Objective prosody evaluation metrics over externally measured records.

The harness is model-agnostic: utterance measures (mean F0 in Hz, symbol
rate, mean log-energy) and per-token log-probabilities arrive in files, and
every metric here is a pure aggregation. Aggregates report the mean, the
sample standard deviation, and the standard error (std / sqrt(n)); sums use
compensated summation so sharded reductions match sequential ones.

The log-probability metrics follow the nested-expectation structure: the
inner term is the mean log word probability under the matching condition
minus the mean under the mismatching condition, computed per group (and per
candidate word for emphasis); the outer aggregate runs over those inner
differences. A word's log probability is the sum of its per-token
log-probabilities (probabilities multiply).
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .features import FrameTracks
from .ingest import HOP_SECONDS

FOCUS_ROLES = ("subject", "verb", "object", "adverbial")
FOCUS_CONDITIONS = ("pre-focus", "on-focus", "post-focus")

MATCH = "match"
MISMATCH = "mismatch"


@dataclass(frozen=True)
class AggregateResult:
    """Mean with dispersion over a set of per-item values.

    ``std`` is the sample standard deviation (ddof=1, NaN when n < 2) and
    ``stderr`` = std / sqrt(n). ``excluded`` counts items dropped for missing
    a condition or a matching partner.
    """

    mean: float
    std: float
    stderr: float
    n: int
    excluded: int = 0


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def aggregate(values: Sequence[float], excluded: int = 0) -> AggregateResult:
    if not values:
        raise ValueError("nothing to aggregate")
    mean = _mean(values)
    if len(values) < 2:
        std = float("nan")
    else:
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1))
    return AggregateResult(
        mean=mean, std=std, stderr=std / math.sqrt(len(values)), n=len(values), excluded=excluded
    )


# ---------------------------------------------------------------------------
# Utterance-level measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UtteranceMeasure:
    """One measured utterance with its condition labels."""

    utterance_id: str
    mean_f0_hz: float | None
    symbol_rate: float | None
    mean_log_energy: float | None
    style: str = ""
    pair_id: str = ""
    speaker: str = ""
    role: str = ""


def measure_utterance(
    tracks: FrameTracks,
    span: tuple[int, int],
    symbol_count: int,
    hop_seconds: float = HOP_SECONDS,
    utterance_id: str = "",
    **labels: str,
) -> UtteranceMeasure:
    """Mean F0 in Hz over voiced frames, symbols per second, and mean
    log-energy over the span; mean F0 is None when no frame is voiced."""
    start, end = span
    if not 0 <= start < end <= tracks.n_frames:
        raise ValueError(f"span [{start}, {end}) outside tracks of {tracks.n_frames} frames")
    if symbol_count < 1:
        raise ValueError("symbol_count must be >= 1")
    voiced = tracks.voiced[start:end]
    if voiced.any():
        f0_values = tracks.log_f0[start:end][voiced]
        mean_f0 = _mean([math.exp(v) for v in f0_values])
    else:
        mean_f0 = None
    return UtteranceMeasure(
        utterance_id=utterance_id,
        mean_f0_hz=mean_f0,
        symbol_rate=symbol_count / ((end - start) * hop_seconds),
        mean_log_energy=_mean(list(tracks.log_energy[start:end])),
        **labels,
    )


def style_pair_diff(
    measures: Iterable[UtteranceMeasure],
    pair: tuple[str, str],
    field: str,
) -> AggregateResult:
    """Mean per-pair difference field(styleA) - field(styleB) over matched
    (pair_id, speaker) pairs; unmatched or ambiguous pairs are excluded."""
    style_a, style_b = pair
    by_key: dict[tuple[str, str], dict[str, list[UtteranceMeasure]]] = defaultdict(
        lambda: defaultdict(list)
    )
    for m in measures:
        if m.style in pair:
            by_key[(m.pair_id, m.speaker)][m.style].append(m)
    diffs: list[float] = []
    excluded = 0
    for sides in by_key.values():
        a, b = sides.get(style_a, []), sides.get(style_b, [])
        if len(a) != 1 or len(b) != 1:
            excluded += 1
            continue
        va, vb = getattr(a[0], field), getattr(b[0], field)
        if va is None or vb is None:
            excluded += 1
            continue
        diffs.append(va - vb)
    if not diffs:
        raise ValueError(f"no matched pairs for styles {pair}")
    return aggregate(diffs, excluded=excluded)


# ---------------------------------------------------------------------------
# Log-probability metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogProbRecord:
    """Per-token log-probabilities of one candidate word under one condition
    within a parallel-utterance group."""

    group_id: str
    word: str
    condition: str
    token_logprobs: tuple[float, ...]

    def __post_init__(self):
        if self.condition not in (MATCH, MISMATCH):
            raise ValueError(f"condition must be {MATCH!r} or {MISMATCH!r}")
        if not self.token_logprobs:
            raise ValueError("empty token_logprobs")


def word_logprob(token_logprobs: Sequence[float]) -> float:
    """log q(W=w|u): probabilities multiply, so log-probabilities sum."""
    if not token_logprobs:
        raise ValueError("empty token_logprobs")
    if any(lp > 0 for lp in token_logprobs):
        raise ValueError("invalid log-probability (positive)")
    return math.fsum(token_logprobs)


def _condition_diffs(
    records: Iterable[LogProbRecord],
    key,
) -> tuple[list[float], int]:
    grouped: dict[object, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    for r in records:
        grouped[key(r)][r.condition].append(word_logprob(r.token_logprobs))
    diffs: list[float] = []
    excluded = 0
    for sides in grouped.values():
        if not sides[MATCH] or not sides[MISMATCH]:
            excluded += 1
            continue
        diffs.append(_mean(sides[MATCH]) - _mean(sides[MISMATCH]))
    return diffs, excluded


def emphasis_metric(records: Iterable[LogProbRecord]) -> AggregateResult:
    """Mean, over (group, word) pairs, of the emphasized-minus-unemphasized
    difference in mean log word probability."""
    diffs, excluded = _condition_diffs(records, key=lambda r: (r.group_id, r.word))
    if not diffs:
        raise ValueError("no (group, word) pair has both conditions")
    return aggregate(diffs, excluded=excluded)


def emotion_metric(records: Iterable[LogProbRecord], emotion_word: str) -> AggregateResult:
    """Same inner structure as emphasis, restricted to one emotion word and
    aggregated per parallel-utterance group."""
    diffs, excluded = _condition_diffs(
        (r for r in records if r.word == emotion_word), key=lambda r: r.group_id
    )
    if not diffs:
        raise ValueError(f"no group has both conditions for {emotion_word!r}")
    return aggregate(diffs, excluded=excluded)


# ---------------------------------------------------------------------------
# Contrastive focus and slowdown
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FocusRecord:
    passage_id: str
    component_role: str
    condition: str
    mean_f0_hz: float

    def __post_init__(self):
        if self.component_role not in FOCUS_ROLES:
            raise ValueError(f"unknown component role: {self.component_role}")
        if self.condition not in FOCUS_CONDITIONS:
            raise ValueError(f"unknown focus condition: {self.condition}")


@dataclass(frozen=True)
class FocusSummary:
    """4x3 matrix of mean F0 per (role, condition) plus the two derived
    checks; cells and checks are None where a condition is missing."""

    cells: dict[tuple[str, str], AggregateResult | None]
    on_focus_stress: dict[str, bool | None]
    post_focus_compression: dict[str, bool | None]


def focus_aggregate(records: Iterable[FocusRecord]) -> FocusSummary:
    values: dict[tuple[str, str], list[float]] = defaultdict(list)
    for r in records:
        values[(r.component_role, r.condition)].append(r.mean_f0_hz)
    cells: dict[tuple[str, str], AggregateResult | None] = {}
    for role in FOCUS_ROLES:
        for condition in FOCUS_CONDITIONS:
            vals = values.get((role, condition))
            cells[(role, condition)] = aggregate(vals) if vals else None
    stress: dict[str, bool | None] = {}
    compression: dict[str, bool | None] = {}
    for role in FOCUS_ROLES:
        pre, on, post = (cells[(role, c)] for c in FOCUS_CONDITIONS)
        if pre is None or on is None or post is None:
            stress[role] = None
            compression[role] = None
            continue
        stress[role] = on.mean > pre.mean and on.mean > post.mean
        compression[role] = post.mean < pre.mean
    return FocusSummary(cells=cells, on_focus_stress=stress, post_focus_compression=compression)


def slowdown_metric(measures: Iterable[UtteranceMeasure]) -> tuple[AggregateResult, bool]:
    """Per-passage symbol-rate ratio last / first; a mean below 1 means the
    final quote is uttered more slowly."""
    by_passage: dict[str, dict[str, list[UtteranceMeasure]]] = defaultdict(
        lambda: defaultdict(list)
    )
    for m in measures:
        if m.role in ("first", "last"):
            by_passage[m.pair_id][m.role].append(m)
    ratios: list[float] = []
    excluded = 0
    for sides in by_passage.values():
        first, last = sides.get("first", []), sides.get("last", [])
        if len(first) != 1 or len(last) != 1:
            excluded += 1
            continue
        rf, rl = first[0].symbol_rate, last[0].symbol_rate
        if not rf or not rl or rf <= 0 or rl <= 0:
            excluded += 1
            continue
        ratios.append(rl / rf)
    if not ratios:
        raise ValueError("no matched first/last passages")
    result = aggregate(ratios, excluded=excluded)
    return result, result.mean < 1.0


# ---------------------------------------------------------------------------
# Dialogue prosody contrast
# ---------------------------------------------------------------------------


def dialogue_contrast(measures: Iterable[UtteranceMeasure], field: str) -> AggregateResult:
    """Mean per-pair difference field(role "a") - field(role "b") over
    second-round dialogue pairs, where role "a" marks the speaker whose
    reference utterance was higher on the contrast dimension. Swapping the
    role labels negates the metric exactly."""
    by_pair: dict[str, dict[str, list[UtteranceMeasure]]] = defaultdict(lambda: defaultdict(list))
    for m in measures:
        if m.role in ("a", "b"):
            by_pair[m.pair_id][m.role].append(m)
    diffs: list[float] = []
    excluded = 0
    for sides in by_pair.values():
        a, b = sides.get("a", []), sides.get("b", [])
        if len(a) != 1 or len(b) != 1:
            excluded += 1
            continue
        va, vb = getattr(a[0], field), getattr(b[0], field)
        if va is None or vb is None:
            excluded += 1
            continue
        diffs.append(va - vb)
    if not diffs:
        raise ValueError("no matched dialogue pairs")
    return aggregate(diffs, excluded=excluded)
