"""Frame-level log-F0 / log-energy tracks and word-level prosody vectors.

All tracks share the hop-300 / window-1200 grid at 24 kHz. Energy is the
natural log of the L2 norm of each 80-band mel-magnitude frame, floored at
1e-5. Pitch is a normalized-autocorrelation (YIN-style) estimator searching
50-600 Hz with a periodicity threshold of 0.5; unvoiced frames carry NaN
log-F0. The five word-level dimensions, in their canonical order, are:

    1. duration      ln(frames per symbol)
    2. f0_range      95th - 5th percentile of the word's voiced log-F0
    3. f0_median     median voiced log-F0
    4. f0_slope      OLS slope of voiced log-F0 against frame index
    5. energy        mean log-energy over the word span

Percentiles interpolate linearly between order statistics. Words with fewer
than two voiced frames are invalid (slope undefined). Everything here is a
pure function over immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .ingest import HOP_LENGTH, SAMPLE_RATE, WIN_LENGTH, SentenceTranscript, Utterance, WordAlignment

N_MELS = 80
MEL_FMAX = 12000.0
ENERGY_FLOOR = 1e-5
LOG_ENERGY_FLOOR = float(np.log(ENERGY_FLOOR))

F0_MIN = 50.0
F0_MAX = 600.0
VOICING_THRESHOLD = 0.5
_TAU_MAX = SAMPLE_RATE // int(F0_MIN)          # 480 samples
_TAU_MIN = SAMPLE_RATE // int(F0_MAX)          # 40 samples
_YIN_WINDOW = WIN_LENGTH - _TAU_MAX            # 720-sample integration window
_SILENCE_POWER = _YIN_WINDOW * 1e-10           # mean-square 1e-10 gate


@dataclass(frozen=True)
class FrameTracks:
    """Per-frame log-F0 (NaN where unvoiced), voicing flags, and log-energy."""

    log_f0: np.ndarray
    voiced: np.ndarray
    log_energy: np.ndarray

    def __post_init__(self):
        n = self.log_f0.shape[0]
        if self.voiced.shape[0] != n or self.log_energy.shape[0] != n:
            raise ValueError("track length mismatch")
        if not np.all(np.isfinite(self.log_f0[self.voiced])):
            raise ValueError("non-finite log-F0 on a voiced frame")

    @property
    def n_frames(self) -> int:
        return self.log_f0.shape[0]


@dataclass(frozen=True)
class WordProsodyVector:
    """The five word-level prosody values plus the preceding silence gap.

    ``valid`` is False iff any dimension is non-computable (fewer than two
    voiced frames); the F0 fields are NaN in that case.
    """

    duration: float
    f0_range: float
    f0_median: float
    f0_slope: float
    energy: float
    preceding_silence_frames: int
    valid: bool

    def values(self) -> tuple[float, float, float, float, float]:
        """The five dimensions in canonical order."""
        return (self.duration, self.f0_range, self.f0_median, self.f0_slope, self.energy)


def _check_rate(utterance: Utterance) -> None:
    if utterance.sample_rate != SAMPLE_RATE:
        raise ValueError(
            f"expected {SAMPLE_RATE} Hz input, got {utterance.sample_rate} Hz "
            f"({utterance.utterance_id}); resampling is out of scope"
        )


def _frame_signal(samples: np.ndarray) -> np.ndarray:
    """Centered frames of WIN_LENGTH samples every HOP_LENGTH (reflect padded)."""
    if samples.size < WIN_LENGTH:
        raise ValueError("audio shorter than one analysis window (1200 samples)")
    n_frames = 1 + samples.size // HOP_LENGTH
    padded = np.pad(samples, WIN_LENGTH // 2, mode="reflect")
    windows = np.lib.stride_tricks.sliding_window_view(padded, WIN_LENGTH)
    return windows[:: HOP_LENGTH][:n_frames]


@lru_cache(maxsize=4)
def _mel_filterbank(
    n_mels: int = N_MELS,
    n_fft: int = WIN_LENGTH,
    sample_rate: int = SAMPLE_RATE,
    fmin: float = 0.0,
    fmax: float = MEL_FMAX,
) -> np.ndarray:
    """Triangular mel filterbank (HTK scale), shape (n_mels, n_fft // 2 + 1)."""

    def hz_to_mel(f):
        return 2595.0 * np.log10(1.0 + f / 700.0)

    def mel_to_hz(m):
        return 700.0 * (10.0 ** (m / 2595.0) - 1.0)

    mel_points = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    fft_freqs = np.linspace(0.0, sample_rate / 2.0, n_fft // 2 + 1)
    fb = np.zeros((n_mels, fft_freqs.size))
    for m in range(n_mels):
        lo, center, hi = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        rising = (fft_freqs - lo) / (center - lo)
        falling = (hi - fft_freqs) / (hi - center)
        fb[m] = np.maximum(0.0, np.minimum(rising, falling))
    return fb


def _floored_log(norms: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(norms, ENERGY_FLOOR))


def frame_log_energy(utterance: Utterance) -> np.ndarray:
    """ln of the per-frame L2 norm of the 80-band mel-magnitude spectrogram."""
    _check_rate(utterance)
    frames = _frame_signal(utterance.samples)
    window = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(WIN_LENGTH) / WIN_LENGTH))
    magnitude = np.abs(np.fft.rfft(frames * window, n=WIN_LENGTH, axis=1))
    # einsum (not BLAS matmul) keeps the summation order fixed so parallel
    # runs are byte-identical regardless of thread count
    mel = np.einsum("mf,tf->tm", _mel_filterbank(), magnitude)
    return _floored_log(np.sqrt(np.einsum("tm,tm->t", mel, mel)))


def frame_log_f0(utterance: Utterance) -> tuple[np.ndarray, np.ndarray]:
    """YIN-style pitch track: (log_f0 with NaN where unvoiced, voiced flags).

    Per frame, the cumulative-mean-normalized difference function over lags
    40..480 is searched for the first local minimum below the periodicity
    threshold; the lag is refined by parabolic interpolation. Frames whose
    power falls below the silence gate, or with no minimum under threshold,
    are unvoiced.
    """
    _check_rate(utterance)
    frames = _frame_signal(utterance.samples)
    n_frames = frames.shape[0]
    w = _YIN_WINDOW
    lags = np.arange(_TAU_MAX + 1)

    head = frames[:, :w]
    power0 = np.einsum("tj,tj->t", head, head)
    squared = np.concatenate(
        [np.zeros((n_frames, 1)), np.cumsum(frames * frames, axis=1)], axis=1
    )
    power_tau = squared[:, lags + w] - squared[:, lags]

    n_fft = 2048  # >= WIN_LENGTH + _TAU_MAX
    spec_full = np.fft.rfft(frames, n_fft, axis=1)
    spec_head = np.fft.rfft(head, n_fft, axis=1)
    corr = np.fft.irfft(np.conj(spec_head) * spec_full, n_fft, axis=1)[:, : _TAU_MAX + 1]

    diff = np.maximum(power0[:, None] + power_tau - 2.0 * corr, 0.0)
    cumulative = np.cumsum(diff[:, 1:], axis=1)
    cmndf = np.ones_like(diff)
    positive = cumulative > 0.0
    cmndf[:, 1:][positive] = (diff[:, 1:] * lags[1:])[positive] / cumulative[positive]

    log_f0 = np.full(n_frames, np.nan)
    voiced = np.zeros(n_frames, dtype=bool)
    for t in range(n_frames):
        if power0[t] < _SILENCE_POWER:
            continue
        d = cmndf[t]
        below = np.nonzero(d[_TAU_MIN : _TAU_MAX + 1] < VOICING_THRESHOLD)[0]
        if below.size == 0:
            continue
        tau = int(below[0]) + _TAU_MIN
        while tau + 1 <= _TAU_MAX and d[tau + 1] < d[tau]:
            tau += 1
        refined = float(tau)
        if _TAU_MIN < tau < _TAU_MAX:
            left, mid, right = d[tau - 1], d[tau], d[tau + 1]
            denom = left - 2.0 * mid + right
            if denom > 0.0:
                refined += 0.5 * (left - right) / denom
        f0 = min(max(SAMPLE_RATE / refined, F0_MIN), F0_MAX)
        voiced[t] = True
        log_f0[t] = np.log(f0)
    return log_f0, voiced


def compute_frame_tracks(utterance: Utterance) -> FrameTracks:
    """Convenience: both tracks on the shared grid in one call."""
    log_f0, voiced = frame_log_f0(utterance)
    return FrameTracks(log_f0=log_f0, voiced=voiced, log_energy=frame_log_energy(utterance))


# ---------------------------------------------------------------------------
# Word-level aggregation
# ---------------------------------------------------------------------------


def word_duration(word: WordAlignment) -> float:
    """ln(frames per symbol) over the word span."""
    if word.n_frames <= 0:
        raise ValueError(f"zero-length span for {word.word_normalized!r}")
    return float(np.log(word.n_frames / word.symbol_count))


def _check_span(tracks: FrameTracks, word: WordAlignment) -> None:
    if word.start_frame < 0 or word.end_frame > tracks.n_frames:
        raise ValueError(
            f"word span [{word.start_frame}, {word.end_frame}) outside track "
            f"length {tracks.n_frames}"
        )


def _ols_slope(x: np.ndarray, y: np.ndarray) -> float:
    # ordinary least squares; exact to round-off on noiseless linear input
    xc = x - x.mean()
    yc = y - y.mean()
    return float(np.dot(xc, yc) / np.dot(xc, xc))


def word_f0_features(
    tracks: FrameTracks, word: WordAlignment
) -> tuple[float, float, float] | None:
    """(f0_range, f0_median, f0_slope) over the word's voiced frames.

    Returns None when the word has fewer than two voiced frames (the slope is
    undefined); callers mark such words invalid.
    """
    _check_span(tracks, word)
    span = slice(word.start_frame, word.end_frame)
    mask = tracks.voiced[span]
    values = tracks.log_f0[span][mask]
    if values.size < 2:
        return None
    p5, p95 = np.percentile(values, [5.0, 95.0])
    median = float(np.median(values))
    indices = np.arange(word.start_frame, word.end_frame, dtype=np.float64)[mask]
    return float(p95 - p5), median, _ols_slope(indices, values)


def word_energy(tracks: FrameTracks, word: WordAlignment) -> float:
    """Arithmetic mean of log-energy over [start_frame, end_frame)."""
    _check_span(tracks, word)
    if word.n_frames <= 0:
        raise ValueError("empty span")
    return float(np.mean(tracks.log_energy[word.start_frame : word.end_frame]))


def extract_word_prosody(
    utterance: Utterance,
    sentence: SentenceTranscript,
    tracks: FrameTracks | None = None,
) -> list[WordProsodyVector]:
    """One WordProsodyVector per word; pass precomputed tracks to avoid
    re-running the extractors for every sentence of the same utterance."""
    if not sentence.words:
        return []
    if tracks is None:
        tracks = compute_frame_tracks(utterance)
    vectors: list[WordProsodyVector] = []
    for word in sentence.words:
        duration = word_duration(word)
        energy = word_energy(tracks, word)
        f0 = word_f0_features(tracks, word)
        if f0 is None:
            vectors.append(
                WordProsodyVector(
                    duration=duration,
                    f0_range=float("nan"),
                    f0_median=float("nan"),
                    f0_slope=float("nan"),
                    energy=energy,
                    preceding_silence_frames=word.preceding_silence_frames,
                    valid=False,
                )
            )
        else:
            f0_range, f0_median, f0_slope = f0
            vectors.append(
                WordProsodyVector(
                    duration=duration,
                    f0_range=f0_range,
                    f0_median=f0_median,
                    f0_slope=f0_slope,
                    energy=energy,
                    preceding_silence_frames=word.preceding_silence_frames,
                    valid=True,
                )
            )
    return vectors


def speaker_mean_log_f0(tracks_collection: Iterable[FrameTracks]) -> float:
    """Mean log-F0 over all voiced frames of all the speaker's utterances."""
    total = 0.0
    count = 0
    for tracks in tracks_collection:
        voiced_vals = tracks.log_f0[tracks.voiced]
        total += float(voiced_vals.sum())
        count += int(voiced_vals.size)
    if count == 0:
        raise ValueError("no voiced frames for speaker")
    return total / count
