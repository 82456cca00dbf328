"""Load audio, alignments, and transcripts onto the shared 24 kHz frame grid.

Everything downstream is indexed on frames of 300 samples (12.5 ms) with an
analysis window of 1200 samples, so this module is the single place where
seconds are converted to frame indices. Alignments are ingested from a JSON
schema (one file per utterance); they are never computed here.
"""

from __future__ import annotations

import json
import math
import re
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SchemaError

SAMPLE_RATE = 24000
HOP_LENGTH = 300
WIN_LENGTH = 1200
HOP_SECONDS = HOP_LENGTH / SAMPLE_RATE


@dataclass(frozen=True)
class Utterance:
    """Mono waveform with identifiers; amplitudes normalized to [-1, 1]."""

    samples: np.ndarray
    sample_rate: int
    speaker_id: str
    utterance_id: str

    def __post_init__(self):
        if self.samples.size == 0:
            raise SchemaError("empty audio")
        if self.sample_rate <= 0:
            raise SchemaError(f"invalid sample rate {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise SchemaError("non-finite amplitudes")

    @property
    def duration_seconds(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class WordAlignment:
    """One aligned word on the frame grid.

    ``phone_spans`` are contiguous [start, end) frame pairs that tile
    [start_frame, end_frame) exactly; ``preceding_silence_frames`` is the gap
    to the previous word's end (or to frame 0 for the first word).
    """

    word_normalized: str
    symbol_count: int
    start_frame: int
    end_frame: int
    phone_spans: tuple[tuple[int, int], ...]
    preceding_silence_frames: int

    def __post_init__(self):
        if not self.word_normalized:
            raise SchemaError("empty normalized word")
        if self.symbol_count < 1:
            raise SchemaError(f"symbol_count must be >= 1, got {self.symbol_count}")
        if self.start_frame >= self.end_frame:
            raise SchemaError(
                f"invalid span [{self.start_frame}, {self.end_frame}) for "
                f"{self.word_normalized!r}"
            )
        if self.preceding_silence_frames < 0:
            raise SchemaError("negative preceding silence")
        cursor = self.start_frame
        for ps, pe in self.phone_spans:
            if ps != cursor or pe < ps:
                raise SchemaError(
                    f"phone spans do not tile word span for {self.word_normalized!r}"
                )
            cursor = pe
        if cursor != self.end_frame:
            raise SchemaError(
                f"phone spans do not tile word span for {self.word_normalized!r}"
            )

    @property
    def n_frames(self) -> int:
        return self.end_frame - self.start_frame


@dataclass(frozen=True)
class SentenceTranscript:
    """One sentence: raw text with punctuation plus its aligned words in order."""

    raw_text: str
    words: tuple[WordAlignment, ...]


def seconds_to_frame(t: float, sample_rate: int = SAMPLE_RATE, hop: int = HOP_LENGTH) -> int:
    """floor(t * sample_rate / hop), guarded against decimal times that land a
    hair below an exact frame boundary in binary floating point."""
    return int(math.floor(t * sample_rate / hop + 1e-9))


# ---------------------------------------------------------------------------
# Text normalization: minimal rule set (case, punctuation, integers <= 9999)
# behind a replaceable interface.
# ---------------------------------------------------------------------------

_ONES = (
    "zero one two three four five six seven eight nine ten eleven twelve "
    "thirteen fourteen fifteen sixteen seventeen eighteen nineteen"
).split()
_TENS = (None, None, "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety")

_NON_ALNUM = re.compile(r"[^a-z0-9]+")


def _two_digit(n: int) -> str:
    if n < 20:
        return _ONES[n]
    tens, ones = divmod(n, 10)
    return _TENS[tens] if ones == 0 else f"{_TENS[tens]} {_ONES[ones]}"


def number_to_words(n: int) -> str:
    """Spell out an integer in 0..9999 the way it is read aloud.

    Four-digit numbers use the spoken pairwise style ("nineteen ninety six",
    "nineteen hundred", "nineteen oh three"); round thousands and X0YZ shapes
    fall back to "two thousand five" style.
    """
    if not 0 <= n <= 9999:
        raise ValueError(f"number out of supported range: {n}")
    if n < 100:
        return _two_digit(n)
    if n < 1000:
        hundreds, rest = divmod(n, 100)
        head = f"{_ONES[hundreds]} hundred"
        return head if rest == 0 else f"{head} {_two_digit(rest)}"
    if n % 1000 == 0:
        return f"{_ONES[n // 1000]} thousand"
    hi, lo = divmod(n, 100)
    if hi % 10 == 0:
        return f"{_ONES[hi // 10]} thousand {number_to_words(n % 1000)}"
    if lo == 0:
        return f"{_two_digit(hi)} hundred"
    if lo < 10:
        return f"{_two_digit(hi)} oh {_ONES[lo]}"
    return f"{_two_digit(hi)} {_two_digit(lo)}"


def normalize_word(raw: str) -> str:
    """Lowercase, strip punctuation, and expand integers 0..9999 to words.

    Returns "" for punctuation-only tokens (droppable). Idempotent:
    normalize_word(normalize_word(x)) == normalize_word(x). Multi-part input
    (e.g. an already-expanded number) is normalized part by part.
    """
    out: list[str] = []
    for token in raw.split():
        core = _NON_ALNUM.sub("", token.lower())
        if not core:
            continue
        if core.isdigit() and int(core) <= 9999:
            out.append(number_to_words(int(core)))
        else:
            out.append(core)
    return " ".join(out)


# ---------------------------------------------------------------------------
# File loaders
# ---------------------------------------------------------------------------


def load_utterance(
    audio_path: str | Path,
    speaker_id: str | None = None,
    utterance_id: str | None = None,
) -> Utterance:
    """Read a mono 16-bit PCM WAV file and scale samples to [-1, 1].

    Identifiers default to the file stem; a manifest normally supplies them.
    """
    path = Path(audio_path)
    try:
        with wave.open(str(path), "rb") as wav:
            if wav.getcomptype() != "NONE":
                raise SchemaError(f"unsupported format: compressed WAV ({path.name})")
            if wav.getnchannels() != 1:
                raise SchemaError(
                    f"unsupported format: {wav.getnchannels()} channels, expected mono ({path.name})"
                )
            if wav.getsampwidth() != 2:
                raise SchemaError(
                    f"unsupported format: {8 * wav.getsampwidth()}-bit samples, "
                    f"expected 16-bit PCM ({path.name})"
                )
            sample_rate = wav.getframerate()
            raw = wav.readframes(wav.getnframes())
    except wave.Error as exc:
        raise SchemaError(f"unsupported format: {exc} ({path.name})") from exc
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return Utterance(
        samples=samples,
        sample_rate=sample_rate,
        speaker_id=speaker_id if speaker_id is not None else path.stem,
        utterance_id=utterance_id if utterance_id is not None else path.stem,
    )


def _phone_frame_spans(
    phones: list[dict], start_frame: int, end_frame: int, sample_rate: int, hop: int
) -> tuple[tuple[int, int], ...]:
    # Interior boundaries follow the floor rule but are clamped so the spans
    # tile [start_frame, end_frame) exactly; zero-length phones are allowed.
    bounds = [start_frame]
    for phone in phones[:-1]:
        b = seconds_to_frame(float(phone["end"]), sample_rate, hop)
        bounds.append(min(max(b, bounds[-1]), end_frame))
    bounds.append(end_frame)
    return tuple((bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1))


def load_alignment(
    align_path: str | Path,
    hop: int = HOP_LENGTH,
    sample_rate: int = SAMPLE_RATE,
) -> list[SentenceTranscript]:
    """Parse an alignment JSON file into SentenceTranscripts on the frame grid.

    Schema (times in seconds):
    { "speaker": str, "sentences": [ { "text": str, "words": [ { "word": str,
      "symbols": int, "start": float, "end": float,
      "phones": [ {"start": float, "end": float} ] } ] } ] }

    ``symbols`` defaults to the number of phones when absent. Preceding
    silence is the frame gap to the previous word across the whole utterance.
    """
    path = Path(align_path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read alignment {path.name}: {exc}") from exc
    if not isinstance(doc, dict) or "sentences" not in doc:
        raise SchemaError(f"alignment {path.name} missing 'sentences'")

    sentences: list[SentenceTranscript] = []
    prev_end_frame = 0
    prev_end_sec = 0.0
    for s_idx, sent in enumerate(doc["sentences"]):
        text = sent.get("text")
        words_json = sent.get("words")
        if not isinstance(text, str) or not words_json:
            raise SchemaError(f"alignment {path.name}: sentence {s_idx} missing text or words")
        words: list[WordAlignment] = []
        for w_idx, word in enumerate(words_json):
            where = f"{path.name}: sentence {s_idx} word {w_idx}"
            try:
                raw = word["word"]
                start_sec = float(word["start"])
                end_sec = float(word["end"])
                phones = word["phones"]
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"{where}: malformed entry ({exc})") from exc
            if end_sec <= start_sec:
                raise SchemaError(f"{where}: invalid span [{start_sec}, {end_sec}]")
            if start_sec < prev_end_sec - 1e-9:
                raise SchemaError(f"{where}: overlapping words")
            if not phones:
                raise SchemaError(f"{where}: missing phones")
            symbols = word.get("symbols", len(phones))
            if not isinstance(symbols, int) or symbols < 1:
                raise SchemaError(f"{where}: missing symbol counts")
            normalized = normalize_word(str(raw))
            if not normalized:
                raise SchemaError(f"{where}: word {raw!r} normalizes to empty")
            start_frame = seconds_to_frame(start_sec, sample_rate, hop)
            end_frame = seconds_to_frame(end_sec, sample_rate, hop)
            if end_frame <= start_frame:
                raise SchemaError(f"{where}: invalid span (shorter than one frame)")
            try:
                wa = WordAlignment(
                    word_normalized=normalized,
                    symbol_count=symbols,
                    start_frame=start_frame,
                    end_frame=end_frame,
                    phone_spans=_phone_frame_spans(phones, start_frame, end_frame, sample_rate, hop),
                    preceding_silence_frames=max(start_frame - prev_end_frame, 0),
                )
            except SchemaError as exc:
                raise SchemaError(f"{where}: {exc}") from exc
            words.append(wa)
            prev_end_frame = end_frame
            prev_end_sec = end_sec
        sentences.append(SentenceTranscript(raw_text=text, words=tuple(words)))
    return sentences
