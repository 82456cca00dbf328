"""Corpus-pipeline glue between the manifest and the library operations.

Per-utterance extraction is embarrassingly parallel: the worker here is a
pure function of one manifest entry, and callers write results in manifest
order, so a parallel run is byte-identical to a sequential one.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Sequence

import numpy as np

from .artifacts import ManifestEntry, atomic_write, tracks_to_csv, word_vector_from_json, word_vector_to_json
from .corpus import SpeakerStats
from .errors import SchemaError
from .features import WordProsodyVector, compute_frame_tracks, extract_word_prosody
from .ingest import SAMPLE_RATE, load_alignment, load_utterance
from .quantizer import (
    Dimension,
    QuantizerSpec,
    WORD_DIMENSIONS,
    quantize,
    silence_log_duration,
)
from .sequence import SentenceItem, SentenceSequence


def extract_utterance(entry: ManifestEntry, dump_tracks_dir=None) -> dict:
    """Extract one utterance into a vectors record (JSONL row)."""
    utterance = load_utterance(entry.wav, speaker_id=entry.speaker, utterance_id=entry.utterance_id)
    if utterance.sample_rate != SAMPLE_RATE:
        raise SchemaError(
            f"utterance {entry.utterance_id}: sample rate {utterance.sample_rate} != {SAMPLE_RATE}"
        )
    sentences = load_alignment(entry.alignment)
    tracks = compute_frame_tracks(utterance)
    if dump_tracks_dir is not None:
        atomic_write(dump_tracks_dir / f"{entry.utterance_id}.csv", tracks_to_csv(tracks))

    sentences_json = []
    for sentence in sentences:
        vectors = extract_word_prosody(utterance, sentence, tracks=tracks)
        words_json = []
        for word, vector in zip(sentence.words, vectors):
            meta = {
                "word": word.word_normalized,
                "symbols": word.symbol_count,
                "start_frame": word.start_frame,
                "end_frame": word.end_frame,
            }
            words_json.append(word_vector_to_json(meta, vector))
        sentences_json.append({"text": sentence.raw_text, "words": words_json})
    voiced_vals = tracks.log_f0[tracks.voiced]
    return {
        "utterance_id": entry.utterance_id,
        "speaker": entry.speaker,
        "n_frames": tracks.n_frames,
        "speech_seconds": utterance.duration_seconds,
        "voiced_frames": int(voiced_vals.size),
        "log_f0_sum": float(voiced_vals.sum()),
        "sentences": sentences_json,
    }


def _extract_worker(args: tuple) -> dict:
    entry, dump_dir = args
    return extract_utterance(entry, dump_dir)


def extract_corpus(
    entries: Sequence[ManifestEntry], jobs: int = 1, dump_tracks_dir=None
) -> list[dict]:
    """Extract every utterance, in manifest order, with ``jobs`` workers."""
    for entry in entries:
        if not entry.wav.exists():
            raise SchemaError(f"utterance {entry.utterance_id}: missing wav {entry.wav}")
        if not entry.alignment.exists():
            raise SchemaError(
                f"utterance {entry.utterance_id}: missing alignment {entry.alignment}"
            )
    work = [(entry, dump_tracks_dir) for entry in entries]
    if jobs <= 1 or len(entries) <= 1:
        return [_extract_worker(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_extract_worker, work, chunksize=max(1, len(work) // (4 * jobs))))


# ---------------------------------------------------------------------------
# Calibration feeds and speaker statistics
# ---------------------------------------------------------------------------


def iter_word_vectors(records: Iterable[dict]):
    for record in records:
        for sentence in record["sentences"]:
            for word in sentence["words"]:
                yield word


def gather_calibration_samples(records: Sequence[dict]) -> dict[Dimension, np.ndarray]:
    """Collect per-dimension continuous samples (five word dimensions plus
    silence log-durations) from extracted vector records."""
    columns: dict[Dimension, list[float]] = {dim: [] for dim in WORD_DIMENSIONS}
    columns[Dimension.SILENCE] = []
    for word in iter_word_vectors(records):
        vector = word_vector_from_json(word)
        for dim, value in zip(WORD_DIMENSIONS, vector.values()):
            if math.isfinite(value):
                columns[dim].append(value)
        columns[Dimension.SILENCE].append(silence_log_duration(vector.preceding_silence_frames))
    return {dim: np.asarray(vals) for dim, vals in columns.items()}


def speaker_stats_from_records(records: Sequence[dict]) -> list[SpeakerStats]:
    totals: dict[str, dict] = {}
    for record in records:
        acc = totals.setdefault(
            record["speaker"], {"seconds": 0.0, "voiced": 0, "log_f0_sum": 0.0, "count": 0}
        )
        acc["seconds"] += float(record["speech_seconds"])
        acc["voiced"] += int(record["voiced_frames"])
        acc["log_f0_sum"] += float(record["log_f0_sum"])
        acc["count"] += 1
    stats = []
    for speaker in sorted(totals):
        acc = totals[speaker]
        mean = acc["log_f0_sum"] / acc["voiced"] if acc["voiced"] else float("nan")
        stats.append(
            SpeakerStats(
                speaker_id=speaker,
                total_speech_seconds=acc["seconds"],
                mean_log_f0=mean,
                utterance_count=acc["count"],
            )
        )
    return stats


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------


def sentence_to_sequence(sentence_json: dict, spec: QuantizerSpec) -> SentenceSequence:
    """Quantize one extracted sentence into a SentenceSequence (no global)."""
    items = []
    for word in sentence_json["words"]:
        vector = word_vector_from_json(word)
        silence_token = quantize(
            silence_log_duration(vector.preceding_silence_frames), Dimension.SILENCE, spec
        )
        if vector.valid:
            tokens = tuple(
                quantize(value, dim, spec) for dim, value in zip(WORD_DIMENSIONS, vector.values())
            )
        else:
            tokens = None
        items.append(SentenceItem(silence_token=silence_token, word=word["word"], tokens=tokens))
    return SentenceSequence(text=sentence_json["text"], items=tuple(items))


def utterance_word_vectors(record: dict) -> list[WordProsodyVector]:
    return [word_vector_from_json(w) for w in iter_word_vectors([record])]
