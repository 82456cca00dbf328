"""Synthetic pseudo-speech corpus generator for desk-scale pipeline runs.

Generates deterministic 24 kHz mono PCM16 WAVs of harmonic word tones with
silences, together with exactly matching alignment JSONs and a manifest, so
the whole pipeline can be exercised end to end without shipping audio data.
Word pitch contours, speaking rates, and amplitudes vary per word to give
every prosody dimension a realistic spread.
"""

from __future__ import annotations

import argparse
import json
import math
import wave
from pathlib import Path

import numpy as np

from .artifacts import ManifestEntry, write_manifest
from .ingest import HOP_LENGTH, SAMPLE_RATE

SENTENCES = [
    "A rolling stone gathers no moss.",
    "Actions speak louder than words.",
    "All that glitters is not gold.",
    "Practice makes perfect, they say.",
    "Still waters run deep.",
    "The early bird catches the worm.",
    "Honesty is the best policy.",
    "Every cloud has a silver lining.",
    "In 1996 the river froze early.",
    "Fortune favors the bold.",
    "A stitch in time saves nine.",
    "Many hands make light work.",
    "Look before you leap!",
    "Better late than never?",
    "Birds of a feather flock together.",
    "The pen is mightier than the sword.",
]

_SPEAKER_BASE_F0 = (110.0, 150.0, 210.0, 260.0)
_FADE = 24  # samples


def _distribute(total: int, parts: int) -> list[int]:
    base, rem = divmod(total, parts)
    return [base + 1] * rem + [base] * (parts - rem)


def _word_tone(rng: np.random.Generator, n_frames: int, base_f0: float) -> np.ndarray:
    """Harmonic tone for one word with a drifting log-F0 contour."""
    n_samples = n_frames * HOP_LENGTH
    median = base_f0 * rng.uniform(0.85, 1.18)
    slope = rng.uniform(-0.004, 0.004)
    arch = rng.uniform(0.0, 0.15)
    t = np.arange(n_frames)
    log_f0 = math.log(median) + slope * (t - (n_frames - 1) / 2.0)
    if n_frames > 1:
        log_f0 = log_f0 + arch * np.sin(np.pi * t / (n_frames - 1))
    frame_f0 = np.exp(log_f0)
    sample_f0 = np.interp(
        np.arange(n_samples) / HOP_LENGTH, np.arange(n_frames), frame_f0
    )
    phase = 2.0 * np.pi * np.cumsum(sample_f0) / SAMPLE_RATE
    amplitude = rng.uniform(0.08, 0.5)
    tone = np.zeros(n_samples)
    for k, gain in enumerate((1.0, 0.5, 0.25), start=1):
        tone += gain * np.sin(k * phase)
    tone *= amplitude / 1.75
    fade = min(_FADE, n_samples // 2)
    ramp = np.linspace(0.0, 1.0, fade)
    tone[:fade] *= ramp
    tone[-fade:] *= ramp[::-1]
    return tone


def _letters(word: str) -> str:
    return "".join(c for c in word if c.isalnum())


def build_corpus(
    out_dir: str | Path,
    total_seconds: float = 90.0,
    seed: int = 0,
    n_speakers: int = 4,
) -> Path:
    """Write WAVs, alignment JSONs, and a manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    entries: list[ManifestEntry] = []
    produced = 0.0
    index = 0
    while produced < total_seconds:
        speaker_idx = index % n_speakers
        speaker = f"spk{speaker_idx:02d}"
        uid = f"utt{index:04d}"
        base_f0 = _SPEAKER_BASE_F0[speaker_idx % len(_SPEAKER_BASE_F0)]
        n_sentences = int(rng.integers(2, 5))
        starts = rng.integers(0, len(SENTENCES), size=n_sentences)

        blocks: list[np.ndarray] = []
        sentences_json = []
        cursor = 0

        def frames_to_sec(frames: int) -> float:
            return frames * HOP_LENGTH / SAMPLE_RATE

        lead = int(rng.integers(4, 16))
        blocks.append(np.zeros(lead * HOP_LENGTH))
        cursor += lead
        for s in starts:
            text = SENTENCES[int(s)]
            words_json = []
            for w_idx, raw_word in enumerate(text.split()):
                if w_idx > 0:
                    gap = int(rng.integers(0, 9))
                    if gap:
                        blocks.append(np.zeros(gap * HOP_LENGTH))
                        cursor += gap
                n_phones = max(1, -(-len(_letters(raw_word)) // 3))
                frames = int(rng.integers(4, 13)) * n_phones
                blocks.append(_word_tone(rng, frames, base_f0))
                phone_frames = _distribute(frames, n_phones)
                phones = []
                p_cursor = cursor
                for pf in phone_frames:
                    phones.append(
                        {"start": frames_to_sec(p_cursor), "end": frames_to_sec(p_cursor + pf)}
                    )
                    p_cursor += pf
                words_json.append(
                    {
                        "word": raw_word,
                        "symbols": n_phones,
                        "start": frames_to_sec(cursor),
                        "end": frames_to_sec(cursor + frames),
                        "phones": phones,
                    }
                )
                cursor += frames
            sentences_json.append({"text": text, "words": words_json})
            pause = int(rng.integers(10, 40))
            blocks.append(np.zeros(pause * HOP_LENGTH))
            cursor += pause

        samples = np.concatenate(blocks)
        wav_path = out_dir / f"{uid}.wav"
        with wave.open(str(wav_path), "wb") as wav:
            wav.setnchannels(1)
            wav.setsampwidth(2)
            wav.setframerate(SAMPLE_RATE)
            pcm = np.clip(samples * 32767.0, -32768, 32767).astype("<i2")
            wav.writeframes(pcm.tobytes())

        align_path = out_dir / f"{uid}.json"
        align_path.write_text(
            json.dumps({"speaker": speaker, "sentences": sentences_json}, indent=1) + "\n"
        )
        entries.append(
            ManifestEntry(utterance_id=uid, speaker=speaker, wav=wav_path, alignment=align_path)
        )
        produced += samples.size / SAMPLE_RATE
        index += 1

    manifest = out_dir / "manifest.json"
    write_manifest(manifest, entries)
    return manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Generate a synthetic demo corpus.")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seconds", type=float, default=90.0, help="total speech duration")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--speakers", type=int, default=4)
    args = parser.parse_args(argv)
    manifest = build_corpus(args.out, args.seconds, args.seed, args.speakers)
    print(manifest)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
