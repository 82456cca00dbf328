"""Shared fixtures: synthetic audio, WAV writing, and a tiny demo corpus."""

from __future__ import annotations

import sys
import wave
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prosotok.ingest import SAMPLE_RATE, Utterance


def sine_utterance(hz: float, seconds: float = 1.0, amplitude: float = 0.8,
                   uid: str = "sine", speaker: str = "spk") -> Utterance:
    t = np.arange(int(seconds * SAMPLE_RATE)) / SAMPLE_RATE
    return Utterance(
        samples=amplitude * np.sin(2 * np.pi * hz * t),
        sample_rate=SAMPLE_RATE,
        speaker_id=speaker,
        utterance_id=uid,
    )


def write_wav(path: Path, samples: np.ndarray, sample_rate: int = SAMPLE_RATE,
              channels: int = 1, sampwidth: int = 2) -> Path:
    pcm = np.clip(samples * 32767.0, -32768, 32767).astype("<i2")
    if channels == 2:
        pcm = np.column_stack([pcm, pcm]).reshape(-1)
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(channels)
        wav.setsampwidth(sampwidth)
        wav.setframerate(sample_rate)
        wav.writeframes(pcm.tobytes())
    return path


@pytest.fixture(scope="session")
def demo_corpus(tmp_path_factory):
    """A small deterministic corpus (about one minute of audio)."""
    from prosotok.democorpus import build_corpus

    root = tmp_path_factory.mktemp("democorpus")
    manifest = build_corpus(root, total_seconds=60.0, seed=7)
    return manifest
