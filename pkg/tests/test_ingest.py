import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import write_wav
from prosotok.errors import SchemaError
from prosotok.ingest import (
    HOP_LENGTH,
    SAMPLE_RATE,
    load_alignment,
    load_utterance,
    normalize_word,
    number_to_words,
    seconds_to_frame,
)


class TestLoadUtterance:
    def test_one_second_of_silence(self, tmp_path):
        path = write_wav(tmp_path / "sil.wav", np.zeros(SAMPLE_RATE))
        utt = load_utterance(path)
        assert utt.samples.size == SAMPLE_RATE
        assert np.all(utt.samples == 0.0)
        assert utt.sample_rate == SAMPLE_RATE
        assert utt.utterance_id == "sil"

    def test_pcm_scaling_of_full_scale_sample(self, tmp_path):
        import wave

        path = tmp_path / "fs.wav"
        with wave.open(str(path), "wb") as wav:
            wav.setnchannels(1)
            wav.setsampwidth(2)
            wav.setframerate(SAMPLE_RATE)
            wav.writeframes(np.array([32767, -32768], dtype="<i2").tobytes())
        utt = load_utterance(path)
        assert utt.samples[0] == pytest.approx(32767 / 32768)
        assert utt.samples[1] == -1.0

    def test_stereo_rejected(self, tmp_path):
        path = write_wav(tmp_path / "st.wav", np.zeros(1000), sample_rate=44100, channels=2)
        with pytest.raises(SchemaError, match="unsupported format"):
            load_utterance(path)

    def test_eight_bit_rejected(self, tmp_path):
        import wave

        path = tmp_path / "w8.wav"
        with wave.open(str(path), "wb") as wav:
            wav.setnchannels(1)
            wav.setsampwidth(1)
            wav.setframerate(SAMPLE_RATE)
            wav.writeframes(bytes(100))
        with pytest.raises(SchemaError, match="unsupported format"):
            load_utterance(path)

    def test_empty_audio_rejected(self, tmp_path):
        path = write_wav(tmp_path / "empty.wav", np.zeros(0))
        with pytest.raises(SchemaError, match="empty audio"):
            load_utterance(path)

    def test_ids_from_arguments(self, tmp_path):
        path = write_wav(tmp_path / "x.wav", np.zeros(100))
        utt = load_utterance(path, speaker_id="spk9", utterance_id="u1")
        assert (utt.speaker_id, utt.utterance_id) == ("spk9", "u1")


def _alignment_doc(words, text="Hello there."):
    return {"speaker": "spk", "sentences": [{"text": text, "words": words}]}


def _word(word, start, end, symbols=None, phones=None):
    if phones is None:
        phones = [{"start": start, "end": end}]
    entry = {"word": word, "start": start, "end": end, "phones": phones}
    if symbols is not None:
        entry["symbols"] = symbols
    return entry


def _write(tmp_path, doc):
    path = tmp_path / "align.json"
    path.write_text(json.dumps(doc))
    return path


class TestLoadAlignment:
    def test_seconds_to_frames(self, tmp_path):
        path = _write(tmp_path, _alignment_doc([_word("hello", 0.0, 0.3, symbols=4)]))
        [sentence] = load_alignment(path)
        word = sentence.words[0]
        assert (word.start_frame, word.end_frame) == (0, 24)
        assert word.symbol_count == 4
        assert word.preceding_silence_frames == 0

    def test_gap_becomes_preceding_silence(self, tmp_path):
        words = [
            _word("one", 0.0, 0.3, symbols=2),
            _word("two", 0.4, 0.7, symbols=2),
        ]
        path = _write(tmp_path, _alignment_doc(words))
        [sentence] = load_alignment(path)
        assert sentence.words[1].preceding_silence_frames == 8

    def test_silence_carries_across_sentences(self, tmp_path):
        doc = {
            "speaker": "spk",
            "sentences": [
                {"text": "One.", "words": [_word("one", 0.0, 0.25, symbols=2)]},
                {"text": "Two.", "words": [_word("two", 0.5, 0.75, symbols=2)]},
            ],
        }
        [_, second] = load_alignment(_write(tmp_path, doc))
        assert second.words[0].preceding_silence_frames == 20

    def test_end_before_start_rejected(self, tmp_path):
        path = _write(tmp_path, _alignment_doc([_word("bad", 0.5, 0.2, symbols=1)]))
        with pytest.raises(SchemaError, match="invalid span"):
            load_alignment(path)

    def test_overlapping_words_rejected(self, tmp_path):
        words = [_word("a", 0.0, 0.4, symbols=1), _word("b", 0.3, 0.6, symbols=1)]
        with pytest.raises(SchemaError, match="overlapping"):
            load_alignment(_write(tmp_path, _alignment_doc(words)))

    def test_symbols_default_to_phone_count(self, tmp_path):
        phones = [{"start": 0.0, "end": 0.15}, {"start": 0.15, "end": 0.3}]
        path = _write(tmp_path, _alignment_doc([_word("ab", 0.0, 0.3, phones=phones)]))
        [sentence] = load_alignment(path)
        assert sentence.words[0].symbol_count == 2

    def test_bad_symbols_rejected(self, tmp_path):
        path = _write(tmp_path, _alignment_doc([_word("a", 0.0, 0.3, symbols=0)]))
        with pytest.raises(SchemaError, match="symbol counts"):
            load_alignment(path)

    def test_phone_spans_tile_word_span(self, tmp_path):
        phones = [
            {"start": 0.0, "end": 0.1},
            {"start": 0.1, "end": 0.17},
            {"start": 0.17, "end": 0.3},
        ]
        path = _write(tmp_path, _alignment_doc([_word("abc", 0.0, 0.3, phones=phones)]))
        [sentence] = load_alignment(path)
        spans = sentence.words[0].phone_spans
        assert spans[0][0] == 0 and spans[-1][1] == 24
        for (_, e1), (s2, _) in zip(spans, spans[1:]):
            assert e1 == s2

    def test_word_normalized_on_load(self, tmp_path):
        path = _write(tmp_path, _alignment_doc([_word("How,", 0.0, 0.3, symbols=2)]))
        [sentence] = load_alignment(path)
        assert sentence.words[0].word_normalized == "how"

    @given(
        t1=st.floats(min_value=0.0, max_value=1000.0),
        delta=st.floats(min_value=0.0, max_value=1000.0),
    )
    def test_frame_conversion_monotone(self, t1, delta):
        assert seconds_to_frame(t1) <= seconds_to_frame(t1 + delta)

    def test_exact_boundary_times(self):
        # decimal times that sit on frame boundaries must not fall a frame short
        for k in range(1, 200):
            t = k * HOP_LENGTH / SAMPLE_RATE
            assert seconds_to_frame(t) == k


class TestNormalizeWord:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("How,", "how"),
            ("1996", "nineteen ninety six"),
            ("—", ""),
            ("...", ""),
            ("Hello!", "hello"),
            ("don't", "dont"),
            ("0", "zero"),
            ("42", "forty two"),
            ("100", "one hundred"),
            ("365", "three hundred sixty five"),
            ("1900", "nineteen hundred"),
            ("1903", "nineteen oh three"),
            ("2005", "two thousand five"),
            ("3000", "three thousand"),
            ("007", "seven"),
            ("12345", "12345"),
        ],
    )
    def test_examples(self, raw, expected):
        assert normalize_word(raw) == expected

    @given(st.text(max_size=24))
    def test_idempotent(self, raw):
        once = normalize_word(raw)
        assert normalize_word(once) == once

    def test_number_range_guard(self):
        with pytest.raises(ValueError):
            number_to_words(10000)
