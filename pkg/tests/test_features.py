import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import sine_utterance
from oracles import ols_slope, percentile_linear
from prosotok.features import (
    ENERGY_FLOOR,
    FrameTracks,
    LOG_ENERGY_FLOOR,
    _floored_log,
    compute_frame_tracks,
    extract_word_prosody,
    frame_log_energy,
    frame_log_f0,
    speaker_mean_log_f0,
    word_duration,
    word_energy,
    word_f0_features,
)
from prosotok.ingest import HOP_LENGTH, SAMPLE_RATE, SentenceTranscript, Utterance, WordAlignment


def _word(start, end, symbols=1, name="word", silence=0):
    return WordAlignment(
        word_normalized=name,
        symbol_count=symbols,
        start_frame=start,
        end_frame=end,
        phone_spans=((start, end),),
        preceding_silence_frames=silence,
    )


def _tracks(log_f0, voiced=None, log_energy=None):
    log_f0 = np.asarray(log_f0, dtype=float)
    if voiced is None:
        voiced = np.isfinite(log_f0)
    if log_energy is None:
        log_energy = np.zeros_like(log_f0)
    return FrameTracks(log_f0=log_f0, voiced=np.asarray(voiced, bool),
                       log_energy=np.asarray(log_energy, dtype=float))


class TestFrameLogEnergy:
    def test_silence_hits_epsilon_floor(self):
        utt = Utterance(np.zeros(SAMPLE_RATE), SAMPLE_RATE, "s", "u")
        energy = frame_log_energy(utt)
        assert np.allclose(energy, math.log(1e-5))

    def test_unit_norm_frame_is_zero(self):
        assert _floored_log(np.array([1.0]))[0] == 0.0
        assert _floored_log(np.array([ENERGY_FLOOR / 10]))[0] == LOG_ENERGY_FLOOR

    def test_half_amplitude_shifts_by_ln2(self):
        utt = sine_utterance(220.0, amplitude=0.9)
        half = Utterance(utt.samples / 2.0, SAMPLE_RATE, "s", "u")
        diff = frame_log_energy(utt) - frame_log_energy(half)
        assert np.max(np.abs(diff - math.log(2))) < 1e-12

    def test_arbitrary_scaling_shifts_by_ln_k(self):
        k = 3.7
        utt = sine_utterance(220.0, amplitude=0.2)
        scaled = Utterance(utt.samples * k, SAMPLE_RATE, "s", "u")
        diff = frame_log_energy(scaled) - frame_log_energy(utt)
        assert np.max(np.abs(diff - math.log(k))) < 1e-6

    def test_short_audio_rejected(self):
        utt = Utterance(np.zeros(1100), SAMPLE_RATE, "s", "u")
        with pytest.raises(ValueError, match="shorter than one analysis window"):
            frame_log_energy(utt)

    def test_wrong_rate_rejected(self):
        utt = Utterance(np.zeros(48000), 48000, "s", "u")
        with pytest.raises(ValueError, match="24000"):
            frame_log_energy(utt)


class TestFrameLogF0:
    @pytest.mark.parametrize("hz", [100.0, 150.0, 220.0, 300.0, 440.0])
    def test_pure_sine_oracle(self, hz):
        log_f0, voiced = frame_log_f0(sine_utterance(hz))
        interior = slice(2, -2)
        assert voiced[interior].mean() >= 0.95
        est = math.exp(float(np.nanmedian(log_f0[interior])))
        assert abs(est - hz) / hz < 0.03

    def test_silence_fully_unvoiced(self):
        _, voiced = frame_log_f0(Utterance(np.zeros(SAMPLE_RATE), SAMPLE_RATE, "s", "u"))
        assert not voiced.any()

    def test_white_noise_mostly_unvoiced(self):
        # -20 dBFS white noise; voicing-rate threshold fixed before the build
        rng = np.random.default_rng(1234)
        utt = Utterance(0.1 * rng.standard_normal(SAMPLE_RATE), SAMPLE_RATE, "s", "u")
        _, voiced = frame_log_f0(utt)
        assert voiced.mean() <= 0.20

    def test_amplitude_scale_invariance(self):
        utt = sine_utterance(220.0, amplitude=0.8)
        scaled = Utterance(utt.samples * 0.25, SAMPLE_RATE, "s", "u")
        f1, v1 = frame_log_f0(utt)
        f2, v2 = frame_log_f0(scaled)
        assert np.array_equal(v1, v2)
        ratio = np.exp(np.abs(f1[v1] - f2[v1]))
        assert np.all(ratio < 1.03)

    def test_time_shift_permutes_interior_frames(self):
        rng = np.random.default_rng(5)
        body = 0.5 * np.sin(2 * np.pi * 180 * np.arange(SAMPLE_RATE) / SAMPLE_RATE)
        body += 0.05 * rng.standard_normal(SAMPLE_RATE)
        shift_frames = 3
        shifted = np.concatenate([np.zeros(shift_frames * HOP_LENGTH), body])
        t1 = compute_frame_tracks(Utterance(body, SAMPLE_RATE, "s", "u"))
        t2 = compute_frame_tracks(Utterance(shifted, SAMPLE_RATE, "s", "u"))
        lo, hi = 6, t1.n_frames - 6
        assert np.array_equal(t1.log_energy[lo:hi], t2.log_energy[lo + shift_frames : hi + shift_frames])
        np.testing.assert_array_equal(t1.log_f0[lo:hi], t2.log_f0[lo + shift_frames : hi + shift_frames])


class TestWordAggregates:
    def test_duration_examples(self):
        assert word_duration(_word(0, 24, symbols=6)) == pytest.approx(math.log(4), abs=1e-12)
        assert word_duration(_word(0, 10, symbols=10)) == 0.0

    def test_constant_contour(self):
        tracks = _tracks([5.0] * 10)
        f0_range, median, slope = word_f0_features(tracks, _word(0, 10))
        assert f0_range == 0.0
        assert median == 5.0
        assert slope == pytest.approx(0.0, abs=1e-12)

    def test_linear_contour_exact(self):
        a, b = 5.1, 0.01
        t = np.arange(20)
        tracks = _tracks(a + b * t)
        f0_range, median, slope = word_f0_features(tracks, _word(0, 20))
        assert abs(slope - b) <= 1e-9
        assert median == pytest.approx(a + b * 9.5, abs=1e-12)
        assert f0_range == pytest.approx(0.9 * 19 * b, abs=1e-12)

    def test_percentile_oracle(self):
        values = [5.0, 5.2, 5.4, 5.6, 5.8]
        tracks = _tracks(values)
        f0_range, median, _ = word_f0_features(tracks, _word(0, 5))
        expected = percentile_linear(values, 95) - percentile_linear(values, 5)
        assert f0_range == pytest.approx(expected, abs=1e-12)
        assert median == 5.4

    def test_slope_uses_only_voiced_frames(self):
        log_f0 = np.array([5.0, np.nan, 5.2, np.nan, 5.4, 5.6])
        tracks = _tracks(log_f0)
        _, _, slope = word_f0_features(tracks, _word(0, 6))
        expected = ols_slope([0, 2, 4, 5], [5.0, 5.2, 5.4, 5.6])
        assert slope == pytest.approx(expected, abs=1e-12)

    def test_fewer_than_two_voiced_frames_invalid(self):
        tracks = _tracks([5.0, np.nan, np.nan])
        assert word_f0_features(tracks, _word(0, 3)) is None

    @given(st.lists(st.floats(min_value=4.0, max_value=6.5), min_size=3, max_size=30))
    def test_range_is_order_invariant(self, values):
        tracks = _tracks(values)
        shuffled = _tracks(sorted(values))
        word = _word(0, len(values))
        r1, _, _ = word_f0_features(tracks, word)
        r2, _, _ = word_f0_features(shuffled, word)
        assert r1 == pytest.approx(r2, abs=1e-12)

    def test_slope_is_order_sensitive(self):
        values = [5.0, 5.6, 5.2]
        word = _word(0, 3)
        r1, _, s1 = word_f0_features(_tracks(values), word)
        r2, _, s2 = word_f0_features(_tracks(sorted(values)), word)
        assert r1 == pytest.approx(r2, abs=1e-12)
        assert s1 != s2

    def test_aggregates_ignore_frames_outside_span(self):
        rng = np.random.default_rng(2)
        base = rng.uniform(4.5, 5.5, 30)
        t1 = _tracks(base, log_energy=rng.uniform(-4, 0, 30))
        modified = base.copy()
        modified[:5] = 9.9
        modified[25:] = 1.1
        t2 = _tracks(modified, log_energy=t1.log_energy)
        word = _word(5, 25)
        assert word_f0_features(t1, word) == word_f0_features(t2, word)
        assert word_energy(t1, word) == word_energy(t2, word)

    def test_energy_mean(self):
        tracks = _tracks([5.0, 5.0], log_energy=[0.0, 1.0])
        assert word_energy(tracks, _word(0, 2)) == 0.5
        tracks2 = _tracks([5.0] * 4, log_energy=[-2.0] * 4)
        assert word_energy(tracks2, _word(0, 4)) == -2.0

    def test_span_outside_tracks_rejected(self):
        tracks = _tracks([5.0] * 4)
        with pytest.raises(ValueError, match="outside track"):
            word_energy(tracks, _word(0, 10))
        with pytest.raises(ValueError, match="outside track"):
            word_f0_features(tracks, _word(2, 6))


class TestExtractWordProsody:
    def test_sine_word_median(self):
        utt = sine_utterance(220.0)
        word = _word(10, 70, symbols=5)
        sentence = SentenceTranscript(raw_text="Ah.", words=(word,))
        [vector] = extract_word_prosody(utt, sentence)
        assert vector.valid
        assert vector.f0_median == pytest.approx(math.log(220.0), abs=0.03)
        assert vector.duration == pytest.approx(math.log(60 / 5), abs=1e-12)

    def test_unvoiced_word_invalid(self):
        samples = np.concatenate([np.zeros(SAMPLE_RATE // 2), sine_utterance(200.0, 0.5).samples])
        utt = Utterance(samples, SAMPLE_RATE, "s", "u")
        word = _word(2, 30, symbols=3)
        [vector] = extract_word_prosody(utt, SentenceTranscript(raw_text="X.", words=(word,)))
        assert not vector.valid
        assert math.isnan(vector.f0_median)
        assert math.isfinite(vector.energy)

    def test_empty_sentence(self):
        utt = sine_utterance(220.0)
        assert extract_word_prosody(utt, SentenceTranscript(raw_text="x", words=())) == []


class TestSpeakerMean:
    def test_constant(self):
        tracks = _tracks([math.log(200)] * 10)
        assert speaker_mean_log_f0([tracks]) == pytest.approx(math.log(200), abs=1e-12)

    def test_weighted_across_utterances(self):
        t1 = _tracks([math.log(100)] * 5)
        t2 = _tracks([math.log(400)] * 5)
        mean = speaker_mean_log_f0([t1, t2])
        assert mean == pytest.approx(math.log(200), abs=1e-12)

    def test_no_voiced_frames(self):
        tracks = _tracks([np.nan, np.nan])
        with pytest.raises(ValueError, match="no voiced frames"):
            speaker_mean_log_f0([tracks])
