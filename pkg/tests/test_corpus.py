import math
import random

import numpy as np
import pytest

from genseq import random_sentences
from prosotok.corpus import (
    FrequencyTable,
    SpeakerStats,
    build_frequency_table,
    clean_utterance,
    extremity_score,
    filter_speakers,
    global_token,
)
from prosotok.features import WordProsodyVector
from prosotok.quantizer import Dimension, N_BINS, calibrate
from prosotok.sequence import SentenceItem, SentenceSequence, serialize_sequences


def _sentence(*items):
    return SentenceSequence(text="x.", items=items)


def _item(sil=0, word="w", tokens=(0, 0, 0, 0, 0)):
    return SentenceItem(silence_token=sil, word=word, tokens=tokens)


@pytest.fixture(scope="module")
def spec():
    rng = np.random.default_rng(31)
    return calibrate(
        {
            Dimension.DURATION: rng.uniform(0.5, 3.0, 3000),
            Dimension.F0_RANGE: rng.uniform(0.0, 1.0, 3000),
            Dimension.F0_MEDIAN: rng.uniform(4.2, 6.2, 3000),
            Dimension.F0_SLOPE: rng.uniform(-0.01, 0.01, 3000),
            Dimension.ENERGY: rng.uniform(-10.0, 0.0, 3000),
            Dimension.SILENCE: rng.uniform(math.log(0.5), math.log(200.0), 3000),
            Dimension.EXTREMITY: rng.uniform(-8.0, -4.0, 3000),
        }
    )


class TestFrequencyTable:
    def test_single_sentence_counts(self):
        stream = serialize_sequences([_sentence(_item())])
        table, skipped = build_frequency_table([stream])
        assert skipped == 0
        assert table.counts[0] == 6
        assert table.total == 6
        assert table.counts[1:].sum() == 0

    def test_pinv_and_global_excluded(self):
        sentence = SentenceSequence(
            text="x.", items=(_item(sil=3, tokens=None),), global_token=9
        )
        stream = serialize_sequences([sentence], include_global=True)
        table, _ = build_frequency_table([stream], include_global=True)
        assert table.total == 1
        assert table.counts[3] == 1
        assert table.counts[9] == 0

    def test_merge_equals_concatenation(self):
        rng = random.Random(1)
        streams = [
            serialize_sequences(random_sentences(rng, with_global=False)) for _ in range(30)
        ]
        whole, _ = build_frequency_table(streams)
        t1, _ = build_frequency_table(streams[:11])
        t2, _ = build_frequency_table(streams[11:])
        assert np.array_equal(t1.merge(t2).counts, whole.counts)
        assert np.array_equal(t2.merge(t1).counts, whole.counts)

    def test_merge_associative(self):
        rng = random.Random(2)
        streams = [
            serialize_sequences(random_sentences(rng, with_global=False)) for _ in range(12)
        ]
        a, _ = build_frequency_table(streams[:4])
        b, _ = build_frequency_table(streams[4:8])
        c, _ = build_frequency_table(streams[8:])
        assert np.array_equal(a.merge(b).merge(c).counts, a.merge(b.merge(c)).counts)

    def test_empty_corpus_smoothing(self):
        table, _ = build_frequency_table([])
        assert table.total == 0
        assert table.frequency(0) == pytest.approx(1 / N_BINS, abs=1e-15)
        assert float(table.frequencies().sum()) == pytest.approx(1.0, abs=1e-12)

    def test_unparseable_stream_skipped(self):
        good = serialize_sequences([_sentence(_item())])
        table, skipped = build_frequency_table([good, ["<SEP2>", "junk"]])
        assert skipped == 1
        assert table.total == 6

    def test_frequencies_sum_to_one(self):
        rng = random.Random(3)
        streams = [serialize_sequences(random_sentences(rng, with_global=False))]
        table, _ = build_frequency_table(streams)
        assert float(table.frequencies().sum()) == pytest.approx(1.0, abs=1e-12)


def _table_with_frequencies() -> FrequencyTable:
    # freq(bin 1) = 100/10000 = 0.01 and freq(bin 2) = 1/10000 = 0.0001
    counts = np.zeros(N_BINS, dtype=np.int64)
    counts[1] = 99
    counts[2] = 0
    counts[3] = 10000 - 512 - 99
    return FrequencyTable(counts=counts, alpha=1.0)


class TestExtremity:
    def test_constant_frequency(self):
        table = _table_with_frequencies()
        sentence = _sentence(_item(sil=1, tokens=(1, 1, 1, 1, 1)))
        assert extremity_score(sentence, table) == pytest.approx(math.log(0.01), abs=1e-12)

    def test_mixed_frequencies(self):
        table = _table_with_frequencies()
        sentence = SentenceSequence(
            text="x.", items=(SentenceItem(silence_token=1, word="w", tokens=None),
                             SentenceItem(silence_token=2, word="v", tokens=None))
        )
        expected = (math.log(0.01) + math.log(0.0001)) / 2
        assert extremity_score(sentence, table) == pytest.approx(expected, abs=1e-12)

    def test_rarer_token_strictly_lowers_score(self):
        table = _table_with_frequencies()
        common = _sentence(_item(sil=1, tokens=(1, 1, 1, 1, 1)))
        rarer = _sentence(_item(sil=1, tokens=(1, 1, 2, 1, 1)))
        assert extremity_score(rarer, table) < extremity_score(common, table)

    def test_permutation_invariant(self):
        table = _table_with_frequencies()
        a = _sentence(_item(sil=1, tokens=(1, 2, 3, 1, 2)))
        b = _sentence(_item(sil=1, tokens=(2, 1, 1, 3, 2)))
        assert extremity_score(a, table) == pytest.approx(
            extremity_score(b, table), abs=1e-15
        )

    def test_zero_tokens_rejected(self):
        table = _table_with_frequencies()
        with pytest.raises(ValueError, match="no prosody tokens"):
            extremity_score(SentenceSequence(text="x.", items=()), table)

    def test_global_token_boundaries(self, spec):
        ds = spec.dim(Dimension.EXTREMITY)
        assert global_token(ds.lower_cap, spec) == 0
        assert global_token(ds.upper_cap, spec) == N_BINS - 1

    def test_global_requires_calibration(self):
        bare = calibrate({Dimension.ENERGY: np.arange(2000.0)})
        with pytest.raises(ValueError, match="extremity dimension not calibrated"):
            global_token(-5.0, bare)


def _vector(spec, valid=True, extreme_dims=0, silence_frames=4):
    dims = []
    for i, dim in enumerate(
        (Dimension.DURATION, Dimension.F0_RANGE, Dimension.F0_MEDIAN,
         Dimension.F0_SLOPE, Dimension.ENERGY)
    ):
        ds = spec.dim(dim)
        if i < extreme_dims:
            dims.append(ds.upper_cap + 10 * (ds.upper_cap - ds.lower_cap))
        else:
            dims.append((ds.lower_cap + ds.upper_cap) / 2)
    if not valid:
        dims = [dims[0], float("nan"), float("nan"), float("nan"), dims[4]]
    return WordProsodyVector(
        duration=dims[0], f0_range=dims[1], f0_median=dims[2], f0_slope=dims[3],
        energy=dims[4], preceding_silence_frames=silence_frames, valid=valid,
    )


class TestCleaning:
    def test_boundary_fraction_kept(self, spec):
        # 10 token slots, 2 flagged -> exactly the threshold, kept
        words = [_vector(spec), _vector(spec, valid=False), _vector(spec, valid=False)]
        report = clean_utterance("u", words, spec)
        assert report.token_count == 10
        assert report.invalid_or_extreme_count == 2
        assert not report.dropped

    def test_above_threshold_dropped(self, spec):
        words = [
            _vector(spec, extreme_dims=1),
            _vector(spec, valid=False),
            _vector(spec, valid=False),
        ]
        report = clean_utterance("u", words, spec)
        assert (report.token_count, report.invalid_or_extreme_count) == (10, 3)
        assert report.dropped
        assert "3/10" in report.reason

    def test_clean_utterance_kept_with_no_flags(self, spec):
        report = clean_utterance("u", [_vector(spec) for _ in range(2)], spec)
        assert report.invalid_or_extreme_count == 0
        assert not report.dropped

    def test_extreme_silence_flagged(self, spec):
        words = [_vector(spec, silence_frames=10**7)]
        report = clean_utterance("u", words, spec)
        assert report.invalid_or_extreme_count == 1

    def test_monotone_in_flagged_tokens(self, spec):
        words = [_vector(spec) for _ in range(3)]
        base = clean_utterance("u", words, spec)
        worse = clean_utterance("u", words + [_vector(spec, valid=False)], spec)
        assert base.invalid_or_extreme_count <= worse.invalid_or_extreme_count
        if base.dropped:
            assert worse.dropped

    def test_empty_rejected(self, spec):
        with pytest.raises(ValueError, match="no prosody tokens"):
            clean_utterance("u", [], spec)

    def test_threshold_validation(self, spec):
        with pytest.raises(ValueError, match="threshold"):
            clean_utterance("u", [_vector(spec)], spec, threshold=0.0)


class TestSpeakerFilter:
    def test_boundary_hour(self):
        stats = [
            SpeakerStats("keep", 3600.0, 5.0, 4),
            SpeakerStats("drop", 3599.0, 5.0, 4),
        ]
        assert filter_speakers(stats) == {"keep"}

    def test_empty(self):
        assert filter_speakers([]) == set()

    def test_custom_minimum(self):
        stats = [SpeakerStats("a", 120.0, 5.0, 2), SpeakerStats("b", 30.0, 5.0, 1)]
        assert filter_speakers(stats, min_seconds=60.0) == {"a"}
