"""prosotok: word-level prosody tokenization toolchain.

Converts speech (audio + alignments + transcripts) into discrete word-level
prosody token sequences and back to reference prosody contours, and provides
a model-agnostic harness for objective prosody metrics.
"""

__version__ = "0.1.0"

from .corpus import (
    CleaningReport,
    FrequencyTable,
    SpeakerStats,
    build_frequency_table,
    clean_utterance,
    extremity_score,
    filter_speakers,
    global_token,
)
from .errors import ProsotokError, SchemaError
from .features import (
    FrameTracks,
    WordProsodyVector,
    compute_frame_tracks,
    extract_word_prosody,
    frame_log_energy,
    frame_log_f0,
    speaker_mean_log_f0,
    word_duration,
    word_energy,
    word_f0_features,
)
from .ingest import (
    SentenceTranscript,
    Utterance,
    WordAlignment,
    load_alignment,
    load_utterance,
    normalize_word,
)
from .metrics import (
    AggregateResult,
    FocusRecord,
    LogProbRecord,
    UtteranceMeasure,
    dialogue_contrast,
    emotion_metric,
    emphasis_metric,
    focus_aggregate,
    measure_utterance,
    slowdown_metric,
    style_pair_diff,
    word_logprob,
)
from .quantizer import (
    Dimension,
    ProsodyToken,
    QuantizerSpec,
    calibrate,
    dequantize,
    quantize,
    speaker_f0_token,
)
from .sequence import (
    ParseError,
    SentenceItem,
    SentenceSequence,
    build_continuation_prompt,
    build_training_sequence,
    build_tts_prompt,
    parse_sequence,
    serialize_sentence,
)
from .synth import (
    SynthPlan,
    synth_energy_contour,
    synth_f0_contour,
    synth_phone_durations,
    synth_sentence,
)

__all__ = [name for name in dir() if not name.startswith("_")]
