"""On-disk artifact formats for the batch pipeline.

All writers go through a temp-file-then-rename so a failing run never leaves
a partial artifact, and all float serialization uses repr so values
round-trip bit-exactly. Non-finite floats are stored as JSON null.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .corpus import CleaningReport, FrequencyTable, SpeakerStats
from .errors import SchemaError
from .features import FrameTracks, WordProsodyVector
from .metrics import FocusRecord, LogProbRecord, UtteranceMeasure
from .quantizer import N_BINS
from .sequence import stream_to_text, text_to_stream


def atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _null_safe(value: float | None) -> float | None:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def _nan_safe(value: Any) -> float:
    return float("nan") if value is None else float(value)


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ManifestEntry:
    utterance_id: str
    speaker: str
    wav: Path
    alignment: Path


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    """Manifest JSON: {"utterances": [{"utterance_id", "speaker", "wav",
    "alignment"}]}; relative paths resolve against the manifest directory."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read manifest {path}: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("utterances"), list):
        raise SchemaError(f"manifest {path.name} missing 'utterances' list")
    base = path.parent
    entries = []
    seen: set[str] = set()
    for i, item in enumerate(doc["utterances"]):
        try:
            uid = item["utterance_id"]
            entry = ManifestEntry(
                utterance_id=uid,
                speaker=item["speaker"],
                wav=(base / item["wav"]).resolve(),
                alignment=(base / item["alignment"]).resolve(),
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"manifest {path.name}: entry {i} malformed ({exc})") from exc
        if uid in seen:
            raise SchemaError(f"manifest {path.name}: duplicate utterance_id {uid}")
        seen.add(uid)
        entries.append(entry)
    return entries


def write_manifest(path: str | Path, entries: Sequence[ManifestEntry]) -> None:
    base = Path(path).parent
    doc = {
        "utterances": [
            {
                "utterance_id": e.utterance_id,
                "speaker": e.speaker,
                "wav": os.path.relpath(e.wav, base),
                "alignment": os.path.relpath(e.alignment, base),
            }
            for e in entries
        ]
    }
    atomic_write(path, json.dumps(doc, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Extracted prosody vectors (one JSON object per utterance)
# ---------------------------------------------------------------------------


def word_vector_to_json(word_meta: dict, vector: WordProsodyVector) -> dict:
    return {
        **word_meta,
        "silence_frames": vector.preceding_silence_frames,
        "duration": _null_safe(vector.duration),
        "f0_range": _null_safe(vector.f0_range),
        "f0_median": _null_safe(vector.f0_median),
        "f0_slope": _null_safe(vector.f0_slope),
        "energy": _null_safe(vector.energy),
        "valid": vector.valid,
    }


def word_vector_from_json(doc: dict) -> WordProsodyVector:
    return WordProsodyVector(
        duration=_nan_safe(doc["duration"]),
        f0_range=_nan_safe(doc["f0_range"]),
        f0_median=_nan_safe(doc["f0_median"]),
        f0_slope=_nan_safe(doc["f0_slope"]),
        energy=_nan_safe(doc["energy"]),
        preceding_silence_frames=int(doc["silence_frames"]),
        valid=bool(doc["valid"]),
    )


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> None:
    atomic_write(path, "".join(json.dumps(row) + "\n" for row in rows))


def read_jsonl(path: str | Path) -> list[dict]:
    path = Path(path)
    rows = []
    try:
        with open(path) as fh:
            for i, line in enumerate(fh):
                line = line.strip()
                if line:
                    rows.append(json.loads(line))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {path.name}: {exc}") from exc
    return rows


# ---------------------------------------------------------------------------
# Token streams: JSONL plus the shell-quoted plain-text form
# ---------------------------------------------------------------------------


def write_token_jsonl(path: str | Path, rows: Sequence[tuple[str, Sequence[str]]]) -> None:
    write_jsonl(
        path, ({"utterance_id": uid, "tokens": list(tokens)} for uid, tokens in rows)
    )


def read_token_jsonl(path: str | Path) -> list[tuple[str, list[str]]]:
    out = []
    for row in read_jsonl(path):
        try:
            out.append((row["utterance_id"], [str(t) for t in row["tokens"]]))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed token row in {Path(path).name}: {exc}") from exc
    return out


def write_token_text(path: str | Path, rows: Sequence[tuple[str, Sequence[str]]]) -> None:
    atomic_write(path, "".join(stream_to_text(list(tokens)) + "\n" for _, tokens in rows))


def read_token_text(path: str | Path) -> list[list[str]]:
    return [text_to_stream(line) for line in Path(path).read_text().splitlines() if line.strip()]


# ---------------------------------------------------------------------------
# Frequency table
# ---------------------------------------------------------------------------


def write_frequency_table(path: str | Path, table: FrequencyTable) -> None:
    doc = {"alpha": table.alpha, "total": table.total, "counts": table.counts.tolist()}
    atomic_write(path, json.dumps(doc) + "\n")


def read_frequency_table(path: str | Path) -> FrequencyTable:
    doc = json.loads(Path(path).read_text())
    try:
        counts = np.asarray(doc["counts"], dtype=np.int64)
        table = FrequencyTable(counts=counts, alpha=float(doc["alpha"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed frequency table {Path(path).name}: {exc}") from exc
    if counts.shape != (N_BINS,) or table.total != int(doc.get("total", table.total)):
        raise SchemaError(f"inconsistent frequency table {Path(path).name}")
    return table


# ---------------------------------------------------------------------------
# Cleaning reports and speaker stats
# ---------------------------------------------------------------------------


def write_cleaning_reports(path: str | Path, reports: Sequence[CleaningReport]) -> None:
    write_jsonl(
        path,
        (
            {
                "utterance_id": r.utterance_id,
                "token_count": r.token_count,
                "invalid_or_extreme_count": r.invalid_or_extreme_count,
                "dropped": r.dropped,
                "reason": r.reason,
            }
            for r in reports
        ),
    )


def write_speaker_stats(
    path: str | Path, stats: Sequence[SpeakerStats], kept: set[str]
) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["speaker_id", "total_speech_seconds", "mean_log_f0", "utterance_count", "kept"])
    for s in stats:
        writer.writerow(
            [s.speaker_id, repr(s.total_speech_seconds), repr(s.mean_log_f0), s.utterance_count,
             int(s.speaker_id in kept)]
        )
    atomic_write(path, buf.getvalue())


# ---------------------------------------------------------------------------
# Frame-track debug dump
# ---------------------------------------------------------------------------


def tracks_to_csv(tracks: FrameTracks) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["frame_index", "log_f0", "voiced", "log_energy"])
    for i in range(tracks.n_frames):
        writer.writerow(
            [i, repr(float(tracks.log_f0[i])), int(tracks.voiced[i]), repr(float(tracks.log_energy[i]))]
        )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Evaluation inputs
# ---------------------------------------------------------------------------

_MEASURE_FIELDS = ("mean_f0_hz", "symbol_rate", "mean_log_energy")


def read_measures_csv(path: str | Path) -> list[UtteranceMeasure]:
    """Columns: utterance_id, style, pair_id, speaker, role, mean_f0_hz,
    symbol_rate, mean_log_energy (empty numeric cells become None)."""
    path = Path(path)
    measures = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"utterance_id", *_MEASURE_FIELDS}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise SchemaError(f"measures CSV {path.name} missing columns {sorted(required)}")
        for i, row in enumerate(reader):
            try:
                measures.append(
                    UtteranceMeasure(
                        utterance_id=row["utterance_id"],
                        style=row.get("style", "") or "",
                        pair_id=row.get("pair_id", "") or "",
                        speaker=row.get("speaker", "") or "",
                        role=row.get("role", "") or "",
                        **{
                            f: (float(row[f]) if row.get(f) else None)
                            for f in _MEASURE_FIELDS
                        },
                    )
                )
            except ValueError as exc:
                raise SchemaError(f"measures CSV {path.name} row {i + 2}: {exc}") from exc
    return measures


def read_focus_csv(path: str | Path) -> list[FocusRecord]:
    """Columns: passage_id, component_role, condition, mean_f0_hz."""
    path = Path(path)
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for i, row in enumerate(reader):
            try:
                records.append(
                    FocusRecord(
                        passage_id=row["passage_id"],
                        component_role=row["component_role"],
                        condition=row["condition"],
                        mean_f0_hz=float(row["mean_f0_hz"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"focus CSV {path.name} row {i + 2}: {exc}") from exc
    return records


def read_logprob_jsonl(path: str | Path) -> list[LogProbRecord]:
    """Rows: {"group": str, "word": str, "condition": "match"|"mismatch",
    "token_logprobs": [float]}."""
    records = []
    for i, row in enumerate(read_jsonl(path)):
        try:
            records.append(
                LogProbRecord(
                    group_id=str(row["group"]),
                    word=str(row["word"]),
                    condition=str(row["condition"]),
                    token_logprobs=tuple(float(v) for v in row["token_logprobs"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"log-prob row {i + 1} in {Path(path).name}: {exc}") from exc
    return records


# ---------------------------------------------------------------------------
# Result tables
# ---------------------------------------------------------------------------


def write_results_csv(path: str | Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [repr(v) if isinstance(v, float) else ("" if v is None else v) for v in row]
        )
    atomic_write(path, buf.getvalue())


def write_json(path: str | Path, doc: dict) -> None:
    atomic_write(path, json.dumps(_jsonable(doc), indent=2) + "\n")


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value
