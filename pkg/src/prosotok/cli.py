"""Batch front-end: extract -> calibrate -> tokenize -> freq-table -> clean
-> synth, plus prompt building and the evaluation report commands.

Runs are deterministic given (inputs, config, seed), including with
--jobs > 1. Every subcommand validates its inputs before writing, writes
artifacts atomically, and leaves a machine-readable summary JSON next to
them. Exit codes: 0 ok, 2 usage, 3 input schema, 4 internal. The log level
comes from the PROSOTOK_LOG environment variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import random
import sys
from pathlib import Path

from . import __version__
from .artifacts import (
    load_manifest,
    read_focus_csv,
    read_frequency_table,
    read_jsonl,
    read_logprob_jsonl,
    read_measures_csv,
    read_token_jsonl,
    write_cleaning_reports,
    write_frequency_table,
    write_json,
    write_jsonl,
    write_results_csv,
    write_speaker_stats,
    write_token_jsonl,
    write_token_text,
    atomic_write,
)
from .corpus import (
    build_frequency_table,
    clean_utterance,
    extremity_score,
    filter_speakers,
    global_token,
)
from .errors import EXIT_INTERNAL, EXIT_SCHEMA, EXIT_USAGE, ProsotokError, SchemaError
from .metrics import (
    AggregateResult,
    FOCUS_CONDITIONS,
    FOCUS_ROLES,
    dialogue_contrast,
    emotion_metric,
    emphasis_metric,
    focus_aggregate,
    slowdown_metric,
    style_pair_diff,
)
from .pipeline import (
    extract_corpus,
    gather_calibration_samples,
    sentence_to_sequence,
    speaker_stats_from_records,
    utterance_word_vectors,
)
from .quantizer import Dimension, QuantizerSpec, calibrate, speaker_f0_token
from .sequence import (
    ParseError,
    build_continuation_prompt,
    build_training_sequence,
    build_tts_prompt,
    choose_instruction,
    parse_sequence,
    segment_sentences,
    serialize_sequences,
)
from .synth import SynthPlan, synth_sentence

log = logging.getLogger("prosotok")

DEFAULT_STYLE_PAIRS = (
    "high:low:mean_f0_hz",
    "quick:slow:symbol_rate",
    "loud:quiet:mean_log_energy",
)
DEFAULT_DIALOGUE_FIELDS = ("mean_f0_hz", "symbol_rate", "mean_log_energy")


class _UsageError(ProsotokError):
    pass


def _configure_logging() -> None:
    level = os.environ.get("PROSOTOK_LOG", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


# ---------------------------------------------------------------------------
# Option resolution: flags > config file > defaults
# ---------------------------------------------------------------------------


def _opt(args, name: str, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    config = getattr(args, "_config", None) or {}
    if name in config:
        return config[name]
    return default


def _req(args, name: str):
    value = _opt(args, name)
    if value is None:
        raise _UsageError(f"missing required option --{name.replace('_', '-')}")
    return value


def _out_dir(args) -> Path:
    out = Path(_req(args, "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_summary(out: Path, command: str, options: dict, outputs: list[Path], counts: dict) -> None:
    def relativize(value):
        # paths under the output tree are recorded relative to it so that
        # identical runs into different directories stay byte-identical
        if isinstance(value, str):
            try:
                resolved = Path(value).resolve()
            except OSError:
                return value
            if resolved.is_relative_to(out.resolve()):
                return os.path.relpath(resolved, out.resolve())
        return value

    doc = {
        "command": command,
        "options": {k: relativize(v) for k, v in options.items() if v is not None},
        "outputs": sorted(os.path.relpath(p, out) for p in outputs),
        "counts": counts,
    }
    atomic_write(out / f"summary_{command.replace('-', '_')}.json", json.dumps(doc, indent=2) + "\n")


def _aggregate_row(label: tuple, result: AggregateResult) -> list:
    return [*label, result.mean, result.std, result.stderr, result.n, result.excluded]


def _aggregate_json(result: AggregateResult) -> dict:
    return dataclasses.asdict(result)


# ---------------------------------------------------------------------------
# Pipeline subcommands
# ---------------------------------------------------------------------------


def cmd_extract(args) -> int:
    out = _out_dir(args)
    entries = load_manifest(_req(args, "manifest"))
    jobs = int(_opt(args, "jobs", 1))
    dump_dir = None
    if _opt(args, "dump_tracks", False):
        dump_dir = out / "tracks"
        dump_dir.mkdir(parents=True, exist_ok=True)
    records = extract_corpus(entries, jobs=jobs, dump_tracks_dir=dump_dir)
    vectors_path = out / "vectors.jsonl"
    write_jsonl(vectors_path, records)
    n_sentences = sum(len(r["sentences"]) for r in records)
    n_words = sum(len(s["words"]) for r in records for s in r["sentences"])
    _write_summary(
        out,
        "extract",
        {"manifest": str(_req(args, "manifest")), "jobs": jobs},
        [vectors_path],
        {"utterances": len(records), "sentences": n_sentences, "words": n_words},
    )
    return 0


def cmd_calibrate(args) -> int:
    out = _out_dir(args)
    records = read_jsonl(_req(args, "vectors"))
    min_samples = int(_opt(args, "min_samples", 1000))
    spec = calibrate(gather_calibration_samples(records), min_samples=min_samples)

    stats = speaker_stats_from_records(records)
    means = [s.mean_log_f0 for s in stats if math.isfinite(s.mean_log_f0)]
    try:
        # speakers are the sample unit here, so the corpus-size floor does
        # not apply; two distinct speakers suffice for caps
        spec = spec.merged_with(calibrate({Dimension.SPEAKER_F0: means}, min_samples=2))
    except ValueError as exc:
        log.warning("skipping speaker_f0 calibration: %s", exc)

    tokens_path = _opt(args, "tokens")
    freq_path = _opt(args, "freq_table")
    if tokens_path and freq_path:
        table = read_frequency_table(freq_path)
        include_global = bool(_opt(args, "include_global", False))
        scores = []
        for _, stream in read_token_jsonl(tokens_path):
            for sentence in parse_sequence(stream, include_global=include_global):
                scores.append(extremity_score(sentence, table))
        spec = spec.merged_with(calibrate({Dimension.EXTREMITY: scores}, min_samples=2))

    spec_path = out / "spec.json"
    spec.save(spec_path)
    _write_summary(
        out,
        "calibrate",
        {
            "vectors": str(_req(args, "vectors")),
            "min_samples": min_samples,
            "tokens": tokens_path and str(tokens_path),
            "freq_table": freq_path and str(freq_path),
        },
        [spec_path],
        {"dimensions": sorted(d.value for d in spec.dimensions)},
    )
    return 0


def cmd_tokenize(args) -> int:
    out = _out_dir(args)
    records = read_jsonl(_req(args, "vectors"))
    spec = QuantizerSpec.load(_req(args, "spec"))
    include_global = bool(_opt(args, "include_global", False))
    training = bool(_opt(args, "training", False))
    seed = int(_opt(args, "seed", 0))

    table = None
    if include_global:
        freq_path = _opt(args, "freq_table")
        if freq_path is None:
            raise _UsageError("--include-global requires --freq-table")
        table = read_frequency_table(freq_path)

    speaker_means: dict[str, float] = {}
    if training:
        for s in speaker_stats_from_records(records):
            speaker_means[s.speaker_id] = s.mean_log_f0

    rng = random.Random(seed)
    rows = []
    training_rows = []
    for record in records:
        sequences = [sentence_to_sequence(s, spec) for s in record["sentences"]]
        if include_global:
            sequences = [
                dataclasses.replace(
                    s, global_token=global_token(extremity_score(s, table), spec)
                )
                for s in sequences
            ]
        rows.append((record["utterance_id"], serialize_sequences(sequences, include_global)))
        if training:
            mean = speaker_means.get(record["speaker"], float("nan"))
            if not math.isfinite(mean):
                raise SchemaError(
                    f"utterance {record['utterance_id']}: speaker {record['speaker']} "
                    "has no voiced frames for the speaker-F0 token"
                )
            training_rows.append(
                (
                    record["utterance_id"],
                    build_training_sequence(
                        sequences,
                        choose_instruction(rng=rng),
                        speaker_f0_token(mean, spec),
                        include_global,
                    ),
                )
            )

    outputs = [out / "tokens.jsonl", out / "tokens.txt"]
    write_token_jsonl(outputs[0], rows)
    write_token_text(outputs[1], rows)
    if training:
        outputs += [out / "training.jsonl", out / "training.txt"]
        write_token_jsonl(outputs[2], training_rows)
        write_token_text(outputs[3], training_rows)
    _write_summary(
        out,
        "tokenize",
        {
            "vectors": str(_req(args, "vectors")),
            "spec": str(_req(args, "spec")),
            "include_global": include_global,
            "training": training,
            "seed": seed,
        },
        outputs,
        {"utterances": len(rows)},
    )
    return 0


def cmd_freq_table(args) -> int:
    out = _out_dir(args)
    rows = read_token_jsonl(_req(args, "tokens"))
    jobs = max(int(_opt(args, "jobs", 1)), 1)
    alpha = float(_opt(args, "alpha", 1.0))
    include_global = bool(_opt(args, "include_global", False))

    streams = [stream for _, stream in rows]
    shards = [streams[i::jobs] for i in range(jobs)] if jobs > 1 else [streams]
    built = [build_frequency_table(shard, include_global, alpha) for shard in shards]
    table = built[0][0]
    skipped = built[0][1]
    for shard_table, shard_skipped in built[1:]:
        table = table.merge(shard_table)
        skipped += shard_skipped
    if skipped:
        log.warning("skipped %d unparseable streams", skipped)

    freq_path = out / "freq_table.json"
    write_frequency_table(freq_path, table)
    _write_summary(
        out,
        "freq-table",
        {"tokens": str(_req(args, "tokens")), "jobs": jobs, "alpha": alpha,
         "include_global": include_global},
        [freq_path],
        {"streams": len(rows), "skipped": skipped, "total_tokens": table.total},
    )
    return 0


def cmd_clean(args) -> int:
    out = _out_dir(args)
    records = read_jsonl(_req(args, "vectors"))
    spec = QuantizerSpec.load(_req(args, "spec"))
    threshold = float(_opt(args, "threshold", 0.2))
    min_seconds = float(_opt(args, "min_speaker_seconds", 3600.0))

    reports = [
        clean_utterance(r["utterance_id"], utterance_word_vectors(r), spec, threshold)
        for r in records
    ]
    stats = speaker_stats_from_records(records)
    kept_speakers = filter_speakers(stats, min_seconds)
    kept = [
        r["utterance_id"]
        for r, report in zip(records, reports)
        if not report.dropped and r["speaker"] in kept_speakers
    ]

    outputs = [out / "cleaning.jsonl", out / "speakers.csv", out / "kept.txt"]
    write_cleaning_reports(outputs[0], reports)
    write_speaker_stats(outputs[1], stats, kept_speakers)
    atomic_write(outputs[2], "".join(uid + "\n" for uid in kept))
    _write_summary(
        out,
        "clean",
        {"vectors": str(_req(args, "vectors")), "spec": str(_req(args, "spec")),
         "threshold": threshold, "min_speaker_seconds": min_seconds},
        outputs,
        {
            "utterances": len(records),
            "dropped_utterances": sum(r.dropped for r in reports),
            "speakers": len(stats),
            "excluded_speakers": len(stats) - len(kept_speakers),
            "kept_utterances": len(kept),
        },
    )
    return 0


def _phone_counts_lookup(vectors_path) -> dict[tuple[str, int], list[int]]:
    lookup: dict[tuple[str, int], list[int]] = {}
    for record in read_jsonl(vectors_path):
        for s_idx, sentence in enumerate(record["sentences"]):
            lookup[(record["utterance_id"], s_idx)] = [
                int(w["symbols"]) for w in sentence["words"]
            ]
    return lookup


def cmd_synth(args) -> int:
    out = _out_dir(args)
    rows = read_token_jsonl(_req(args, "tokens"))
    spec = QuantizerSpec.load(_req(args, "spec"))
    include_global = bool(_opt(args, "include_global", False))
    vectors_path = _opt(args, "vectors")
    lookup = _phone_counts_lookup(vectors_path) if vectors_path else {}

    plans_dir = out / "plans"
    plans_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    n_words = 0
    n_infeasible = 0
    for uid, stream in rows:
        sentences = parse_sequence(stream, include_global=include_global)
        entries = []
        for s_idx, sentence in enumerate(sentences):
            counts = lookup.get(
                (uid, s_idx),
                # fallback: roughly one phone per three letters
                [max(1, (len(item.word) + 2) // 3) for item in sentence.items],
            )
            plan = synth_sentence(sentence, spec, counts)
            entries.extend(plan.entries)
        merged = SynthPlan(entries=tuple(entries))
        n_words += sum(1 for e in merged.entries if hasattr(e, "feasible"))
        n_infeasible += sum(1 for e in merged.entries if getattr(e, "feasible", True) is False)
        path = plans_dir / f"{uid}.csv"
        atomic_write(path, merged.to_csv())
        outputs.append(path)
    _write_summary(
        out,
        "synth",
        {"tokens": str(_req(args, "tokens")), "spec": str(_req(args, "spec")),
         "include_global": include_global, "vectors": vectors_path and str(vectors_path)},
        outputs,
        {"utterances": len(rows), "words": n_words, "infeasible_words": n_infeasible},
    )
    return 0


def cmd_prompt(args) -> int:
    out = _out_dir(args)
    mode = _req(args, "mode")
    spk_bin = int(_req(args, "spk_bin"))
    instruction = _opt(args, "instruction")
    if instruction is None:
        instruction = choose_instruction(seed=int(_opt(args, "seed", 0)))
    include_global = bool(_opt(args, "include_global", False))

    if mode == "tts":
        text = _req(args, "text")
        stream = build_tts_prompt(segment_sentences(text), instruction, spk_bin)
    elif mode == "continuation":
        rows = read_token_jsonl(_req(args, "tokens"))
        wanted = _opt(args, "utterance")
        selected = None
        for uid, tokens in rows:
            if wanted is None or uid == wanted:
                selected = (uid, tokens)
                break
        if selected is None:
            raise SchemaError(f"utterance {wanted!r} not found in token file")
        reference = parse_sequence(selected[1], include_global=include_global)
        stream = build_continuation_prompt(reference, instruction, spk_bin, include_global)
    else:
        raise _UsageError(f"unknown prompt mode {mode!r} (tts or continuation)")

    outputs = [out / "prompt.jsonl", out / "prompt.txt"]
    write_token_jsonl(outputs[0], [("prompt", stream)])
    write_token_text(outputs[1], [("prompt", stream)])
    _write_summary(
        out,
        "prompt",
        {"mode": mode, "instruction": instruction, "spk_bin": spk_bin,
         "include_global": include_global},
        outputs,
        {"tokens": len(stream)},
    )
    return 0


# ---------------------------------------------------------------------------
# Evaluation subcommands
# ---------------------------------------------------------------------------


def cmd_eval_style(args) -> int:
    out = _out_dir(args)
    measures = read_measures_csv(_req(args, "measures"))
    pair_specs = _opt(args, "pair") or list(DEFAULT_STYLE_PAIRS)
    header = ["style_a", "style_b", "field", "mean", "std", "stderr", "n", "excluded"]
    rows = []
    results_json = {}
    for pair_spec in pair_specs:
        try:
            style_a, style_b, field = pair_spec.split(":")
        except ValueError:
            raise _UsageError(f"malformed --pair {pair_spec!r} (want styleA:styleB:field)")
        try:
            result = style_pair_diff(measures, (style_a, style_b), field)
        except ValueError as exc:
            log.warning("skipping pair %s: %s", pair_spec, exc)
            continue
        rows.append(_aggregate_row((style_a, style_b, field), result))
        results_json[f"{style_a}-{style_b}:{field}"] = _aggregate_json(result)
    if not rows:
        raise SchemaError("no style pair produced a result")
    outputs = [out / "style_results.csv", out / "style_results.json"]
    write_results_csv(outputs[0], header, rows)
    write_json(outputs[1], results_json)
    if _opt(args, "figures", True):
        from .plots import save_bar_figure

        figure = out / "style_pairs.png"
        save_bar_figure(
            figure,
            [f"{r[0]}-{r[1]}\n{r[2]}" for r in rows],
            [r[3] for r in rows],
            [0.0 if r[5] != r[5] else r[5] for r in rows],
            "Style pair differences",
            "difference (A - B)",
        )
        outputs.append(figure)
    _write_summary(out, "eval-style", {"measures": str(_req(args, "measures"))},
                   outputs, {"pairs": len(rows)})
    return 0


def cmd_eval_focus(args) -> int:
    out = _out_dir(args)
    records = read_focus_csv(_req(args, "focus"))
    summary = focus_aggregate(records)

    header = ["component_role", "condition", "mean_f0_hz", "std", "stderr", "n"]
    rows = []
    for role in FOCUS_ROLES:
        for condition in FOCUS_CONDITIONS:
            cell = summary.cells[(role, condition)]
            if cell is None:
                rows.append([role, condition, None, None, None, 0])
            else:
                rows.append([role, condition, cell.mean, cell.std, cell.stderr, cell.n])
    outputs = [out / "focus_cells.csv", out / "focus_checks.json"]
    write_results_csv(outputs[0], header, rows)
    write_json(
        outputs[1],
        {
            role: {
                "on_focus_stress": summary.on_focus_stress[role],
                "post_focus_compression": summary.post_focus_compression[role],
            }
            for role in FOCUS_ROLES
        },
    )
    counts = {"records": len(records)}

    slowdown_path = _opt(args, "slowdown")
    if slowdown_path:
        result, slowed = slowdown_metric(read_measures_csv(slowdown_path))
        path = out / "slowdown_results.json"
        write_json(path, {"symbol_rate_ratio": _aggregate_json(result), "slowed_down": slowed})
        outputs.append(path)
        counts["slowdown_passages"] = result.n

    if _opt(args, "figures", True):
        from .plots import save_focus_figure

        figure = out / "focus_f0.png"
        save_focus_figure(figure, summary)
        outputs.append(figure)
    _write_summary(out, "eval-focus", {"focus": str(_req(args, "focus")),
                                       "slowdown": slowdown_path and str(slowdown_path)},
                   outputs, counts)
    return 0


def cmd_eval_logprob(args) -> int:
    out = _out_dir(args)
    records = read_logprob_jsonl(_req(args, "records"))
    header = ["scope", "mean", "std", "stderr", "n", "excluded"]
    rows = []
    results_json = {}

    emphasis = emphasis_metric(records)
    rows.append(_aggregate_row(("emphasis",), emphasis))
    results_json["emphasis"] = _aggregate_json(emphasis)

    words_opt = _opt(args, "words")
    words = words_opt.split(",") if words_opt else sorted({r.word for r in records})
    for word in words:
        try:
            result = emotion_metric(records, word)
        except ValueError as exc:
            log.warning("skipping word %r: %s", word, exc)
            continue
        rows.append(_aggregate_row((f"word:{word}",), result))
        results_json[f"word:{word}"] = _aggregate_json(result)

    outputs = [out / "logprob_results.csv", out / "logprob_results.json"]
    write_results_csv(outputs[0], header, rows)
    write_json(outputs[1], results_json)
    if _opt(args, "figures", True):
        from .plots import save_bar_figure

        figure = out / "logprob_diffs.png"
        save_bar_figure(
            figure,
            [r[0] for r in rows],
            [r[1] for r in rows],
            [0.0 if r[3] != r[3] else r[3] for r in rows],
            "Log-probability differences (match - mismatch)",
            "mean log-prob difference",
        )
        outputs.append(figure)
    _write_summary(out, "eval-logprob", {"records": str(_req(args, "records"))},
                   outputs, {"rows": len(rows)})
    return 0


def cmd_eval_dialogue(args) -> int:
    out = _out_dir(args)
    measures = read_measures_csv(_req(args, "measures"))
    fields = _opt(args, "field") or list(DEFAULT_DIALOGUE_FIELDS)
    header = ["field", "mean", "std", "stderr", "n", "excluded"]
    rows = []
    results_json = {}
    for field in fields:
        try:
            result = dialogue_contrast(measures, field)
        except ValueError as exc:
            log.warning("skipping field %s: %s", field, exc)
            continue
        rows.append(_aggregate_row((field,), result))
        results_json[field] = _aggregate_json(result)
    if not rows:
        raise SchemaError("no dialogue field produced a result")
    outputs = [out / "dialogue_results.csv", out / "dialogue_results.json"]
    write_results_csv(outputs[0], header, rows)
    write_json(outputs[1], results_json)
    if _opt(args, "figures", True):
        from .plots import save_bar_figure

        figure = out / "dialogue_contrast.png"
        save_bar_figure(
            figure,
            [r[0] for r in rows],
            [r[1] for r in rows],
            [0.0 if r[3] != r[3] else r[3] for r in rows],
            "Second-round dialogue contrast",
            "difference (a - b)",
        )
        outputs.append(figure)
    _write_summary(out, "eval-dialogue", {"measures": str(_req(args, "measures"))},
                   outputs, {"fields": len(rows)})
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags take precedence")
    common.add_argument("--out", help="output directory")

    parser = argparse.ArgumentParser(
        prog="prosotok", description="Word-level prosody tokenization toolchain."
    )
    parser.add_argument("--version", action="version", version=f"prosotok {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    p = sub.add_parser("extract", parents=[common], help="extract word prosody vectors")
    p.add_argument("--manifest")
    p.add_argument("--jobs", type=int)
    p.add_argument("--dump-tracks", action=argparse.BooleanOptionalAction)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("calibrate", parents=[common], help="calibrate quantizer caps")
    p.add_argument("--vectors")
    p.add_argument("--min-samples", type=int)
    p.add_argument("--tokens", help="token JSONL for extremity calibration")
    p.add_argument("--freq-table", help="frequency table for extremity calibration")
    p.add_argument("--include-global", action=argparse.BooleanOptionalAction)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("tokenize", parents=[common], help="quantize vectors into token streams")
    p.add_argument("--vectors")
    p.add_argument("--spec")
    p.add_argument("--freq-table")
    p.add_argument("--include-global", action=argparse.BooleanOptionalAction)
    p.add_argument("--training", action=argparse.BooleanOptionalAction,
                   help="also emit instruction-prefixed training sequences")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("freq-table", parents=[common], help="build the token frequency table")
    p.add_argument("--tokens")
    p.add_argument("--jobs", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--include-global", action=argparse.BooleanOptionalAction)
    p.set_defaults(func=cmd_freq_table)

    p = sub.add_parser("clean", parents=[common], help="apply the data-cleaning filters")
    p.add_argument("--vectors")
    p.add_argument("--spec")
    p.add_argument("--threshold", type=float)
    p.add_argument("--min-speaker-seconds", type=float)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("synth", parents=[common], help="synthesize reference contour plans")
    p.add_argument("--tokens")
    p.add_argument("--spec")
    p.add_argument("--vectors", help="vectors JSONL supplying true phone counts")
    p.add_argument("--include-global", action=argparse.BooleanOptionalAction)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("prompt", parents=[common], help="build TTS or continuation prompts")
    p.add_argument("--mode", choices=("tts", "continuation"))
    p.add_argument("--text")
    p.add_argument("--tokens")
    p.add_argument("--utterance")
    p.add_argument("--instruction")
    p.add_argument("--seed", type=int)
    p.add_argument("--spk-bin", type=int)
    p.add_argument("--include-global", action=argparse.BooleanOptionalAction)
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("eval-style", parents=[common], help="style-pair differences")
    p.add_argument("--measures")
    p.add_argument("--pair", action="append", metavar="A:B:FIELD")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction)
    p.set_defaults(func=cmd_eval_style)

    p = sub.add_parser("eval-focus", parents=[common], help="contrastive focus aggregation")
    p.add_argument("--focus")
    p.add_argument("--slowdown", help="first/last quote measures CSV")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction)
    p.set_defaults(func=cmd_eval_focus)

    p = sub.add_parser("eval-logprob", parents=[common], help="log-probability difference metrics")
    p.add_argument("--records")
    p.add_argument("--words", help="comma-separated word list (default: all)")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction)
    p.set_defaults(func=cmd_eval_logprob)

    p = sub.add_parser("eval-dialogue", parents=[common], help="dialogue prosody contrast")
    p.add_argument("--measures")
    p.add_argument("--field", action="append")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction)
    p.set_defaults(func=cmd_eval_dialogue)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help(sys.stderr)
        return EXIT_USAGE

    config_path = getattr(args, "config", None)
    if config_path:
        try:
            args._config = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            log.error("cannot read config %s: %s", config_path, exc)
            return EXIT_SCHEMA
    else:
        args._config = {}

    try:
        return args.func(args)
    except _UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (SchemaError, ParseError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_SCHEMA
    except ProsotokError as exc:
        log.error("%s", exc)
        return EXIT_INTERNAL
    except Exception:  # pragma: no cover - defensive
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
