"""Command-line interface.

Subcommands:

  detect   run the detection pipeline over WAV files, writing annotation CSVs
  eval     score detections against gold annotations, per recording and aggregate
  compare  paired t-tests between two per-recording metrics tables
  bench    per-stage timing and seconds-per-audio-second throughput
  render   spectrogram PNG with annotation boxes
  synth    synthetic chirp recordings with ground-truth annotations

Exit codes: 0 success, 1 at least one input failed (others still processed),
2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .annotations import (AnnotationSet, GoldAdapter, read_annotations, read_gold,
                          write_annotations)
from .audio import load_wav, wav_info, write_wav
from .config import (PipelineConfig, config_from_dict, config_hash, config_to_dict,
                     load_config)
from .evaluation import METRIC_NAMES, aggregate, confusion, metrics, rasterize
from .pipeline import detect_file, detect_recording, recording_id_for
from .render import RENDER_STAGES, render_spectrogram
from .stats import paired_t_test
from .synth import ChirpSpec, synthesize

ANNOTATION_SUFFIX = ".annotations.csv"
RUN_MANIFEST = "run.json"

METRICS_HEADER = ["recording_id", "tp", "fp", "fn", "tn",
                  "precision", "recall", "f1", "specificity", "degenerate"]


class UsageError(Exception):
    """A problem with arguments or configuration (exit code 2)."""


def _load_pipeline_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    try:
        return load_config(path)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _collect_wavs(input_path: str) -> list[Path]:
    p = Path(input_path)
    if p.is_file():
        return [p]
    if p.is_dir():
        files = sorted(q for q in p.iterdir() if q.suffix.lower() == ".wav")
        if not files:
            raise UsageError(f"no .wav files found in {p}")
        return files
    raise UsageError(f"input path {p} does not exist")


# --- detect -----------------------------------------------------------------

def _detect_one(path_str: str, config_data: dict, out_dir_str: str) -> dict:
    """Process one file; returns a manifest entry. Safe to run in a worker."""
    path = Path(path_str)
    out_path = Path(out_dir_str) / (path.stem + ANNOTATION_SUFFIX)
    entry = {"input": str(path), "output": None, "recording_id": path.stem,
             "duration_s": None, "sample_rate": None, "n_annotations": None,
             "elapsed_s": None, "error": None}
    t0 = time.perf_counter()
    try:
        config = config_from_dict(config_data)
        info = wav_info(path)
        result = detect_file(path, config)
        write_annotations(result.annotation_set, out_path)
        entry.update(
            output=str(out_path),
            duration_s=info.duration_s,
            sample_rate=info.rate,
            n_annotations=len(result.annotation_set),
        )
    except Exception as exc:  # collect and keep going with the other files
        entry["error"] = str(exc)
    entry["elapsed_s"] = round(time.perf_counter() - t0, 6)
    return entry


def cmd_detect(args: argparse.Namespace) -> int:
    config = _load_pipeline_config(args.config)
    inputs = _collect_wavs(args.input)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.jobs < 1:
        raise UsageError(f"--jobs must be >= 1, got {args.jobs}")
    config_data = config_to_dict(config)
    t0 = time.perf_counter()
    if args.jobs == 1 or len(inputs) == 1:
        entries = [_detect_one(str(p), config_data, str(out_dir)) for p in inputs]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            entries = list(pool.map(_detect_one, [str(p) for p in inputs],
                                    [config_data] * len(inputs),
                                    [str(out_dir)] * len(inputs)))
    wall = time.perf_counter() - t0
    entries.sort(key=lambda e: e["input"])
    failed = [e for e in entries if e["error"] is not None]
    manifest = {
        "command": "detect",
        "config_hash": config_hash(config),
        "config": config_data,
        "jobs": args.jobs,
        "n_inputs": len(inputs),
        "n_failed": len(failed),
        "wall_s": round(wall, 6),
        "files": entries,
    }
    (out_dir / RUN_MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                        encoding="utf-8")
    for e in failed:
        print(f"failed: {e['input']}: {e['error']}", file=sys.stderr)
    print(f"detect: {len(inputs) - len(failed)}/{len(inputs)} file(s) ok, "
          f"{wall:.2f} s -> {out_dir}")
    return 1 if failed else 0


# --- eval -------------------------------------------------------------------

def _pred_files(pred_dir: Path) -> list[Path]:
    files = sorted(p for p in pred_dir.iterdir() if p.name.endswith(ANNOTATION_SUFFIX))
    if not files:
        raise UsageError(f"no *{ANNOTATION_SUFFIX} files found in {pred_dir}")
    return files


def _gold_index(gold_path: Path) -> dict[str, Path]:
    """Map recording ids to gold files (by stem, tolerating .annotations suffixes)."""
    if gold_path.is_file():
        candidates = [gold_path]
    else:
        candidates = sorted(p for p in gold_path.iterdir()
                            if p.is_file() and p.name != RUN_MANIFEST)
    index: dict[str, Path] = {}
    for p in candidates:
        stem = p.stem
        for suffix in (".annotations", ".truth"):
            if stem.endswith(suffix):
                stem = stem[: -len(suffix)]
        index.setdefault(stem, p)
    return index


def _run_manifest_entries(pred_dir: Path) -> dict[str, dict]:
    manifest_path = pred_dir / RUN_MANIFEST
    if not manifest_path.is_file():
        return {}
    data = json.loads(manifest_path.read_text(encoding="utf-8"))
    return {e.get("recording_id"): e for e in data.get("files", [])
            if e.get("error") is None}


def _sample_grid(rid: str, audio_index: dict[str, Path], manifest: dict[str, dict],
                 fallback_rate: int, pred: AnnotationSet, gold: AnnotationSet
                 ) -> tuple[int, float]:
    """Pick (n_samples, rate) for rasterization: audio file, manifest, else spans."""
    if rid in audio_index:
        info = wav_info(audio_index[rid])
        return info.n_samples, float(info.rate)
    entry = manifest.get(rid)
    if entry and entry.get("duration_s") and entry.get("sample_rate"):
        rate = float(entry["sample_rate"])
        return int(round(entry["duration_s"] * rate)), rate
    duration = max(pred.duration_s, gold.duration_s)
    return int(math.ceil(duration * fallback_rate)), float(fallback_rate)


def _format_metric(x: float) -> str:
    return f"{x:.9f}"


def cmd_eval(args: argparse.Namespace) -> int:
    config = _load_pipeline_config(args.config)
    pred_dir = Path(args.pred)
    if not pred_dir.is_dir():
        raise UsageError(f"prediction directory {pred_dir} does not exist")
    gold_path = Path(args.gold)
    if not gold_path.exists():
        raise UsageError(f"gold path {gold_path} does not exist")
    adapter: GoldAdapter | None = None
    if args.adapter != "canonical":
        if args.adapter not in config.adapters:
            known = ["canonical", *sorted(config.adapters)]
            raise UsageError(f"unknown adapter {args.adapter!r}; known: {', '.join(known)}")
        adapter = config.adapters[args.adapter]
    audio_index: dict[str, Path] = {}
    if args.audio is not None:
        audio_dir = Path(args.audio)
        if not audio_dir.is_dir():
            raise UsageError(f"audio directory {audio_dir} does not exist")
        audio_index = {p.stem: p for p in audio_dir.iterdir() if p.suffix.lower() == ".wav"}
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)

    gold_index = _gold_index(gold_path)
    manifest = _run_manifest_entries(pred_dir)
    fallback_rate = config.spectrogram.canonical_rate

    rows = []
    reports = []
    failures = []
    for pred_path in _pred_files(pred_dir):
        rid = pred_path.name[: -len(ANNOTATION_SUFFIX)]
        try:
            if rid not in gold_index:
                raise ValueError(f"no gold annotations found for {rid!r}")
            pred_set = read_annotations(pred_path)
            if adapter is None:
                gold_set = read_annotations(gold_index[rid])
            else:
                gold_set = read_gold(gold_index[rid], adapter, recording_id=rid)
            n_samples, rate = _sample_grid(rid, audio_index, manifest, fallback_rate,
                                           pred_set, gold_set)
            report = metrics(confusion(rasterize(pred_set, rate, n_samples),
                                       rasterize(gold_set, rate, n_samples)))
        except (ValueError, OSError) as exc:
            failures.append((rid, str(exc)))
            print(f"failed: {rid}: {exc}", file=sys.stderr)
            continue
        reports.append(report)
        c = report.counts
        rows.append([rid, c.tp, c.fp, c.fn, c.tn,
                     _format_metric(report.precision), _format_metric(report.recall),
                     _format_metric(report.f1), _format_metric(report.specificity),
                     ";".join(report.degenerate)])

    metrics_path = out_dir / "metrics.csv"
    with open(metrics_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_HEADER)
        writer.writerows(rows)
    if reports:
        agg = aggregate(reports)
        with open(out_dir / "aggregate.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["metric", "mean", "sd", "n"])
            for name in METRIC_NAMES:
                writer.writerow([name, _format_metric(agg.means[name]),
                                 _format_metric(agg.sds[name]), agg.n])
        summary = ", ".join(f"{name}={agg.means[name]:.3f}" for name in METRIC_NAMES)
        print(f"eval: {len(reports)} recording(s): {summary} -> {out_dir}")
    if failures:
        return 1
    if not reports:
        raise UsageError("no recordings could be evaluated")
    return 0


# --- compare ----------------------------------------------------------------

def _read_metrics_table(path: Path) -> dict[str, dict[str, float]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "recording_id" not in reader.fieldnames:
                raise UsageError(f"{path}: not a metrics table (missing recording_id column)")
            out = {}
            for row in reader:
                out[row["recording_id"]] = {name: float(row[name]) for name in METRIC_NAMES}
            return out
    except OSError as exc:
        raise UsageError(str(exc)) from None
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{path}: malformed metrics table ({exc})") from None


def cmd_compare(args: argparse.Namespace) -> int:
    table_a = _read_metrics_table(Path(args.a))
    table_b = _read_metrics_table(Path(args.b))
    common = sorted(set(table_a) & set(table_b))
    if len(common) < 2:
        raise UsageError(f"need at least 2 recordings common to both tables, got {len(common)}")
    out_path = Path(args.output)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "n", "mean_a", "mean_b", "mean_diff", "t", "p", "dof"])
        for name in METRIC_NAMES:
            va = [table_a[r][name] for r in common]
            vb = [table_b[r][name] for r in common]
            res = paired_t_test(va, vb)
            writer.writerow([name, len(common),
                             _format_metric(sum(va) / len(va)),
                             _format_metric(sum(vb) / len(vb)),
                             _format_metric(res.mean_diff),
                             repr(res.t), repr(res.p), res.dof])
            print(f"compare {name}: n={len(common)} t={res.t:.4f} p={res.p:.6f}")
    print(f"compare: wrote {out_path}")
    return 0


# --- bench ------------------------------------------------------------------

def cmd_bench(args: argparse.Namespace) -> int:
    config = _load_pipeline_config(args.config)
    inputs = _collect_wavs(args.input)
    stage_totals: dict[str, float] = {}
    audio_seconds = 0.0
    n_annotations = 0
    t0 = time.perf_counter()
    for path in inputs:
        result = detect_file(path, config)
        audio_seconds += result.annotation_set.duration_s
        n_annotations += len(result.annotation_set)
        for stage, dt in result.timings_s.items():
            stage_totals[stage] = stage_totals.get(stage, 0.0) + dt
    wall = time.perf_counter() - t0
    if audio_seconds <= 0:
        raise UsageError("benchmark input contains no audio")
    per_audio = wall / audio_seconds
    report = {
        "command": "bench",
        "config_hash": config_hash(config),
        "n_files": len(inputs),
        "audio_seconds": round(audio_seconds, 6),
        "wall_s": round(wall, 6),
        "seconds_per_audio_second": per_audio,
        "n_annotations": n_annotations,
        "stages_s": {k: round(v, 6) for k, v in sorted(stage_totals.items())},
    }
    order = ("load", "resample", "spectrogram", "enhance", "detect")
    for stage in order:
        if stage in stage_totals:
            print(f"  {stage:<12s} {stage_totals[stage]:8.3f} s")
    print(f"bench: {audio_seconds:.1f} s of audio in {wall:.3f} s "
          f"-> {per_audio:.4f} s per audio second (single-threaded)")
    if args.output is not None:
        Path(args.output).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")
    return 0


# --- render -----------------------------------------------------------------

def cmd_render(args: argparse.Namespace) -> int:
    config = _load_pipeline_config(args.config)
    path = Path(args.input)
    if not path.is_file():
        raise UsageError(f"input file {path} does not exist")
    result = detect_file(path, config)
    annotations = None
    if args.annotations is not None:
        annotations = read_annotations(args.annotations)
    render_spectrogram(result, args.output, stage=args.stage, annotations=annotations)
    print(f"render: wrote {args.output}")
    return 0


# --- synth ------------------------------------------------------------------

def _parse_chirp(text: str) -> ChirpSpec:
    parts = text.split(",")
    if len(parts) not in (4, 5):
        raise UsageError(f"--chirp expects start,duration,f0,f1[,amplitude], got {text!r}")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"--chirp has a non-numeric field: {text!r}") from None
    try:
        return ChirpSpec(start_s=values[0], duration_s=values[1], f0_hz=values[2],
                         f1_hz=values[3], amplitude=values[4] if len(values) == 5 else 0.5)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_synth(args: argparse.Namespace) -> int:
    chirps = [_parse_chirp(c) for c in args.chirp]
    out_path = Path(args.output)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    try:
        recording, truth = synthesize(duration_s=args.duration, chirps=chirps,
                                      rate=args.rate, noise_rms=args.noise, seed=args.seed,
                                      recording_id=out_path.stem)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_wav(out_path, recording, encoding="pcm16")
    truth_path = Path(args.truth) if args.truth is not None \
        else out_path.with_suffix("").with_suffix(".truth.csv")
    write_annotations(truth, truth_path)
    print(f"synth: wrote {out_path} ({args.duration:.1f} s at {args.rate} Hz, "
          f"{len(chirps)} chirp(s)) and {truth_path}")
    return 0


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="usvdetect",
                                     description="Ultrasonic vocalization detection "
                                                 "and evaluation toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("detect", help="detect calls in WAV files")
    p.add_argument("--input", required=True, help="WAV file or directory of WAV files")
    p.add_argument("--output", required=True, help="output directory for annotation CSVs")
    p.add_argument("--config", default=None, help="pipeline config JSON")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes (default 1)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="score detections against gold annotations")
    p.add_argument("--pred", required=True, help="directory of *.annotations.csv predictions")
    p.add_argument("--gold", required=True, help="gold annotation file or directory")
    p.add_argument("--adapter", default="canonical",
                   help="gold format adapter name from the config ('canonical' for the "
                        "native CSV format)")
    p.add_argument("--audio", default=None,
                   help="directory of source WAVs, used for exact sample grids")
    p.add_argument("--config", default=None, help="pipeline config JSON (adapters, rate)")
    p.add_argument("--output", required=True, help="output directory for metrics CSVs")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="paired t-tests between two metrics tables")
    p.add_argument("--a", required=True, help="first metrics.csv")
    p.add_argument("--b", required=True, help="second metrics.csv")
    p.add_argument("--output", required=True, help="output comparison CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="measure pipeline throughput")
    p.add_argument("--input", required=True, help="WAV file or directory")
    p.add_argument("--config", default=None, help="pipeline config JSON")
    p.add_argument("--output", default=None, help="optional JSON report path")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("render", help="render a spectrogram PNG with detections")
    p.add_argument("--input", required=True, help="WAV file")
    p.add_argument("--output", required=True, help="output PNG path")
    p.add_argument("--stage", default="raw", choices=RENDER_STAGES,
                   help="which pipeline stage to show (default raw)")
    p.add_argument("--annotations", default=None,
                   help="annotation CSV to overlay (default: boxes detected now)")
    p.add_argument("--config", default=None, help="pipeline config JSON")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("synth", help="generate a synthetic chirp recording")
    p.add_argument("--output", required=True, help="output WAV path")
    p.add_argument("--truth", default=None,
                   help="ground-truth CSV path (default: <output>.truth.csv)")
    p.add_argument("--duration", type=float, default=10.0, help="length in seconds")
    p.add_argument("--rate", type=int, default=250_000, help="sample rate in Hz")
    p.add_argument("--noise", type=float, default=0.01, help="white noise RMS")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--chirp", action="append", default=[],
                   help="start,duration,f0,f1[,amplitude] in s/Hz; repeatable")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
