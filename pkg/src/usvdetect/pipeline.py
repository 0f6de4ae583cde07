"""End-to-end detection of one recording, with per-stage timing."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

from .annotations import AnnotationSet
from .audio import AudioRecording, load_wav, resample
from .config import PipelineConfig
from .detect import extract_regions, filter_and_merge, regions_to_annotations
from .enhance import EnhanceStages, enhance_stages
from .spectrogram import Spectrogram, compute_spectrogram


@dataclass(frozen=True)
class DetectionResult:
    """Everything a detection run produces for one recording."""

    annotation_set: AnnotationSet
    spectrogram: Spectrogram
    stages: EnhanceStages
    timings_s: dict[str, float] = field(default_factory=dict)

    @property
    def total_time_s(self) -> float:
        return sum(self.timings_s.values())


def recording_id_for(path: str | Path) -> str:
    return Path(path).stem


def detect_recording(recording: AudioRecording, config: PipelineConfig | None = None,
                     recording_id: str = "recording") -> DetectionResult:
    """Run resample -> spectrogram -> enhancement -> regions -> annotations."""
    cfg = config if config is not None else PipelineConfig()
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    recording = resample(recording, cfg.spectrogram.canonical_rate)
    timings["resample"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    spec = compute_spectrogram(recording, cfg.spectrogram)
    timings["spectrogram"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    stages = enhance_stages(spec.values, cfg.enhancement)
    timings["enhance"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    regions = extract_regions(stages.closed)
    annotations = filter_and_merge(regions_to_annotations(regions, spec), cfg.detection)
    timings["detect"] = time.perf_counter() - t0

    annotation_set = AnnotationSet(recording_id=recording_id,
                                   duration_s=recording.duration_s,
                                   annotations=tuple(annotations))
    return DetectionResult(annotation_set=annotation_set, spectrogram=spec,
                           stages=stages, timings_s=timings)


def detect_file(path: str | Path, config: PipelineConfig | None = None) -> DetectionResult:
    """Load a WAV file and run the detection pipeline on it."""
    cfg = config if config is not None else PipelineConfig()
    t0 = time.perf_counter()
    recording = load_wav(path, channel=cfg.channel)
    load_time = time.perf_counter() - t0
    result = detect_recording(recording, cfg, recording_id=recording_id_for(path))
    result.timings_s["load"] = load_time
    return result
