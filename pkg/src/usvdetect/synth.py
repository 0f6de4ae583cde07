"""Synthetic test signals: linear chirps over white Gaussian noise.

Used for self-contained pipeline checks and benchmarking; the generator also
reports the exact ground-truth annotations of the chirps it placed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .annotations import AnnotationSet, UsvAnnotation
from .audio import AudioRecording


@dataclass(frozen=True)
class ChirpSpec:
    """One linear frequency sweep: where it sits and what it spans."""

    start_s: float
    duration_s: float
    f0_hz: float
    f1_hz: float
    amplitude: float = 0.5

    def __post_init__(self) -> None:
        if self.start_s < 0 or self.duration_s <= 0:
            raise ValueError(f"chirp needs start >= 0 and duration > 0, got {self}")
        if self.f0_hz <= 0 or self.f1_hz <= 0:
            raise ValueError(f"chirp frequencies must be positive, got {self}")
        if self.amplitude <= 0:
            raise ValueError(f"chirp amplitude must be positive, got {self.amplitude}")


def synthesize(duration_s: float, chirps: list[ChirpSpec], rate: int = 250_000,
               noise_rms: float = 0.01, seed: int = 0,
               recording_id: str = "synthetic") -> tuple[AudioRecording, AnnotationSet]:
    """Generate chirps over white noise plus their ground-truth annotations.

    Each chirp sweeps linearly from f0_hz to f1_hz across its duration; its
    truth annotation spans [start, start + duration] (clamped to the recording
    end) with the swept band as [low, high]. Noise is zero-mean Gaussian with the given RMS, drawn
    from a seeded generator so output is reproducible.
    """
    if duration_s <= 0:
        raise ValueError(f"duration_s must be positive, got {duration_s}")
    if noise_rms < 0:
        raise ValueError(f"noise_rms must be >= 0, got {noise_rms}")
    n = int(round(duration_s * rate))
    rng = np.random.default_rng(seed)
    samples = rng.normal(0.0, noise_rms, n) if noise_rms > 0 else np.zeros(n)
    truth = []
    for c in chirps:
        nyquist = rate / 2
        if max(c.f0_hz, c.f1_hz) >= nyquist:
            raise ValueError(f"chirp sweep reaches {max(c.f0_hz, c.f1_hz)} Hz, "
                             f"at or above Nyquist ({nyquist} Hz)")
        i0 = int(round(c.start_s * rate))
        m = int(round(c.duration_s * rate))
        if i0 + m > n:
            raise ValueError(f"chirp at {c.start_s}s runs past the {duration_s}s recording")
        tau = np.arange(m) / rate
        sweep_rate = (c.f1_hz - c.f0_hz) / (2.0 * c.duration_s)
        phase = 2.0 * np.pi * (c.f0_hz * tau + sweep_rate * tau * tau)
        samples[i0:i0 + m] += c.amplitude * np.sin(phase)
        truth.append(UsvAnnotation(
            start_s=c.start_s,
            end_s=min(c.start_s + c.duration_s, n / rate),
            low_hz=min(c.f0_hz, c.f1_hz),
            high_hz=max(c.f0_hz, c.f1_hz),
        ))
    truth.sort(key=lambda a: a.start_s)
    recording = AudioRecording(samples=samples, rate=rate)
    annotation_set = AnnotationSet(recording_id=recording_id, duration_s=n / rate,
                                   annotations=tuple(truth))
    return recording, annotation_set
