"""Spectrogram rendering: PNG images with annotation boxes overlaid."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .annotations import AnnotationSet
from .pipeline import DetectionResult

RENDER_STAGES = ("raw", "cleaned", "mask")


def render_spectrogram(result: DetectionResult, path: str | Path, stage: str = "raw",
                       annotations: AnnotationSet | None = None) -> None:
    """Render one pipeline stage to a PNG with green annotation rectangles.

    Stages: 'raw' (the magnitude spectrogram), 'cleaned' (median-filtered,
    8-bit normalized) or 'mask' (the final binary mask). Annotations default
    to the ones the detection run produced.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.patches import Rectangle

    if stage not in RENDER_STAGES:
        raise ValueError(f"stage must be one of {RENDER_STAGES}, got {stage!r}")
    spec = result.spectrogram
    if stage == "raw":
        image = spec.values
        cmap = "viridis"
    elif stage == "cleaned":
        image = result.stages.normalized
        cmap = "viridis"
    else:
        image = result.stages.closed.astype(np.uint8)
        cmap = "gray"

    p = spec.params
    t_max = (spec.n_frames - 1) * p.hop / p.canonical_rate + p.window_size / p.canonical_rate
    extent = (0.0, t_max, spec.freq_of_bin(0) / 1000.0, spec.freq_of_bin(spec.n_bins - 1) / 1000.0)
    fig, ax = plt.subplots(figsize=(12, 5))
    ax.imshow(image, origin="lower", aspect="auto", cmap=cmap,
              extent=extent, interpolation="nearest")
    boxes = annotations if annotations is not None else result.annotation_set
    for a in boxes:
        low = a.low_hz if a.low_hz is not None else p.band_low_hz
        high = a.high_hz if a.high_hz is not None else p.band_high_hz
        ax.add_patch(Rectangle((a.start_s, low / 1000.0), a.duration_s,
                               (high - low) / 1000.0,
                               fill=False, edgecolor="lime", linewidth=1.2))
    ax.set_xlabel("time (s)")
    ax.set_ylabel("frequency (kHz)")
    ax.set_title(f"{boxes.recording_id} ({stage})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
