"""Region extraction from binary masks and conversion to call annotations.

Masks are indexed [freq_bin, frame]. Foreground pixels are grouped into
8-connected components; each component's bounding box becomes a candidate
call, widened from frame centers to full window extents in time and by half a
bin in frequency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .annotations import UsvAnnotation
from .spectrogram import Spectrogram

_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


@dataclass(frozen=True)
class Region:
    """Bounding box of one connected foreground component, in pixel indices."""

    frame_min: int
    frame_max: int
    bin_min: int
    bin_max: int
    pixel_count: int

    def __post_init__(self) -> None:
        if self.frame_min > self.frame_max or self.bin_min > self.bin_max:
            raise ValueError(f"degenerate region bounds {self}")
        area = (self.frame_max - self.frame_min + 1) * (self.bin_max - self.bin_min + 1)
        if not 1 <= self.pixel_count <= area:
            raise ValueError(f"pixel_count {self.pixel_count} outside [1, {area}]")


@dataclass(frozen=True)
class DetectionConfig:
    """Post-detection filtering: minimum extent thresholds and gap merging.

    merge_gap_s = 0 disables merging entirely.
    """

    min_duration_s: float = 0.005
    min_bandwidth_hz: float = 0.0
    merge_gap_s: float = 0.0

    def __post_init__(self) -> None:
        if self.min_duration_s < 0:
            raise ValueError(f"min_duration_s must be >= 0, got {self.min_duration_s}")
        if self.min_bandwidth_hz < 0:
            raise ValueError(f"min_bandwidth_hz must be >= 0, got {self.min_bandwidth_hz}")
        if self.merge_gap_s < 0:
            raise ValueError(f"merge_gap_s must be >= 0, got {self.merge_gap_s}")


def extract_regions(mask: np.ndarray) -> list[Region]:
    """Bounding boxes of the 8-connected components of a boolean mask.

    Regions are ordered by (frame_min, bin_min). The component pixel counts
    sum to the mask's foreground count.
    """
    mask = np.asarray(mask)
    if mask.dtype != np.bool_:
        raise ValueError(f"extract_regions expects a boolean mask, got {mask.dtype}")
    labels, n = ndimage.label(mask, structure=_EIGHT_CONNECTED)
    if n == 0:
        return []
    counts = np.bincount(labels.ravel())
    regions = []
    for label_idx, slices in enumerate(ndimage.find_objects(labels), start=1):
        rows, cols = slices
        regions.append(Region(
            frame_min=int(cols.start),
            frame_max=int(cols.stop - 1),
            bin_min=int(rows.start),
            bin_max=int(rows.stop - 1),
            pixel_count=int(counts[label_idx]),
        ))
    regions.sort(key=lambda r: (r.frame_min, r.bin_min))
    return regions


def regions_to_annotations(regions: list[Region], spec: Spectrogram) -> list[UsvAnnotation]:
    """Convert pixel-space regions to time/frequency annotations.

    Times widen frame centers to full window extents: start is the left edge
    of the first frame's window, end the right edge of the last frame's.
    Frequencies widen bin centers by half the bin spacing, clamped to the
    analysis band. Hence start >= 0 and end <= the recording duration.
    """
    p = spec.params
    rate = p.canonical_rate
    half_df = p.freq_resolution_hz / 2.0
    out = []
    for r in regions:
        start = r.frame_min * p.hop / rate
        end = (r.frame_max * p.hop + p.window_size) / rate
        end = min(end, spec.duration_s)
        low = max(spec.freq_of_bin(r.bin_min) - half_df, p.band_low_hz)
        high = min(spec.freq_of_bin(r.bin_max) + half_df, p.band_high_hz)
        out.append(UsvAnnotation(start_s=start, end_s=end, low_hz=low, high_hz=high))
    return out


def _merge_pair(a: UsvAnnotation, b: UsvAnnotation) -> UsvAnnotation:
    if a.low_hz is None or b.low_hz is None:
        low = high = None
    else:
        low = min(a.low_hz, b.low_hz)
        high = max(a.high_hz, b.high_hz)
    return UsvAnnotation(start_s=min(a.start_s, b.start_s), end_s=max(a.end_s, b.end_s),
                         low_hz=low, high_hz=high, label=a.label or b.label)


def filter_and_merge(annotations: list[UsvAnnotation],
                     config: DetectionConfig | None = None) -> list[UsvAnnotation]:
    """Drop too-short/too-narrow annotations, then merge near-adjacent ones.

    Annotations with duration < min_duration_s or bandwidth < min_bandwidth_hz
    are dropped. With merge_gap_s > 0, annotations whose time gap is at most
    merge_gap_s are replaced by their hull; surviving gaps all exceed the
    threshold, so the operation is idempotent.
    """
    cfg = config if config is not None else DetectionConfig()
    kept = [a for a in annotations
            if a.duration_s >= cfg.min_duration_s and a.bandwidth_hz >= cfg.min_bandwidth_hz]
    kept.sort(key=lambda a: (a.start_s, a.end_s))
    if cfg.merge_gap_s <= 0 or len(kept) < 2:
        return kept
    merged: list[UsvAnnotation] = []
    for a in kept:
        if merged and a.start_s - merged[-1].end_s <= cfg.merge_gap_s:
            merged[-1] = _merge_pair(merged[-1], a)
        else:
            merged.append(a)
    return merged
