"""Sample-level evaluation of annotations against gold labels.

Annotations are rasterized onto the audio sample grid: sample i is positive
iff some annotation covers time i/rate (half-open intervals). Label vectors
are stored as sorted non-overlapping runs, which keeps 250 kHz audio cheap to
handle while staying exactly equivalent to a per-sample boolean array.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .annotations import AnnotationSet

METRIC_NAMES = ("precision", "recall", "f1", "specificity")


@dataclass(frozen=True)
class LabelVector:
    """Per-sample binary labels as sorted, merged, half-open [start, end) runs."""

    n_samples: int
    rate: float
    runs: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.n_samples < 0:
            raise ValueError(f"n_samples must be >= 0, got {self.n_samples}")
        prev_end = -1
        for s, e in self.runs:
            if not 0 <= s < e <= self.n_samples:
                raise ValueError(f"run [{s}, {e}) outside [0, {self.n_samples})")
            if s <= prev_end:
                raise ValueError("runs must be sorted and non-overlapping")
            prev_end = e

    @property
    def positive_count(self) -> int:
        return sum(e - s for s, e in self.runs)

    def to_bool_array(self) -> np.ndarray:
        out = np.zeros(self.n_samples, dtype=bool)
        for s, e in self.runs:
            out[s:e] = True
        return out


def _merge_runs(runs: list[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    runs = sorted(r for r in runs if r[0] < r[1])
    merged: list[tuple[int, int]] = []
    for s, e in runs:
        if merged and s <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], e))
        else:
            merged.append((s, e))
    return tuple(merged)


def rasterize(annotation_set: AnnotationSet, rate: float, n_samples: int) -> LabelVector:
    """Rasterize annotations to per-sample labels.

    Sample i is positive iff some annotation has start <= i/rate < end, i.e.
    the integer run [ceil(start*rate), ceil(end*rate)). Overlapping
    annotations union. Runs reaching past n_samples are clamped with a
    warning.
    """
    runs: list[tuple[int, int]] = []
    clamped = 0
    for a in annotation_set:
        s = int(np.ceil(a.start_s * rate))
        e = int(np.ceil(a.end_s * rate))
        if e > n_samples:
            clamped += 1
            e = n_samples
        s = max(s, 0)
        if s < e:
            runs.append((s, e))
    if clamped:
        warnings.warn(
            f"{annotation_set.recording_id}: {clamped} annotation(s) extend past the "
            f"{n_samples}-sample grid and were clamped",
            stacklevel=2,
        )
    return LabelVector(n_samples=n_samples, rate=rate, runs=_merge_runs(runs))


@dataclass(frozen=True)
class ConfusionCounts:
    """Sample counts of the 2x2 prediction/actual table."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def _intersection_length(a: tuple[tuple[int, int], ...], b: tuple[tuple[int, int], ...]) -> int:
    total = 0
    i = j = 0
    while i < len(a) and j < len(b):
        s = max(a[i][0], b[j][0])
        e = min(a[i][1], b[j][1])
        if s < e:
            total += e - s
        if a[i][1] <= b[j][1]:
            i += 1
        else:
            j += 1
    return total


def confusion(predicted: LabelVector, actual: LabelVector) -> ConfusionCounts:
    """Tally the sample-level confusion counts of two label vectors."""
    if predicted.n_samples != actual.n_samples:
        raise ValueError(
            f"label vectors disagree on length: {predicted.n_samples} vs {actual.n_samples}"
        )
    tp = _intersection_length(predicted.runs, actual.runs)
    fp = predicted.positive_count - tp
    fn = actual.positive_count - tp
    tn = predicted.n_samples - tp - fp - fn
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


@dataclass(frozen=True)
class MetricsReport:
    """Precision/recall/F1/specificity with their confusion counts.

    Ratios whose denominator is zero are reported as 0.0 and listed in
    ``degenerate`` by name.
    """

    counts: ConfusionCounts
    precision: float
    recall: float
    f1: float
    specificity: float
    degenerate: tuple[str, ...] = ()

    def value(self, metric: str) -> float:
        if metric not in METRIC_NAMES:
            raise ValueError(f"unknown metric {metric!r}; expected one of {METRIC_NAMES}")
        return getattr(self, metric)


def metrics(counts: ConfusionCounts) -> MetricsReport:
    """Compute precision, recall, F1 and specificity from confusion counts."""
    degenerate = []

    def ratio(name: str, num: int, den: int) -> float:
        if den == 0:
            degenerate.append(name)
            return 0.0
        return num / den

    precision = ratio("precision", counts.tp, counts.tp + counts.fp)
    recall = ratio("recall", counts.tp, counts.tp + counts.fn)
    f1 = ratio("f1", 2 * counts.tp, 2 * counts.tp + counts.fp + counts.fn)
    specificity = ratio("specificity", counts.tn, counts.tn + counts.fp)
    return MetricsReport(counts=counts, precision=precision, recall=recall, f1=f1,
                         specificity=specificity, degenerate=tuple(degenerate))


@dataclass(frozen=True)
class AggregateReport:
    """Mean and sample standard deviation of each metric over recordings."""

    n: int
    means: dict[str, float]
    sds: dict[str, float]


def aggregate(reports: list[MetricsReport]) -> AggregateReport:
    """Aggregate per-recording metrics: mean and sample SD (n-1 denominator).

    With a single report every SD is 0.0.
    """
    if not reports:
        raise ValueError("aggregate requires at least one report")
    means = {}
    sds = {}
    for name in METRIC_NAMES:
        vals = np.array([r.value(name) for r in reports], dtype=np.float64)
        means[name] = float(vals.mean())
        sds[name] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
    return AggregateReport(n=len(reports), means=means, sds=sds)
