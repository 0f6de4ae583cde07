"""Annotation types, the canonical CSV format, and gold-label adapters.

Canonical CSV schema (UTF-8, LF line endings):

    recording_id,start_s,end_s,low_hz,high_hz,label

Times are written with 6 decimals, frequencies with 1; absent frequency
bounds are empty fields. Third-party gold label files are ingested through
small declarative column-mapping adapters rather than per-format parsers.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

CSV_HEADER = ["recording_id", "start_s", "end_s", "low_hz", "high_hz", "label"]


@dataclass(frozen=True)
class UsvAnnotation:
    """One detected or annotated call: a time interval, optionally banded in Hz."""

    start_s: float
    end_s: float
    low_hz: float | None = None
    high_hz: float | None = None
    label: str = ""

    def __post_init__(self) -> None:
        if not self.end_s > self.start_s:
            raise ValueError(
                f"annotation must have end > start, got [{self.start_s}, {self.end_s}]"
            )
        if self.start_s < 0:
            raise ValueError(f"annotation start must be >= 0, got {self.start_s}")
        if (self.low_hz is None) != (self.high_hz is None):
            raise ValueError("low_hz and high_hz must be both present or both absent")
        if self.low_hz is not None and self.low_hz > self.high_hz:
            raise ValueError(f"low_hz {self.low_hz} > high_hz {self.high_hz}")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    @property
    def bandwidth_hz(self) -> float:
        if self.low_hz is None:
            return 0.0
        return self.high_hz - self.low_hz


@dataclass(frozen=True)
class AnnotationSet:
    """All annotations of one recording, with the recording's duration.

    Annotations are kept sorted by (start, end); construction rejects any
    annotation that ends past the recording duration.
    """

    recording_id: str
    duration_s: float
    annotations: tuple[UsvAnnotation, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.duration_s < 0:
            raise ValueError(f"duration_s must be >= 0, got {self.duration_s}")
        ordered = tuple(sorted(self.annotations, key=lambda a: (a.start_s, a.end_s)))
        for a in ordered:
            if a.end_s > self.duration_s:
                raise ValueError(f"annotation end {a.end_s} exceeds recording "
                                 f"duration {self.duration_s}")
        object.__setattr__(self, "annotations", ordered)

    def __len__(self) -> int:
        return len(self.annotations)

    def __iter__(self):
        return iter(self.annotations)


def _format_row(recording_id: str, a: UsvAnnotation) -> list[str]:
    return [
        recording_id,
        f"{a.start_s:.6f}",
        f"{a.end_s:.6f}",
        "" if a.low_hz is None else f"{a.low_hz:.1f}",
        "" if a.high_hz is None else f"{a.high_hz:.1f}",
        a.label,
    ]


def annotations_to_csv_bytes(annotation_set: AnnotationSet) -> bytes:
    """Serialize to canonical CSV bytes (UTF-8, LF)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for a in annotation_set:
        writer.writerow(_format_row(annotation_set.recording_id, a))
    return buf.getvalue().encode("utf-8")


def write_annotations(annotation_set: AnnotationSet, path: str | Path) -> None:
    """Write an annotation set as canonical CSV."""
    Path(path).write_bytes(annotations_to_csv_bytes(annotation_set))


def _parse_float(text: str, what: str, path: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"{path}, line {line}: cannot parse {what} from {text!r}") from None


def read_annotations(path: str | Path, duration_s: float | None = None) -> AnnotationSet:
    """Read a canonical CSV file back into an AnnotationSet.

    The recording id comes from the rows (they must all agree; an empty file
    falls back to the file stem). Unless given, duration is the latest end
    time seen.
    """
    p = str(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{p}: empty file, expected canonical header") from None
        if header != CSV_HEADER:
            raise ValueError(f"{p}: unexpected header {header!r}, expected {CSV_HEADER!r}")
        rec_id: str | None = None
        annotations: list[UsvAnnotation] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise ValueError(f"{p}, line {line_no}: expected {len(CSV_HEADER)} fields, "
                                 f"got {len(row)}")
            rid, start, end, low, high, label = row
            if rec_id is None:
                rec_id = rid
            elif rid != rec_id:
                raise ValueError(f"{p}, line {line_no}: mixed recording ids "
                                 f"({rec_id!r} and {rid!r})")
            annotations.append(UsvAnnotation(
                start_s=_parse_float(start, "start_s", p, line_no),
                end_s=_parse_float(end, "end_s", p, line_no),
                low_hz=None if low == "" else _parse_float(low, "low_hz", p, line_no),
                high_hz=None if high == "" else _parse_float(high, "high_hz", p, line_no),
                label=label,
            ))
    if rec_id is None:
        rec_id = Path(path).stem
        if rec_id.endswith(".annotations"):
            rec_id = rec_id[: -len(".annotations")]
    if duration_s is None:
        duration_s = max((a.end_s for a in annotations), default=0.0)
    return AnnotationSet(recording_id=rec_id, duration_s=duration_s,
                         annotations=tuple(annotations))


@dataclass(frozen=True)
class GoldAdapter:
    """Column mapping for a third-party gold annotation table.

    Columns are named (when has_header) or 0-based indices (when not). Times
    must be in seconds, frequencies in Hz. Columns not mapped to a field are
    preserved in the label as ';'-joined key=value pairs.
    """

    start_column: str | int
    end_column: str | int
    low_column: str | int | None = None
    high_column: str | int | None = None
    delimiter: str = ","
    has_header: bool = True

    def to_dict(self) -> dict:
        d = {
            "start_column": self.start_column,
            "end_column": self.end_column,
            "delimiter": self.delimiter,
            "has_header": self.has_header,
        }
        if self.low_column is not None:
            d["low_column"] = self.low_column
        if self.high_column is not None:
            d["high_column"] = self.high_column
        return d


def _column_index(column: str | int, names: list[str] | None, path: str) -> int:
    if isinstance(column, int) or (isinstance(column, str) and column.isdigit() and names is None):
        idx = int(column)
        return idx
    if names is None:
        raise ValueError(f"{path}: adapter names column {column!r} but the file has no header")
    try:
        return names.index(column)
    except ValueError:
        raise ValueError(f"{path}: column {column!r} not found; file has {names!r}") from None


def read_gold(path: str | Path, adapter: GoldAdapter, recording_id: str | None = None,
              duration_s: float | None = None) -> AnnotationSet:
    """Read a gold annotation table through a column-mapping adapter.

    Malformed rows fail loudly with the file name and line number; zero-length
    intervals (start == end) are rejected the same way.
    """
    p = str(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=adapter.delimiter)
        rows = list(reader)
    names: list[str] | None = None
    first_data_line = 1
    if adapter.has_header:
        if not rows:
            raise ValueError(f"{p}: empty file, expected a header row")
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        first_data_line = 2
    start_idx = _column_index(adapter.start_column, names, p)
    end_idx = _column_index(adapter.end_column, names, p)
    low_idx = None if adapter.low_column is None else _column_index(adapter.low_column, names, p)
    high_idx = None if adapter.high_column is None else _column_index(adapter.high_column, names, p)
    mapped = {start_idx, end_idx} | ({low_idx} if low_idx is not None else set()) \
        | ({high_idx} if high_idx is not None else set())

    annotations: list[UsvAnnotation] = []
    for offset, row in enumerate(rows):
        line_no = first_data_line + offset
        if not row or all(c.strip() == "" for c in row):
            continue
        needed = max(start_idx, end_idx, low_idx or 0, high_idx or 0)
        if len(row) <= needed:
            raise ValueError(f"{p}, line {line_no}: expected at least {needed + 1} fields, "
                             f"got {len(row)}")
        start = _parse_float(row[start_idx].strip(), "start time", p, line_no)
        end = _parse_float(row[end_idx].strip(), "end time", p, line_no)
        if end == start:
            raise ValueError(f"{p}, line {line_no}: zero-length interval (start == end == {start})")
        if end < start:
            raise ValueError(f"{p}, line {line_no}: end {end} before start {start}")
        low = high = None
        if low_idx is not None and high_idx is not None:
            low = _parse_float(row[low_idx].strip(), "low frequency", p, line_no)
            high = _parse_float(row[high_idx].strip(), "high frequency", p, line_no)
        extras = []
        for i, cell in enumerate(row):
            if i in mapped:
                continue
            key = names[i] if names is not None and i < len(names) else str(i)
            extras.append(f"{key}={cell.strip()}")
        annotations.append(UsvAnnotation(start_s=start, end_s=end, low_hz=low, high_hz=high,
                                         label=";".join(extras)))
    if recording_id is None:
        recording_id = Path(path).stem
    if duration_s is None:
        duration_s = max((a.end_s for a in annotations), default=0.0)
    return AnnotationSet(recording_id=recording_id, duration_s=duration_s,
                         annotations=tuple(annotations))
