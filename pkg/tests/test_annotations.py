"""Annotation model, canonical CSV round trips, and gold-label adapters."""

from __future__ import annotations

from pathlib import Path

import pytest

from usvdetect.annotations import (CSV_HEADER, AnnotationSet, GoldAdapter, UsvAnnotation,
                                   annotations_to_csv_bytes, read_annotations, read_gold,
                                   write_annotations)

# ---------------------------------------------------------------------------
# UsvAnnotation / AnnotationSet
# ---------------------------------------------------------------------------


def test_annotation_derived_properties() -> None:
    a = UsvAnnotation(start_s=0.5, end_s=1.005, low_hz=15_000.0, high_hz=15_050.0)
    assert a.duration_s == pytest.approx(0.505)
    assert a.bandwidth_hz == pytest.approx(50.0)
    assert UsvAnnotation(start_s=0.0, end_s=1.0).bandwidth_hz == 0.0


def test_annotation_validation() -> None:
    with pytest.raises(ValueError, match="end > start"):
        UsvAnnotation(start_s=1.0, end_s=1.0)
    with pytest.raises(ValueError, match="end > start"):
        UsvAnnotation(start_s=1.0, end_s=0.5)
    with pytest.raises(ValueError, match=">= 0"):
        UsvAnnotation(start_s=-0.1, end_s=0.5)
    with pytest.raises(ValueError, match="both present or both absent"):
        UsvAnnotation(start_s=0.0, end_s=1.0, low_hz=20_000.0)
    with pytest.raises(ValueError, match="low_hz"):
        UsvAnnotation(start_s=0.0, end_s=1.0, low_hz=30_000.0, high_hz=20_000.0)


def test_annotation_set_is_a_sized_iterable() -> None:
    anns = (UsvAnnotation(start_s=0.0, end_s=1.0), UsvAnnotation(start_s=2.0, end_s=3.0))
    s = AnnotationSet(recording_id="r", duration_s=4.0, annotations=anns)
    assert len(s) == 2
    assert tuple(s) == anns
    with pytest.raises(ValueError, match="duration_s"):
        AnnotationSet(recording_id="r", duration_s=-1.0)


def test_annotation_set_sorts_by_start_then_end() -> None:
    anns = (
        UsvAnnotation(start_s=2.0, end_s=3.0),
        UsvAnnotation(start_s=0.5, end_s=2.5),
        UsvAnnotation(start_s=0.5, end_s=1.0),
    )
    s = AnnotationSet(recording_id="r", duration_s=4.0, annotations=anns)
    assert [(a.start_s, a.end_s) for a in s] == [(0.5, 1.0), (0.5, 2.5), (2.0, 3.0)]


def test_annotation_set_rejects_end_past_duration() -> None:
    with pytest.raises(ValueError, match="exceeds recording duration"):
        AnnotationSet(recording_id="r", duration_s=1.0,
                      annotations=(UsvAnnotation(start_s=0.5, end_s=1.5),))


# ---------------------------------------------------------------------------
# canonical CSV
# ---------------------------------------------------------------------------

FIXTURE_SET = AnnotationSet(
    recording_id="rec1",
    duration_s=2.0,
    annotations=(
        UsvAnnotation(start_s=0.5, end_s=1.005, low_hz=15_000.0, high_hz=15_050.0),
        UsvAnnotation(start_s=1.25, end_s=1.5, label="usv"),
    ),
)

FIXTURE_BYTES = (
    b"recording_id,start_s,end_s,low_hz,high_hz,label\n"
    b"rec1,0.500000,1.005000,15000.0,15050.0,\n"
    b"rec1,1.250000,1.500000,,,usv\n"
)


def test_csv_bytes_match_frozen_fixture() -> None:
    assert annotations_to_csv_bytes(FIXTURE_SET) == FIXTURE_BYTES


def test_write_read_round_trip(tmp_path: Path) -> None:
    out = tmp_path / "rec1.annotations.csv"
    write_annotations(FIXTURE_SET, out)
    back = read_annotations(out, duration_s=2.0)
    assert back == FIXTURE_SET


def test_write_is_a_fixpoint_of_read(tmp_path: Path) -> None:
    out = tmp_path / "a.csv"
    write_annotations(FIXTURE_SET, out)
    again = tmp_path / "b.csv"
    write_annotations(read_annotations(out, duration_s=2.0), again)
    assert out.read_bytes() == again.read_bytes()


def test_read_infers_duration_from_last_end(tmp_path: Path) -> None:
    path = tmp_path / "infer_duration.csv"
    path.write_bytes(FIXTURE_BYTES)
    assert read_annotations(path).duration_s == pytest.approx(1.5)


def test_read_rejects_wrong_header(tmp_path: Path) -> None:
    p = tmp_path / "bad.csv"
    p.write_text("start,end\n0,1\n")
    with pytest.raises(ValueError, match="unexpected header"):
        read_annotations(p)


def test_read_rejects_mixed_recording_ids(tmp_path: Path) -> None:
    p = tmp_path / "mixed.csv"
    p.write_text("recording_id,start_s,end_s,low_hz,high_hz,label\n"
                 "a,0.0,1.0,,,\n"
                 "b,2.0,3.0,,,\n")
    with pytest.raises(ValueError, match="line 3.*mixed recording ids"):
        read_annotations(p)


def test_read_rejects_unparsable_number_with_line(tmp_path: Path) -> None:
    p = tmp_path / "nan.csv"
    p.write_text("recording_id,start_s,end_s,low_hz,high_hz,label\n"
                 "a,0.0,1.0,,,\n"
                 "a,oops,2.0,,,\n")
    with pytest.raises(ValueError, match="line 3: cannot parse start_s from 'oops'"):
        read_annotations(p)


def test_read_rejects_short_row(tmp_path: Path) -> None:
    p = tmp_path / "short.csv"
    p.write_text("recording_id,start_s,end_s,low_hz,high_hz,label\na,0.0,1.0\n")
    with pytest.raises(ValueError, match="line 2: expected 6 fields, got 3"):
        read_annotations(p)


def test_empty_annotation_file_uses_stem_id(tmp_path: Path) -> None:
    p = tmp_path / "quiet.annotations.csv"
    write_annotations(AnnotationSet(recording_id="quiet", duration_s=3.0), p)
    back = read_annotations(p)
    assert back.recording_id == "quiet"
    assert len(back) == 0
    assert back.duration_s == 0.0  # no rows to infer from


def test_read_rejects_empty_file(tmp_path: Path) -> None:
    p = tmp_path / "empty.csv"
    p.write_bytes(b"")
    with pytest.raises(ValueError, match="empty file"):
        read_annotations(p)


# ---------------------------------------------------------------------------
# gold adapters
# ---------------------------------------------------------------------------


def test_gold_named_columns(tmp_path: Path) -> None:
    p = tmp_path / "gold.tsv"
    p.write_text("Begin Time (s)\tEnd Time (s)\tLow Freq (Hz)\tHigh Freq (Hz)\n"
                 "0.5\t0.6\t40000\t60000\n"
                 "1.0\t1.2\t30000\t50000\n")
    adapter = GoldAdapter(start_column="Begin Time (s)", end_column="End Time (s)",
                          low_column="Low Freq (Hz)", high_column="High Freq (Hz)",
                          delimiter="\t")
    got = read_gold(p, adapter)
    assert got.recording_id == "gold"
    assert [a.start_s for a in got] == [0.5, 1.0]
    assert got.annotations[0].low_hz == 40_000.0
    assert got.duration_s == pytest.approx(1.2)


def test_gold_index_columns_without_header(tmp_path: Path) -> None:
    p = tmp_path / "plain.csv"
    p.write_text("0.1,0.2\n0.4,0.5\n")
    got = read_gold(p, GoldAdapter(start_column=0, end_column=1, has_header=False))
    assert [(a.start_s, a.end_s) for a in got] == [(0.1, 0.2), (0.4, 0.5)]
    assert all(a.low_hz is None for a in got)


def test_gold_extras_preserved_in_label(tmp_path: Path) -> None:
    p = tmp_path / "extra.csv"
    p.write_text("start,end,call_type,score\n0.1,0.2,trill,0.93\n")
    got = read_gold(p, GoldAdapter(start_column="start", end_column="end"))
    assert got.annotations[0].label == "call_type=trill;score=0.93"


def test_gold_missing_column_names_file_columns(tmp_path: Path) -> None:
    p = tmp_path / "miss.csv"
    p.write_text("a,b\n0.1,0.2\n")
    with pytest.raises(ValueError, match="column 'start' not found.*'a', 'b'"):
        read_gold(p, GoldAdapter(start_column="start", end_column="b"))


def test_gold_named_column_without_header_fails(tmp_path: Path) -> None:
    p = tmp_path / "nohdr.csv"
    p.write_text("0.1,0.2\n")
    with pytest.raises(ValueError, match="no header"):
        read_gold(p, GoldAdapter(start_column="start", end_column="end", has_header=False))


def test_gold_zero_length_interval_rejected_with_line(tmp_path: Path) -> None:
    p = tmp_path / "zero.csv"
    p.write_text("start,end\n0.5,0.5\n")
    with pytest.raises(ValueError, match="line 2: zero-length interval"):
        read_gold(p, GoldAdapter(start_column="start", end_column="end"))


def test_gold_reversed_interval_rejected_with_line(tmp_path: Path) -> None:
    p = tmp_path / "rev.csv"
    p.write_text("start,end\n1.0,0.5\n")
    with pytest.raises(ValueError, match="line 2: end 0.5 before start 1.0"):
        read_gold(p, GoldAdapter(start_column="start", end_column="end"))


def test_gold_bad_number_rejected_with_line(tmp_path: Path) -> None:
    p = tmp_path / "badnum.csv"
    p.write_text("start,end\n0.1,0.2\nx,0.4\n")
    with pytest.raises(ValueError, match="line 3: cannot parse start time from 'x'"):
        read_gold(p, GoldAdapter(start_column="start", end_column="end"))


def test_gold_short_row_rejected_with_line(tmp_path: Path) -> None:
    p = tmp_path / "shortrow.csv"
    p.write_text("start,end\n0.1\n")
    with pytest.raises(ValueError, match="line 2: expected at least 2 fields, got 1"):
        read_gold(p, GoldAdapter(start_column="start", end_column="end"))


def test_gold_blank_lines_skipped(tmp_path: Path) -> None:
    p = tmp_path / "blank.csv"
    p.write_text("start,end\n0.1,0.2\n\n0.4,0.5\n")
    got = read_gold(p, GoldAdapter(start_column="start", end_column="end"))
    assert len(got) == 2


def test_gold_explicit_recording_id_and_duration(tmp_path: Path) -> None:
    p = tmp_path / "named.csv"
    p.write_text("start,end\n0.1,0.2\n")
    got = read_gold(p, GoldAdapter(start_column="start", end_column="end"),
                    recording_id="session7", duration_s=10.0)
    assert got.recording_id == "session7"
    assert got.duration_s == 10.0


def test_adapter_round_trips_through_dict() -> None:
    adapter = GoldAdapter(start_column="s", end_column="e", low_column=2, high_column=3,
                          delimiter="\t", has_header=False)
    assert GoldAdapter(**adapter.to_dict()) == adapter
