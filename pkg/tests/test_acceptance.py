"""Full-system acceptance checks.

One test per shipping criterion, each printing a single PASS/FAIL line with
the measured numbers, so a plain pytest run doubles as a release report.
The dataset-reproduction check needs real recordings and skips (visibly)
unless USCMED_DIR points at them.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from usvdetect.annotations import read_annotations
from usvdetect.cli import main
from usvdetect.enhance import clahe, morph_close, otsu_threshold
from usvdetect.evaluation import LabelVector, confusion, metrics
from usvdetect.stats import paired_t_test, regularized_incomplete_beta

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def report(capsys, criterion: str, passed: bool, detail: str) -> None:
    verdict = "PASS" if passed else "FAIL"
    with capsys.disabled():
        print(f"[acceptance] {criterion}: {verdict} ({detail})", flush=True)
    assert passed, f"{criterion}: {detail}"


# ---------------------------------------------------------------------------
# 1. synthetic end-to-end: precision/recall >= 0.95, onsets within 15 ms, < 10 s
# ---------------------------------------------------------------------------


def test_criterion_1_synthetic_end_to_end(capsys, tmp_path: Path) -> None:
    audio = tmp_path / "audio"
    wav = audio / "fixture.wav"
    starts = [0.5 + 0.9 * k for k in range(10)]  # multiples of the 0.5 ms frame grid
    argv = ["synth", "--output", str(wav), "--duration", "10.0", "--seed", "42"]
    for s in starts:
        argv += ["--chirp", f"{s},0.05,50000,70000"]  # amplitude 0.5 over 0.01 noise: ~31 dB
    t0 = time.perf_counter()
    assert main(argv) == 0
    pred = tmp_path / "pred"
    assert main(["detect", "--input", str(audio), "--output", str(pred),
                 "--config", str(CONFIG_DIR / "synthetic.json")]) == 0
    scores = tmp_path / "scores"
    assert main(["eval", "--pred", str(pred), "--gold", str(audio),
                 "--audio", str(audio), "--output", str(scores)]) == 0
    runtime = time.perf_counter() - t0

    with open(scores / "metrics.csv", newline="") as fh:
        row = next(iter(csv.DictReader(fh)))
    precision = float(row["precision"])
    recall = float(row["recall"])

    truth = read_annotations(audio / "fixture.truth.csv")
    found = read_annotations(pred / "fixture.annotations.csv")
    max_err = 0.0
    all_matched = len(found) == len(truth)
    for det in found:
        overlaps = [t for t in truth
                    if min(det.end_s, t.end_s) > max(det.start_s, t.start_s)]
        if len(overlaps) != 1:
            all_matched = False
            continue
        t = overlaps[0]
        max_err = max(max_err, abs(det.start_s - t.start_s), abs(det.end_s - t.end_s))

    passed = (precision >= 0.95 and recall >= 0.95 and all_matched
              and max_err <= 0.015 and runtime < 10.0)
    report(capsys, "1 synthetic end-to-end", passed,
           f"precision={precision:.4f} recall={recall:.4f} "
           f"{len(found)}/{len(truth)} boxes, max onset/offset error "
           f"{max_err * 1000:.2f} ms, runtime {runtime:.1f} s")


# ---------------------------------------------------------------------------
# 2. dataset reproduction (requires the released recordings, so usually skipped)
# ---------------------------------------------------------------------------


def test_criterion_2_dataset_reproduction(capsys, tmp_path: Path) -> None:
    dataset = os.environ.get("USCMED_DIR")
    if not dataset:
        with capsys.disabled():
            print("[acceptance] 2 dataset reproduction: SKIP "
                  "(set USCMED_DIR to the released recordings directory to run)",
                  flush=True)
        pytest.skip("USCMED_DIR not set")
    gold = os.environ.get("USCMED_GOLD_DIR", dataset)
    pred = tmp_path / "pred"
    assert main(["detect", "--input", dataset, "--output", str(pred),
                 "--config", str(CONFIG_DIR / "uscmed.json")]) == 0
    scores = tmp_path / "scores"
    assert main(["eval", "--pred", str(pred), "--gold", gold,
                 "--adapter", "uscmed", "--config", str(CONFIG_DIR / "uscmed.json"),
                 "--audio", dataset, "--output", str(scores)]) == 0
    with open(scores / "aggregate.csv", newline="") as fh:
        means = {r["metric"]: float(r["mean"]) for r in csv.DictReader(fh)}
    targets = {"precision": 0.99, "recall": 0.87, "f1": 0.93, "specificity": 1.00}
    deltas = {k: abs(means[k] - v) for k, v in targets.items()}
    passed = all(d <= 0.08 for d in deltas.values())
    detail = " ".join(f"{k}={means[k]:.3f}(target {v:.2f})" for k, v in targets.items())
    report(capsys, "2 dataset reproduction", passed, detail)


# ---------------------------------------------------------------------------
# 3. throughput: <= 0.06 s per audio second, single-threaded, on >= 60 s
# ---------------------------------------------------------------------------


def test_criterion_3_throughput(capsys, tmp_path: Path) -> None:
    audio = tmp_path / "audio"
    argv = ["synth", "--output", str(audio / "long.wav"), "--duration", "60.0",
            "--seed", "11"]
    for k in range(12):
        argv += ["--chirp", f"{0.8 + 4.9 * k},0.05,50000,70000"]
    assert main(argv) == 0
    bench_json = tmp_path / "bench.json"
    assert main(["bench", "--input", str(audio / "long.wav"),
                 "--output", str(bench_json)]) == 0
    bench = json.loads(bench_json.read_text())
    per_audio = bench["seconds_per_audio_second"]
    passed = bench["audio_seconds"] >= 60.0 and per_audio <= 0.06
    report(capsys, "3 throughput", passed,
           f"{per_audio:.4f} s per audio second over {bench['audio_seconds']:.0f} s "
           f"(budget 0.06)")


# ---------------------------------------------------------------------------
# 4. Otsu equals exhaustive brute force, including the constant image
# ---------------------------------------------------------------------------


def brute_force_otsu(image: np.ndarray) -> int:
    flat = image.ravel().astype(np.float64)
    n = flat.size
    best_t, best_var = 0, -1.0
    for t in range(256):
        low = flat[flat <= t]
        high = flat[flat > t]
        var = 0.0
        if low.size and high.size:
            w0, w1 = low.size / n, high.size / n
            var = w0 * w1 * (low.mean() - high.mean()) ** 2
        if var > best_var:  # strict: first maximizer wins ties
            best_t, best_var = t, var
    return best_t


def test_criterion_4_otsu_brute_force(capsys) -> None:
    rng = np.random.default_rng(1004)
    images = [rng.integers(0, 256, size=(32, 32)).astype(np.uint8) for _ in range(100)]
    images.append(np.zeros((32, 32), dtype=np.uint8))
    ok = 0
    for image in images:
        t, mask = otsu_threshold(image)
        if t == brute_force_otsu(image) and np.array_equal(mask, image > t):
            ok += 1
    report(capsys, "4 otsu brute force", ok == len(images),
           f"{ok}/{len(images)} images (100 random + constant)")


# ---------------------------------------------------------------------------
# 5. closing is extensive and idempotent on 1000 masks x 3 kernels
# ---------------------------------------------------------------------------


def test_criterion_5_closing_properties(capsys) -> None:
    rng = np.random.default_rng(1005)
    kernels = ((1, 3), (3, 3), (5, 5))
    ok = 0
    n_masks = 1000
    for _ in range(n_masks):
        mask = rng.random((64, 64)) < rng.uniform(0.02, 0.6)
        good = True
        for kernel in kernels:
            once = morph_close(mask, kernel)
            if not np.all(once >= mask):
                good = False
            if not np.array_equal(morph_close(once, kernel), once):
                good = False
        ok += good
    report(capsys, "5 closing extensivity+idempotence", ok == n_masks,
           f"{ok}/{n_masks} masks across kernels 1x3, 3x3, 5x5")


# ---------------------------------------------------------------------------
# 6. CLAHE with one tile and a non-binding clip equals global equalization
# ---------------------------------------------------------------------------


def test_criterion_6_clahe_degenerate_equivalence(capsys) -> None:
    rng = np.random.default_rng(1006)
    ok = 0
    n_images = 50
    for _ in range(n_images):
        h = int(rng.integers(16, 80))
        w = int(rng.integers(16, 80))
        image = rng.integers(0, 256, size=(h, w)).astype(np.uint8)
        out = clahe(image, clip_limit=1e6, tiles=(1, 1))
        hist = np.bincount(image.ravel(), minlength=256)
        mapping = np.floor(255.0 * np.cumsum(hist) / image.size + 0.5)
        expected = mapping[image]
        if np.max(np.abs(out.astype(int) - expected.astype(int))) <= 1:
            ok += 1
    report(capsys, "6 clahe degenerate equivalence", ok == n_images,
           f"{ok}/{n_images} images within +/-1 intensity level")


# ---------------------------------------------------------------------------
# 7. statistics oracles: known t-test values, beta identity, antisymmetry
# ---------------------------------------------------------------------------


def test_criterion_7_statistics_oracles(capsys) -> None:
    res = paired_t_test([1.0, 2.0, 3.0], [0.0, 0.0, 0.0])
    t_err = abs(res.t - 3.4641016151377544)
    # closed form for 2 degrees of freedom: p = 1 - t / sqrt(t^2 + 2)
    p_expected = 1.0 - res.t / math.sqrt(res.t * res.t + 2.0)
    p_err = abs(res.p - p_expected)
    known_ok = t_err <= 1e-4 and abs(res.p - 0.0742) <= 1e-4 and p_err <= 1e-12

    grid = np.linspace(0.05, 0.95, 10)
    shapes = (0.3, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 15.0, 40.0)
    worst = 0.0
    for a in shapes:
        for b in shapes:
            for x in grid:
                total = (regularized_incomplete_beta(a, b, float(x))
                         + regularized_incomplete_beta(b, a, float(1.0 - x)))
                worst = max(worst, abs(total - 1.0))
    identity_ok = worst <= 1e-12

    rng = np.random.default_rng(1007)
    swap_ok = True
    for _ in range(100):
        n = int(rng.integers(2, 30))
        a = rng.normal(0, 1, n)
        b = rng.normal(0.3, 1.2, n)
        fwd = paired_t_test(a, b)
        rev = paired_t_test(b, a)
        if rev.t != -fwd.t or rev.p != fwd.p:
            swap_ok = False
    passed = known_ok and identity_ok and swap_ok
    report(capsys, "7 statistics oracles", passed,
           f"t={res.t:.6f} p={res.p:.6f}, beta identity worst {worst:.1e} on 10x10x10 grid, "
           f"swap antisymmetry {'exact' if swap_ok else 'BROKEN'}")


# ---------------------------------------------------------------------------
# 8. metric identities + exact agreement with per-sample brute force
# ---------------------------------------------------------------------------


def random_label_vector(rng: np.random.Generator, n: int) -> LabelVector:
    runs = []
    pos = 0
    while pos < n and rng.random() < 0.75:
        s = pos + int(rng.integers(0, 12))
        if s >= n:
            break
        e = min(s + 1 + int(rng.integers(0, 20)), n)
        runs.append((s, e))
        pos = e + 1
    return LabelVector(n_samples=n, rate=1.0, runs=tuple(runs))


def test_criterion_8_metric_identities(capsys) -> None:
    rng = np.random.default_rng(1008)
    n_pairs = 1000
    ok = 0
    for _ in range(n_pairs):
        n = int(rng.integers(1, 400))
        pred = random_label_vector(rng, n)
        act = random_label_vector(rng, n)
        c = confusion(pred, act)
        r = metrics(c)
        good = c.total == n
        p_arr, a_arr = pred.to_bool_array(), act.to_bool_array()
        good &= (c.tp == int(np.sum(p_arr & a_arr)) and c.fp == int(np.sum(p_arr & ~a_arr))
                 and c.fn == int(np.sum(~p_arr & a_arr)) and c.tn == int(np.sum(~p_arr & ~a_arr)))
        if c.tp and c.tp + c.fp and c.tp + c.fn:
            hm = 2 * r.precision * r.recall / (r.precision + r.recall)
            good &= abs(r.f1 - hm) < 1e-12
        swapped = metrics(confusion(act, pred))
        good &= swapped.precision == r.recall and swapped.recall == r.precision
        good &= all(0.0 <= r.value(name) <= 1.0
                    for name in ("precision", "recall", "f1", "specificity"))
        ok += good
    report(capsys, "8 metric identities", ok == n_pairs,
           f"{ok}/{n_pairs} random label-vector pairs, brute-force counts exact")


# ---------------------------------------------------------------------------
# 9. two detect runs over the same 3-file fixture are byte-identical
# ---------------------------------------------------------------------------


def test_criterion_9_detect_determinism(capsys, tmp_path: Path) -> None:
    audio = tmp_path / "audio"
    for seed, name in enumerate(("a", "b", "c"), start=21):
        assert main(["synth", "--output", str(audio / f"{name}.wav"),
                     "--duration", "1.0", "--seed", str(seed),
                     "--chirp", "0.3,0.05,50000,70000"]) == 0
    run1 = tmp_path / "run1"
    run2 = tmp_path / "run2"
    for out in (run1, run2):
        assert main(["detect", "--input", str(audio), "--output", str(out)]) == 0
    identical = sum(
        (run1 / f"{name}.annotations.csv").read_bytes()
        == (run2 / f"{name}.annotations.csv").read_bytes()
        for name in ("a", "b", "c")
    )
    report(capsys, "9 detect determinism", identical == 3,
           f"{identical}/3 annotation CSVs byte-identical across runs")
