"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to see them on success).

Criteria cover the golden-patch restoration tolerance, the bit-exact
pass-through of known pixels, solver and variogram oracle equivalence,
the two-image four-mask benchmark study, metric reference values,
benchmark determinism, and desk-scale runtime.
"""

import csv
import time

import numpy as np
import pytest
from PIL import Image

from krigefill import (
    DamageMask,
    InpaintConfig,
    MaskSpec,
    RasterImage,
    VariogramModel,
    assemble_system,
    empirical_variogram,
    generate_mask,
    inpaint,
    mse,
    psnr,
    solve_weights,
)
from krigefill.cli import main as cli_main

from imagery import REFERENCE_BLOCK, REFERENCE_SCRATCH, noise_array, smooth_array, textured_array
from oracles import brute_force_variogram, gauss_solve


def report(number: int, label: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" [{detail}]" if detail else ""
    print(f"ACCEPTANCE {number} ({label}): {status}{suffix}")
    assert ok, f"criterion {number} failed ({label}) {suffix}"


def test_criterion_1_reference_patch_restoration():
    image = RasterImage(REFERENCE_BLOCK)
    mask = DamageMask(REFERENCE_SCRATCH)
    start = time.perf_counter()
    restored, _ = inpaint(image, mask)
    elapsed = time.perf_counter() - start
    err = REFERENCE_BLOCK.astype(int) - restored.plane(0).astype(int)
    damaged_err = err[REFERENCE_SCRATCH]
    max_abs = int(np.abs(damaged_err).max())
    rmse = float(np.sqrt((damaged_err.astype(float) ** 2).mean()))
    ok = max_abs <= 5 and rmse <= 2.0 and elapsed < 1.0
    report(
        1,
        "golden patch restoration",
        ok,
        f"max|err|={max_abs} rmse={rmse:.3f} elapsed={elapsed*1000:.0f}ms",
    )


def test_criterion_2_exact_interpolation_bit_identical():
    rng = np.random.default_rng(2024)
    failures = 0
    for trial in range(50):
        height = int(rng.integers(16, 257))
        width = int(rng.integers(16, 257))
        channels = 3 if trial % 7 == 0 else 1
        if channels == 1:
            arr = noise_array(height, width, seed=trial)
        else:
            arr = np.stack([noise_array(height, width, seed=trial * 3 + c) for c in range(3)])
        image = RasterImage(arr)
        flags = rng.random((height, width)) < rng.uniform(0.01, 0.3)
        flags[int(rng.integers(height)), int(rng.integers(width))] = False
        mask = DamageMask(flags)
        restored, _ = inpaint(image, mask)
        for c in range(channels):
            if not np.array_equal(
                restored.plane(c)[~flags], image.plane(c)[~flags]
            ):
                failures += 1
    report(2, "known pixels bit-identical", failures == 0, f"{failures} dirty runs / 50")


def test_criterion_3_solver_matches_independent_oracle():
    rng = np.random.default_rng(7)
    worst_weight_gap = 0.0
    worst_sum_gap = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 13))
        flat = rng.choice(30 * 30, size=n, replace=False)
        rows, cols = np.divmod(flat, 30)
        points = np.column_stack([rows, cols, rng.uniform(0, 255, n)]).astype(float)
        nugget = float(rng.uniform(0, 5))
        model = VariogramModel(
            "spherical",
            nugget=nugget,
            sill=nugget + float(rng.uniform(1, 100)),
            range=float(rng.uniform(1, 15)),
        )
        target = (float(rng.uniform(0, 30)), float(rng.uniform(0, 30)))
        system = assemble_system(points, target, model)
        solution = solve_weights(system)
        oracle = gauss_solve(system.matrix, system.rhs)
        worst_weight_gap = max(worst_weight_gap, float(np.abs(solution.weights - oracle[:n]).max()))
        worst_sum_gap = max(worst_sum_gap, abs(float(solution.weights.sum()) - 1.0))
    ok = worst_weight_gap < 1e-8 and worst_sum_gap < 1e-10
    report(
        3,
        "kriging solver oracle equivalence",
        ok,
        f"max weight gap={worst_weight_gap:.2e} max sum gap={worst_sum_gap:.2e}",
    )


def test_criterion_4_variogram_matches_brute_force():
    rng = np.random.default_rng(11)
    worst = 0.0
    mismatched_bins = 0
    for _ in range(100):
        n = int(rng.integers(2, 201))
        flat = rng.choice(60 * 60, size=n, replace=False)
        rows, cols = np.divmod(flat, 60)
        samples = np.column_stack([rows, cols, rng.integers(0, 256, n)]).astype(float)
        max_lag = float(rng.uniform(4, 40))
        bin_width = float(rng.choice([0.5, 1.0, 2.0]))
        expected = brute_force_variogram(samples, max_lag, bin_width)
        if not expected:
            continue
        emp = empirical_variogram(samples, max_lag, bin_width)
        if len(emp.lags) != len(expected):
            mismatched_bins += 1
            continue
        for lag, gamma, count in emp.bins:
            g_exp, n_exp = expected[round(lag / bin_width)]
            if count != n_exp:
                mismatched_bins += 1
            worst = max(worst, abs(gamma - g_exp))
    ok = mismatched_bins == 0 and worst <= 1e-12
    report(
        4,
        "variogram oracle equivalence",
        ok,
        f"bin mismatches={mismatched_bins} max gamma gap={worst:.2e}",
    )


@pytest.fixture(scope="module")
def study(tmp_path_factory):
    """Full 512x512 two-image, four-category benchmark through the CLI."""
    root = tmp_path_factory.mktemp("study")
    corpus = root / "corpus"
    corpus.mkdir()
    Image.fromarray(smooth_array(512, 512)).save(corpus / "smooth.png")
    Image.fromarray(textured_array(512, 512)).save(corpus / "textured.png")
    out_dir = root / "bench"
    start = time.perf_counter()
    code = cli_main(["benchmark", "--corpus", str(corpus), "--out", str(out_dir), "--seed", "17"])
    elapsed = time.perf_counter() - start
    assert code == 0
    with (out_dir / "benchmark.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    return rows, elapsed


def test_criterion_5_benchmark_study(study):
    rows, elapsed = study
    cells = {(r["image"], r["category"]): r for r in rows}
    problems = []
    if len(rows) != 8:
        problems.append(f"expected 8 cells, got {len(rows)}")
    for (image, category), row in cells.items():
        if float(row["restored_psnr"]) <= float(row["damaged_psnr"]):
            problems.append(f"{image}/{category}: restored did not beat damaged")
    for category in ("thick_scratch", "thin_scratch"):
        value = float(cells[("smooth.png", category)]["restored_psnr"])
        if value < 30.0:
            problems.append(f"smooth/{category}: {value:.2f} dB < 30")
    for image in ("smooth.png", "textured.png"):
        thin = float(cells[(image, "thin_scratch")]["restored_psnr"])
        heavy = float(cells[(image, "heavy_text")]["restored_psnr"])
        if thin < heavy:
            problems.append(f"{image}: thin {thin:.2f} < heavy {heavy:.2f}")
    if elapsed >= 300.0:
        problems.append(f"grid took {elapsed:.0f}s")
    report(
        5,
        "benchmark study ordering and quality",
        not problems,
        "; ".join(problems) if problems else f"grid={elapsed:.0f}s",
    )


def test_criterion_6_metric_reference_values():
    f = RasterImage(np.full((2, 2), 10, dtype=np.uint8))
    g_arr = np.full((2, 2), 10, dtype=np.uint8)
    g_arr[0, 0] = 12
    g = RasterImage(g_arr)
    fixture_ok = abs(psnr(f, g) - 48.1308) < 1e-3

    rng = np.random.default_rng(6)
    identity_ok = True
    for _ in range(20):
        h, w = (int(v) for v in rng.integers(8, 64, 2))
        base = rng.integers(0, 256, (h, w), dtype=np.uint8)
        flags = rng.random((h, w)) < 0.25
        if not flags.any():
            flags[0, 0] = True
        modified = base.copy()
        modified[flags] = rng.integers(0, 256, int(flags.sum()), dtype=np.uint8)
        full = mse(RasterImage(base), RasterImage(modified))
        diff = base[flags].astype(np.int64) - modified[flags].astype(np.int64)
        masked = float((diff * diff).sum()) / diff.size
        expected = masked * flags.sum() / flags.size
        if expected != 0 and abs(full - expected) / expected > 1e-9:
            identity_ok = False
    report(6, "metric reference values", fixture_ok and identity_ok)


def test_criterion_7_benchmark_determinism(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    Image.fromarray(smooth_array(48, 48)).save(corpus / "a.png")
    Image.fromarray(textured_array(48, 48, seed=4)).save(corpus / "b.png")
    digests = []
    for name, workers in (("r1", None), ("r2", None), ("r4", "4")):
        args = ["benchmark", "--corpus", str(corpus), "--out", str(tmp_path / name), "--seed", "33"]
        if workers:
            args += ["--workers", workers]
        assert cli_main(args) == 0
        digests.append((tmp_path / name / "benchmark.csv").read_bytes())
    ok = digests[0] == digests[1] == digests[2]
    report(7, "benchmark determinism across runs and workers", ok)


def test_criterion_8_desk_scale_runtime():
    image = RasterImage(smooth_array(512, 512))
    mask = generate_mask(MaskSpec("heavy_text", seed=3, coverage=0.10), 512, 512)
    coverage = mask.count / (512 * 512)
    start = time.perf_counter()
    restored, _ = inpaint(image, mask, InpaintConfig(workers=1))
    elapsed = time.perf_counter() - start
    exact = np.array_equal(restored.plane(0)[~mask.flags], image.plane(0)[~mask.flags])
    ok = elapsed <= 60.0 and exact
    report(
        8,
        "512x512 at 10% within 60s single worker",
        ok,
        f"coverage={coverage:.1%} elapsed={elapsed:.1f}s",
    )
