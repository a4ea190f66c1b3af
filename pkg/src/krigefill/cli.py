"""Command-line front end.

Subcommands: inpaint (restore one image), evaluate (score a restoration),
benchmark (mask/damage/restore/score a whole corpus), variogram (dump one
block's empirical variogram and fitted model).

Exit codes: 0 success, 2 unreadable input or empty corpus, 3 shape or
coordinate mismatch, 4 fully masked image.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
import zlib
from dataclasses import asdict
from pathlib import Path

import numpy as np
from PIL import Image

from .core import DamageMask, RasterImage, apply_mask, tile_blocks
from .engine import InpaintConfig, block_variogram, inpaint
from .maskgen import CATEGORIES, MaskSpec, generate_mask, mask_stats
from .metrics import score

__all__ = ["main", "entrypoint"]

EXIT_OK = 0
EXIT_UNREADABLE = 2
EXIT_SHAPE = 3
EXIT_FULLY_MASKED = 4

_IMAGE_SUFFIXES = {".png", ".bmp"}


class _CommandError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _load_image(path: str) -> RasterImage:
    try:
        with Image.open(path) as img:
            if img.mode == "P":
                img = img.convert("RGB")
            if img.mode not in ("L", "RGB"):
                raise _CommandError(
                    EXIT_UNREADABLE,
                    f"{path}: unsupported mode {img.mode!r}; need 8-bit grayscale or RGB",
                )
            return RasterImage.from_array(np.asarray(img))
    except _CommandError:
        raise
    except Exception as exc:
        raise _CommandError(EXIT_UNREADABLE, f"cannot read image {path}: {exc}") from exc


def _load_mask(path: str) -> DamageMask:
    try:
        with Image.open(path) as img:
            flags = np.asarray(img.convert("L")) > 0
            return DamageMask(flags)
    except Exception as exc:
        raise _CommandError(EXIT_UNREADABLE, f"cannot read mask {path}: {exc}") from exc


def _save_image(image: RasterImage, path: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(image.to_array()).save(path, format="PNG")


def _save_mask(mask: DamageMask, path: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(mask.flags.astype(np.uint8) * 255).save(path, format="PNG")


def _require_same_shape(image: RasterImage, mask: DamageMask) -> None:
    if not mask.matches(image):
        raise _CommandError(
            EXIT_SHAPE,
            f"mask is {mask.height}x{mask.width} but image is "
            f"{image.height}x{image.width}",
        )


def _config_from_args(args: argparse.Namespace) -> InpaintConfig:
    """Defaults, overlaid by a JSON config file, overlaid by explicit flags."""
    settings: dict = {}
    if getattr(args, "config", None):
        try:
            settings.update(json.loads(Path(args.config).read_text()))
        except Exception as exc:
            raise _CommandError(EXIT_UNREADABLE, f"cannot read config {args.config}: {exc}") from exc
    for flag, key in (
        ("block_size", "block_size"),
        ("margin", "margin"),
        ("max_neighbors", "max_neighbors"),
        ("bin_width", "bin_width"),
        ("workers", "workers"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            settings[key] = value
    try:
        return InpaintConfig(**settings)
    except (TypeError, ValueError) as exc:
        raise _CommandError(EXIT_UNREADABLE, f"bad configuration: {exc}") from exc


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def _psnr_text(value: float | None) -> str:
    return "identical" if value is None else _fmt(value)


def _run_inpaint(args: argparse.Namespace) -> int:
    image = _load_image(args.image)
    mask = _load_mask(args.mask)
    _require_same_shape(image, mask)
    config = _config_from_args(args)
    start = time.perf_counter()
    try:
        restored, report = inpaint(image, mask, config)
    except ValueError as exc:
        raise _CommandError(EXIT_FULLY_MASKED, str(exc)) from exc
    elapsed = time.perf_counter() - start
    _save_image(restored, args.out)
    print(
        f"filled {report.pixels_filled} pixels "
        f"({report.degraded_solves} degraded solves) in {elapsed:.2f} s -> {args.out}"
    )
    return EXIT_OK


def _run_evaluate(args: argparse.Namespace) -> int:
    original = _load_image(args.original)
    restored = _load_image(args.restored)
    if (original.channels, original.height, original.width) != (
        restored.channels,
        restored.height,
        restored.width,
    ):
        raise _CommandError(
            EXIT_SHAPE,
            f"shape mismatch: {original.height}x{original.width}x{original.channels} vs "
            f"{restored.height}x{restored.width}x{restored.channels}",
        )
    result = score(original, restored)
    print(f"MSE  {_fmt(result.mse)}")
    print(f"PSNR {_psnr_text(result.psnr)}")
    if args.csv:
        path = Path(args.csv)
        path.parent.mkdir(parents=True, exist_ok=True)
        new = not path.exists()
        with path.open("a", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if new:
                writer.writerow(["original", "restored", "mse", "psnr"])
            writer.writerow([args.original, args.restored, _fmt(result.mse), _psnr_text(result.psnr)])
    return EXIT_OK


def _stable_seed(base: int, name: str, category: str) -> int:
    return base * 1000003 + zlib.crc32(f"{name}:{category}".encode())


def _run_benchmark(args: argparse.Namespace) -> int:
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        raise _CommandError(EXIT_UNREADABLE, f"corpus directory not found: {corpus}")
    paths = sorted(p for p in corpus.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES)
    if not paths:
        raise _CommandError(EXIT_UNREADABLE, f"no PNG or BMP images in {corpus}")
    categories = args.categories.split(",") if args.categories else list(CATEGORIES)
    for cat in categories:
        if cat not in CATEGORIES:
            raise _CommandError(EXIT_UNREADABLE, f"unknown mask category {cat!r}")
    config = _config_from_args(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    manifest = []
    for path in paths:
        image = _load_image(str(path))
        for category in categories:
            spec = MaskSpec(category=category, seed=_stable_seed(args.seed, path.name, category))
            timings = {}
            t0 = time.perf_counter()
            mask = generate_mask(spec, image.width, image.height)
            timings["mask_s"] = time.perf_counter() - t0
            stats = mask_stats(mask)
            damaged = apply_mask(image, mask, sentinel=0)
            t0 = time.perf_counter()
            restored, report = inpaint(image, mask, config)
            timings["inpaint_s"] = time.perf_counter() - t0
            t0 = time.perf_counter()
            damaged_score = score(image, damaged)
            restored_score = score(image, restored)
            timings["score_s"] = time.perf_counter() - t0

            stem = f"{path.stem}__{category}"
            restored_path = out_dir / f"{stem}.restored.png"
            mask_path = out_dir / f"{stem}.mask.png"
            _save_image(restored, str(restored_path))
            _save_mask(mask, str(mask_path))
            rows.append(
                {
                    "image": path.name,
                    "category": category,
                    "coverage": f"{stats.coverage:.6f}",
                    "damaged_psnr": _psnr_text(damaged_score.psnr),
                    "restored_psnr": _psnr_text(restored_score.psnr),
                    "restored_mse": _fmt(restored_score.mse),
                }
            )
            manifest.append(
                {
                    "image": str(path),
                    "category": category,
                    "mask_seed": spec.seed,
                    "coverage": stats.coverage,
                    "config": asdict(config),
                    "outputs": {"restored": str(restored_path), "mask": str(mask_path)},
                    "quality": {"mse": restored_score.mse, "psnr": restored_score.psnr},
                    "damaged_psnr": damaged_score.psnr,
                    "pixels_filled": report.pixels_filled,
                    "degraded_solves": report.degraded_solves,
                    "timings": timings,
                }
            )

    csv_path = out_dir / "benchmark.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=["image", "category", "coverage", "damaged_psnr", "restored_psnr", "restored_mse"],
            lineterminator="\n",
        )
        writer.writeheader()
        writer.writerows(rows)
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")

    _print_table(rows, categories)
    print(f"wrote {csv_path}")
    return EXIT_OK


def _print_table(rows: list[dict], categories: list[str]) -> None:
    by_image: dict[str, dict[str, str]] = {}
    for row in rows:
        by_image.setdefault(row["image"], {})[row["category"]] = row["restored_psnr"]
    name_w = max(len("image"), max(len(n) for n in by_image))
    header = "image".ljust(name_w) + "".join(c.rjust(15) for c in categories)
    print(header)
    print("-" * len(header))
    for name, cells in by_image.items():
        print(name.ljust(name_w) + "".join(cells.get(c, "-").rjust(15) for c in categories))


def _run_variogram(args: argparse.Namespace) -> int:
    image = _load_image(args.image)
    mask = _load_mask(args.mask)
    _require_same_shape(image, mask)
    config = _config_from_args(args)
    try:
        block_row, block_col = (int(part) for part in args.block.split(","))
    except ValueError as exc:
        raise _CommandError(EXIT_SHAPE, f"bad block coordinate {args.block!r}; expected R,C") from exc
    blocks = tile_blocks(image.width, image.height, config.block_size, config.margin)
    n_cols = -(-image.width // config.block_size)
    n_rows = -(-image.height // config.block_size)
    if not (0 <= block_row < n_rows and 0 <= block_col < n_cols):
        raise _CommandError(
            EXIT_SHAPE,
            f"block ({block_row},{block_col}) outside the {n_rows}x{n_cols} block grid",
        )
    block = blocks[block_row * n_cols + block_col]

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["channel", "lag", "gamma", "pair_count"])
        for channel in range(image.channels):
            try:
                emp, model = block_variogram(block, image, mask, config, channel)
            except ValueError as exc:
                raise _CommandError(EXIT_SHAPE, str(exc)) from exc
            for lag, gamma, count in emp.bins:
                writer.writerow([channel, repr(lag), repr(gamma), count])
            print(
                f"channel {channel}: family={model.family} nugget={model.nugget:.6g} "
                f"sill={model.sill:.6g} range={model.range:.6g}"
            )
    print(f"wrote {out_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="krigefill",
        description="Restore damaged image regions by block-wise ordinary kriging.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON file with engine settings")
        p.add_argument("--block-size", dest="block_size", type=int)
        p.add_argument("--margin", type=int)
        p.add_argument("--max-neighbors", dest="max_neighbors", type=int)
        p.add_argument("--bin-width", dest="bin_width", type=float)
        p.add_argument("--workers", type=int)

    p = sub.add_parser("inpaint", help="restore one damaged image")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True, help="single-channel image, nonzero = damaged")
    p.add_argument("--out", required=True)
    add_config_flags(p)
    p.set_defaults(func=_run_inpaint)

    p = sub.add_parser("evaluate", help="score a restoration against the original")
    p.add_argument("--original", required=True)
    p.add_argument("--restored", required=True)
    p.add_argument("--csv", help="append a CSV row here")
    p.set_defaults(func=_run_evaluate)

    p = sub.add_parser("benchmark", help="mask, damage, restore and score a corpus")
    p.add_argument("--corpus", required=True, help="directory of PNG/BMP images")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--categories", help=f"comma list from {','.join(CATEGORIES)}")
    add_config_flags(p)
    p.set_defaults(func=_run_benchmark)

    p = sub.add_parser("variogram", help="dump one block's variogram and model")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--block", required=True, help="block grid coordinate R,C")
    p.add_argument("--out", required=True)
    add_config_flags(p)
    p.set_defaults(func=_run_variogram)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


def entrypoint() -> None:
    sys.exit(main())
