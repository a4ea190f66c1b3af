"""Raster image, damage mask, and block-tiling primitives.

All types here are immutable after construction and safe to share across
threads; every function is pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "RasterImage",
    "DamageMask",
    "BlockRegion",
    "PixelSample",
    "ValidationReport",
    "tile_blocks",
    "apply_mask",
    "validate_pair",
]


class PixelSample(NamedTuple):
    """A known pixel: absolute image coordinates plus its intensity."""

    row: int
    col: int
    value: float


def _as_uint8(arr: np.ndarray) -> np.ndarray:
    """Validate intensities and return a uint8 copy-free view where possible."""
    if arr.dtype == np.uint8:
        return arr
    if arr.size:
        lo, hi = arr.min(), arr.max()
        if lo < 0 or hi > 255:
            raise ValueError(f"sample values must lie in [0, 255], got [{lo}, {hi}]")
    if not np.issubdtype(arr.dtype, np.integer) and arr.dtype != np.bool_:
        if not np.all(np.mod(arr, 1) == 0):
            raise ValueError("sample values must be whole numbers")
    return arr.astype(np.uint8)


@dataclass(frozen=True, eq=False)
class RasterImage:
    """8-bit image stored as channel-major planes of shape (channels, height, width).

    Grayscale images have one plane, color images three. The sample array is
    copied on construction and marked read-only.
    """

    planes: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.planes)
        if arr.ndim == 2:
            arr = arr[np.newaxis, :, :]
        if arr.ndim != 3:
            raise ValueError(f"expected a 2-D or 3-D sample grid, got {arr.ndim}-D")
        arr = _as_uint8(arr).copy()
        channels, height, width = arr.shape
        if channels not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {channels}")
        if height < 1 or width < 1:
            raise ValueError(f"image must be at least 1x1, got {height}x{width}")
        arr.setflags(write=False)
        object.__setattr__(self, "planes", arr)

    @property
    def channels(self) -> int:
        return self.planes.shape[0]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "RasterImage":
        """Build from an interleaved array: (H, W) grayscale or (H, W, 3) color."""
        a = np.asarray(arr)
        if a.ndim == 3:
            if a.shape[2] not in (1, 3):
                raise ValueError(f"interleaved array must have 1 or 3 channels, got {a.shape[2]}")
            a = np.moveaxis(a, 2, 0)
        return cls(a)

    def plane(self, channel: int = 0) -> np.ndarray:
        """Read-only (H, W) view of one channel."""
        return self.planes[channel]

    def to_array(self) -> np.ndarray:
        """Interleaved copy: (H, W) for grayscale, (H, W, 3) for color."""
        if self.channels == 1:
            return self.planes[0].copy()
        return np.moveaxis(self.planes, 0, 2).copy()


@dataclass(frozen=True, eq=False)
class DamageMask:
    """Binary raster marking damaged pixels (True = damaged / unknown).

    One mask applies identically to every channel of its image.
    """

    flags: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.flags)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got {arr.ndim}-D")
        if arr.dtype != np.bool_:
            arr = arr != 0
        arr = arr.copy()
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("mask must be at least 1x1")
        arr.setflags(write=False)
        object.__setattr__(self, "flags", arr)

    @property
    def height(self) -> int:
        return self.flags.shape[0]

    @property
    def width(self) -> int:
        return self.flags.shape[1]

    @property
    def count(self) -> int:
        """Number of damaged pixels."""
        return int(self.flags.sum())

    def matches(self, image: RasterImage) -> bool:
        return (self.height, self.width) == (image.height, image.width)


@dataclass(frozen=True)
class BlockRegion:
    """One tile of the image: a core rectangle plus a clipped context window.

    The context window is the core grown by ``margin`` pixels on every side,
    clipped at the image bounds; it never extends outside the image.
    Coordinates are absolute; stop bounds are half-open.
    """

    row: int
    col: int
    core_height: int
    core_width: int
    margin: int
    ctx_row_start: int
    ctx_col_start: int
    ctx_row_stop: int
    ctx_col_stop: int

    def __post_init__(self) -> None:
        if self.core_height < 1 or self.core_width < 1:
            raise ValueError("block core must be at least 1x1")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")
        if not (
            self.ctx_row_start <= self.row
            and self.ctx_col_start <= self.col
            and self.ctx_row_stop >= self.row + self.core_height
            and self.ctx_col_stop >= self.col + self.core_width
        ):
            raise ValueError("context window must enclose the core")

    @property
    def core_slice(self) -> tuple[slice, slice]:
        return (
            slice(self.row, self.row + self.core_height),
            slice(self.col, self.col + self.core_width),
        )

    @property
    def context_slice(self) -> tuple[slice, slice]:
        return (
            slice(self.ctx_row_start, self.ctx_row_stop),
            slice(self.ctx_col_start, self.ctx_col_stop),
        )

    @property
    def context_height(self) -> int:
        return self.ctx_row_stop - self.ctx_row_start

    @property
    def context_width(self) -> int:
        return self.ctx_col_stop - self.ctx_col_start

    def core_contains(self, row: int, col: int) -> bool:
        return (
            self.row <= row < self.row + self.core_height
            and self.col <= col < self.col + self.core_width
        )


def tile_blocks(width: int, height: int, block_size: int, margin: int = 0) -> list[BlockRegion]:
    """Partition a width x height grid into blocks of at most block_size per side.

    Blocks are returned in row-major order of their origins. Core regions
    tile the grid exactly (edge blocks may be smaller than block_size);
    context windows are clipped at the image borders.

    Raises ValueError for block_size < 2: a 1x1 block has no spatial
    structure to interpolate from.
    """
    if block_size < 2:
        raise ValueError(f"block size must be >= 2, got {block_size}")
    if margin < 0:
        raise ValueError(f"margin must be >= 0, got {margin}")
    if width < 1 or height < 1:
        raise ValueError(f"grid must be at least 1x1, got {height}x{width}")
    blocks = []
    for row in range(0, height, block_size):
        core_h = min(block_size, height - row)
        for col in range(0, width, block_size):
            core_w = min(block_size, width - col)
            blocks.append(
                BlockRegion(
                    row=row,
                    col=col,
                    core_height=core_h,
                    core_width=core_w,
                    margin=margin,
                    ctx_row_start=max(0, row - margin),
                    ctx_col_start=max(0, col - margin),
                    ctx_row_stop=min(height, row + core_h + margin),
                    ctx_col_stop=min(width, col + core_w + margin),
                )
            )
    return blocks


def apply_mask(image: RasterImage, mask: DamageMask, sentinel: int = 0) -> RasterImage:
    """Render a damaged image: flagged positions get the sentinel on every channel.

    Only used to visualize damage and to build evaluation inputs; the
    restoration engine reads the mask itself and never relies on sentinels.
    """
    if not mask.matches(image):
        raise ValueError(
            f"mask {mask.height}x{mask.width} does not match image {image.height}x{image.width}"
        )
    if not 0 <= sentinel <= 255:
        raise ValueError(f"sentinel must lie in [0, 255], got {sentinel}")
    planes = image.planes.copy()
    planes[:, mask.flags] = sentinel
    return RasterImage(planes)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of pairing an image with a mask."""

    ok: bool
    damaged_count: int
    damaged_fraction: float
    problems: tuple[str, ...] = ()


def validate_pair(image: RasterImage, mask: DamageMask) -> ValidationReport:
    """Check that a mask fits an image and summarize the damage extent."""
    if not mask.matches(image):
        return ValidationReport(
            ok=False,
            damaged_count=0,
            damaged_fraction=0.0,
            problems=(
                f"mask {mask.height}x{mask.width} does not match image "
                f"{image.height}x{image.width}",
            ),
        )
    count = mask.count
    return ValidationReport(
        ok=True,
        damaged_count=count,
        damaged_fraction=count / (image.height * image.width),
    )
