"""Synthetic damage masks in four escalating categories.

Two scratch classes (thin polylines, thick polylines) and two text
classes (sparse and dense grids of pseudo-glyphs). Masks are a pure
function of (category, seed, dimensions): the generator draws strokes or
glyphs until it reaches a target coverage, sampled from the category's
range or taken from the MaskSpec coverage hint when one is given.

Category coverage targets (fraction of pixels):
    thin_scratch   0.8 - 2.2 %
    thick_scratch  4 - 8 %
    low_text       2.2 - 4.5 %
    heavy_text     10 - 18 %
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DamageMask

__all__ = ["CATEGORIES", "MaskSpec", "MaskStats", "generate_mask", "mask_stats"]

CATEGORIES = ("thick_scratch", "thin_scratch", "low_text", "heavy_text")

MIN_SIDE = 16

_COVERAGE_RANGE = {
    "thin_scratch": (0.008, 0.022),
    "thick_scratch": (0.04, 0.08),
    "low_text": (0.022, 0.045),
    "heavy_text": (0.10, 0.18),
}

_STROKE_WIDTH = {
    "thin_scratch": (1, 2),
    "thick_scratch": (4, 8),
}

# stroke length range as a fraction of the image diagonal; thin strokes
# stay short so a single stroke cannot overshoot the coverage target much
_STROKE_LENGTH = {
    "thin_scratch": (0.2, 0.5),
    "thick_scratch": (0.3, 0.9),
}


@dataclass(frozen=True)
class MaskSpec:
    """Recipe for one deterministic mask."""

    category: str
    seed: int
    coverage: float | None = None

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}, expected one of {CATEGORIES}")
        if self.coverage is not None and not 0.0 < self.coverage <= 0.5:
            raise ValueError(f"coverage hint must lie in (0, 0.5], got {self.coverage}")


@dataclass(frozen=True)
class MaskStats:
    coverage: float
    components: int


def _stamp_offsets(width: int) -> tuple[np.ndarray, np.ndarray]:
    """Disk footprint offsets for a stroke of the given width."""
    radius = width / 2.0
    reach = int(math.ceil(radius))
    dr, dc = np.mgrid[-reach : reach + 1, -reach : reach + 1]
    inside = dr * dr + dc * dc <= radius * radius
    return dr[inside], dc[inside]


def _draw_scratches(rng: np.random.Generator, flags: np.ndarray, category: str, target: float) -> None:
    height, width = flags.shape
    w_lo, w_hi = _STROKE_WIDTH[category]
    len_lo, len_hi = _STROKE_LENGTH[category]
    diag = math.hypot(height, width)
    total = flags.size
    for _ in range(400):
        if flags.sum() / total >= target:
            break
        stroke_w = int(rng.integers(w_lo, w_hi + 1))
        dr_off, dc_off = _stamp_offsets(stroke_w)
        r = float(rng.uniform(0, height))
        c = float(rng.uniform(0, width))
        heading = float(rng.uniform(0, 2 * math.pi))
        steps = int(diag * rng.uniform(len_lo, len_hi))
        for _ in range(steps):
            rr = np.clip(int(round(r)) + dr_off, 0, height - 1)
            cc = np.clip(int(round(c)) + dc_off, 0, width - 1)
            flags[rr, cc] = True
            heading += float(rng.normal(0.0, 0.15))
            r += math.sin(heading)
            c += math.cos(heading)
            if not (-stroke_w <= r < height + stroke_w and -stroke_w <= c < width + stroke_w):
                break


def _draw_glyph(rng: np.random.Generator, flags: np.ndarray, top: int, left: int, gh: int, gw: int) -> None:
    """A pseudo-glyph: a few random bars inside the glyph cell."""
    height, width = flags.shape
    for _ in range(int(rng.integers(2, 5))):
        if rng.uniform() < 0.5:
            bh = int(rng.integers(max(1, gh // 4), gh + 1))
            bw = max(1, gw // 3)
        else:
            bh = max(1, gh // 3)
            bw = int(rng.integers(max(1, gw // 4), gw + 1))
        r0 = top + int(rng.integers(0, max(1, gh - bh + 1)))
        c0 = left + int(rng.integers(0, max(1, gw - bw + 1)))
        flags[r0 : min(r0 + bh, height), c0 : min(c0 + bw, width)] = True


def _draw_text(rng: np.random.Generator, flags: np.ndarray, target: float) -> None:
    height, width = flags.shape
    gh = max(4, height // 32)
    gw = max(3, (gh * 2) // 3)
    total = flags.size
    for _ in range(200):
        if flags.sum() / total >= target:
            return
        row = int(rng.integers(0, max(1, height - gh)))
        col = int(rng.integers(0, gw))
        while col + gw <= width:
            if rng.uniform() < 0.8:
                _draw_glyph(rng, flags, row, col, gh, gw)
            col += gw + int(rng.integers(1, max(2, gw // 2 + 1)))
            if flags.sum() / total >= target:
                return


def generate_mask(spec: MaskSpec, width: int, height: int) -> DamageMask:
    """Deterministically generate a damage mask for the given dimensions."""
    if width < MIN_SIDE or height < MIN_SIDE:
        raise ValueError(
            f"mask dimensions must be at least {MIN_SIDE}x{MIN_SIDE}, got {height}x{width}"
        )
    rng = np.random.default_rng([spec.seed, CATEGORIES.index(spec.category)])
    lo, hi = _COVERAGE_RANGE[spec.category]
    target = spec.coverage if spec.coverage is not None else float(rng.uniform(lo, hi))
    flags = np.zeros((height, width), dtype=bool)
    if spec.category in _STROKE_WIDTH:
        _draw_scratches(rng, flags, spec.category, target)
    else:
        _draw_text(rng, flags, target)
    return DamageMask(flags)


class _UnionFind:
    def __init__(self, size: int) -> None:
        self.parent = list(range(size))

    def find(self, i: int) -> int:
        parent = self.parent
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[rj] = ri


def mask_stats(mask: DamageMask) -> MaskStats:
    """Exact coverage fraction and 8-connected damaged-component count."""
    flags = mask.flags
    height, width = flags.shape
    count = int(flags.sum())
    if count == 0:
        return MaskStats(coverage=0.0, components=0)
    rows, cols = np.nonzero(flags)
    index = {(int(r), int(c)): i for i, (r, c) in enumerate(zip(rows, cols))}
    uf = _UnionFind(count)
    # scanning up-left neighbors covers all 8 directions once
    for i, (r, c) in enumerate(zip(rows.tolist(), cols.tolist())):
        for dr, dc in ((-1, -1), (-1, 0), (-1, 1), (0, -1)):
            j = index.get((r + dr, c + dc))
            if j is not None:
                uf.union(i, j)
    roots = {uf.find(i) for i in range(count)}
    return MaskStats(coverage=count / flags.size, components=len(roots))
