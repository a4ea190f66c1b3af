"""Block-dispatch inpainting engine.

The image is tiled into blocks; every block containing damaged core
pixels gets its own variogram model, fitted from the undamaged pixels of
the block core plus a context margin. Each damaged pixel is then kriged
independently against its nearest known neighbors, so results never
depend on the order pixels are filled in. Blocks whose whole context is
damaged are handled afterwards by an onion-peel pass that fills the
damage boundary ring by ring, reusing freshly filled pixels as known
data for later rings.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (
    BlockRegion,
    DamageMask,
    PixelSample,
    RasterImage,
    tile_blocks,
)
from .kriging import _lu_solve_checked, _solve_bordered, build_matrix
from .variogram import (
    SILL_FLOOR,
    EmpiricalVariogram,
    VariogramModel,
    empirical_variogram,
    fit_model,
    model_gamma,
)

__all__ = [
    "InpaintConfig",
    "InpaintReport",
    "BlockFill",
    "OnionPeelResult",
    "NoKnownPixelsError",
    "inpaint",
    "select_neighborhood",
    "fill_block",
    "block_variogram",
    "onion_peel_fallback",
]


class NoKnownPixelsError(ValueError):
    """A block's core and margin hold no undamaged pixel; escalate to onion peel."""


@dataclass(frozen=True)
class InpaintConfig:
    """Engine configuration.

    block_size is the tile side; margin the context border supplying
    extra known pixels around each tile; max_neighbors caps the kriging
    system size per damaged pixel; bin_width sets the variogram lag
    resolution. Outputs are deterministic regardless of worker count;
    the deterministic flag is reserved for future scheduling modes.
    """

    block_size: int = 8
    margin: int = 4
    max_neighbors: int = 64
    bin_width: float = 1.0
    deterministic: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if self.block_size < 2:
            raise ValueError(f"block_size must be >= 2, got {self.block_size}")
        if self.margin < 0:
            raise ValueError(f"margin must be >= 0, got {self.margin}")
        if self.max_neighbors < 1:
            raise ValueError(f"max_neighbors must be >= 1, got {self.max_neighbors}")
        if self.bin_width <= 0:
            raise ValueError(f"bin_width must be > 0, got {self.bin_width}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class InpaintReport:
    """Summary of one inpainting run."""

    blocks_total: int
    blocks_inpainted: int
    pixels_filled: int
    degraded_solves: int
    block_mean_variance: dict[tuple[int, int], float] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class BlockFill:
    """Predictions for one block: absolute positions, per-channel values."""

    positions: np.ndarray
    values: np.ndarray
    mean_variance: float
    degraded: int


@dataclass(frozen=True, eq=False)
class OnionPeelResult:
    """Outcome of the boundary-inward fallback pass."""

    image: RasterImage
    rings: int
    pixels_filled: int
    degraded_solves: int


def _quantize(preds: np.ndarray) -> np.ndarray:
    """Round half-to-even and clamp into the 8-bit range."""
    return np.clip(np.rint(preds), 0, 255).astype(np.uint8)


def _context_known(plane_flags: np.ndarray, block: BlockRegion):
    """Known (undamaged) pixel coordinates inside a block's context window.

    Returned coordinates are absolute and in row-major order, which is
    the tie-break order for equidistant neighbors.
    """
    rs, cs = block.context_slice
    local = ~plane_flags[rs, cs]
    rows, cols = np.nonzero(local)
    return rows + block.ctx_row_start, cols + block.ctx_col_start


def _context_model(
    kpos: np.ndarray,
    kvals: np.ndarray,
    ctx_height: int,
    ctx_width: int,
    bin_width: float,
):
    """Per-block variogram estimate and fitted model.

    Falls back to the flat floor model when there are too few known
    pixels to form any pair; returns (empirical | None, model).
    """
    max_lag = math.hypot(ctx_height, ctx_width)
    if kpos.shape[0] < 2:
        return None, VariogramModel("spherical", 0.0, SILL_FLOOR, max_lag)
    emp = empirical_variogram(
        np.column_stack([kpos, kvals]), max_lag=max_lag, bin_width=bin_width
    )
    return emp, fit_model(emp)


def block_variogram(
    block: BlockRegion,
    image: RasterImage,
    mask: DamageMask,
    config: InpaintConfig | None = None,
    channel: int = 0,
) -> tuple[EmpiricalVariogram, VariogramModel]:
    """The exact variogram and model the engine would use for this block.

    Raises ValueError when the block context holds fewer than two known
    pixels.
    """
    cfg = config or InpaintConfig()
    if not mask.matches(image):
        raise ValueError(
            f"mask {mask.height}x{mask.width} does not match image "
            f"{image.height}x{image.width}"
        )
    krows, kcols = _context_known(mask.flags, block)
    if krows.size < 2:
        raise ValueError("block context holds fewer than 2 known pixels")
    kvals = image.plane(channel)[krows, kcols].astype(float)
    kpos = np.column_stack([krows, kcols]).astype(float)
    emp, model = _context_model(
        kpos, kvals, block.context_height, block.context_width, cfg.bin_width
    )
    assert emp is not None
    return emp, model


def select_neighborhood(
    block: BlockRegion,
    image: RasterImage,
    mask: DamageMask,
    target: tuple[int, int],
    max_neighbors: int,
    channel: int = 0,
) -> list[PixelSample]:
    """Known pixels of the block context nearest the target.

    Sorted by ascending Euclidean distance, ties broken by row-major
    position, truncated to max_neighbors. An empty result means the block
    must escalate to the onion-peel fallback.
    """
    if not block.core_contains(*target):
        raise ValueError(f"target {target} lies outside the block core")
    krows, kcols = _context_known(mask.flags, block)
    if krows.size == 0:
        return []
    plane = image.plane(channel)
    d = np.hypot(krows - float(target[0]), kcols - float(target[1]))
    order = np.argsort(d, kind="stable")[:max_neighbors]
    return [
        PixelSample(int(krows[i]), int(kcols[i]), float(plane[krows[i], kcols[i]]))
        for i in order
    ]


def _predict_targets(
    kpos: np.ndarray,
    kvals: np.ndarray,
    model: VariogramModel,
    targets: np.ndarray,
    max_neighbors: int,
):
    """Krige every target against the known samples.

    kpos (N, 2) and targets (T, 2) share one coordinate frame. Returns
    (predictions, variances, degraded_count). When all known points fit
    under the neighbor cap the bordered matrix is factored once and all
    targets are solved against it in a single pass.
    """
    n = kpos.shape[0]
    t = targets.shape[0]
    gamma_known = model_gamma(
        model,
        np.hypot(
            kpos[:, 0, np.newaxis] - kpos[np.newaxis, :, 0],
            kpos[:, 1, np.newaxis] - kpos[np.newaxis, :, 1],
        ),
    )
    target_d = np.hypot(
        targets[:, 0, np.newaxis] - kpos[np.newaxis, :, 0],
        targets[:, 1, np.newaxis] - kpos[np.newaxis, :, 1],
    )

    if n <= max_neighbors:
        gamma_t = model_gamma(model, target_d)
        matrix = build_matrix(gamma_known)
        rhs = np.concatenate([gamma_t, np.ones((t, 1))], axis=1).T
        x = _lu_solve_checked(matrix, rhs)
        if x is None:
            jittered = matrix.copy()
            jittered[:n, :n] += 1e-6 * model.sill * (1.0 - np.eye(n))
            x = _lu_solve_checked(jittered, rhs)
        if x is not None:
            weights = x[:n]
            preds = kvals @ weights
            variances = np.maximum((weights * gamma_t.T).sum(axis=0) + x[n], 0.0)
            return preds, variances, 0

    preds = np.empty(t)
    variances = np.empty(t)
    degraded = 0
    for ti in range(t):
        d = target_d[ti]
        idx = np.argsort(d, kind="stable")[:max_neighbors]
        matrix = build_matrix(gamma_known[np.ix_(idx, idx)])
        gamma_t = model_gamma(model, d[idx])
        rhs = np.append(gamma_t, 1.0)
        w, mu, deg = _solve_bordered(matrix, rhs, model.sill, d[idx])
        degraded += int(deg)
        preds[ti] = w @ kvals[idx]
        variances[ti] = max(float(w @ gamma_t) + mu, 0.0)
    return preds, variances, degraded


def _fill_block_arrays(
    planes: np.ndarray,
    flags: np.ndarray,
    block: BlockRegion,
    cfg: InpaintConfig,
):
    """Predict every damaged core pixel of one block, all channels.

    Returns (target_rows, target_cols, values (P, C) uint8, variance_sum,
    variance_count, degraded) or None when the context has no known pixel.
    """
    core_flags = flags[block.core_slice]
    trows, tcols = np.nonzero(core_flags)
    if trows.size == 0:
        return block, None
    trows = trows + block.row
    tcols = tcols + block.col
    krows, kcols = _context_known(flags, block)
    if krows.size == 0:
        return block, None
    kpos = np.column_stack([krows, kcols]).astype(float)
    targets = np.column_stack([trows, tcols]).astype(float)

    channels = planes.shape[0]
    values = np.empty((trows.size, channels), dtype=np.uint8)
    var_sum = 0.0
    degraded = 0
    for c in range(channels):
        kvals = planes[c][krows, kcols].astype(float)
        _, model = _context_model(
            kpos, kvals, block.context_height, block.context_width, cfg.bin_width
        )
        preds, variances, deg = _predict_targets(
            kpos, kvals, model, targets, cfg.max_neighbors
        )
        values[:, c] = _quantize(preds)
        var_sum += float(variances.sum())
        degraded += deg
    return block, (trows, tcols, values, var_sum, trows.size * channels, degraded)


def fill_block(
    block: BlockRegion,
    image: RasterImage,
    mask: DamageMask,
    config: InpaintConfig | None = None,
) -> BlockFill:
    """Predict the damaged core pixels of a single block.

    Each pixel is solved independently from originally-known pixels only;
    predictions within a block never feed each other. Raises
    NoKnownPixelsError when the whole context is damaged and ValueError
    when the block core holds no damaged pixel.
    """
    cfg = config or InpaintConfig()
    if not mask.matches(image):
        raise ValueError(
            f"mask {mask.height}x{mask.width} does not match image "
            f"{image.height}x{image.width}"
        )
    if not mask.flags[block.core_slice].any():
        raise ValueError("block core holds no damaged pixel")
    _, result = _fill_block_arrays(image.planes, mask.flags, block, cfg)
    if result is None:
        raise NoKnownPixelsError("block context holds no known pixel")
    trows, tcols, values, var_sum, var_count, degraded = result
    return BlockFill(
        positions=np.column_stack([trows, tcols]),
        values=values,
        mean_variance=var_sum / var_count if var_count else 0.0,
        degraded=degraded,
    )


def _dilate8(known: np.ndarray) -> np.ndarray:
    """True where a cell has at least one known 8-neighbor."""
    out = np.zeros_like(known)
    out[1:, :] |= known[:-1, :]
    out[:-1, :] |= known[1:, :]
    out[:, 1:] |= known[:, :-1]
    out[:, :-1] |= known[:, 1:]
    out[1:, 1:] |= known[:-1, :-1]
    out[:-1, :-1] |= known[1:, 1:]
    out[1:, :-1] |= known[:-1, 1:]
    out[:-1, 1:] |= known[1:, :-1]
    return out


def _neighbor_known(residual: np.ndarray, rows: np.ndarray, cols: np.ndarray):
    """Known 8-neighbors of the given cells, deduplicated, row-major order."""
    h, w = residual.shape
    seen = set()
    out_r, out_c = [], []
    for r, c in zip(rows.tolist(), cols.tolist()):
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == 0 and dc == 0:
                    continue
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and not residual[rr, cc]:
                    if (rr, cc) not in seen:
                        seen.add((rr, cc))
                        out_r.append(rr)
                        out_c.append(cc)
    order = np.lexsort((out_c, out_r))
    return np.asarray(out_r)[order], np.asarray(out_c)[order]


def _onion_peel(
    planes: np.ndarray,
    residual: np.ndarray,
    cfg: InpaintConfig,
    blocks: list[BlockRegion],
    n_block_cols: int,
    block_var: dict[tuple[int, int], list[tuple[float, float]]] | None = None,
):
    """Fill the residual damage boundary-inward, ring by ring.

    Within a ring, pixels are predicted only from pixels known before the
    ring started; each completed ring is re-flagged known for the next.
    Mutates planes and residual. Returns (rings, pixels_filled, degraded).
    """
    channels = planes.shape[0]
    rings = 0
    filled = 0
    degraded = 0
    while residual.any():
        ring = residual & _dilate8(~residual)
        rrows, rcols = np.nonzero(ring)
        block_idx = (rrows // cfg.block_size) * n_block_cols + (rcols // cfg.block_size)
        writes = []
        for bi in np.unique(block_idx):
            block = blocks[bi]
            pick = block_idx == bi
            trows, tcols = rrows[pick], rcols[pick]
            krows, kcols = _context_known(residual, block)
            if krows.size == 0:
                krows, kcols = _neighbor_known(residual, trows, tcols)
            kpos = np.column_stack([krows, kcols]).astype(float)
            targets = np.column_stack([trows, tcols]).astype(float)
            vals = np.empty((trows.size, channels), dtype=np.uint8)
            var_sum = 0.0
            for c in range(channels):
                kvals = planes[c][krows, kcols].astype(float)
                _, model = _context_model(
                    kpos, kvals, block.context_height, block.context_width, cfg.bin_width
                )
                preds, variances, deg = _predict_targets(
                    kpos, kvals, model, targets, cfg.max_neighbors
                )
                vals[:, c] = _quantize(preds)
                var_sum += float(variances.sum())
                degraded += deg
            writes.append((trows, tcols, vals))
            if block_var is not None:
                block_var.setdefault((block.row, block.col), []).append(
                    (var_sum, float(trows.size * channels))
                )
        for trows, tcols, vals in writes:
            for c in range(channels):
                planes[c][trows, tcols] = vals[:, c]
            filled += trows.size
        residual[rrows, rcols] = False
        rings += 1
    return rings, filled, degraded


def onion_peel_fallback(
    image: RasterImage,
    mask: DamageMask,
    config: InpaintConfig | None = None,
) -> OnionPeelResult:
    """Fill an entire mask boundary-inward, chaining rings of predictions.

    Unlike the block pass, later rings reuse earlier predictions as known
    data. Requires at least one undamaged pixel.
    """
    cfg = config or InpaintConfig()
    if not mask.matches(image):
        raise ValueError(
            f"mask {mask.height}x{mask.width} does not match image "
            f"{image.height}x{image.width}"
        )
    if mask.count == image.height * image.width:
        raise ValueError("image is fully masked; nothing to predict from")
    planes = image.planes.copy()
    residual = mask.flags.copy()
    blocks = tile_blocks(image.width, image.height, cfg.block_size, cfg.margin)
    n_block_cols = -(-image.width // cfg.block_size)
    rings, filled, degraded = _onion_peel(planes, residual, cfg, blocks, n_block_cols)
    return OnionPeelResult(
        image=RasterImage(planes),
        rings=rings,
        pixels_filled=filled,
        degraded_solves=degraded,
    )


def inpaint(
    image: RasterImage,
    mask: DamageMask,
    config: InpaintConfig | None = None,
) -> tuple[RasterImage, InpaintReport]:
    """Restore every damaged pixel of an image.

    Undamaged pixels pass through bit-identical. Damaged pixels get their
    block's kriging prediction, rounded half-to-even and clamped to
    [0, 255]; blocks whose whole context is damaged are finished by the
    onion-peel pass. Output is deterministic for any worker count.
    """
    cfg = config or InpaintConfig()
    if not mask.matches(image):
        raise ValueError(
            f"mask {mask.height}x{mask.width} does not match image "
            f"{image.height}x{image.width}"
        )
    total = image.height * image.width
    if mask.count == total:
        raise ValueError("image is fully masked; nothing to predict from")

    blocks = tile_blocks(image.width, image.height, cfg.block_size, cfg.margin)
    flags = mask.flags
    work = [b for b in blocks if flags[b.core_slice].any()]
    out = image.planes.copy()

    if cfg.workers > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(
                pool.map(lambda b: _fill_block_arrays(image.planes, flags, b, cfg), work)
            )
    else:
        results = [_fill_block_arrays(image.planes, flags, b, cfg) for b in work]

    degraded = 0
    block_var: dict[tuple[int, int], list[tuple[float, float]]] = {}
    deferred: list[BlockRegion] = []
    for block, result in results:
        if result is None:
            deferred.append(block)
            continue
        trows, tcols, values, var_sum, var_count, deg = result
        for c in range(image.channels):
            out[c][trows, tcols] = values[:, c]
        degraded += deg
        block_var[(block.row, block.col)] = [(var_sum, float(var_count))]

    if deferred:
        residual = np.zeros_like(flags)
        for block in deferred:
            rs, cs = block.core_slice
            residual[rs, cs] = flags[rs, cs]
        n_block_cols = -(-image.width // cfg.block_size)
        _, _, deg = _onion_peel(out, residual, cfg, blocks, n_block_cols, block_var)
        degraded += deg

    report = InpaintReport(
        blocks_total=len(blocks),
        blocks_inpainted=len(work),
        pixels_filled=mask.count,
        degraded_solves=degraded,
        block_mean_variance={
            key: sum(s for s, _ in acc) / max(sum(c for _, c in acc), 1.0)
            for key, acc in block_var.items()
        },
    )
    return RasterImage(out), report
