"""Block-wise ordinary-kriging restoration of damaged image regions.

A damage mask marks unknown pixels; each image block estimates the
spatial correlation of its known pixels through an empirical variogram,
fits a parametric model, and predicts every damaged pixel as the best
linear unbiased combination of its nearest known neighbors. Known pixels
always pass through untouched.
"""

from .core import (
    BlockRegion,
    DamageMask,
    PixelSample,
    RasterImage,
    ValidationReport,
    apply_mask,
    tile_blocks,
    validate_pair,
)
from .engine import (
    BlockFill,
    InpaintConfig,
    InpaintReport,
    NoKnownPixelsError,
    OnionPeelResult,
    block_variogram,
    fill_block,
    inpaint,
    onion_peel_fallback,
    select_neighborhood,
)
from .kriging import (
    KrigingSolution,
    KrigingSystem,
    assemble_system,
    predict,
    solve_weights,
)
from .maskgen import CATEGORIES, MaskSpec, MaskStats, generate_mask, mask_stats
from .metrics import QualityScore, masked_psnr, mse, psnr, score
from .variogram import (
    EmpiricalVariogram,
    VariogramModel,
    empirical_variogram,
    fit_model,
    model_gamma,
)

__version__ = "0.1.0"

__all__ = [
    "BlockFill",
    "BlockRegion",
    "CATEGORIES",
    "DamageMask",
    "EmpiricalVariogram",
    "InpaintConfig",
    "InpaintReport",
    "KrigingSolution",
    "KrigingSystem",
    "MaskSpec",
    "MaskStats",
    "NoKnownPixelsError",
    "OnionPeelResult",
    "PixelSample",
    "QualityScore",
    "RasterImage",
    "ValidationReport",
    "VariogramModel",
    "apply_mask",
    "assemble_system",
    "block_variogram",
    "empirical_variogram",
    "fill_block",
    "fit_model",
    "generate_mask",
    "inpaint",
    "mask_stats",
    "masked_psnr",
    "model_gamma",
    "mse",
    "onion_peel_fallback",
    "predict",
    "psnr",
    "score",
    "select_neighborhood",
    "solve_weights",
    "tile_blocks",
    "validate_pair",
]
