"""Restoration quality metrics: mean squared error and PSNR.

PSNR is 20 * log10(255 / sqrt(MSE)) for 8-bit samples, computed over the
full image (all channels jointly). Identical images have MSE 0 and no
finite PSNR; that case is carried as an explicit marker rather than
infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DamageMask, RasterImage

__all__ = ["QualityScore", "mse", "psnr", "masked_psnr", "score"]

PEAK = 255.0


@dataclass(frozen=True)
class QualityScore:
    """MSE plus PSNR; psnr is None exactly when the images are identical."""

    mse: float
    psnr: float | None

    @property
    def identical(self) -> bool:
        return self.psnr is None


def _check_shapes(f: RasterImage, g: RasterImage) -> None:
    if (f.channels, f.height, f.width) != (g.channels, g.height, g.width):
        raise ValueError(
            f"shape mismatch: {f.channels}x{f.height}x{f.width} vs "
            f"{g.channels}x{g.height}x{g.width}"
        )


def mse(f: RasterImage, g: RasterImage) -> float:
    """Mean squared sample difference over all width x height x channels samples.

    Accumulated exactly in 64-bit integers before the final division.
    """
    _check_shapes(f, g)
    diff = f.planes.astype(np.int64) - g.planes.astype(np.int64)
    return float((diff * diff).sum()) / diff.size


def _psnr_from_mse(value: float) -> float | None:
    if value == 0.0:
        return None
    return 20.0 * math.log10(PEAK / math.sqrt(value))


def psnr(f: RasterImage, g: RasterImage) -> float | None:
    """Peak signal-to-noise ratio in dB; None when the images are identical."""
    return _psnr_from_mse(mse(f, g))


def masked_psnr(f: RasterImage, g: RasterImage, mask: DamageMask) -> float | None:
    """PSNR restricted to the damaged positions (all channels).

    When the undamaged pixels agree exactly, the full-image MSE equals the
    masked MSE scaled by flag_count / (height * width).
    """
    _check_shapes(f, g)
    if not mask.matches(f):
        raise ValueError(
            f"mask {mask.height}x{mask.width} does not match image {f.height}x{f.width}"
        )
    if mask.count == 0:
        raise ValueError("mask flags no pixels; masked PSNR is undefined")
    diff = f.planes[:, mask.flags].astype(np.int64) - g.planes[:, mask.flags].astype(np.int64)
    return _psnr_from_mse(float((diff * diff).sum()) / diff.size)


def score(f: RasterImage, g: RasterImage) -> QualityScore:
    """Convenience bundle of mse and psnr."""
    value = mse(f, g)
    return QualityScore(mse=value, psnr=_psnr_from_mse(value))
