from __future__ import annotations

import numpy as np
import pytest

from krigefill import DamageMask, RasterImage

from imagery import REFERENCE_BLOCK, REFERENCE_SCRATCH


@pytest.fixture
def ref_image() -> RasterImage:
    return RasterImage(REFERENCE_BLOCK)


@pytest.fixture
def ref_mask() -> DamageMask:
    return DamageMask(REFERENCE_SCRATCH)


@pytest.fixture
def ref_samples() -> np.ndarray:
    """Known (row, col, value) triples of the scratched reference patch."""
    rows, cols = np.nonzero(~REFERENCE_SCRATCH)
    return np.column_stack([rows, cols, REFERENCE_BLOCK[rows, cols]]).astype(float)
