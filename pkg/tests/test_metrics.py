import math

import numpy as np
import pytest

from krigefill import DamageMask, RasterImage, masked_psnr, mse, psnr, score

from oracles import loop_mse


def gray(arr) -> RasterImage:
    return RasterImage(np.asarray(arr, dtype=np.uint8))


class TestMse:
    def test_identical_is_zero(self, ref_image):
        assert mse(ref_image, ref_image) == 0.0

    def test_single_differing_sample(self):
        f = gray([[10, 10], [10, 10]])
        g = gray([[12, 10], [10, 10]])
        assert mse(f, g) == 1.0

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(8)
        f = rng.integers(0, 256, (64, 64), dtype=np.uint8)
        g = rng.integers(0, 256, (64, 64), dtype=np.uint8)
        assert mse(gray(f), gray(g)) == loop_mse(f, g)

    def test_symmetric(self):
        rng = np.random.default_rng(9)
        f = gray(rng.integers(0, 256, (9, 7), dtype=np.uint8))
        g = gray(rng.integers(0, 256, (9, 7), dtype=np.uint8))
        assert mse(f, g) == mse(g, f)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            mse(gray([[1]]), gray([[1, 2]]))

    def test_color_counts_all_planes(self):
        f = RasterImage(np.zeros((3, 2, 2), dtype=np.uint8))
        g_planes = np.zeros((3, 2, 2), dtype=np.uint8)
        g_planes[1, 0, 0] = 3
        assert mse(f, RasterImage(g_planes)) == 9.0 / 12.0


class TestPsnr:
    def test_unit_mse_reference_value(self):
        f = gray([[10, 10], [10, 10]])
        g = gray([[12, 10], [10, 10]])
        assert psnr(f, g) == pytest.approx(48.1308, abs=1e-3)

    def test_peak_error_is_zero_db(self):
        f = gray(np.zeros((4, 4)))
        g = gray(np.full((4, 4), 255))
        assert psnr(f, g) == pytest.approx(0.0)

    def test_identical_marker(self, ref_image):
        assert psnr(ref_image, ref_image) is None
        assert score(ref_image, ref_image).identical

    def test_monotone_in_single_gap(self):
        f = gray(np.full((4, 4), 100))
        last_mse, last_psnr = 0.0, math.inf
        for gap in (1, 2, 5, 20):
            g_arr = np.full((4, 4), 100)
            g_arr[0, 0] += gap
            current_mse = mse(f, gray(g_arr))
            current_psnr = psnr(f, gray(g_arr))
            assert current_mse > last_mse
            assert current_psnr < last_psnr
            last_mse, last_psnr = current_mse, current_psnr


class TestMaskedPsnr:
    def test_full_mask_equals_plain_psnr(self):
        rng = np.random.default_rng(10)
        f = gray(rng.integers(0, 256, (8, 8), dtype=np.uint8))
        g = gray(rng.integers(0, 256, (8, 8), dtype=np.uint8))
        full = DamageMask(np.ones((8, 8), dtype=bool))
        assert masked_psnr(f, g, full) == pytest.approx(psnr(f, g))

    def test_single_flag_peak_error(self):
        f = gray(np.zeros((4, 4)))
        g_arr = np.zeros((4, 4))
        g_arr[2, 2] = 255
        flags = np.zeros((4, 4), dtype=bool)
        flags[2, 2] = True
        assert masked_psnr(f, gray(g_arr), DamageMask(flags)) == pytest.approx(0.0)

    def test_empty_mask_rejected(self, ref_image):
        with pytest.raises(ValueError, match="no pixels"):
            masked_psnr(ref_image, ref_image, DamageMask(np.zeros((8, 9), bool)))

    def test_scaling_identity_under_exactness(self):
        # when unflagged pixels agree, full MSE = masked MSE * flags / pixels
        rng = np.random.default_rng(11)
        for _ in range(20):
            h, w = rng.integers(4, 30, 2)
            f_arr = rng.integers(0, 256, (h, w), dtype=np.uint8)
            flags = rng.random((h, w)) < 0.3
            if not flags.any():
                flags[0, 0] = True
            g_arr = f_arr.copy()
            g_arr[flags] = rng.integers(0, 256, int(flags.sum()), dtype=np.uint8)
            f, g = gray(f_arr), gray(g_arr)
            full_mse = mse(f, g)
            diff = f_arr[flags].astype(np.int64) - g_arr[flags].astype(np.int64)
            masked_mse = float((diff * diff).sum()) / diff.size
            expected = masked_mse * flags.sum() / flags.size
            assert full_mse == pytest.approx(expected, rel=1e-9)
