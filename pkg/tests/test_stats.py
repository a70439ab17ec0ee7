import numpy as np
import pytest

from nanonmr.stats import (
    depth_calibration,
    estimate_depth,
    estimate_diffusion,
    flat_histogram_limit,
    histogram_stats,
    rmse_ratio,
)


class TestHistogramStats:
    def test_rmse_definition(self):
        est = np.array([1.0, 2.0, 3.0])
        st = histogram_stats(est, 2.0, (0.0, 5.0))
        assert st.rmse == pytest.approx(np.sqrt(2.0 / 3.0))
        assert st.mean == 2.0

    def test_rmse_hz(self):
        st = histogram_stats([2 * np.pi * 100, 2 * np.pi * 120],
                             2 * np.pi * 110, (0, 2 * np.pi * 200))
        assert st.rmse_hz == pytest.approx(10.0)

    def test_needs_two(self):
        with pytest.raises(ValueError):
            histogram_stats([1.0], 1.0, (0, 2))

    def test_bounds_enforced(self):
        with pytest.raises(ValueError):
            histogram_stats([1.0, 7.0], 1.0, (0, 5))


class TestRmseRatio:
    def test_ratio(self):
        a = histogram_stats([0.0, 2.0], 1.0, (-1, 3))
        b = histogram_stats([0.5, 1.5], 1.0, (-1, 3))
        assert rmse_ratio(a, b) == pytest.approx(2.0)

    def test_size_mismatch(self):
        a = histogram_stats([0.0, 2.0, 1.0], 1.0, (-1, 3))
        b = histogram_stats([0.5, 1.5], 1.0, (-1, 3))
        with pytest.raises(ValueError):
            rmse_ratio(a, b)

    def test_zero_denominator(self):
        a = histogram_stats([0.0, 2.0], 1.0, (-1, 3))
        b = histogram_stats([1.0, 1.0], 1.0, (-1, 3))
        with pytest.raises(ZeroDivisionError):
            rmse_ratio(a, b)


class TestFlatLimit:
    def test_centred_reference(self):
        # width W, reference at centre: rmse = W / sqrt(12)
        assert flat_histogram_limit((0.0, 12.0), 6.0) == pytest.approx(
            12.0 / np.sqrt(12.0))

    def test_offset_reference(self):
        lim = flat_histogram_limit((0.0, 12.0), 2.0)
        assert lim == pytest.approx(np.sqrt(12.0 + 16.0))

    def test_monte_carlo_agreement(self):
        rng = np.random.default_rng(0)
        draws = rng.uniform(200.0, 1800.0, 2_000_000)
        mc = np.sqrt(np.mean((draws - 900.0) ** 2))
        assert flat_histogram_limit((200.0, 1800.0), 900.0) == pytest.approx(
            mc, rel=1e-3)

    def test_published_search_region_value(self):
        # 200-1800 Hz region, 900 Hz reference
        lim = flat_histogram_limit((200.0, 1800.0), 900.0)
        assert lim == pytest.approx(472.58, abs=0.01)


class TestPhysicalEstimates:
    def test_depth_roundtrip(self):
        calib = depth_calibration(2.9e-9, 250e-9)
        assert estimate_depth(250e-9, calib) == pytest.approx(2.9e-9)

    def test_depth_scaling(self):
        calib = depth_calibration(1.0e-9, 100e-9)
        # field 8x weaker -> distance 4x larger (B ~ d^(-3/2))
        assert estimate_depth(100e-9 / 8, calib) == pytest.approx(
            4.0e-9, rel=1e-12)

    def test_diffusion(self):
        assert estimate_diffusion(2.0e-9, 8e-6) == pytest.approx(5e-13)

    def test_positivity_guards(self):
        with pytest.raises(ValueError):
            estimate_depth(-1.0, 1.0)
        with pytest.raises(ValueError):
            estimate_diffusion(1.0, 0.0)
