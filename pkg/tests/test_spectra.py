import numpy as np
import pytest

from nanonmr.envelopes import exponential_model, mixed_model, powerlaw_model
from nanonmr.spectra import (
    fit_small_omega_cusp,
    loglog_slope,
    lorentzian_spectrum,
    numeric_spectrum,
)

T_D = 1.0
OMEGA_D = 2 * np.pi / T_D


class TestExponentialSpectrum:
    def test_matches_lorentzian_closed_form(self):
        w = np.linspace(0.0, 20 * OMEGA_D, 31)
        spec = numeric_spectrum(exponential_model(T_D), 0.0, w)
        ref = lorentzian_spectrum(w, 0.0, T_D)
        assert np.max(np.abs(spec.values / ref - 1)) < 0.005

    def test_carrier_shifts_peak(self):
        delta = 5.0 / T_D
        w = np.linspace(0.0, 10.0, 41)
        spec = numeric_spectrum(exponential_model(T_D), delta, w)
        assert w[np.argmax(spec.values)] == pytest.approx(delta, abs=0.3)

    def test_parabolic_top(self):
        x = np.geomspace(0.001, 0.05, 20)
        spec = numeric_spectrum(exponential_model(T_D), 0.0, x * OMEGA_D)
        _, _, p = fit_small_omega_cusp(spec)
        assert p == pytest.approx(2.0, abs=0.2)

    def test_parseval(self):
        # integral of S over the resolved band = pi C(0), one-sided
        w = np.concatenate([np.linspace(0, 2 * OMEGA_D, 60)[1:],
                            np.geomspace(2 * OMEGA_D, 300 * OMEGA_D, 60)])
        w = np.concatenate(([0.0], w))
        spec = numeric_spectrum(exponential_model(T_D), 0.0, w)
        integral = np.trapezoid(spec.values, w)
        assert integral == pytest.approx(np.pi, rel=0.01)


class TestPowerLawSpectrum:
    def test_finite_at_zero(self):
        spec = numeric_spectrum(powerlaw_model(T_D), 0.0, [0.0])
        assert np.isfinite(spec.values[0])
        assert spec.values[0] > 0

    def test_sqrt_cusp_coefficient(self):
        # S(0) - S(omega) -> 2 K sqrt(2 pi omega) with K the tail constant
        from nanonmr.envelopes import TAIL_PREFACTOR

        x = np.array([0.0, 1e-6, 4e-6])
        spec = numeric_spectrum(powerlaw_model(T_D), 0.0, x * OMEGA_D)
        diff = spec.values[0] - spec.values[1:]
        coef = diff / np.sqrt(x[1:] * OMEGA_D)
        assert np.allclose(coef, 2 * TAIL_PREFACTOR * np.sqrt(2 * np.pi),
                           rtol=0.02)

    def test_cusp_exponent_deep_window(self):
        # the sqrt law emerges for omega well below the second tail
        # term's crossover scale
        x = np.geomspace(1e-6, 1e-4, 15)
        spec = numeric_spectrum(powerlaw_model(T_D), 0.0, x * OMEGA_D)
        _, _, p = fit_small_omega_cusp(spec, window=(1e-6, 1e-4))
        assert p == pytest.approx(0.5, abs=0.05)

    def test_large_omega_lorentzian_slope(self):
        x = np.geomspace(10, 100, 12)
        spec = numeric_spectrum(powerlaw_model(T_D), 0.0, x * OMEGA_D)
        assert loglog_slope(x, spec.values) == pytest.approx(-2.0, abs=0.1)

    def test_parseval_with_tail_completion(self):
        w = np.concatenate([np.linspace(0, 2 * OMEGA_D, 60)[1:],
                            np.geomspace(2 * OMEGA_D, 300 * OMEGA_D, 60)])
        w = np.concatenate(([0.0], w))
        spec = numeric_spectrum(powerlaw_model(T_D), 0.0, w)
        integral = np.trapezoid(spec.values, w)
        assert integral == pytest.approx(np.pi, rel=0.03)


class TestMixedSpectrum:
    T_E = 50.0 * T_D

    def test_tracks_powerlaw_above_cutoff(self):
        x = np.geomspace(0.5, 5.0, 8)   # omega >> 1/T_E = 0.02 rad/s
        mixed = numeric_spectrum(mixed_model(T_D, self.T_E), 0.0, x * OMEGA_D)
        pl = numeric_spectrum(powerlaw_model(T_D), 0.0, x * OMEGA_D)
        assert np.max(np.abs(mixed.values / pl.values - 1)) < 0.02

    def test_flat_top_below_cutoff(self):
        x = np.geomspace(1e-5, 0.0016, 8)   # omega <= 0.5 / T_E
        spec = numeric_spectrum(mixed_model(T_D, self.T_E), 0.0, x * OMEGA_D)
        assert np.ptp(spec.values) / spec.values[0] < 0.05

    def test_innermost_cusp_rounds_to_parabola(self):
        x = np.geomspace(2e-5, 1e-3, 12)
        spec = numeric_spectrum(mixed_model(T_D, self.T_E), 0.0, x * OMEGA_D)
        _, _, p = fit_small_omega_cusp(spec, window=(2e-5, 1e-3))
        assert p == pytest.approx(2.0, abs=0.3)


class TestInterface:
    def test_rejects_negative_omega(self):
        with pytest.raises(ValueError):
            numeric_spectrum(exponential_model(T_D), 0.0, [-1.0])

    def test_cusp_window_too_narrow(self):
        x = np.array([0.0, 0.01, 0.2]) * OMEGA_D
        spec = numeric_spectrum(exponential_model(T_D), 0.0, x)
        with pytest.raises(ValueError):
            fit_small_omega_cusp(spec, window=(0.001, 0.002))

    def test_metadata(self):
        spec = numeric_spectrum(powerlaw_model(2.0), 1.0, [0.0, 1.0])
        assert spec.model_tag == "powerlaw"
        assert spec.omega_D == pytest.approx(np.pi)
        assert spec.meta["horizon"] >= 200 * 2.0
