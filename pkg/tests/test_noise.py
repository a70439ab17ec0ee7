import numpy as np
import pytest

from nanonmr.envelopes import powerlaw_envelope
from nanonmr.noise import (
    NoiseTrace,
    generate_ou_quadratures,
    generate_powerlaw_gp,
)


def sample_autocov(x, max_lag):
    """Biased-then-corrected autocovariance via FFT (mean removed)."""
    x = x - x.mean()
    n = x.size
    xf = np.fft.rfft(x, 2 * n)
    ac = np.fft.irfft(xf * np.conj(xf))[:max_lag + 1]
    return ac / (n - np.arange(max_lag + 1))


def bartlett_se(x, max_lag):
    """Large-lag standard error of the sample autocovariance.

    var(C_hat(k)) ~ (1/n) sum_j (C(j)^2 + C(j+k) C(j-k)); the first term
    dominates at large k, so se ~ sqrt(2 sum C^2 / n) is used uniformly.
    """
    n = x.size
    c = sample_autocov(x, min(n // 4, 20000))
    return np.sqrt(2.0 * np.sum(c ** 2) / n)


class TestOU:
    def test_lag0_variance(self):
        tr = generate_ou_quadratures(2.0, 1.0, 2 * 10 ** 6, 0.05, 5)
        var = 0.5 * (tr.a.var() + tr.d.var())
        assert var == pytest.approx(4.0, rel=0.01)

    def test_autocovariance_matches_exponential(self):
        B, T_D, dt, n = 1.0, 1.0, 0.02, 10 ** 6
        tr = generate_ou_quadratures(B, T_D, n, dt, 17)
        se = bartlett_se(tr.a, 200)
        ac = sample_autocov(tr.a, int(3 * T_D / dt))
        lags = np.arange(ac.size) * dt
        target = B ** 2 * np.exp(-lags / T_D)
        assert np.max(np.abs(ac - target)) < 5 * se

    def test_quadratures_independent(self):
        tr = generate_ou_quadratures(1.0, 1.0, 10 ** 6, 0.02, 21)
        rho = np.corrcoef(tr.a, tr.d)[0, 1]
        assert abs(rho) < 5 / np.sqrt(tr.n / (1.0 / 0.02))

    def test_deterministic(self):
        a = generate_ou_quadratures(1.0, 1.0, 1000, 0.02, 99)
        b = generate_ou_quadratures(1.0, 1.0, 1000, 0.02, 99)
        assert np.array_equal(a.a, b.a) and np.array_equal(a.d, b.d)

    def test_stationarity_halves(self):
        tr = generate_ou_quadratures(1.0, 1.0, 10 ** 6, 0.02, 3)
        x = tr.a
        half = x.size // 2
        # standard error of a half-trace mean of correlated samples
        se = np.sqrt(2 * (1.0 / 0.02) / half)
        assert abs(x[:half].mean() - x.mean()) < 5 * se

    def test_coarse_step_rejected(self):
        with pytest.raises(ValueError):
            generate_ou_quadratures(1.0, 1.0, 100, 0.2, 0)

    def test_gaussianity(self):
        tr = generate_ou_quadratures(1.0, 1.0, 10 ** 6, 0.02, 8)
        x = tr.a / tr.a.std()
        kurt = np.mean(x ** 4) - 3.0
        assert abs(kurt) < 0.05


class TestPowerlawGP:
    def test_lag0_variance(self):
        tr = generate_powerlaw_gp(1.5, 1.0, 10 ** 6, 0.02, 11)
        assert tr.a.var() == pytest.approx(1.5 ** 2, rel=0.01)

    def test_autocovariance_matches_envelope(self):
        B, T_D, dt, n = 1.0, 1.0, 0.02, 10 ** 6
        tr = generate_powerlaw_gp(B, T_D, n, dt, 13)
        se = bartlett_se(tr.a, 500)
        max_lag = int(5 * T_D / dt)
        ac = sample_autocov(tr.a, max_lag)
        lags = np.arange(1, max_lag + 1) * dt
        target = np.concatenate([[B ** 2],
                                 B ** 2 * powerlaw_envelope(lags / T_D)])
        assert np.max(np.abs(ac - target)) < 5 * se

    def test_ensemble_mean_unbiased(self):
        # ensemble-averaged autocovariance converges on the target
        B, T_D, dt, n = 1.0, 1.0, 0.05, 2 ** 13
        reps = 60
        acc = np.zeros(n // 4 + 1)
        for s in range(reps):
            tr = generate_powerlaw_gp(B, T_D, n, dt, 4000 + s)
            acc += sample_autocov(tr.a, n // 4) / reps
        lags = np.arange(1, n // 4 + 1) * dt
        target = np.concatenate([[1.0], powerlaw_envelope(lags / T_D)])
        tr0 = generate_powerlaw_gp(B, T_D, n, dt, 4000)
        se = bartlett_se(tr0.a, n // 4) / np.sqrt(reps)
        keep = lags <= 3 * T_D
        assert np.max(np.abs(acc[1:][keep] - target[1:][keep])) < 5 * se

    def test_clipped_mass_reported(self):
        tr = generate_powerlaw_gp(1.0, 1.0, 10 ** 5, 0.02, 2)
        assert tr.meta["clipped_mass"] <= 1e-3

    def test_deterministic(self):
        a = generate_powerlaw_gp(1.0, 1.0, 4096, 0.02, 31)
        b = generate_powerlaw_gp(1.0, 1.0, 4096, 0.02, 31)
        assert np.array_equal(a.a, b.a)

    def test_gaussianity(self):
        tr = generate_powerlaw_gp(1.0, 1.0, 10 ** 6, 0.02, 44)
        x = tr.a / tr.a.std()
        kurt = np.mean(x ** 4) - 3.0
        assert abs(kurt) < 0.05

    def test_coarse_step_rejected(self):
        with pytest.raises(ValueError):
            generate_powerlaw_gp(1.0, 1.0, 100, 0.5, 0)


class TestNoiseTrace:
    def test_field_composition(self):
        tr = generate_ou_quadratures(1.0, 1.0, 1000, 0.02, 1)
        omega = 2 * np.pi * 3.0
        b = tr.field_at(omega)
        t = np.arange(1000) * 0.02
        expect = tr.a * np.cos(omega * t) + tr.d * np.sin(omega * t)
        assert np.allclose(b, expect)

    def test_bad_tag(self):
        with pytest.raises(ValueError):
            NoiseTrace(dt=0.1, seed=0, model_tag="bogus",
                       samples=np.zeros(4))

    def test_needs_payload(self):
        with pytest.raises(ValueError):
            NoiseTrace(dt=0.1, seed=0, model_tag="OU-exponential")
