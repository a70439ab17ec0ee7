import numpy as np
import pytest

from nanonmr.envelopes import (
    EnvelopeModel,
    SignalModelParams,
    correlation_kernel,
    exp_envelope,
    exponential_model,
    mixed_envelope,
    mixed_model,
    powerlaw_envelope,
    powerlaw_model,
    signal_model,
)

# Frozen 60-digit oracle values (tools/envelope_series_oracle.py).
POWERLAW_REFS = {
    0.01: 0.95105553340054942,
    0.05: 0.81496381051887879,
    0.1: 0.70149289394116235,
    0.5: 0.34862845706682829,
    1.0: 0.21431225932175587,
    2.0: 0.11778511041013402,
    5.0: 0.045920973874797408,
    10.0: 0.0205253659532645,
    50.0: 0.0025584149232189108,
    100.0: 0.00098185203516776738,
    200.0: 0.00036816437819822393,
    400.0: 0.00013574889624119108,
    800.0: 4.9451487249488733e-5,
}


class TestExpEnvelope:
    def test_normalisation(self):
        assert exp_envelope(0.0) == 1.0

    def test_e_inverse(self):
        assert exp_envelope(1.0) == pytest.approx(0.36787944117144233, rel=1e-14)

    def test_z3(self):
        # arbitrary-precision exp oracle value
        assert exp_envelope(3.0) == pytest.approx(0.049787068367863944, rel=1e-14)

    def test_domain(self):
        with pytest.raises(ValueError):
            exp_envelope(-0.1)


class TestPowerlawEnvelope:
    def test_frozen_references(self):
        for z, ref in POWERLAW_REFS.items():
            assert powerlaw_envelope(z) == pytest.approx(ref, rel=1e-7), z

    def test_limit_at_zero(self):
        # small-z series branch; G(0+) = 1 established by the oracle
        assert powerlaw_envelope(1e-9) == pytest.approx(1.0, abs=1e-8)

    def test_in_unit_interval(self):
        z = np.logspace(-8, 8, 500)
        g = powerlaw_envelope(z)
        assert np.all(g > 0) and np.all(g <= 1)

    def test_finite_over_huge_range(self):
        z = np.logspace(-8, 8, 4000)
        g = powerlaw_envelope(z)
        assert np.all(np.isfinite(g))

    def test_monotone_decreasing(self):
        z = np.logspace(-8, 8, 4000)
        assert np.all(np.diff(powerlaw_envelope(z)) < 0)

    def test_branch_continuity(self):
        for zc, tol in ((1e-3, 1e-7), (1e4, 1e-5)):
            lo = powerlaw_envelope(zc * (1 - 1e-6))
            hi = powerlaw_envelope(zc * (1 + 1e-6))
            assert abs(hi / lo - 1) < tol

    def test_tail_ratio_approaches_powerlaw(self):
        # The asymptotic ratio for a z^-3/2 tail is 4^-1.5 = 0.125; the
        # sub-leading z^-2 term decays slowly, so convergence sets in only
        # at very large z.
        r = powerlaw_envelope(4e6) / powerlaw_envelope(1e6)
        assert r == pytest.approx(0.125, rel=5e-3)

    def test_exp_negligible_vs_tail(self):
        assert np.exp(-50.0) / powerlaw_envelope(50.0) < 1e-6

    def test_nearly_exponential_at_short_times(self):
        z = np.linspace(1e-4, 0.05, 200)
        g = powerlaw_envelope(z)
        c = -np.polyfit(z, np.log(g), 1)[0]
        assert np.max(np.abs(g - np.exp(-c * z)) / g) < 0.10

    def test_domain(self):
        with pytest.raises(ValueError):
            powerlaw_envelope(0.0)
        with pytest.raises(ValueError):
            powerlaw_envelope(np.array([1.0, -2.0]))


class TestMixedEnvelope:
    def test_at_zero(self):
        assert mixed_envelope(0.0, 1.0, 50.0) == 1.0

    def test_huge_te_reduces_to_powerlaw(self):
        t, T_D = 0.7, 1.0
        assert mixed_envelope(t, T_D, 1e12 * T_D) == pytest.approx(
            powerlaw_envelope(t / T_D), rel=1e-12)

    def test_product_at_td(self):
        T_D = 1.0
        val = mixed_envelope(T_D, T_D, 50 * T_D)
        assert val == pytest.approx(POWERLAW_REFS[1.0] * np.exp(-0.02), rel=1e-7)

    def test_warning_when_te_not_slow(self):
        with pytest.warns(UserWarning):
            mixed_envelope(1.0, 2.0, 1.0)


class TestEnvelopeModel:
    @pytest.mark.parametrize("model", [
        exponential_model(1e-3),
        powerlaw_model(1e-3),
        mixed_model(1e-3, 5e-2),
    ])
    def test_normalised(self, model):
        assert model.evaluate(0.0) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("model", [
        exponential_model(1e-3),
        powerlaw_model(1e-3),
        mixed_model(1e-3, 5e-2),
    ])
    def test_non_increasing(self, model):
        t = np.linspace(0, 0.1, 2000)
        vals = model.evaluate(t)
        assert np.all(np.diff(vals) <= 0)

    def test_invalid_kind(self):
        with pytest.raises(ValueError):
            EnvelopeModel("gaussian", 1.0)

    def test_mixed_needs_te(self):
        with pytest.raises(ValueError):
            EnvelopeModel("mixed", 1.0)

    def test_negative_td(self):
        with pytest.raises(ValueError):
            EnvelopeModel("exponential", -1.0)


class TestSignalModel:
    def test_unit_peak_at_zero(self):
        p = SignalModelParams(0.0, 1.0, 2 * np.pi * 900, 0.0,
                              powerlaw_model(400e-6))
        assert signal_model(0.0, p) == pytest.approx(1.0, abs=1e-12)

    def test_zero_amplitude(self):
        p = SignalModelParams(0.3, 0.0, 100.0, 1.0, exponential_model(1.0))
        t = np.linspace(0, 5, 50)
        assert np.allclose(signal_model(t, p), 0.3)

    def test_half_period_no_decay(self):
        delta = 2 * np.pi * 100
        p = SignalModelParams(0.0, 1.0, delta, 0.0, exponential_model(1e30))
        assert signal_model(np.pi / delta, p) == pytest.approx(-1.0, abs=1e-9)

    def test_periodicity_without_decay(self):
        delta = 2 * np.pi * 250
        p = SignalModelParams(0.1, 0.7, delta, 1.3, exponential_model(1e30))
        t = np.linspace(0, 0.01, 97)
        assert np.allclose(signal_model(t + 2 * np.pi / delta, p),
                           signal_model(t, p), atol=1e-12)

    def test_amplitude_invariant(self):
        with pytest.raises(ValueError):
            SignalModelParams(0.0, -1.0, 1.0, 0.0, exponential_model(1.0))

    def test_phase_wrapped(self):
        p = SignalModelParams(0.0, 1.0, 1.0, 7.0, exponential_model(1.0))
        assert 0 <= p.phi < 2 * np.pi


class TestCorrelationKernel:
    def test_zero_lag_variance(self):
        env = powerlaw_model(400e-6)
        assert correlation_kernel(0.0, 0.5, 2 * np.pi * 900, env) == \
            pytest.approx(0.25, abs=1e-12)

    def test_zero_phase_noise(self):
        env = exponential_model(1.0)
        t = np.linspace(0, 3, 30)
        assert np.allclose(correlation_kernel(t, 0.0, 10.0, env), 0.0)

    def test_zero_crossing_location(self):
        # first cos zero of delta = 2 pi 900 rad/s is at t = 1/(4*900) s
        env = powerlaw_model(400e-6)
        delta = 2 * np.pi * 900
        t0 = np.pi / (2 * delta)
        assert t0 == pytest.approx(0.2778e-3, rel=1e-3)
        before = correlation_kernel(t0 * 0.99, 0.5, delta, env)
        after = correlation_kernel(t0 * 1.01, 0.5, delta, env)
        assert before > 0 > after
