import numpy as np
import pytest

from nanonmr.envelopes import SignalModelParams, powerlaw_model
from nanonmr.sensitivity import (
    fisher_information,
    numeric_ratio_cs,
    numeric_ratio_qdyne,
    sensitivity_ratio_cs,
    sensitivity_ratio_mixed,
    sensitivity_ratio_qdyne,
    sensitivity_report,
)


def params(delta, a1=1.0):
    return SignalModelParams(0.0, a1, delta, 0.0, powerlaw_model(1.0))


SAMPLING = {"dt": 0.05, "n_points": 2000, "noise_sigma": 1.0}


class TestFisherInformation:
    def test_zero_amplitude_zero_information(self):
        assert fisher_information("CS", params(1.0, a1=0.0), SAMPLING) == 0.0

    def test_quadratic_noise_scaling(self):
        base = fisher_information("CS", params(1.0), SAMPLING)
        doubled = fisher_information("CS", params(1.0),
                                     dict(SAMPLING, noise_sigma=2.0))
        assert doubled == pytest.approx(base / 4.0, rel=1e-9)

    def test_positive(self):
        assert fisher_information("Qdyne", params(0.5), SAMPLING) > 0

    def test_per_point_sigma(self):
        sig = np.full(SAMPLING["n_points"], 3.0)
        a = fisher_information("CS", params(1.0),
                               dict(SAMPLING, noise_sigma=sig))
        b = fisher_information("CS", params(1.0),
                               dict(SAMPLING, noise_sigma=3.0))
        assert a == pytest.approx(b)

    def test_rejects_bad_protocol(self):
        with pytest.raises(ValueError):
            fisher_information("PS", params(1.0), SAMPLING)

    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            fisher_information("CS", params(1.0),
                               dict(SAMPLING, noise_sigma=0.0))

    def test_powerlaw_advantage_grows_at_small_delta(self):
        from nanonmr.envelopes import exponential_model

        big = {"dt": 0.05, "n_points": 40_000, "noise_sigma": 1.0}
        ratios = []
        for d in (0.2, 0.1, 0.05):
            fi = []
            for env in (powerlaw_model(1.0), exponential_model(1.0)):
                p = SignalModelParams(0.0, 1.0, d, 0.0, env)
                fi.append(fisher_information("Qdyne", p, big))
            ratios.append(fi[0] / fi[1])
        assert ratios[0] > 1
        assert ratios[2] > ratios[1] > ratios[0]


class TestClosedForms:
    def test_cs_normalisation(self):
        assert sensitivity_ratio_cs(1.0, 1.0) == 1.0
        assert sensitivity_ratio_cs(0.1, 1.0) == pytest.approx(10.0)

    def test_qdyne_value(self):
        # delta T_D = 0.1, delta T_tot = 1e3
        val = sensitivity_ratio_qdyne(0.1, 1.0, 10_000.0)
        assert val == pytest.approx(100.0 * np.log(1e3))

    def test_qdyne_t_tot_scaling(self):
        d, T_D, T = 0.5, 1.0, 100.0
        grown = sensitivity_ratio_qdyne(d, T_D, np.e * T)
        base = sensitivity_ratio_qdyne(d, T_D, T)
        assert grown / base == pytest.approx(
            np.log(np.e * d * T) / np.log(d * T))

    def test_qdyne_domain_error(self):
        with pytest.raises(ValueError):
            sensitivity_ratio_qdyne(0.1, 1.0, 5.0)

    def test_positive_argument_guards(self):
        with pytest.raises(ValueError):
            sensitivity_ratio_cs(-1.0, 1.0)
        with pytest.raises(ValueError):
            sensitivity_ratio_mixed(0.1, -1.0, 100.0)


class TestNumericSlopes:
    def test_cs_slope_minus_one(self):
        deltas = np.geomspace(0.02, 0.5, 7)
        r = [numeric_ratio_cs(d, 1.0, 2000.0, 0.05) for d in deltas]
        slope = np.polyfit(np.log(deltas), np.log(r), 1)[0]
        assert slope == pytest.approx(-1.0, abs=0.15)

    def test_qdyne_slope_minus_two_with_log(self):
        T_tot = 2000.0
        deltas = np.geomspace(0.02, 0.5, 7)
        r = np.array([numeric_ratio_qdyne(d, 1.0, T_tot, 0.05)
                      for d in deltas])
        divided = r / np.log(deltas * T_tot)
        slope = np.polyfit(np.log(deltas), np.log(divided), 1)[0]
        assert slope == pytest.approx(-2.0, abs=0.2)


class TestMixedExpression:
    """Limit checks of the published mixed-model expression, verbatim.

    The printed formula fails all three stated limits: the sinh term
    diverges instead of vanishing for small T_E, tends to T_tot (not
    zero) relative to Ei for large T_E, and dominates everywhere inside
    the domain delta * T_tot > 1, so the delta -> 0 decay never
    materialises either.  The failures are asserted as failures rather
    than patched over.
    """

    T_TOT = 100.0
    DELTA = 0.05   # delta * T_tot = 5 > 1

    @pytest.mark.xfail(reason="published expression: the sinh term keeps "
                              "the ratio large for every delta inside the "
                              "domain delta T_tot > 1",
                       strict=True)
    def test_delta_to_zero_limit(self):
        vals = [sensitivity_ratio_mixed(d, 10.0, 1000.0)
                for d in (0.05, 0.02, 0.005)]
        assert abs(vals[-1]) < abs(vals[0])
        assert abs(vals[-1]) < 0.2

    @pytest.mark.xfail(reason="published expression: sinh term diverges "
                              "instead of vanishing for small T_E",
                       strict=True)
    def test_small_t_e_limit(self):
        vals = [sensitivity_ratio_mixed(self.DELTA, te, self.T_TOT)
                for te in (2.0, 1.0, 0.5)]
        assert all(np.isfinite(vals))
        assert abs(vals[-1]) < abs(vals[0])
        assert abs(vals[-1]) < 0.1

    @pytest.mark.xfail(reason="published expression: numerator tends to "
                              "Ei(delta T_tot) + T_tot, not log(delta T_tot), "
                              "for large T_E",
                       strict=True)
    def test_large_t_e_limit(self):
        val = sensitivity_ratio_mixed(self.DELTA, 1e6, self.T_TOT)
        assert val == pytest.approx(1.0, abs=0.1)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            sensitivity_ratio_mixed(0.001, 10.0, 100.0)  # log <= 0


class TestReport:
    def test_fields_and_invariants(self):
        rep = sensitivity_report("Qdyne", 0.5, 1.0, 2000.0, SAMPLING)
        assert rep.fisher_pl >= 0 and rep.fisher_exp >= 0
        assert rep.ratio_closed_form == pytest.approx(
            sensitivity_ratio_qdyne(0.5, 1.0, 2000.0))
        assert "correlation lags" in rep.conventions
