"""Estimator-ensemble statistics and physical-parameter extraction.

Each averaged correlation group yields one frequency estimator; the
spread of those estimators around a reference frequency (the known truth
for synthetic data, the full-trace FFT peak otherwise) is the
model-comparison metric.  A histogram flat over the search region is the
no-information baseline: rmse_flat = sqrt(W^2/12 + (centre - ref)^2) for
a width-W region.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class HistogramStats:
    estimators: np.ndarray    # rad/s
    reference: float          # rad/s
    rmse: float               # rad/s
    mean: float               # rad/s
    std: float                # rad/s
    search_bounds: tuple      # (lo, hi) rad/s

    @property
    def rmse_hz(self):
        return self.rmse / (2 * np.pi)


def histogram_stats(estimators, reference, bounds):
    """rmse/mean/std of a frequency-estimator ensemble about a reference."""
    est = np.asarray(estimators, dtype=float)
    if est.size < 2:
        raise ValueError("need at least 2 estimators")
    lo, hi = bounds
    if np.any((est < lo - 1e-9 * (hi - lo)) | (est > hi + 1e-9 * (hi - lo))):
        raise ValueError("estimators outside the search bounds")
    rmse = float(np.sqrt(np.mean((est - reference) ** 2)))
    return HistogramStats(est, float(reference), rmse, float(est.mean()),
                          float(est.std()), (float(lo), float(hi)))


def rmse_ratio(stats_pl: HistogramStats, stats_exp: HistogramStats):
    """rmse ratio power-law / exponential for matched ensembles."""
    if stats_pl.estimators.size != stats_exp.estimators.size:
        raise ValueError("ensembles must have the same estimator count")
    if stats_exp.rmse == 0:
        raise ZeroDivisionError("exponential-model rmse is zero")
    return stats_pl.rmse / stats_exp.rmse


def flat_histogram_limit(bounds, reference):
    """rmse of estimators uniform over the search region (rad/s in, rad/s out).

    For a width-W region centred at c this is sqrt(W^2/12 + (c - ref)^2).
    """
    lo, hi = bounds
    w = hi - lo
    c = 0.5 * (lo + hi)
    return float(np.sqrt(w ** 2 / 12 + (c - reference) ** 2))


def estimate_depth(B_rms, calib):
    """Sensor-sample distance from the fitted field scale, d = calib B_rms^(-2/3).

    The calibration constant absorbs the nuclear moment density (the
    field of N ~ d^3 statistically polarised spins scales as
    sqrt(N)/d^3 = d^(-3/2), so d and B_rms tie through a -2/3 power).
    """
    if B_rms <= 0 or calib <= 0:
        raise ValueError("B_rms and calib must be positive")
    return calib * B_rms ** (-2.0 / 3.0)


def depth_calibration(d_ref, B_rms_ref):
    """Calibration constant such that estimate_depth(B_rms_ref) = d_ref."""
    return d_ref * B_rms_ref ** (2.0 / 3.0)


def estimate_diffusion(d, T_D):
    """Diffusion coefficient from depth and diffusion time, D = d^2 / T_D."""
    if d <= 0 or T_D <= 0:
        raise ValueError("d and T_D must be positive")
    return d ** 2 / T_D
