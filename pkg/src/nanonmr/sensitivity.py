"""Fisher-information sensitivity comparison of the envelope models.

The frequency estimator's precision is bounded by the inverse square
root of the total Fisher information.  For Gaussian per-point noise,

    FI_delta = sum_k (d mu_k / d delta)^2 / sigma_k^2,

with mu_k the oscillatory correlation model at the protocol's sampling
points: the measured waiting-time grid for correlation spectroscopy
(CS), the correlation-lag grid for Qdyne.  For Qdyne the per-lag sigma
follows the slice-averaging provenance (sigma_k propto 1/sqrt(count_k));
that convention is recorded in the report since nothing pins it down.

The closed-form sensitivity ratios are proportionalities, normalised to
1 at delta * T_D = 1; all downstream checks are slope or limit checks,
never absolute values, because the prefactors are non-universal.
"""

from dataclasses import dataclass

import numpy as np

from .envelopes import SignalModelParams, signal_model
from .special import expint_ei

_FD_REL_STEP = 1e-6


@dataclass
class SensitivityReport:
    protocol: str             # "CS" or "Qdyne"
    delta: float              # rad/s
    T_D: float
    T_E: float | None
    T_tot: float
    fisher_pl: float          # (rad/s)^-2
    fisher_exp: float
    ratio_closed_form: float
    conventions: str = ("Qdyne FI summed over correlation lags, per-lag "
                        "sigma from slice-average counts; CS FI summed "
                        "over the measured t grid")


def fisher_information(protocol, model_params: SignalModelParams, sampling):
    """Gaussian-noise Fisher information for the beat frequency delta.

    sampling is a dict with keys dt, n_points, and noise_sigma (scalar
    or per-point array).  The derivative d mu / d delta is taken by
    central differences.  Units: (rad/s)^-2.
    """
    if protocol not in ("CS", "Qdyne"):
        raise ValueError(f"unknown protocol {protocol!r}")
    dt = float(sampling["dt"])
    n = int(sampling["n_points"])
    sigma = np.broadcast_to(np.asarray(sampling["noise_sigma"], dtype=float),
                            (n,))
    if np.any(sigma <= 0):
        raise ValueError("noise_sigma must be positive")
    t = np.arange(n) * dt
    delta = model_params.delta
    h = _FD_REL_STEP * max(abs(delta), 1.0 / (t[-1] if n > 1 else dt))
    up = SignalModelParams(model_params.a0, model_params.a1, delta + h,
                           model_params.phi, model_params.envelope)
    dn = SignalModelParams(model_params.a0, model_params.a1, delta - h,
                           model_params.phi, model_params.envelope)
    dmu = (signal_model(t, up) - signal_model(t, dn)) / (2 * h)
    return float(np.sum((dmu / sigma) ** 2))


def sensitivity_ratio_cs(delta, T_D):
    """Closed-form eta_exp/eta_pl for correlation spectroscopy: 1/(delta T_D)."""
    if delta <= 0 or T_D <= 0:
        raise ValueError("delta and T_D must be positive")
    return 1.0 / (delta * T_D)


def sensitivity_ratio_qdyne(delta, T_D, T_tot):
    """Closed-form eta_exp/eta_pl for Qdyne: log(delta T_tot)/(delta T_D)^2."""
    if delta <= 0 or T_D <= 0 or T_tot <= 0:
        raise ValueError("delta, T_D, T_tot must be positive")
    x = delta * T_tot
    if x <= 1:
        raise ValueError(f"delta * T_tot = {x:g} must exceed 1")
    return np.log(x) / (delta * T_D) ** 2


def sensitivity_ratio_mixed(delta, T_E, T_tot):
    """Power-law vs mixed-model sensitivity ratio for Qdyne, as published:

        [Ei(-T_tot/T_E + delta*T_tot)
         + T_E^3 delta^2 sinh(T_tot/T_E) / (1 + T_E^2 delta^2)]
        / log(delta*T_tot)

    Evaluated verbatim; the stated limits (-> 0 for small T_E, -> 1 for
    large T_E) are checked downstream rather than patched in here, so
    any internal inconsistency of the printed expression surfaces there.
    """
    if delta <= 0 or T_E <= 0 or T_tot <= 0:
        raise ValueError("delta, T_E, T_tot must be positive")
    x = delta * T_tot
    if np.log(x) <= 0:
        raise ValueError(f"log(delta*T_tot) = {np.log(x):g} must be positive")
    arg = -T_tot / T_E + x
    ei = expint_ei(arg) if arg != 0 else -np.inf
    with np.errstate(over="ignore"):
        hyper = T_E ** 3 * delta ** 2 * np.sinh(T_tot / T_E) \
            / (1.0 + (T_E * delta) ** 2)
    return float((ei + hyper) / np.log(x))


def numeric_ratio_cs(delta, T_D, T_tot, dt):
    """Numeric eta_exp/eta_pl for CS: sqrt(FI_pl/FI_exp), uniform sigma.

    Sensitivity scales as 1/sqrt(FI), so the closed form 1/(delta T_D)
    corresponds to the square root of the Fisher ratio on the measured
    waiting-time grid with equal per-point noise.
    """
    from .envelopes import exponential_model, powerlaw_model

    n = int(T_tot / dt)
    sampling = {"dt": dt, "n_points": n, "noise_sigma": 1.0}
    fi = [fisher_information(
        "CS", SignalModelParams(0.0, 1.0, delta, 0.0, env), sampling)
        for env in (powerlaw_model(T_D), exponential_model(T_D))]
    return float(np.sqrt(fi[0] / fi[1]))


def numeric_ratio_qdyne(delta, T_D, T_tot, dt):
    """Numeric ratio for Qdyne: FI_pl/FI_exp over correlation lags.

    Per-lag sigma follows the slice-averaging provenance,
    sigma_k = 1/sqrt(n - k) pair counts; on this grid the plain Fisher
    ratio carries the closed form's log(delta T_tot)/(delta T_D)^2
    scaling.
    """
    from .envelopes import exponential_model, powerlaw_model

    n = int(T_tot / dt)
    sigma = 1.0 / np.sqrt(n - np.arange(n))
    sampling = {"dt": dt, "n_points": n, "noise_sigma": sigma}
    fi = [fisher_information(
        "Qdyne", SignalModelParams(0.0, 1.0, delta, 0.0, env), sampling)
        for env in (powerlaw_model(T_D), exponential_model(T_D))]
    return float(fi[0] / fi[1])


def _ratio_closed_form(protocol, delta, T_D, T_tot):
    if protocol == "CS":
        return sensitivity_ratio_cs(delta, T_D)
    return sensitivity_ratio_qdyne(delta, T_D, T_tot)


def sensitivity_report(protocol, delta, T_D, T_tot, sampling,
                       a0=0.0, a1=1.0, phi=0.0, T_E=None):
    """Numeric FI for both envelope kinds plus the matching closed form."""
    from .envelopes import exponential_model, powerlaw_model

    fis = {}
    for kind, env in (("powerlaw", powerlaw_model(T_D)),
                      ("exponential", exponential_model(T_D))):
        params = SignalModelParams(a0, a1, delta, phi, env)
        fis[kind] = fisher_information(protocol, params, sampling)
    return SensitivityReport(
        protocol=protocol, delta=delta, T_D=T_D, T_E=T_E, T_tot=T_tot,
        fisher_pl=fis["powerlaw"], fisher_exp=fis["exponential"],
        ratio_closed_form=_ratio_closed_form(protocol, delta, T_D, T_tot))
