"""End-to-end Qdyne signal simulation and the matching analysis pipeline.

Simulation chain per readout k (sampling period T_Qd):

    quadratures A_k, D_k  ->  Phi_k = (2/pi) gamma_e N tau
                                       (A_k cos(delta t_k) + D_k sin(delta t_k))
    ->  p0 = (1 - sin Phi_k) / 2  ->  Bernoulli state  ->  Poisson photons

The quadratures are stationary with autocovariance B_rms^2 C(t/T_D), so
the photon-count autocorrelation carries the oscillatory kernel
Phi_rms^2 cos(delta t) C(t/T_D) that the estimation pipeline fits.
The "exponential" comparison traces use an OU source fitted to the
diffusion correlation (variance matched, correlation time ~ 0.6 T_D),
mirroring how such comparison data sets are produced in practice.

Desk scaling: a ``scale`` factor shrinks each 15-minute slice to
scale * 15 min while keeping the slice count (so a 90 h run still yields
18 estimator groups).  The lost averaging is compensated by brighter
readouts, photon_gain = GAIN_CALIBRATION/sqrt(scale) by default, which
keeps the per-group correlation signal-to-noise near the full-scale
value.

Slices are generated independently: the estimator only ever uses
intra-slice lags, and slice-to-slice correlations average out of the
analysis anyway.
"""

from dataclasses import dataclass, field

import numpy as np

from .correlate import autocorrelate, fft_spectrum, slice_average
from .fitting import default_bounds, global_fit, local_fit
from .noise import generate_ou_quadratures, generate_powerlaw_gp
from .presets import GROUP_SLICES, SLICE_SECONDS, ExperimentPreset
from .sensor import SensorConfig, phi_rms
from .stats import flat_histogram_limit, histogram_stats, rmse_ratio

_GENERATORS = {
    "exponential": generate_ou_quadratures,
    "powerlaw": generate_powerlaw_gp,
}

# brightness calibration of the desk-scale default photon gain,
# photon_gain = GAIN_CALIBRATION / sqrt(scale).  The value is tuned once
# so that preset-1 at scale ~ 2e-3 sits in the discriminating regime:
# power-law-generated runs resolve the beat (global-fit rmse ~ 230 Hz
# over 18 groups, below the correct model's and the mismatched model's
# spreads alike) while OU-generated runs stay at the flat-histogram
# limit for both candidate models.
GAIN_CALIBRATION = 2.0


def ou_equivalent_time(T_D, span_tds=5.0):
    """Correlation time of the OU process best fitting the diffusion decay.

    The exponential-model comparison traces come from an OU source whose
    parameters are fitted to the power-law correlation (variance matched,
    exp(-t/tau) least-squares against the diffusion envelope over
    span_tds * T_D).  The fit lands near tau = 0.6 T_D because the
    diffusion envelope front-loads its decay; using T_D itself would
    overstate the exponential model's coherence.
    """
    from scipy.optimize import minimize_scalar

    from .envelopes import powerlaw_envelope

    z = np.linspace(0.0, span_tds, 1000)[1:]
    g = powerlaw_envelope(z)
    res = minimize_scalar(lambda tau: np.sum((np.exp(-z / tau) - g) ** 2),
                          bounds=(0.05, 3.0), method="bounded")
    return float(res.x) * T_D


@dataclass
class QdyneRun:
    counts: np.ndarray          # photon counts, one per readout
    preset: ExperimentPreset
    model_kind: str
    scale: float
    seed: int
    slice_len: int              # readouts per slice
    n_slices: int
    photon_gain: float
    meta: dict = field(default_factory=dict)


def _scaled_sensor(preset, photon_gain):
    base = preset.sensor_config()
    return SensorConfig(depth_d=base.depth_d, B_rms=base.B_rms,
                        omega_L=base.omega_L, gamma_e=base.gamma_e,
                        eta0=base.eta0 * photon_gain,
                        eta1=base.eta1 * photon_gain,
                        eta_ref=base.eta_ref,
                        T1=base.T1, T2=base.T2)


def simulate_qdyne(preset: ExperimentPreset, model_kind, scale=1.0, seed=0,
                   photon_gain=None, max_slices=360):
    """Simulate a Qdyne photon-count trace for a preset geometry.

    model_kind selects the quadrature noise: "exponential" (OU) or
    "powerlaw" (Gaussian process against the diffusion envelope).
    Returns a QdyneRun whose counts concatenate all slices in order.
    """
    if model_kind not in _GENERATORS:
        raise ValueError(f"cannot simulate model kind {model_kind!r}; "
                         f"choose from {sorted(_GENERATORS)}")
    if not (0 < scale <= 1):
        raise ValueError("scale must be in (0, 1]")
    if photon_gain is None:
        photon_gain = GAIN_CALIBRATION / np.sqrt(scale)
    cfg = _scaled_sensor(preset, photon_gain)
    seq = preset.dd_sequence()
    dt = preset.T_qd
    # the exponential comparison source is the OU fit to the diffusion
    # correlation, not an OU at T_D itself (see ou_equivalent_time)
    T_D = preset.T_D_s if model_kind == "powerlaw" \
        else ou_equivalent_time(preset.T_D_s)
    slice_len = int(round(SLICE_SECONDS * scale / dt))
    n_slices = min(int(round(preset.T_tot / SLICE_SECONDS)), max_slices)
    # the generators insist on dt < T_D / 10 for sampling fidelity;
    # oversample and stride when the readout period is coarser than that
    over = max(1, int(np.ceil(10.0 * dt / T_D)) + 0)
    while dt / over >= T_D / 10:
        over += 1
    gen = _GENERATORS[model_kind]

    # the phase picked up per unit quadrature field in one DD block
    unit_phase = phi_rms(cfg, seq) / cfg.B_rms
    t_k = np.arange(slice_len) * dt
    cos_d = np.cos(preset.delta * t_k)
    sin_d = np.sin(preset.delta * t_k)

    root = np.random.SeedSequence(seed)
    noise_seeds, photon_seeds = root.spawn(2)
    noise_children = noise_seeds.spawn(n_slices)
    photon_children = photon_seeds.spawn(n_slices)
    counts = np.empty(n_slices * slice_len, dtype=np.int64)
    for s in range(n_slices):
        tr = gen(cfg.B_rms, T_D, slice_len * over, dt / over,
                 noise_children[s])
        a = tr.a[::over][:slice_len]
        d = tr.d[::over][:slice_len]
        phi = unit_phase * (a * cos_d + d * sin_d)
        p0 = 0.5 * (1.0 - np.sin(phi))
        rng = np.random.default_rng(photon_children[s])
        bright = rng.random(slice_len) < p0
        eta = np.where(bright, cfg.eta0, cfg.eta1)
        counts[s * slice_len:(s + 1) * slice_len] = rng.poisson(eta)
    return QdyneRun(counts=counts, preset=preset, model_kind=model_kind,
                    scale=scale, seed=seed, slice_len=slice_len,
                    n_slices=n_slices, photon_gain=photon_gain,
                    meta={"phi_rms": phi_rms(cfg, seq),
                          "oversample": over})


def default_max_lag(preset: ExperimentPreset, slice_len):
    """Lag horizon covering ~16 beat periods and >= 10 T_D."""
    dt = preset.T_qd
    lag = int(np.ceil(max(16.0 / (preset.delta_hz * dt),
                          10.0 * preset.T_D_s / dt)))
    return min(lag, slice_len // 2 - 1)


@dataclass
class QdyneAnalysis:
    stats: dict                 # model kind -> HistogramStats
    ratio: float                # rmse powerlaw / rmse exponential
    flat_limit_hz: float
    peak_freq_hz: float | None
    fwhm_hz: float | None
    group_fits: dict            # model kind -> list[FitResult]
    meta: dict = field(default_factory=dict)


def analyze_qdyne(run: QdyneRun, models=("powerlaw", "exponential"),
                  mode="global", n_restarts=60, seed=0, max_lag=None,
                  fix_phase=False, fixed_a1=None, reference_hz=None):
    """Slice, average, fit, and score a Qdyne run.

    mode "global" uses multi-restart fits, "local" a single FFT-seeded
    fit per group.  The rmse reference defaults to the generating beat
    frequency (synthetic truth); pass reference_hz to override (e.g. the
    full-trace FFT peak for experiment-style data).
    """
    preset = run.preset
    dt = preset.T_qd
    if max_lag is None:
        max_lag = default_max_lag(preset, run.slice_len)
    groups = slice_average(run.counts.astype(float), run.slice_len,
                           GROUP_SLICES, max_lag, dt)
    bounds_hz = preset.freq_bounds_hz
    bounds_rad = (2 * np.pi * bounds_hz[0], 2 * np.pi * bounds_hz[1])
    full_ac = autocorrelate(run.counts.astype(float),
                            min(max_lag * 4, run.slice_len // 2 - 1), dt)
    spec = fft_spectrum(full_ac, freq_range=bounds_hz)
    if reference_hz is None:
        reference_hz = preset.delta_hz
    # lag 0 carries the readout shot-noise variance, not signal
    fit_weights = np.ones(max_lag + 1)
    fit_weights[0] = 0.0

    stats = {}
    group_fits = {}
    rng = np.random.default_rng(seed)
    for kind in models:
        fits = []
        for g, ac in enumerate(groups):
            bounds = default_bounds(ac, kind, bounds_hz)
            fixed_mask = []
            fixed_values = {}
            if fix_phase:
                fixed_mask.append("phi")
                fixed_values["phi"] = 0.0
            if fixed_a1 is not None:
                fixed_mask.append("a1")
                fixed_values["a1"] = fixed_a1
            if mode == "global":
                fit = global_fit(ac, kind, bounds, n_restarts=n_restarts,
                                 seed=int(rng.integers(2 ** 63)),
                                 fixed_mask=fixed_mask or None,
                                 fixed_values=fixed_values or None,
                                 weights=fit_weights)
            else:
                # seed from the full-trace spectrum: a single group's FFT
                # is dominated by the envelope's low-frequency lobe
                fit = local_fit(ac, kind, spec,
                                bounds, fix_phase=fix_phase,
                                fixed_a1=fixed_a1, weights=fit_weights)
            fits.append(fit)
        group_fits[kind] = fits
        est = np.array([f.params.delta for f in fits])
        est = np.clip(est, *bounds_rad)
        stats[kind] = histogram_stats(est, 2 * np.pi * reference_hz,
                                      bounds_rad)
    ratio = np.nan
    if "powerlaw" in stats and "exponential" in stats:
        ratio = rmse_ratio(stats["powerlaw"], stats["exponential"])
    flat = flat_histogram_limit(bounds_rad, 2 * np.pi * reference_hz)
    return QdyneAnalysis(stats=stats, ratio=ratio,
                         flat_limit_hz=flat / (2 * np.pi),
                         peak_freq_hz=spec.peak_freq, fwhm_hz=spec.fwhm,
                         group_fits=group_fits,
                         meta={"max_lag": max_lag, "mode": mode,
                               "n_groups": len(groups),
                               "reference_hz": reference_hz})
