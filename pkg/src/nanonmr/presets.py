"""Experiment presets for the Qdyne reproduction runs.

The six qdyne presets carry the published run parameters verbatim:
sampling period T_Qd, Larmor frequency f_L (kHz), XY8 repetition order
(N = 8 * order pi pulses), total measurement time T_tot (hours), and NV
depth d (nm).  From those the derived quantities follow:

* T_D scales as d^2 at fixed diffusion coefficient; run 1's
  independently fitted T_D = 400 us at d = 15.4 nm anchors the scale.
* the undersampling frequency delta comes from the published
  delta * T_D product for each run;
* B_rms scales as d^(-3/2) (the sqrt(N)/d^3 statistical-polarisation
  field of N ~ d^3 spins), anchored at 100 nT for run 1's depth, which
  puts Phi_rms near 0.5.

Presets cs-single and ps-single cover the two single-block protocols
with run-1 hardware numbers.
"""

from dataclasses import dataclass, field

import numpy as np

from .sensor import DDSequence, SensorConfig

HOUR = 3600.0
SLICE_SECONDS = 15 * 60.0     # slice length used by the estimator pipeline
GROUP_SLICES = 20             # slice correlations averaged per estimator
FREQ_BOUNDS_HZ = (200.0, 1800.0)

_ANCHOR_DEPTH_NM = 15.4
_ANCHOR_T_D = 400e-6          # s, fitted for run 1
_ANCHOR_B_RMS = 100e-9        # T at the anchor depth; Phi_rms ~ 0.5


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    protocol: str                  # power-spectrum | correlation-spectroscopy | qdyne
    depth_nm: float
    f_larmor_khz: float
    xy8_order: int
    T_qd_us: float                 # sampling period, microseconds
    T_tot_h: float
    delta_hz: float                # undersampling beat frequency
    T_D_s: float
    B_rms_T: float
    seed: int = 0
    fit_models: tuple = ("powerlaw", "exponential")
    freq_bounds_hz: tuple = FREQ_BOUNDS_HZ
    n_restarts: int = 60
    notes: dict = field(default_factory=dict)

    @property
    def omega_L(self):
        return 2 * np.pi * self.f_larmor_khz * 1e3

    @property
    def n_pulses(self):
        return 8 * self.xy8_order

    @property
    def T_qd(self):
        return self.T_qd_us * 1e-6

    @property
    def T_tot(self):
        return self.T_tot_h * HOUR

    @property
    def delta(self):
        return 2 * np.pi * self.delta_hz

    def sensor_config(self):
        return SensorConfig(depth_d=self.depth_nm * 1e-9, B_rms=self.B_rms_T,
                            omega_L=self.omega_L)

    def dd_sequence(self):
        return DDSequence.on_resonance(self.omega_L, self.n_pulses)


def _b_rms(depth_nm):
    return _ANCHOR_B_RMS * (_ANCHOR_DEPTH_NM / depth_nm) ** 1.5


def _t_d(depth_nm):
    return _ANCHOR_T_D * (depth_nm / _ANCHOR_DEPTH_NM) ** 2


def _qdyne(name, depth_nm, f_khz, order, t_qd_us, t_tot_h, delta_t_phi,
           **kw):
    T_D = kw.pop("T_D", _t_d(depth_nm))
    delta_hz = kw.pop("delta_hz", delta_t_phi / T_D)
    # the search region scales with the beat frequency, anchored to the
    # published 200-1800 Hz window of run 1 (delta = 900 Hz)
    bounds = kw.pop("freq_bounds_hz",
                    (delta_hz * FREQ_BOUNDS_HZ[0] / 900.0,
                     delta_hz * FREQ_BOUNDS_HZ[1] / 900.0))
    return ExperimentPreset(
        name=name, protocol="qdyne", depth_nm=depth_nm, f_larmor_khz=f_khz,
        xy8_order=order, T_qd_us=t_qd_us, T_tot_h=t_tot_h,
        delta_hz=delta_hz, T_D_s=T_D, B_rms_T=_b_rms(depth_nm),
        freq_bounds_hz=bounds, **kw)


# Published per-run parameters: (depth nm, f_L kHz, XY8 order, T_Qd us,
# T_tot h) plus the delta*T_D product in cycles.  Run 1's delta and T_D
# are pinned to their independently reported values (900 Hz, 400 us);
# run 6 is dominated by a slow extraneous decay, so its T_D came from the
# mixed-model fit rather than the depth scaling, and its beat frequency
# follows from the published product.
PRESETS = {
    "qdyne-1": _qdyne("qdyne-1", 15.4, 2009.0, 24, 49.740, 90.0, 0.36,
                      T_D=400e-6, delta_hz=900.0),
    "qdyne-2": _qdyne("qdyne-2", 15.4, 2010.0, 22, 45.607, 290.0, 3.00),
    "qdyne-3": _qdyne("qdyne-3", 15.4, 2010.0, 12, 25.516, 170.0, 4.80),
    "qdyne-4": _qdyne("qdyne-4", 8.0, 2009.0, 8, 17.524, 50.0, 1.25),
    "qdyne-5": _qdyne("qdyne-5", 8.1, 2009.0, 8, 17.552, 80.0, 1.59),
    "qdyne-6": _qdyne("qdyne-6", 11.4, 1898.0, 12, 27.788, 65.0, 16.70,
                      T_D=1.795e-3),
    "cs-single": ExperimentPreset(
        name="cs-single", protocol="correlation-spectroscopy",
        depth_nm=15.4, f_larmor_khz=2009.0, xy8_order=24, T_qd_us=49.740,
        T_tot_h=1.0, delta_hz=900.0, T_D_s=400e-6, B_rms_T=_ANCHOR_B_RMS),
    "ps-single": ExperimentPreset(
        name="ps-single", protocol="power-spectrum",
        depth_nm=15.4, f_larmor_khz=2009.0, xy8_order=24, T_qd_us=49.740,
        T_tot_h=0.5, delta_hz=900.0, T_D_s=400e-6, B_rms_T=_ANCHOR_B_RMS),
}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: "
                       f"{', '.join(sorted(PRESETS))}") from None


def qdyne_presets():
    return [PRESETS[f"qdyne-{i}"] for i in range(1, 7)]
