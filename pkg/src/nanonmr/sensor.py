"""NV measurement chain: phase accumulation under dynamical decoupling,
protocol readout contrasts, and photon statistics.

A sensing block is a train of N instantaneous pi pulses with spacing tau.
The spin picks up phase Phi = integral of gamma_e B(t) f(t) dt where the
modulation function f(t) flips between +1 and -1 at each pulse centre
(tau/2 + k tau).  On resonance (tau = pi / omega_L) a field quadrature
A cos(omega_L t) rectifies to Phi = (2/pi) gamma_e A N tau.

Two readout conventions coexist:

* correlation spectroscopy normalises by a reference photon rate, so the
  signal is c_max sin(Phi_1) sin(Phi_2);
* Qdyne stores raw readouts, (c_max/2) sin(Phi) population deviation,
  photon counts left un-normalised.
"""

import warnings
from dataclasses import dataclass

import numpy as np

GAMMA_E = 1.760859627e11  # rad s^-1 T^-1, electron gyromagnetic ratio


@dataclass(frozen=True)
class SensorConfig:
    """Physical parameters of the NV sensor and its photon readout."""

    depth_d: float            # m
    B_rms: float              # T
    omega_L: float            # rad/s nuclear Larmor frequency
    gamma_e: float = GAMMA_E  # rad s^-1 T^-1
    eta0: float = 0.04        # photons per readout, spin 0
    eta1: float = 0.03        # photons per readout, spin 1
    eta_ref: float = 0.035    # photons per readout, reference branch
    T1: float = 5e-3          # s
    T2: float = 100e-6        # s

    def __post_init__(self):
        if not (0 < self.eta1 < self.eta0):
            raise ValueError("need 0 < eta1 < eta0")
        if self.depth_d <= 0 or self.B_rms <= 0:
            raise ValueError("depth_d and B_rms must be positive")
        if not (self.T1 > self.T2 > 0):
            raise ValueError("need T1 > T2 > 0")

    @property
    def c_max(self):
        """Maximum readout contrast (eta0 - eta1) / eta_ref."""
        return (self.eta0 - self.eta1) / self.eta_ref


@dataclass(frozen=True)
class DDSequence:
    """Pi-pulse train: N pulses, spacing tau, centres at tau/2 + k tau."""

    n_pulses: int
    tau: float                # s
    family: str = "XY8"       # pulse-phase bookkeeping tag only

    def __post_init__(self):
        if self.n_pulses < 1:
            raise ValueError("n_pulses must be >= 1")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.family not in ("XY8", "KDD4"):
            raise ValueError(f"unknown sequence family {self.family!r}")

    @property
    def total_duration(self):
        return self.n_pulses * self.tau

    def pulse_times(self):
        """Pulse-centre times relative to the block start."""
        return self.tau / 2 + self.tau * np.arange(self.n_pulses)

    @classmethod
    def on_resonance(cls, omega_L, n_pulses, family="XY8"):
        """Sequence with tau = pi / omega_L (centre of the filter band)."""
        return cls(n_pulses, np.pi / omega_L, family)


def _sinc(x):
    # unnormalised sinc, sin(x)/x with the removable singularity filled
    return np.sinc(np.asarray(x) / np.pi)


def phi_rms(cfg: SensorConfig, seq: DDSequence):
    """Root-mean-square phase accumulated in one DD block (rad).

    (2/pi) gamma_e B_rms N tau sinc(N (pi - omega_L tau)); on resonance the
    sinc factor is 1.
    """
    N, tau = seq.n_pulses, seq.tau
    detune = N * (np.pi - cfg.omega_L * tau)
    return 2.0 / np.pi * cfg.gamma_e * cfg.B_rms * N * tau * float(_sinc(detune))


def modulation_function(t, seq: DDSequence):
    """DD modulation f(t) in {+1, -1} for t in [0, N tau]; starts at +1."""
    t = np.asarray(t, dtype=float)
    n_flips = np.clip(np.floor((t - seq.tau / 2) / seq.tau) + 1, 0, seq.n_pulses)
    return np.where(n_flips % 2 == 0, 1.0, -1.0)


def accumulated_phase(field, dt, seq: DDSequence, gamma_e=GAMMA_E, start=0.0):
    """Phase from a sampled field trace over one DD block (rad).

    Trapezoidal integral of gamma_e B(t) f(t - start) over
    [start, start + N tau], with the modulation sign flipped exactly at
    each pulse centre.  Samples of ``field`` are taken at times k dt.

    The trace must cover the block and resolve it with dt <= tau / 20.
    """
    field = np.asarray(field, dtype=float)
    if dt > seq.tau / 20:
        raise ValueError(
            f"trace step {dt:g} s too coarse; need <= tau/20 = {seq.tau / 20:g} s")
    t_end = start + seq.total_duration
    i0 = int(np.floor(start / dt))
    i1 = int(np.ceil(t_end / dt))
    if i0 < 0 or i1 >= field.size:
        raise ValueError(
            f"trace covers [0, {(field.size - 1) * dt:g}] s but the sequence "
            f"window is [{start:g}, {t_end:g}] s")

    # Integration nodes: the sample grid inside the window plus the exact
    # window edges and pulse centres, so the sign flips land where they
    # belong rather than on the nearest sample.
    grid = np.arange(i0, i1 + 1) * dt
    nodes = np.unique(np.concatenate([
        grid, [start, t_end], start + seq.pulse_times()]))
    nodes = nodes[(nodes >= start) & (nodes <= t_end)]
    b = np.interp(nodes, grid, field[i0:i1 + 1])
    f = modulation_function(nodes - start, seq)

    # Trapezoid on each subinterval; at a flip node the sign of the left
    # subinterval's right endpoint is the left-limit sign.
    left_f = f[:-1]
    dt_seg = np.diff(nodes)
    seg = 0.5 * (b[:-1] + b[1:]) * left_f * dt_seg
    return gamma_e * float(np.sum(seg))


def cs_readout_pair(phi1, phi2, c_max):
    """Correlation-spectroscopy signal difference c_max sin(phi1) sin(phi2)."""
    return c_max * np.sin(phi1) * np.sin(phi2)


def qdyne_readout(phi, c_max):
    """Expected population deviation from 1/2: (c_max / 2) sin(phi)."""
    return 0.5 * c_max * np.sin(phi)


def spin_population(phi):
    """Probability of the bright readout state, p0 = (1 - sin(phi)) / 2."""
    return 0.5 * (1.0 - np.sin(phi))


def sample_photons(p0, cfg: SensorConfig, rng):
    """Photon counts for readouts with bright-state probability p0.

    The spin state is projected first (Bernoulli p0), then the photon
    number is Poisson with that state's mean rate (eta0 bright, eta1
    dark).  Marginally the mean is p0 eta0 + (1 - p0) eta1.  Vectorised
    over p0.
    """
    p0 = np.asarray(p0, dtype=float)
    if np.any((p0 < 0) | (p0 > 1)):
        raise ValueError("p0 must lie in [0, 1]")
    bright = rng.random(p0.shape) < p0
    eta = np.where(bright, cfg.eta0, cfg.eta1)
    return rng.poisson(eta)


def ps_expected_contrast(cfg: SensorConfig, seq: DDSequence):
    """Expected power-spectrum contrast c_max exp(-N tau/T2) exp(-Phi_rms^2/2).

    Sweeping tau through pi / omega_L traces the spectroscopy dip centred
    at the Larmor resonance.
    """
    pr = phi_rms(cfg, seq)
    return cfg.c_max * np.exp(-seq.total_duration / cfg.T2) * np.exp(-pr ** 2 / 2)


def check_waiting_time(cfg: SensorConfig, T_wait):
    """Warn when a correlation-spectroscopy waiting time exceeds T1."""
    if T_wait >= cfg.T1:
        warnings.warn(
            f"waiting time {T_wait:g} s exceeds T1 = {cfg.T1:g} s; "
            "relaxation is not modelled in this regime", stacklevel=2)
