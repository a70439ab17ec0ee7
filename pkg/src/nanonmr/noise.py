"""Stationary noise-trace generators for the two decay hypotheses.

Both generators return a pair of independent quadratures A(t), D(t):
the field felt by the sensor under dynamical decoupling is
B(t) = A cos(omega_L t) + D sin(omega_L t), and on resonance only the
cosine quadrature survives.  The quadratures are stationary Gaussian
processes with std B_rms and autocovariance B_rms^2 C(t/T_D) for the
chosen envelope.

* exponential envelope: exact discrete Ornstein-Uhlenbeck update, no
  discretisation error at any step size.
* power-law envelope: circulant embedding of the target covariance
  sequence.  The length-2M circulant eigenvalues are the real FFT of the
  symmetrised covariance; tiny negative eigenvalues (an artefact of
  finite embedding) are clipped to zero with the clipped mass recorded.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .envelopes import powerlaw_envelope


@dataclass
class NoiseTrace:
    """Sampled quadrature time series with generation provenance.

    samples holds B(t) for scalar traces or is unused when quadratures
    a, d are set (the Qdyne chain consumes quadratures directly).
    """

    dt: float
    seed: int
    model_tag: str
    samples: np.ndarray | None = None
    a: np.ndarray | None = None
    d: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    _TAGS = ("OU-exponential", "GP-powerlaw", "MC-dipole")

    def __post_init__(self):
        if self.model_tag not in self._TAGS:
            raise ValueError(f"unknown model_tag {self.model_tag!r}")
        if self.samples is None and self.a is None:
            raise ValueError("trace needs samples or quadratures")

    @property
    def n(self):
        ref = self.samples if self.samples is not None else self.a
        return ref.size

    def field_at(self, omega_L):
        """Compose B(t) = A cos(omega_L t) + D sin(omega_L t)."""
        if self.a is None or self.d is None:
            raise ValueError("trace has no quadratures")
        t = np.arange(self.n) * self.dt
        return self.a * np.cos(omega_L * t) + self.d * np.sin(omega_L * t)


def generate_ou_quadratures(B_rms, T_D, n, dt, seed):
    """Two independent OU quadratures with std B_rms and corr. time T_D.

    Exact discrete update A_{k+1} = A_k r + B_rms sqrt(1 - r^2) xi_k with
    r = exp(-dt / T_D); the initial state is stationary, so the whole
    trace is stationary regardless of length.
    """
    if dt >= T_D / 10:
        raise ValueError(f"dt = {dt:g} too coarse for T_D = {T_D:g}; "
                         "need dt < T_D/10")
    rng = np.random.default_rng(seed)
    r = np.exp(-dt / T_D)
    s = B_rms * np.sqrt(1.0 - r * r)
    quads = []
    for _ in range(2):
        xi = rng.standard_normal(n)
        x = np.empty(n)
        x[0] = B_rms * xi[0]
        driven = lfilter([1.0], [1.0, -r], s * xi[1:])
        x[1:] = driven + x[0] * r ** np.arange(1, n)
        quads.append(x)
    return NoiseTrace(dt=dt, seed=seed, model_tag="OU-exponential",
                      a=quads[0], d=quads[1],
                      meta={"B_rms": B_rms, "T_D": T_D})


def _circulant_root(cov):
    """Eigenvalue sqrt of the circulant embedding of a covariance sequence.

    cov has length M (lags 0..M-1); the embedding has length 2M - 2.
    Returns (sqrt eigenvalues, clipped mass fraction).
    """
    first_row = np.concatenate([cov, cov[-2:0:-1]])
    lam = np.fft.rfft(first_row).real
    total = np.sum(np.abs(lam))
    neg = lam < 0
    clipped = np.sum(np.abs(lam[neg])) / total if np.any(neg) else 0.0
    lam = np.where(neg, 0.0, lam)
    return np.sqrt(lam), clipped


def generate_powerlaw_gp(B_rms, T_D, n, dt, seed, clip_budget=1e-3):
    """Stationary Gaussian quadratures with autocovariance B_rms^2 G(t/T_D).

    Circulant embedding: the covariance sequence at lags 0..M-1 (M > n)
    is symmetrised into a length-2M-2 circulant, its eigenvalues taken by
    real FFT, and white Gaussian noise coloured by the spectral root.
    Negative eigenvalues below the embedding's numerical floor are
    clipped to zero; if the clipped spectral mass exceeds clip_budget the
    target covariance is not achievable at this (n, dt) and we raise.
    """
    if dt >= T_D / 10:
        raise ValueError(f"dt = {dt:g} too coarse for T_D = {T_D:g}; "
                         "need dt < T_D/10")
    rng = np.random.default_rng(seed)
    m = n + 1
    lags = np.arange(m) * dt / T_D
    cov = np.empty(m)
    cov[0] = 1.0
    cov[1:] = powerlaw_envelope(lags[1:])
    cov *= B_rms ** 2
    root, clipped = _circulant_root(cov)
    if clipped > clip_budget:
        raise ValueError(
            f"circulant embedding clipped {clipped:.2e} of its spectral "
            f"mass (budget {clip_budget:g}); target covariance not "
            f"achievable at n={n}, dt={dt:g}")
    ncirc = 2 * m - 2
    quads = []
    for _ in range(2):
        # complex white noise in the frequency domain, Hermitian layout
        # handled by irfft; scaling gives unit-variance colouring
        w = (rng.standard_normal(root.size)
             + 1j * rng.standard_normal(root.size))
        w[0] = rng.standard_normal() * np.sqrt(2)
        w[-1] = rng.standard_normal() * np.sqrt(2)
        x = np.fft.irfft(root * w, ncirc) * np.sqrt(ncirc / 2.0)
        quads.append(x[:n])
    return NoiseTrace(dt=dt, seed=seed, model_tag="GP-powerlaw",
                      a=quads[0], d=quads[1],
                      meta={"B_rms": B_rms, "T_D": T_D,
                            "clipped_mass": clipped})
