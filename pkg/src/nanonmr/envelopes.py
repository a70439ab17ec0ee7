"""Correlation-decay envelopes and the oscillatory signal model.

The competing hypotheses for how nuclear-signal correlations decay are
expressed as normalised envelopes C(t/T_D) with C(0) = 1:

* exponential:  C(z) = exp(-z)
* power-law:    C(z) = G(z), a closed form in erfc(z^-1/2) exp(1/z) whose
  tail falls off as z^-3/2
* mixed:        C(z) = G(z) * exp(-t/T_E) with T_E >> T_D (slow extraneous
  exponential on top of the diffusion decay)

The fit model used throughout the estimation pipeline is

    a0 + a1 * cos(delta * t + phi) * C(t / T_D)

All amplitude lives in a1; the envelopes are pure shapes.

Numerical notes on G(z): the closed form multiplies erfc(z^-1/2) by
exp(1/z), which overflows below z ~ 0.01, so it is evaluated through the
scaled complementary error function erfcx(x) = erfc(x) exp(x^2) with
x = z^-1/2.  Even then the expression cancels to ~10 digits near z = 0
and again for very large z, so a small-z series and a large-z tail are
used outside [Z_SERIES_SWITCH, Z_TAIL_SWITCH].  All switch-region
coefficients were derived once with the arbitrary-precision oracle in
tools/envelope_series_oracle.py.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .special import erfcx

_SQRT_PI = np.sqrt(np.pi)

# Small-z series G(z) = 1 - 6 z + sum c_k z^(k+1/2); see the oracle script.
Z_SERIES_SWITCH = 1e-3
_SERIES_C32 = 20.0 / _SQRT_PI        # z^(3/2)
_SERIES_C52 = -42.0 / _SQRT_PI       # z^(5/2)
_SERIES_C72 = 162.0 / _SQRT_PI       # z^(7/2)
_SERIES_C92 = -825.0 / _SQRT_PI      # z^(9/2)

# Large-z tail G(z) = K z^-3/2 + ...; K = 32/(15 sqrt(pi)).
Z_TAIL_SWITCH = 1e4
TAIL_PREFACTOR = 32.0 / (15.0 * _SQRT_PI)
_TAIL_C2 = -2.5                      # z^-2
_TAIL_C52 = 6912.0 / (1260.0 * _SQRT_PI)   # z^-5/2
_TAIL_C3 = -35.0 / 12.0              # z^-3
_TAIL_C72 = 5120.0 / (1260.0 * _SQRT_PI)   # z^-7/2


def exp_envelope(z):
    """Exponential decay envelope exp(-z) for z >= 0."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("exp_envelope: z must be non-negative")
    return np.exp(-z)


def _powerlaw_direct(z):
    x = 1.0 / np.sqrt(z)
    poly = (z ** -1.5 - 1.5 * z ** -0.5 + _SQRT_PI / 4.0
            + 3.0 * np.sqrt(z) - 1.5 * _SQRT_PI * z)
    bracket = -z ** -1.5 + z ** -0.5 - 1.75 * np.sqrt(z) + 1.5 * z ** 1.5
    return 4.0 / _SQRT_PI * (poly + np.sqrt(np.pi / z) * erfcx(x) * bracket)


def _powerlaw_series(z):
    s = np.sqrt(z)
    return (1.0 - 6.0 * z
            + s * z * (_SERIES_C32
                       + z * (_SERIES_C52
                              + z * (_SERIES_C72 + z * _SERIES_C92))))


def _powerlaw_tail(z):
    s = 1.0 / np.sqrt(z)
    inv = 1.0 / z
    return (inv * s * (TAIL_PREFACTOR
                       + s * (_TAIL_C2
                              + s * (_TAIL_C52
                                     + s * (_TAIL_C3 + s * _TAIL_C72)))))


def powerlaw_envelope(z):
    """Power-law decay envelope G(z) for z > 0.

    Continuous extension G(0+) = 1; G(z) ~ (32/(15 sqrt(pi))) z^-3/2 for
    z -> inf.  Finite and accurate over at least z in [1e-8, 1e8].
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("powerlaw_envelope: z must be positive "
                         "(use the z->0 limit of 1 explicitly)")
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    lo = z < Z_SERIES_SWITCH
    hi = z > Z_TAIL_SWITCH
    mid = ~(lo | hi)
    if np.any(lo):
        out[lo] = _powerlaw_series(z[lo])
    if np.any(mid):
        out[mid] = _powerlaw_direct(z[mid])
    if np.any(hi):
        out[hi] = _powerlaw_tail(z[hi])
    return out[0] if scalar else out


def mixed_envelope(t, T_D, T_E):
    """Power-law diffusion decay with a slow extraneous exponential.

    C(t) = G(t/T_D) * exp(-t/T_E); the physically sensible regime is
    T_E >> T_D.
    """
    t = np.asarray(t, dtype=float)
    if T_D <= 0 or T_E <= 0:
        raise ValueError("mixed_envelope: T_D and T_E must be positive")
    if T_E <= T_D:
        warnings.warn("mixed_envelope: T_E <= T_D is outside the slow-decay "
                      "regime; computing anyway", stacklevel=2)
    z = t / T_D
    g = np.where(z > 0, powerlaw_envelope(np.where(z > 0, z, 1.0)), 1.0)
    return g * np.exp(-t / T_E)


@dataclass(frozen=True)
class EnvelopeModel:
    """Tagged correlation-decay kernel C(t/T_D).

    kind is one of "exponential", "powerlaw", "mixed"; T_E is only
    meaningful for the mixed kind.
    """

    kind: str
    T_D: float
    T_E: float | None = None

    _KINDS = ("exponential", "powerlaw", "mixed")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown envelope kind {self.kind!r}")
        if not self.T_D > 0:
            raise ValueError("T_D must be positive")
        if self.kind == "mixed":
            if self.T_E is None or self.T_E <= 0:
                raise ValueError("mixed envelope needs T_E > 0")
            if self.T_E <= self.T_D:
                warnings.warn("mixed envelope with T_E <= T_D is outside "
                              "the slow-decay regime", stacklevel=2)

    def evaluate(self, t):
        """Envelope value at time t (seconds); C(0) = 1 by construction."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("envelope time must be non-negative")
        if self.kind == "exponential":
            return exp_envelope(t / self.T_D)
        z = t / self.T_D
        safe = np.where(z > 0, z, 1.0)
        g = np.where(z > 0, powerlaw_envelope(safe), 1.0)
        if self.kind == "mixed":
            g = g * np.exp(-t / self.T_E)
        if g.ndim == 0:
            return float(g)
        return g

    def with_times(self, T_D, T_E=None):
        """Copy with replaced time constants (same kind)."""
        return EnvelopeModel(self.kind, T_D, T_E if T_E is not None else self.T_E)


def exponential_model(T_D):
    return EnvelopeModel("exponential", T_D)


def powerlaw_model(T_D):
    return EnvelopeModel("powerlaw", T_D)


def mixed_model(T_D, T_E):
    return EnvelopeModel("mixed", T_D, T_E)


@dataclass
class SignalModelParams:
    """Parameters of the oscillatory fit model a0 + a1 cos(delta t + phi) C."""

    a0: float
    a1: float
    delta: float          # rad/s
    phi: float            # rad, in [0, 2 pi)
    envelope: EnvelopeModel

    def __post_init__(self):
        if self.a1 < 0:
            raise ValueError("a1 must be non-negative")
        self.phi = float(self.phi) % (2.0 * np.pi)


def signal_model(t, p: SignalModelParams):
    """a0 + a1 * cos(delta*t + phi) * C(t/T_D) at times t (seconds)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("signal_model: t must be non-negative")
    return p.a0 + p.a1 * np.cos(p.delta * t + p.phi) * p.envelope.evaluate(t)


def correlation_kernel(t, phi_rms, delta, envelope: EnvelopeModel):
    """Noiseless phase covariance Phi_rms^2 cos(delta t) C(t/T_D) (rad^2)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("correlation_kernel: t must be non-negative")
    return phi_rms ** 2 * np.cos(delta * t) * envelope.evaluate(t)
