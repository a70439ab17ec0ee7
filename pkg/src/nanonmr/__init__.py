"""nanonmr: simulation and estimation toolkit for statistically polarised
nano-NMR signals under competing correlation-decay models."""

__version__ = "0.1.0"

from .envelopes import (
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
from .special import erfcx, expint_ei

__all__ = [
    "EnvelopeModel",
    "SignalModelParams",
    "correlation_kernel",
    "erfcx",
    "exp_envelope",
    "exponential_model",
    "expint_ei",
    "mixed_envelope",
    "mixed_model",
    "powerlaw_envelope",
    "powerlaw_model",
    "signal_model",
    "__version__",
]
