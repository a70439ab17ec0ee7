"""Special functions implemented in-repo for numerical stability.

Two functions are needed by the rest of the package:

* ``erfcx`` -- the scaled complementary error function
  erfcx(x) = exp(x^2) * erfc(x), which keeps the power-law envelope's
  erfc * exp product finite for small time arguments.
* ``expint_ei`` -- the exponential integral Ei(x), used by the
  mixed-model sensitivity ratio.

Both are written against dual-route test oracles (scipy / frozen
arbitrary-precision values), but the implementations here are
self-contained.
"""

import numpy as np

_SQRT_PI = np.sqrt(np.pi)
_EULER_GAMMA = 0.57721566490153286061

# erfc(x) loses all relative accuracy through exp(x^2)*erfc(x) if computed
# naively; below this point the Maclaurin series of erf is used, above it a
# continued fraction that converges quickly for x >= 2.
_ERFCX_SERIES_CUTOFF = 2.0


def _erf_series(x, n_terms=44):
    """erf(x) by its Maclaurin series; 44 terms suffice below x = 2."""
    x = np.asarray(x, dtype=float)
    term = x.copy()
    total = x.copy()
    x2 = x * x
    for n in range(1, n_terms):
        term *= (-x2) / n
        total += term / (2 * n + 1)
    return 2.0 / _SQRT_PI * total

def _erfcx_cf(x, depth=48):
    """Laplace continued fraction for erfcx, x >= ~2.

    erfcx(x) = (1/sqrt(pi)) / (x + 1/(2x + 2/(x + 3/(2x + ...))))
    evaluated bottom-up at fixed depth.
    """
    x = np.asarray(x, dtype=float)
    f = np.zeros_like(x)
    for k in range(depth, 0, -1):
        den = 2.0 * x if k % 2 == 1 else x
        f = k / (den + f)
    return 1.0 / (_SQRT_PI * (x + f))


def erfcx(x):
    """Scaled complementary error function exp(x^2)*erfc(x) for x >= 0.

    Relative accuracy ~1e-13 over [0, 1e8]; vectorised.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("erfcx: implemented for non-negative arguments only")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    lo = x < _ERFCX_SERIES_CUTOFF
    if np.any(lo):
        xl = x[lo]
        out[lo] = np.exp(xl * xl) * (1.0 - _erf_series(xl))
    if np.any(~lo):
        out[~lo] = _erfcx_cf(x[~lo])
    return out[0] if scalar else out


def _ei_series(x):
    """Ei(x) = gamma + ln|x| + sum x^n/(n n!), |x| <~ 40."""
    total = 0.0
    term = 1.0
    for n in range(1, 200):
        term *= x / n
        total += term / n
        if abs(term / n) <= 1e-18 * abs(total):
            break
    return _EULER_GAMMA + np.log(abs(x)) + total


def _e1_cf(t, depth=60):
    """E1(t) for t > 0 by continued fraction, good for t >= ~4.

    E1(t) = exp(-t) / (t + 1/(1 + 1/(t + 2/(1 + 2/(t + ...)))))
    """
    f = 0.0
    for k in range(depth, 0, -1):
        f = k / (1.0 + k / (t + f))
    return np.exp(-t) / (t + f)


def _ei_asymptotic(x):
    """Ei(x) ~ e^x/x * sum k!/x^k for large positive x (truncated at the
    smallest term)."""
    total = 1.0
    term = 1.0
    for k in range(1, 80):
        new = term * k / x
        if abs(new) >= abs(term):
            break
        term = new
        total += term
    with np.errstate(over="ignore"):
        # Ei overflows double range near x ~ 717; +inf is the right answer
        return np.exp(x) / x * total


def expint_ei(x):
    """Exponential integral Ei(x) for real non-zero x.

    Relative accuracy better than 1e-10 away from the zero of Ei
    (x ~ 0.3725).  Scalar or array input.
    """
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0

    def _one(v):
        if v == 0.0:
            raise ValueError("Ei is singular at 0")
        if v >= 40.0:
            return _ei_asymptotic(v)
        if v >= -6.0:
            return _ei_series(v)
        return -_e1_cf(-v)

    out = np.array([_one(v) for v in np.atleast_1d(xs)])
    return float(out[0]) if scalar else out
