"""Autocorrelation estimation and Qdyne-style post-processing.

The measured object throughout is the autocorrelation of a readout time
trace.  Long runs are partitioned into slices, each slice is
autocorrelated on its own, and fixed-size groups of slice correlations
are averaged into independent estimator inputs (a 90 h run at 15-minute
slices and group size 20 yields 18 of them).  A slow exponential drift
component can be removed jointly with the oscillatory model before
fitting, and a zero-padded FFT provides peak seeds for the fits.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class AutoCorrelation:
    """Lag grid, correlation estimates, and per-lag sample counts."""

    lags: np.ndarray          # seconds, strictly increasing from 0
    values: np.ndarray
    counts: np.ndarray
    source_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lags = np.asarray(self.lags, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.counts = np.asarray(self.counts)
        if self.lags[0] != 0 or np.any(np.diff(self.lags) <= 0):
            raise ValueError("lags must increase strictly from 0")
        if not (self.lags.size == self.values.size == self.counts.size):
            raise ValueError("lags, values, counts must have equal length")

    @property
    def dt(self):
        return self.lags[1] - self.lags[0]


def autocorrelate(trace, max_lag, dt=1.0):
    """Unbiased autocorrelation of a sampled trace.

    C_hat(k) = 1/(n - k) sum_t (x_t - xbar)(x_{t+k} - xbar), the mean
    subtracted once globally.  Computed with one zero-padded FFT; the
    unbiased 1/(n-k) normalisation keeps long lags faithful at the cost
    of higher variance there.
    """
    x = np.asarray(trace, dtype=float)
    n = x.size
    if not max_lag < n / 2:
        raise ValueError(f"max_lag {max_lag} must be < n/2 = {n / 2:g}")
    if np.ptp(x) == 0:
        warnings.warn("constant trace has zero autocorrelation", stacklevel=2)
        k = np.arange(max_lag + 1)
        return AutoCorrelation(k * dt, np.zeros(max_lag + 1), n - k)
    x = x - x.mean()
    raw = _lag_products(x, max_lag)
    k = np.arange(max_lag + 1)
    return AutoCorrelation(k * dt, raw / (n - k), n - k)


_BLOCK = 1 << 21


def _lag_products(x, max_lag):
    """sum_t x_t x_{t+k} for k = 0..max_lag via zero-padded FFTs.

    Long traces are processed block-wise (exact overlap into the next
    block) so peak memory stays bounded by the block size rather than
    by the trace length.
    """
    n = x.size
    if n <= 2 * _BLOCK:
        xf = np.fft.rfft(x, 2 * n)
        return np.fft.irfft(xf * np.conj(xf))[:max_lag + 1]
    acc = np.zeros(max_lag + 1)
    for start in range(0, n, _BLOCK):
        seg = x[start:start + _BLOCK]
        ext = x[start:start + _BLOCK + max_lag]
        m = seg.size + ext.size
        prod = np.fft.irfft(np.conj(np.fft.rfft(seg, m))
                            * np.fft.rfft(ext, m), m)
        acc += prod[:max_lag + 1]
    return acc


def slice_average(trace, slice_len, group, max_lag, dt=1.0):
    """Per-slice autocorrelations averaged over non-overlapping groups.

    The trace is cut into consecutive slices of ``slice_len`` samples;
    each is autocorrelated, and every ``group`` consecutive slice
    correlations are averaged into one AutoCorrelation.  A trailing
    partial slice (and any slices short of a full group) are dropped.
    Returns the list of group averages.
    """
    x = np.asarray(trace, dtype=float)
    n_slices = x.size // slice_len
    if n_slices < group:
        raise ValueError(
            f"trace holds {n_slices} slices of {slice_len}; need >= {group}")
    leftover = x.size - n_slices * slice_len
    if leftover:
        logger.info("slice_average: dropping %d trailing samples", leftover)
    n_groups = n_slices // group
    if n_slices % group:
        logger.info("slice_average: dropping %d slices short of a group",
                    n_slices % group)
    out = []
    for g in range(n_groups):
        acc = None
        for s in range(g * group, (g + 1) * group):
            seg = x[s * slice_len:(s + 1) * slice_len]
            ac = autocorrelate(seg, max_lag, dt)
            acc = ac.values if acc is None else acc + ac.values
        k = np.arange(max_lag + 1)
        out.append(AutoCorrelation(
            k * dt, acc / group, group * (slice_len - k),
            source_meta={"group_index": g, "slice_len": slice_len,
                         "group": group}))
    return out


def detrend_exponential(ac: AutoCorrelation, delta_seed, T_D_seed,
                        min_separation=5.0):
    """Remove a slow exponential drift component from a correlation.

    Jointly fits b0 + b1 exp(-t/T_slow) + a1 cos(delta t) C_exp(t/T_fast)
    and subtracts the fitted (b0, b1, T_slow) part.  The oscillatory term
    is included in the fit only so the drift does not absorb it; it is
    left in the returned correlation.  If the fitted T_slow collapses
    onto the oscillation decay scale (ratio below ``min_separation``) the
    correction is skipped with a warning.

    Returns (corrected AutoCorrelation, removed-component array).
    """
    from scipy.optimize import least_squares

    t, y = ac.lags, ac.values
    scale = np.max(np.abs(y)) or 1.0
    t_span = t[-1]

    def model(p):
        b0, b1, logTs, a1, logTd = p
        return (b0 + b1 * np.exp(-t / np.exp(logTs))
                + a1 * np.cos(delta_seed * t) * np.exp(-t / np.exp(logTd)))

    p0 = [0.0, 0.5 * scale, np.log(t_span / 3), 0.5 * scale,
          np.log(T_D_seed)]
    res = least_squares(lambda p: model(p) - y, p0, method="lm",
                        max_nfev=2000)
    b0, b1, logTs, _, logTd = res.x
    T_slow, T_fast = np.exp(logTs), np.exp(logTd)
    if T_slow / T_fast < min_separation:
        warnings.warn(
            f"drift time {T_slow:g} s not separated from decay {T_fast:g} s "
            "(ratio < 5); skipping drift subtraction", stacklevel=2)
        removed = np.zeros_like(y)
        return AutoCorrelation(t, y.copy(), ac.counts,
                               dict(ac.source_meta, detrended=False)), removed
    removed = b0 + b1 * np.exp(-t / T_slow)
    corrected = y - removed
    return AutoCorrelation(t, corrected, ac.counts,
                           dict(ac.source_meta, detrended=True,
                                T_slow=T_slow)), removed


@dataclass
class Spectrum:
    freqs: np.ndarray        # Hz
    magnitudes: np.ndarray
    peak_freq: float | None  # Hz, parabolic-interpolated
    fwhm: float | None       # Hz


def fft_spectrum(ac: AutoCorrelation, pad_factor=8, freq_range=None):
    """Zero-padded magnitude spectrum of a correlation with peak and FWHM.

    The peak frequency is refined by parabolic interpolation around the
    magnitude maximum (DC excluded); the FWHM comes from linear
    interpolation at half maximum.  freq_range=(lo, hi) in Hz restricts
    the peak search (e.g. to the configured estimator search region).
    """
    if pad_factor < 1:
        raise ValueError("pad_factor must be >= 1")
    y = ac.values
    if np.all(y == 0):
        return Spectrum(np.array([0.0]), np.array([0.0]), None, None)
    n = y.size
    nfft = int(2 ** np.ceil(np.log2(n * pad_factor)))
    y = y - y.mean()
    mag = np.abs(np.fft.rfft(y, nfft))
    freqs = np.fft.rfftfreq(nfft, ac.dt)
    if freq_range is not None:
        searchable = (freqs >= freq_range[0]) & (freqs <= freq_range[1])
        searchable[0] = False
        if not np.any(searchable):
            raise ValueError("freq_range excludes every resolved bin")
        masked = np.where(searchable, mag, -np.inf)
        i = int(np.argmax(masked))
    else:
        i = int(np.argmax(mag[1:])) + 1
    if 0 < i < mag.size - 1:
        a, b, c = mag[i - 1], mag[i], mag[i + 1]
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
    else:
        shift = 0.0
    peak = freqs[i] + shift * (freqs[1] - freqs[0])
    half = mag[i] / 2
    lo = i
    while lo > 0 and mag[lo] > half:
        lo -= 1
    hi = i
    while hi < mag.size - 1 and mag[hi] > half:
        hi += 1
    f_lo = np.interp(half, [mag[lo], mag[lo + 1]], [freqs[lo], freqs[lo + 1]])
    f_hi = np.interp(half, [mag[hi], mag[hi - 1]], [freqs[hi], freqs[hi - 1]])
    return Spectrum(freqs, mag, float(peak), float(f_hi - f_lo))
