"""Multi-restart non-linear least-squares fitting of the oscillatory
correlation model.

The model is a0 + a1 cos(delta t + phi) C(t/T_D), optionally with the
mixed envelope's extra T_E.  Fitting is damped least squares: a
Levenberg-Marquardt trust parameter on the normal equations, with the
Jacobian built from central finite differences (relative step 1e-6 per
parameter scale).  Parameters can be frozen via a fixed mask (the
fixed-phase and fixed-amplitude fit modes of the analysis pipeline) and
are clamped to their bounds after every step.

Global fits draw restart initialisations uniformly over the bounds and
keep the highest-R^2 result, ties broken by the lowest restart index, so
a (bounds, seed) pair maps to one reproducible estimator.
"""

from dataclasses import dataclass, field

import numpy as np

from .correlate import AutoCorrelation, Spectrum
from .envelopes import EnvelopeModel, SignalModelParams, signal_model

PARAM_NAMES = ("a0", "a1", "delta", "phi", "T_D", "T_E")

REL_STEP = 1e-6
COST_TOL = 1e-10
MAX_ITER = 200


@dataclass
class FitResult:
    params: SignalModelParams
    fixed_mask: dict
    r_squared: float
    residual_rms: float
    converged: bool
    n_restarts_used: int = 1
    cost: float = np.inf

    @property
    def delta_hz(self):
        return self.params.delta / (2 * np.pi)


def _names_for(kind):
    return PARAM_NAMES if kind == "mixed" else PARAM_NAMES[:5]


def _vector_to_params(vec, names, kind):
    d = dict(zip(names, vec))
    env = EnvelopeModel(kind, d["T_D"], d.get("T_E"))
    return SignalModelParams(d["a0"], max(d["a1"], 0.0), d["delta"],
                             d["phi"], env)


def _envelope_values(t, kind, T_D, T_E=None):
    if kind == "exponential":
        return np.exp(-t / T_D)
    from .envelopes import powerlaw_envelope
    z = np.maximum(t / T_D, 1e-12)
    env = np.where(t > 0, powerlaw_envelope(z), 1.0)
    if kind == "mixed":
        env = env * np.exp(-t / T_E)
    return env


def _model(t, vec, names, kind, env_cache=None):
    a0, a1, delta, phi, T_D = vec[:5]
    T_E = vec[5] if kind == "mixed" else None
    if env_cache is None:
        env = _envelope_values(t, kind, T_D, T_E)
    else:
        # the time constants repeat across most Jacobian columns, so the
        # (comparatively expensive) envelope is memoised per (T_D, T_E)
        key = (T_D, T_E)
        env = env_cache.get(key)
        if env is None:
            if len(env_cache) > 64:
                env_cache.clear()
            env = env_cache[key] = _envelope_values(t, kind, T_D, T_E)
    return a0 + a1 * np.cos(delta * t + phi) * env


def default_bounds(ac: AutoCorrelation, kind,
                   freq_bounds_hz=(200.0, 1800.0)):
    """Search bounds used by the analysis pipeline.

    Frequency follows the configured search region; the remaining bounds
    scale with the data: a0 within 3 sigma of the correlation values,
    a1 in (0, 3 C(0)], T_D from one sample step to the lag span.
    """
    sigma = np.std(ac.values)
    c0 = abs(ac.values[0]) or sigma or 1.0
    b = {
        "a0": (-3 * sigma, 3 * sigma),
        "a1": (1e-12 * c0, 3 * c0),
        "delta": (2 * np.pi * freq_bounds_hz[0], 2 * np.pi * freq_bounds_hz[1]),
        "phi": (0.0, 2 * np.pi),
        "T_D": (ac.dt, ac.lags[-1]),
    }
    if kind == "mixed":
        b["T_E"] = (ac.dt, 100 * ac.lags[-1])
    return b


def nlls_fit(ac: AutoCorrelation, kind, init: dict, bounds: dict,
             fixed_mask=None, weights=None):
    """Damped least-squares fit of the oscillatory model to a correlation.

    init and bounds are dicts keyed by parameter name (a0, a1, delta,
    phi, T_D and, for the mixed envelope, T_E).  Parameters named in
    fixed_mask are held at their init value exactly and never touched by
    the finite differencing.  Returns a FitResult; persistent numerical
    failure is reported through converged=False, never an exception.
    """
    if ac.lags.size < 8:
        raise ValueError("need at least 8 correlation points to fit")
    names = _names_for(kind)
    fixed_mask = dict.fromkeys(fixed_mask or ())
    free = [n for n in names if n not in fixed_mask]
    if not free:
        raise ValueError("all parameters fixed; nothing to fit")
    t, y = ac.lags, ac.values
    w = np.ones_like(y) if weights is None else np.asarray(weights)

    full = np.array([init[n] for n in names], dtype=float)
    lo = np.array([bounds[n][0] if n in free else -np.inf for n in names])
    hi = np.array([bounds[n][1] if n in free else np.inf for n in names])
    full = np.clip(full, lo, hi)
    idx = [names.index(n) for n in free]
    scale = np.array([max(abs(full[i]), (hi[i] - lo[i]) or 1.0, 1e-30)
                      for i in idx])

    env_cache = {}

    def cost_of(vec):
        r = (y - _model(t, vec, names, kind, env_cache)) * w
        return r, float(np.dot(r, r))

    def jacobian(vec):
        J = np.empty((t.size, len(idx)))
        for j, i in enumerate(idx):
            h = REL_STEP * max(abs(vec[i]), REL_STEP * scale[j])
            up, dn = vec.copy(), vec.copy()
            up[i] += h
            dn[i] -= h
            J[:, j] = (_model(t, up, names, kind, env_cache)
                       - _model(t, dn, names, kind, env_cache)) * w / (2 * h)
        return J

    r, cost = cost_of(full)
    lam = 1e-3
    converged = False
    for _ in range(MAX_ITER):
        J = jacobian(full)
        g = J.T @ r
        JtJ = J.T @ J
        diag = np.diag(JtJ).copy()
        diag[diag <= 0] = 1e-30
        accepted = False
        for _ in range(25):
            try:
                step = np.linalg.solve(JtJ + lam * np.diag(diag), g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            trial = full.copy()
            trial[idx] += step
            trial = np.clip(trial, lo, hi)
            r_new, cost_new = cost_of(trial)
            if np.isfinite(cost_new) and cost_new < cost:
                rel_drop = (cost - cost_new) / max(cost, 1e-300)
                full, r, cost = trial, r_new, cost_new
                lam = max(lam / 3, 1e-12)
                accepted = True
                if rel_drop < COST_TOL:
                    converged = True
                break
            lam *= 10
        if not accepted:
            # damping saturated: we are at a (possibly bounded) minimum
            converged = cost < np.inf
            break
        if converged:
            break

    ss_tot = float(np.sum((w * (y - y.mean())) ** 2)) or 1e-300
    r2 = 1.0 - cost / ss_tot
    full[3] = full[3] % (2 * np.pi) if "phi" not in fixed_mask else full[3]
    params = _vector_to_params(full, names, kind)
    if "phi" in fixed_mask:
        params.phi = init["phi"]  # bit-identical passthrough
    return FitResult(params=params, fixed_mask={n: init[n] for n in fixed_mask},
                     r_squared=r2,
                     residual_rms=float(np.sqrt(cost / t.size)),
                     converged=converged, cost=cost)


def global_fit(ac: AutoCorrelation, kind, bounds=None, n_restarts=500,
               seed=0, fixed_mask=None, fixed_values=None, weights=None):
    """Best-of-n_restarts nlls_fit with inits uniform over the bounds."""
    bounds = bounds or default_bounds(ac, kind)
    names = _names_for(kind)
    rng = np.random.default_rng(seed)
    fixed_values = fixed_values or {}
    best = None
    for k in range(n_restarts):
        init = {n: rng.uniform(*bounds[n]) for n in names}
        init.update(fixed_values)
        res = nlls_fit(ac, kind, init, bounds, fixed_mask=fixed_mask,
                       weights=weights)
        res.n_restarts_used = k + 1
        if best is None or res.r_squared > best.r_squared:
            best = res
    if best is not None:
        best.n_restarts_used = n_restarts
    return best


def local_fit(ac: AutoCorrelation, kind, spectrum: Spectrum, bounds=None,
              fix_phase=False, fixed_a1=None, weights=None):
    """Single fit seeded from the FFT peak of the full-trace correlation.

    Initialises at the spectrum's peak frequency, the early-lag
    amplitude, phi = 0, and a decay time taken from the correlation's
    half-life.  Lag 0 is skipped by the seeding (and usually zeroed in
    ``weights``) because the readout shot noise piles up there.
    """
    if spectrum.peak_freq is None:
        raise ValueError("spectrum has no defined peak to seed from")
    bounds = bounds or default_bounds(ac, kind)
    ref = 1 if ac.lags.size > 1 else 0
    env_abs = np.abs(ac.values)
    below = ref + np.nonzero(env_abs[ref:] < env_abs[ref] / 2)[0]
    t_half = ac.lags[below[0]] if below.size else ac.lags[-1] / 2
    t_half = max(t_half, ac.dt)
    init = {
        "a0": float(np.mean(ac.values[ref:])),
        "a1": float(abs(ac.values[ref])),
        "delta": 2 * np.pi * spectrum.peak_freq,
        "phi": 0.0,
        "T_D": float(np.clip(t_half / np.log(2), *bounds["T_D"])),
    }
    if kind == "mixed":
        init["T_E"] = 50 * init["T_D"]
    init["delta"] = float(np.clip(init["delta"], *bounds["delta"]))
    fixed = []
    if fix_phase:
        fixed.append("phi")
    if fixed_a1 is not None:
        init["a1"] = fixed_a1
        fixed.append("a1")
    return nlls_fit(ac, kind, init, bounds, fixed_mask=fixed,
                    weights=weights)
