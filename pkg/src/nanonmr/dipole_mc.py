"""First-principles diffusing-dipole Monte-Carlo correlation oracle.

A point sensor sits a depth d below the sample surface.  Nuclei are
ideal-gas random walkers in a box above the surface: periodic in x and
y, reflecting at the surface plane and at the box ceiling.  Each walker
carries a fixed moment m_i = +-1 (statistical polarisation) and
contributes m_i / r_i(t)^3 to the field at the sensor.

The estimator exploits that cross-particle terms <b_i b_j> vanish in
expectation (independent walkers, independent signs): the correlation is
accumulated per particle and summed, which removes the cross-term noise
floor that would otherwise bury the t^-3/2 tail, four orders of
magnitude below C(0) by t ~ 30 T_D.

Angular dipole factors are dropped (they change prefactors, not the
decay), and every quantity is reported normalised, C(t)/C(0), so the
moment scale is irrelevant.
"""

from dataclasses import dataclass

import numpy as np

from .correlate import AutoCorrelation


@dataclass(frozen=True)
class DiffusionScene:
    """Geometry and kinetics of the random-walk dipole simulation."""

    depth_d: float            # m, sensor depth below the surface
    diff_coeff_D: float       # m^2/s
    n_particles: int
    box: tuple                # (Lx, Ly, Lz) metres, Lz above the surface
    dt: float                 # s, walker time step
    seed: int = 0
    exclusion_radius_factor: float = 0.05  # initial redraw inside this * d

    def __post_init__(self):
        if self.depth_d <= 0 or self.diff_coeff_D <= 0:
            raise ValueError("depth and diffusion coefficient must be positive")
        if self.T_D <= 10 * self.dt:
            raise ValueError("dt too coarse: need T_D = d^2/D > 10 dt")
        if self.box[2] < 4 * self.depth_d:
            raise ValueError("box height should be several sensor depths")

    @property
    def T_D(self):
        return self.depth_d ** 2 / self.diff_coeff_D

    @classmethod
    def desk_default(cls, depth_d=1.0e-9, diff_coeff_D=5e-13,
                     n_particles=10_000, seed=0):
        """Default desk-scale scene: T_D spans 100 steps, box 24d x 24d x 12d."""
        dt = depth_d ** 2 / diff_coeff_D / 100.0
        box = (24 * depth_d, 24 * depth_d, 12 * depth_d)
        return cls(depth_d, diff_coeff_D, n_particles, box, dt, seed)


def heuristic_correlation(t, d, D):
    """Second-moment heuristic (1 + 6 D t / d^2)^(-3/2), normalised at 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    return (1.0 + 6.0 * D * t / d ** 2) ** -1.5


def default_lag_steps(n_steps, T_D_steps):
    """Lag grid: every step to 0.3 T_D, then log-spaced to ~50 T_D."""
    short = np.arange(0, int(0.3 * T_D_steps) + 1)
    longest = min(int(50 * T_D_steps), n_steps // 4)
    log_part = np.unique(np.geomspace(short[-1] + 1, longest, 40).astype(int))
    return np.concatenate([short, log_part])


def _field_series(scene: DiffusionScene, n_chunk, n_steps, rng):
    """Field contribution time series for one chunk of walkers.

    Returns an (n_chunk, n_steps) array of 1/r^3 values (moment signs are
    irrelevant for per-particle correlations since m^2 = 1).
    """
    d = scene.depth_d
    Lx, Ly, Lz = scene.box
    step_std = np.sqrt(2.0 * scene.diff_coeff_D * scene.dt)

    # initial positions uniform in the box, z measured above the surface
    x0 = rng.uniform(-Lx / 2, Lx / 2, n_chunk)
    y0 = rng.uniform(-Ly / 2, Ly / 2, n_chunk)
    z0 = rng.uniform(0.0, Lz, n_chunk)
    # redraw anything inside the exclusion ball around the sensor (the
    # sensor is at depth d below the surface, so with the surface at z=0
    # this can only trigger for exclusion factors > 1; kept for safety)
    r_min = scene.exclusion_radius_factor * d
    for _ in range(100):
        r0 = np.sqrt(x0 ** 2 + y0 ** 2 + (z0 + d) ** 2)
        bad = r0 < r_min
        if not np.any(bad):
            break
        nb = int(bad.sum())
        x0[bad] = rng.uniform(-Lx / 2, Lx / 2, nb)
        y0[bad] = rng.uniform(-Ly / 2, Ly / 2, nb)
        z0[bad] = rng.uniform(0.0, Lz, nb)

    def walk(start, fold_len=None, wrap_len=None):
        steps = rng.standard_normal((n_chunk, n_steps - 1)) * step_std
        pos = np.empty((n_chunk, n_steps))
        pos[:, 0] = start
        np.cumsum(steps, axis=1, out=pos[:, 1:])
        pos[:, 1:] += start[:, None]
        if wrap_len is not None:
            # periodic: minimum image about the sensor's x/y position
            pos = (pos + wrap_len / 2) % wrap_len - wrap_len / 2
        if fold_len is not None:
            # reflecting walls at 0 and fold_len via triangular fold
            pos = np.abs((pos + fold_len) % (2 * fold_len) - fold_len)
        return pos

    r2 = walk(x0, wrap_len=Lx) ** 2
    r2 += walk(y0, wrap_len=Ly) ** 2
    r2 += (walk(z0, fold_len=Lz) + d) ** 2
    return r2 ** -1.5


def _chunk_moments(scene, n_chunk, n_steps, lag_steps, strides, child_seed):
    """Correlation sums, pair counts, and field sum for one walker chunk."""
    stride_short, stride_long = strides
    T_D_steps = scene.T_D / scene.dt
    rng = np.random.default_rng(child_seed)
    b = _field_series(scene, n_chunk, n_steps, rng)
    sums = np.empty(lag_steps.size)
    counts = np.empty(lag_steps.size)
    for li, k in enumerate(lag_steps):
        s = stride_short if k <= T_D_steps else stride_long
        left = b[:, : n_steps - k : s]
        right = b[:, k :: s]
        sums[li] = np.sum(left * right)
        counts[li] = n_chunk * left.shape[1]
    return sums, counts, b.sum(), b.size


def mc_dipole_correlation(scene: DiffusionScene, n_steps, lag_steps=None,
                          chunk=50, n_workers=1):
    """Normalised field autocorrelation from the random-walk simulation.

    Walkers are simulated in chunks with independently seeded streams
    (one child seed per chunk index, so the result is chunk-size
    independent).  Cross-particle terms vanish in expectation, so the
    raw per-particle moment E[b(0) b(t)] is accumulated and the grand
    mean squared is subtracted at the end (the scalar 1/r^3 has a
    non-zero spatial mean, unlike the full dipole field, and leaving it
    in would fake a long-time plateau).  Time origins are strided: they
    decorrelate only on the T_D scale, so dense origins add cost without
    adding information.

    n_workers > 1 spreads chunks over processes; results are reduced in
    chunk-index order, so the output is byte-identical for any worker
    count.
    """
    T_D_steps = scene.T_D / scene.dt
    if lag_steps is None:
        lag_steps = default_lag_steps(n_steps, T_D_steps)
    lag_steps = np.asarray(lag_steps, dtype=int)
    strides = (max(1, int(round(T_D_steps / 20))),
               max(1, int(round(T_D_steps / 5))))

    seed_seq = np.random.SeedSequence(scene.seed)
    n_chunks = int(np.ceil(scene.n_particles / chunk))
    children = seed_seq.spawn(n_chunks)
    sizes = [min(chunk, scene.n_particles - ci * chunk)
             for ci in range(n_chunks)]
    if n_workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(
                _chunk_moments, [scene] * n_chunks, sizes,
                [n_steps] * n_chunks, [lag_steps] * n_chunks,
                [strides] * n_chunks, children, chunksize=1))
    else:
        results = [_chunk_moments(scene, sizes[ci], n_steps, lag_steps,
                                  strides, children[ci])
                   for ci in range(n_chunks)]

    sums = np.zeros(lag_steps.size)
    counts = np.zeros(lag_steps.size)
    b_sum = 0.0
    b_count = 0.0
    for s, c, bs, bc in results:
        sums += s
        counts += c
        b_sum += bs
        b_count += bc
    mean_b = b_sum / b_count
    values = sums / counts - mean_b ** 2
    c0 = values[0]
    return AutoCorrelation(
        lag_steps * scene.dt, values / c0, counts,
        source_meta={"model_tag": "MC-dipole", "T_D": scene.T_D,
                     "seed": scene.seed, "n_particles": scene.n_particles,
                     "n_steps": n_steps, "C0": c0})


def fit_tail_slope(ac: AutoCorrelation, T_D, window=(5.0, 30.0)):
    """Log-log slope of C(t) over t in window * T_D, with a slope CI.

    Returns (slope, ci_halfwidth) from an ordinary least-squares line on
    log C vs log t; points with non-positive C are discarded.
    """
    t, c = ac.lags, ac.values
    sel = (t >= window[0] * T_D) & (t <= window[1] * T_D) & (c > 0)
    if sel.sum() < 4:
        raise ValueError("too few positive points in the tail window")
    lx, ly = np.log(t[sel]), np.log(c[sel])
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    dof = max(sel.sum() - 2, 1)
    sigma2 = (res[0] / dof) if res.size else 0.0
    var_slope = sigma2 / np.sum((lx - lx.mean()) ** 2)
    return float(coef[0]), float(1.96 * np.sqrt(var_slope))


def fit_short_time_exponential(ac: AutoCorrelation, T_D_guess):
    """Least-squares T_D of exp(-t/T_D) on lags t <= 0.3 T_D_guess.

    Returns (T_D_fit, max relative deviation of C from the fitted
    exponential over the window).
    """
    t, c = ac.lags, ac.values
    sel = (t <= 0.3 * T_D_guess) & (c > 0)
    # straight line through log C: slope = -1/T_D
    slope = np.polyfit(t[sel], np.log(c[sel]), 1)[0]
    T_fit = -1.0 / slope
    dev = np.max(np.abs(c[sel] - np.exp(-t[sel] / T_fit)))
    return float(T_fit), float(dev)
