"""Command-line front end: simulate, analyze, spectrum, mc-oracle,
sensitivity, preset-list.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 statistical-quality flag (result produced but flagged unreliable).
NANONMR_THREADS overrides --threads when set.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_QUALITY = 4


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


def _threads(args):
    env = os.environ.get("NANONMR_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"NANONMR_THREADS={env!r} is not an integer")
    return max(1, args.threads)


def _outdir(args):
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DataError(f"cannot create output directory {out}: {e}")
    return out


def _get_preset(name):
    from .presets import get_preset
    try:
        return get_preset(name)
    except KeyError as e:
        raise ConfigError(str(e))


def cmd_simulate(args):
    from .io import new_manifest, write_trace
    from .qdyne_sim import simulate_qdyne

    preset = _get_preset(args.preset)
    if args.model not in ("powerlaw", "exponential"):
        raise ConfigError(f"--model must be powerlaw or exponential, "
                          f"got {args.model!r}")
    if not (0 < args.scale <= 1):
        raise ConfigError(f"--scale must be in (0, 1], got {args.scale}")
    out = _outdir(args)
    if args.max_slices < 1:
        raise ConfigError("--max-slices must be >= 1")
    run = simulate_qdyne(preset, args.model, scale=args.scale,
                         seed=args.seed, max_slices=args.max_slices)
    trace_path = out / f"{preset.name}-{args.model}-seed{args.seed}.trace"
    write_trace(trace_path, run.counts.astype(float), preset.T_qd,
                args.seed, args.model)
    manifest = new_manifest(preset, args.seed, __version__)
    manifest.add(trace_path)
    manifest.write(out / "manifest.txt")
    print(f"wrote {trace_path} ({run.counts.size} readouts, "
          f"{run.n_slices} slices)")
    return EXIT_OK


def cmd_analyze(args):
    from .io import correlation_to_csv, read_trace, write_csv, write_report
    from .presets import SLICE_SECONDS
    from .qdyne_sim import QdyneRun, analyze_qdyne

    preset = _get_preset(args.preset)
    try:
        samples, dt, seed, model_tag = read_trace(args.trace)
    except (OSError, ValueError) as e:
        raise DataError(f"cannot read trace: {e}")
    if abs(dt - preset.T_qd) > 1e-12:
        raise ConfigError(f"trace dt {dt:g} does not match preset "
                          f"{preset.name} T_Qd {preset.T_qd:g}")
    slice_len = int(round(SLICE_SECONDS * args.scale / dt))
    n_slices = samples.size // slice_len
    if n_slices < 1:
        raise DataError(f"trace holds {samples.size} readouts, shorter "
                        f"than one slice ({slice_len})")
    run = QdyneRun(counts=samples.astype(np.int64), preset=preset,
                   model_kind=model_tag, scale=args.scale, seed=seed,
                   slice_len=slice_len, n_slices=n_slices, photon_gain=np.nan)
    out = _outdir(args)
    fixed_a1 = args.fix_amplitude
    reports = {}
    for mode in ("global", "local"):
        reports[mode] = analyze_qdyne(
            run, mode=mode, n_restarts=preset.n_restarts, seed=seed,
            fix_phase=args.fix_phase, fixed_a1=fixed_a1)
    entries = [("preset", preset.name), ("trace", str(args.trace)),
               ("model_tag", model_tag), ("seed", seed),
               ("scale", args.scale), ("fix_phase", args.fix_phase),
               ("fix_amplitude", fixed_a1 if fixed_a1 is not None else "none"),
               ("n_groups", reports["global"].meta["n_groups"]),
               ("flat_limit_hz", f"{reports['global'].flat_limit_hz:.6g}"),
               ("fft_peak_hz", f"{reports['global'].peak_freq_hz:.6g}"),
               ("fft_fwhm_hz", f"{reports['global'].fwhm_hz:.6g}")]
    for mode, an in reports.items():
        for kind, st in an.stats.items():
            entries.append((f"rmse_{mode}_{kind}_hz", f"{st.rmse_hz:.6g}"))
        entries.append((f"rmse_ratio_{mode}", f"{an.ratio:.6g}"))
    write_report(out / "analysis.txt", entries)

    rows = []
    for mode, an in reports.items():
        for kind, fits in an.group_fits.items():
            for g, f in enumerate(fits):
                rows.append([mode, kind, g, f"{f.delta_hz:.8g}",
                             f"{f.r_squared:.8g}"])
    write_csv(out / "estimators.csv",
              ["mode", "model", "group", "freq_hz", "r_squared"], rows)
    print(f"wrote {out / 'analysis.txt'} and {out / 'estimators.csv'}")
    return EXIT_OK


def cmd_spectrum(args):
    from .envelopes import exponential_model, mixed_model, powerlaw_model
    from .io import spectra_to_csv
    from .spectra import numeric_spectrum

    if args.t_d <= 0 or args.t_e_factor <= 0:
        raise ConfigError("T_D and T_E factor must be positive")
    T_D = args.t_d
    omega_D = 2 * np.pi / T_D
    x = np.concatenate(([0.0], np.geomspace(1e-3, 20.0, args.points - 1)))
    out = _outdir(args)
    cols = {}
    for tag, env in (("exp", exponential_model(T_D)),
                     ("pl", powerlaw_model(T_D)),
                     ("mixed", mixed_model(T_D, args.t_e_factor))):
        cols[tag] = numeric_spectrum(env, args.delta, x * omega_D).values
    path = out / "spectra.csv"
    spectra_to_csv(path, x, cols["exp"], cols["pl"], cols["mixed"])
    print(f"wrote {path}")
    return EXIT_OK


def cmd_mc_oracle(args):
    from .dipole_mc import (DiffusionScene, fit_short_time_exponential,
                            fit_tail_slope, heuristic_correlation,
                            mc_dipole_correlation)
    from .io import write_csv, write_report

    if args.particles <= 0 or args.steps <= 0:
        raise ConfigError("--particles and --steps must be positive")
    depth = args.depth * args.rescale
    diff = args.diffusion * args.rescale ** 2
    scene = DiffusionScene.desk_default(depth_d=depth, diff_coeff_D=diff,
                                        n_particles=args.particles,
                                        seed=args.seed)
    ac = mc_dipole_correlation(scene, args.steps, n_workers=_threads(args))
    slope, ci = fit_tail_slope(ac, scene.T_D)
    t_fit, dev = fit_short_time_exponential(ac, scene.T_D)
    out = _outdir(args)
    heur = heuristic_correlation(ac.lags, depth, diff)
    write_csv(out / "mc_correlation.csv",
              ["lag_s", "value", "count", "heuristic"],
              zip((f"{v:.12g}" for v in ac.lags),
                  (f"{v:.12g}" for v in ac.values),
                  (int(c) for c in ac.counts),
                  (f"{v:.12g}" for v in heur)))
    flagged = ci > 0.5
    write_report(out / "mc_report.txt", [
        ("T_D_s", f"{scene.T_D:.6g}"),
        ("n_particles", args.particles), ("n_steps", args.steps),
        ("seed", args.seed), ("rescale", args.rescale),
        ("tail_slope", f"{slope:.6g}"),
        ("tail_slope_ci95", f"{ci:.6g}"),
        ("short_time_T_fit_s", f"{t_fit:.6g}"),
        ("short_time_max_dev", f"{dev:.6g}"),
        ("quality_flag", "insufficient-statistics" if flagged else "ok")])
    print(f"wrote {out / 'mc_correlation.csv'}; tail slope {slope:.3f} "
          f"+- {ci:.3f}")
    return EXIT_QUALITY if flagged else EXIT_OK


def cmd_sensitivity(args):
    from .io import write_csv, write_report
    from .sensitivity import (numeric_ratio_cs, numeric_ratio_qdyne,
                              sensitivity_ratio_cs, sensitivity_ratio_mixed,
                              sensitivity_ratio_qdyne)

    if args.t_d <= 0 or args.t_tot <= 0:
        raise ConfigError("--t-d and --t-tot must be positive")
    deltas = np.geomspace(args.delta_min, args.delta_max, args.points)
    out = _outdir(args)
    rows = []
    dt = args.t_d / 20.0
    for d in deltas:
        try:
            cs_cf = sensitivity_ratio_cs(d, args.t_d)
            qd_cf = sensitivity_ratio_qdyne(d, args.t_d, args.t_tot)
            mixed = sensitivity_ratio_mixed(d, args.t_e, args.t_tot)
        except ValueError as e:
            raise ConfigError(f"delta = {d:g} rad/s: {e}")
        cs_num = numeric_ratio_cs(d, args.t_d, args.t_tot, dt)
        qd_num = numeric_ratio_qdyne(d, args.t_d, args.t_tot, dt)
        rows.append([f"{v:.8g}" for v in
                     (d, cs_cf, cs_num, qd_cf, qd_num, mixed)])
    write_csv(out / "sensitivity.csv",
              ["delta_rad_s", "cs_closed_form", "cs_numeric",
               "qdyne_closed_form", "qdyne_numeric", "mixed_ei"], rows)
    write_report(out / "sensitivity.txt", [
        ("T_D_s", args.t_d), ("T_tot_s", args.t_tot), ("T_E_s", args.t_e),
        ("delta_min_rad_s", args.delta_min),
        ("delta_max_rad_s", args.delta_max), ("points", args.points),
        ("fi_convention", "Qdyne FI on correlation lags with per-lag "
                          "sigma from pair counts; CS FI on the t grid "
                          "with uniform sigma")])
    print(f"wrote {out / 'sensitivity.csv'}")
    return EXIT_OK


def cmd_preset_list(args):
    from .presets import PRESETS

    print(f"{'name':<10} {'protocol':<24} {'d_nm':>5} {'f_L_kHz':>8} "
          f"{'XY8':>4} {'T_Qd_us':>8} {'T_tot_h':>8} {'delta_Hz':>9} "
          f"{'T_D_us':>8}")
    for name in sorted(PRESETS):
        p = PRESETS[name]
        print(f"{p.name:<10} {p.protocol:<24} {p.depth_nm:>5.1f} "
              f"{p.f_larmor_khz:>8.1f} {p.xy8_order:>4d} {p.T_qd_us:>8.3f} "
              f"{p.T_tot_h:>8.1f} {p.delta_hz:>9.1f} {p.T_D_s * 1e6:>8.1f}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(
        prog="nanonmr",
        description="Nano-NMR diffusion-noise simulation and estimation")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("simulate", help="generate a synthetic Qdyne trace")
    common(p)
    p.add_argument("--preset", required=True)
    p.add_argument("--model", default="powerlaw",
                   choices=["powerlaw", "exponential"])
    p.add_argument("--scale", type=float, default=1.0,
                   help="desk-scale factor for slice duration")
    p.add_argument("--max-slices", type=int, default=360,
                   help="cap on the number of simulated slices")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="run the estimation pipeline on a trace")
    common(p)
    p.add_argument("trace", help="binary trace file from simulate")
    p.add_argument("--preset", required=True)
    p.add_argument("--scale", type=float, default=1.0,
                   help="scale the trace was simulated at")
    p.add_argument("--fix-phase", action="store_true",
                   help="hold the fit phase at 0")
    p.add_argument("--fix-amplitude", type=float, default=None,
                   metavar="A1", help="hold the fit amplitude at A1")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("spectrum", help="export model spectra on a shared grid")
    common(p)
    p.add_argument("--t-d", type=float, default=400e-6,
                   help="diffusion time T_D in seconds")
    p.add_argument("--t-e-factor", type=float, default=50.0,
                   help="mixed-model T_E as a multiple of T_D")
    p.add_argument("--delta", type=float, default=0.0,
                   help="beat frequency in rad/s")
    p.add_argument("--points", type=int, default=60)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("mc-oracle",
                       help="first-principles dipole Monte-Carlo correlation")
    common(p)
    p.add_argument("--depth", type=float, default=1.0e-9,
                   help="sensor depth in metres")
    p.add_argument("--diffusion", type=float, default=5e-13,
                   help="diffusion coefficient in m^2/s")
    p.add_argument("--particles", type=int, default=10_000)
    p.add_argument("--steps", type=int, default=200_000)
    p.add_argument("--rescale", type=float, default=1.0,
                   help="scale depth by s and diffusion by s^2")
    p.set_defaults(func=cmd_mc_oracle)

    p = sub.add_parser("sensitivity",
                       help="closed-form and numeric sensitivity ratios")
    common(p)
    p.add_argument("--t-d", type=float, default=1.0)
    p.add_argument("--t-tot", type=float, default=5000.0)
    p.add_argument("--t-e", type=float, default=50.0)
    p.add_argument("--delta-min", type=float, default=0.02)
    p.add_argument("--delta-max", type=float, default=2.0)
    p.add_argument("--points", type=int, default=17)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("preset-list", help="list the experiment presets")
    p.set_defaults(func=cmd_preset_list)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
