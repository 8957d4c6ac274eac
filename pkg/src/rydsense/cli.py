"""Command-line front end.

Every subcommand builds its outputs in memory and writes them only once the
computation has succeeded, next to a ``<subcommand>_manifest.json`` holding
the configuration, seed and arguments needed to regenerate them. Data files
for a given (config, seed, subcommand) are bit-identical across runs and
worker counts; only the manifest's wall-clock entry changes.

All numeric flags are SI (s, Hz) except fields, which are in mV/m.
"""

import argparse
import datetime
import hashlib
import json
import math
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__, analysis, fieldgen, ramsey, sequence
from .config import PATHS, ConfigError, ExperimentConfig
from .plotting import render_curve

SEED_ENV = "RYDSENSE_SEED"
NOISE_KINDS = ("none", "gaussian", "exp", "white", "sine")


class CliError(ValueError):
    """Invalid command-line input."""


# ---------------------------------------------------------------------------
# output staging
# ---------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def format_csv(columns):
    """Comma-separated table with a header row and LF line endings."""
    names = list(columns)
    length = {len(columns[k]) for k in names}
    if len(length) != 1:
        raise ValueError("all columns must have the same length")
    lines = [",".join(names)]
    for row in zip(*(columns[k] for k in names)):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


class Outputs:
    """Files staged in memory, committed atomically at the end of a run."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.files = {}

    def text(self, name, text):
        self.files[name] = text.encode()

    def csv(self, name, columns):
        self.text(name, format_csv(columns))

    def json(self, name, obj):
        self.text(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def binary(self, name, data):
        self.files[name] = bytes(data)

    def commit(self, manifest_name, manifest):
        os.makedirs(self.out_dir, exist_ok=True)
        manifest["outputs"] = {
            name: {"path": os.path.join(self.out_dir, name),
                   "sha256": hashlib.sha256(data).hexdigest()}
            for name, data in sorted(self.files.items())
        }
        staged = dict(self.files)
        staged[manifest_name] = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode()
        temps = []
        try:
            for name, data in staged.items():
                fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=self.out_dir)
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                temps.append((tmp, os.path.join(self.out_dir, name)))
        except BaseException:
            for tmp, _ in temps:
                os.unlink(tmp)
            raise
        for tmp, final in temps:
            os.replace(tmp, final)
        return [final for _, final in temps]


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def _global_parser():
    g = argparse.ArgumentParser(add_help=False)
    s = argparse.SUPPRESS
    g.add_argument("--config", metavar="PATH", default=s, help="JSON file of config fields")
    g.add_argument("--set", metavar="FIELD=VALUE", action="append", default=s,
                   help="override one config field (repeatable)")
    g.add_argument("--seed", type=int, default=s, help=f"master seed (fallback ${SEED_ENV})")
    g.add_argument("--shots", type=int, default=s, help="shots per point")
    g.add_argument("--out", metavar="DIR", default=s, help="output directory (default: out)")
    g.add_argument("--workers", type=int, default=s, help="Monte Carlo worker threads")
    g.add_argument("--path", choices=PATHS, default=s, help="phase model")
    g.add_argument("--no-plot", action="store_true", default=s, help="skip PNG rendering")
    return g


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _noise_args(p, sigma=37.0):
    p.add_argument("--sigma", type=float, default=sigma, help="field rms, mV/m")
    p.add_argument("--g1", type=float, default=0.0, help="pair correlation (gaussian)")
    p.add_argument("--j0", type=float, default=150.0, help="exp table correlation in samples")
    p.add_argument("--trigger", choices=("random", "sequential"), default="random")
    p.add_argument("--amplitude", type=float, default=18.8, help="sine amplitude, mV/m")
    p.add_argument("--nu", type=float, default=225e3, help="sine frequency, Hz")


def _tau_args(p, points):
    p.add_argument("--tau-min", type=float, default=0.25e-6)
    p.add_argument("--tau-max", type=float, default=15e-6)
    p.add_argument("--points", type=int, default=points)
    p.add_argument("--taus", type=_float_list, default=None, help="explicit tau list, s")
    p.add_argument("--phi-points", type=int, default=8)


def build_parser():
    g = _global_parser()
    parser = argparse.ArgumentParser(prog="rydsense", parents=[g],
                                     description="Rydberg-atom electrometer simulator")
    parser.add_argument("--version", action="version", version=f"rydsense {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")
    sub.required = True

    p = sub.add_parser("fringes", parents=[g], help="microwave-phase fringe scan")
    p.add_argument("--noise", choices=NOISE_KINDS, default="none")
    _noise_args(p)
    p.add_argument("--tau", type=float, default=None, help="pair separation, s")
    p.add_argument("--phi-points", type=int, default=8)
    p.add_argument("--sequence", metavar="PATH", default=None, help="JSON pulse sequence")

    p = sub.add_parser("fig2b", parents=[g], help="signal vs pulse-pair start")
    p.add_argument("--f0", type=float, default=37.6, help="pulse amplitude, mV/m")
    p.add_argument("--ts-min", type=float, default=-2.0e-6)
    p.add_argument("--ts-max", type=float, default=1.5e-6)
    p.add_argument("--points", type=int, default=71)
    p.add_argument("--ts", type=_float_list, default=None, help="explicit t_s - t+ list, s")
    p.add_argument("--phi-mw", type=float, default=math.pi / 2)

    p = sub.add_parser("fig2c", parents=[g], help="relative sensitivity vs frequency")
    p.add_argument("--nu-max", type=float, default=20e6)
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--nus", type=_float_list, default=None, help="explicit frequency list, Hz")
    p.add_argument("--amplitude", type=float, default=50.0, help="probe amplitude, mV/m")
    p.add_argument("--phase-points", type=int, default=8)

    p = sub.add_parser("fig3", parents=[g], help="contrast reduction vs noise amplitude")
    p.add_argument("--sigmas", type=_float_list, default=[0, 10, 20, 37, 60, 100])
    p.add_argument("--g1", type=float, default=0.0)
    p.add_argument("--phi-points", type=int, default=8)

    p = sub.add_parser("fig4a", parents=[g], help="contrast vs delay, correlated noise")
    p.add_argument("--noise", choices=("exp", "white"), default="exp")
    p.add_argument("--sigma", type=float, default=37.0)
    p.add_argument("--j0", type=float, default=150.0)
    p.add_argument("--trigger", choices=("random", "sequential"), default="random")
    _tau_args(p, 30)

    p = sub.add_parser("fig4b", parents=[g], help="contrast vs delay, asynchronous sine")
    p.add_argument("--amplitude", type=float, default=18.8)
    p.add_argument("--nu", type=float, default=225e3)
    _tau_args(p, 40)

    p = sub.add_parser("noise", parents=[g], help="generate an AWG noise table")
    p.add_argument("--kind", choices=("exp", "white"), default="exp")
    p.add_argument("--j0", type=float, default=150.0)
    p.add_argument("--n-samples", type=int, default=fieldgen.TABLE_LENGTH)
    p.add_argument("--max-lag", type=int, default=None, help="lags in samples")

    p = sub.add_parser("sensitivity", parents=[g], help="sensitivity and SQL report")
    p.add_argument("--k", type=int, default=1, help="number of atoms")

    p = sub.add_parser("calibrate-alpha", parents=[g], help="fringe-shift alpha calibration")
    p.add_argument("--delta-f0", type=float, default=None, help="field step, mV/m")
    p.add_argument("--phi-points", type=int, default=16)

    p = sub.add_parser("balance-dt", parents=[g], help="balance the sigma- pulse gap")
    p.add_argument("--upper", type=float, default=100e-9)
    return parser


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def resolve_config(args, env=None):
    """Config from defaults, ``--config``, ``--set``, ``--path`` and the seed
    sources ``--seed`` > ``$RYDSENSE_SEED`` > config file, in that order."""
    env = os.environ if env is None else env
    data = {}
    path = getattr(args, "config", None)
    if path:
        try:
            data = ExperimentConfig.from_file(path).to_dict()
        except OSError as exc:
            raise CliError(f"cannot read config {path}: {exc.strerror}") from None
    for item in getattr(args, "set", None) or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise CliError(f"--set expects FIELD=VALUE, got {item!r}")
        data[key.strip()] = _parse_value(value.strip())
    if getattr(args, "path", None):
        data["path"] = args.path
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    elif env.get(SEED_ENV):
        try:
            data["seed"] = int(env[SEED_ENV])
        except ValueError:
            raise CliError(f"${SEED_ENV} must be an integer, got {env[SEED_ENV]!r}") from None
    return ExperimentConfig.from_dict(data)


def _shots(args, default):
    shots = getattr(args, "shots", default)
    if shots < 1:
        raise CliError(f"--shots must be >= 1, got {shots}")
    return shots


def _per_setting(total, settings):
    return max(1, -(-total // settings))


def _workers(args):
    workers = getattr(args, "workers", 1)
    if workers < 1:
        raise CliError(f"--workers must be >= 1, got {workers}")
    return workers


def _positive(name, value, minimum=1):
    if value < minimum:
        raise CliError(f"--{name} must be >= {minimum}, got {value}")


def _taus(args):
    if args.taus is not None:
        taus = np.asarray(args.taus, dtype=float)
    else:
        _positive("points", args.points)
        taus = np.linspace(args.tau_min, args.tau_max, args.points)
    if taus.size == 0:
        raise CliError("empty tau grid")
    return taus


# ---------------------------------------------------------------------------
# noise models and their predicted contrast
# ---------------------------------------------------------------------------


def _table_g1(kind, j0):
    if kind == "exp":
        return lambda d: analysis.exponential_g1(d, j0 * fieldgen.SAMPLE_PERIOD)
    return lambda d: analysis.boxcar_g1(d, 20 * fieldgen.SAMPLE_PERIOD)


def make_noise(kind, cfg, sigma=37.0, g1=0.0, j0=150.0, trigger="random", amplitude=18.8,
               nu=225e3):
    if kind == "none":
        return ramsey.NoNoise()
    if kind == "gaussian":
        return ramsey.GaussianPairNoise(sigma, g1)
    if kind == "exp":
        table = fieldgen.gen_exp_correlated(j0=j0, seed=cfg.seed)
        return ramsey.TableNoise(table, sigma=sigma, trigger=trigger)
    if kind == "white":
        return ramsey.TableNoise(fieldgen.gen_white_20pt(seed=cfg.seed), sigma=sigma,
                                 trigger=trigger)
    if kind == "sine":
        return ramsey.SineNoise(amplitude, nu)
    raise CliError(f"unknown noise kind {kind!r}")


def phase_variance(cfg, timeline, kind, sigma=37.0, g1=0.0, j0=150.0, amplitude=18.8,
                   nu=225e3):
    """Variance of the interferometric phase predicted by the linear kernel."""
    k = ramsey.theory_kernel(cfg, timeline)
    if kind == "none":
        return 0.0
    if kind == "gaussian":
        w = [k.pair_weights(i)[1].sum() for i in range(len(k.pair_slices))]
        if len(w) < 2:
            return sigma ** 2 * sum(x * x for x in w)
        return sigma ** 2 * (w[0] ** 2 + w[1] ** 2 + 2 * g1 * w[0] * w[1])
    if kind == "sine":
        return 0.5 * (amplitude * analysis.kernel_transfer(k.times, k.weights, nu)[0]) ** 2
    gmat = _table_g1(kind, j0)(k.times[:, None] - k.times[None, :])
    return sigma ** 2 * float(k.weights @ gmat @ k.weights)


def predicted_cr(cfg, timeline, kind, **noise):
    """Contrast reduction for Gaussian noise or a random-phase sine."""
    if kind == "sine":
        k = ramsey.theory_kernel(cfg, timeline)
        return analysis.contrast_sine_kernel(k.times, k.weights, noise.get("amplitude", 18.8),
                                             noise.get("nu", 225e3))
    return math.exp(-0.5 * phase_variance(cfg, timeline, kind, **noise))


def small_signal_cr(var):
    """Second-order expansion ``1 - Var/2``; NaN where it is out of its domain."""
    return 1.0 - var / 2 if var / 2 <= 0.25 else math.nan


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _plot(args, out, name, columns, **kw):
    if getattr(args, "no_plot", False):
        return
    out.binary(name, render_curve(columns, **kw))


def _noise_kw(args):
    return dict(sigma=args.sigma, g1=args.g1, j0=args.j0, amplitude=args.amplitude, nu=args.nu)


def cmd_fringes(args, cfg, out):
    shots = _shots(args, 1000)
    _positive("phi-points", args.phi_points, 3)
    if args.sequence:
        try:
            timeline = sequence.load_sequence(args.sequence)
        except OSError as exc:
            raise CliError(f"cannot read sequence {args.sequence}: {exc.strerror}") from None
    else:
        timeline = sequence.default_sequence(cfg, args.tau)
    noise = make_noise(args.noise, cfg, trigger=args.trigger, **_noise_kw(args))
    phis = ramsey.default_phi_grid(args.phi_points)
    res = ramsey.scan_mw_phase(cfg, timeline, noise, phis, shots, _workers(args))
    fit = res.fit
    theory = predicted_cr(cfg, timeline, args.noise, **_noise_kw(args))
    rows = res.rows()
    out.csv("fringes.csv", {
        "setting": [r[0] for r in rows], "shots": [r[1] for r in rows],
        "successes": [r[2] for r in rows], "p49": [r[3] for r in rows],
        "stderr": [r[4] for r in rows],
    })
    summary = fit.to_dict()
    summary.update(noise=args.noise, contrast_ratio=fit.contrast / cfg.C0,
                   contrast_ratio_err=fit.contrast_err / cfg.C0 if fit.ok else None,
                   contrast_ratio_theory=theory, shots_per_phase=shots)
    if not fit.ok:
        summary["offset_err"] = summary["contrast_err"] = summary["phase_err"] = None
    out.json("fringes_fit.json", summary)
    _plot(args, out, "fringes.png", {"x": res.settings, "y": res.p49, "yerr": res.stderr},
          xlabel="microwave phase (rad)", ylabel="P49", title="fringe scan")
    lines = [f"contrast={fit.contrast:.4f}"]
    if fit.ok:
        lines += [f"contrast_err={fit.contrast_err:.4f}", f"phase={fit.phase:.4f} rad"]
    lines += [f"contrast_ratio={fit.contrast / cfg.C0:.4f}",
              f"contrast_ratio_theory={theory:.4f}"]
    return lines


def cmd_fig2b(args, cfg, out):
    shots = _shots(args, 10_000)
    if args.ts is not None:
        ts = np.asarray(args.ts, dtype=float)
    else:
        _positive("points", args.points)
        ts = np.linspace(args.ts_min, args.ts_max, args.points)
    res = ramsey.scan_pulse_start(cfg, args.f0, ts, shots, _workers(args), phi_mw=args.phi_mw)
    timeline = sequence.default_sequence(cfg)
    t_plus = timeline.pair("sigma+").center
    acfg = cfg.replace(path="analytic")
    ideal = [ramsey.expected_p49(acfg, timeline, fieldgen.pulse_pair(args.f0, t_plus + t),
                                 args.phi_mw) for t in ts]
    cols = {"x": ts, "y": res.p49, "yerr": res.stderr, "y_theory": res.expected,
            "y_instant": ideal}
    out.csv("fig2b.csv", cols)
    _plot(args, out, "fig2b.png", cols, xlabel="t_s - t+ (us)", ylabel="P49", xscale=1e6,
          title=f"pulse pair f0={args.f0:g} mV/m")
    return [f"points={ts.size}", f"shots_per_point={shots}"]


def cmd_fig2c(args, cfg, out):
    shots = _shots(args, 16_000)
    _positive("phase-points", args.phase_points, 3)
    if args.nus is not None:
        nus = np.asarray(args.nus, dtype=float)
    else:
        _positive("points", args.points, 2)
        nus = np.linspace(0.0, args.nu_max, args.points)
    run_cfg = cfg
    if cfg.path == "full":
        # the ladder phase does not use cfg.alpha; normalize to its own slope
        run_cfg = cfg.replace(alpha=abs(ramsey.calibrate_alpha(cfg)[1]))
    per = _per_setting(shots, args.phase_points)
    scan = ramsey.scan_frequency_response(run_cfg, nus, args.amplitude, per, args.phase_points,
                                          _workers(args))
    if cfg.path == "analytic":
        theory = np.ones_like(nus)
        cutoff = math.inf
    else:
        fr = analysis.frequency_response(cfg, nus)
        theory, cutoff = fr.gain_ratio, fr.cutoff_3db
    cols = {"x": nus, "y": scan.gain_ratio, "yerr": scan.gain_err, "y_theory": theory}
    out.csv("fig2c.csv", cols)
    _plot(args, out, "fig2c.png", cols, xlabel="frequency (MHz)", ylabel="G/G0", xscale=1e-6,
          title="relative sensitivity", hline=1 / math.sqrt(2))
    return [f"cutoff_3db={cutoff / 1e6:.4f} MHz", f"shots_per_phase={per}"]


def cmd_fig3(args, cfg, out):
    shots = _shots(args, 10_000)
    _positive("phi-points", args.phi_points, 3)
    per = _per_setting(shots, args.phi_points)
    timeline = sequence.default_sequence(cfg)
    phis = ramsey.default_phi_grid(args.phi_points)
    y, yerr, theory, small = [], [], [], []
    for i, sigma in enumerate(args.sigmas):
        if sigma < 0:
            raise CliError(f"noise amplitudes must be >= 0, got {sigma}")
        noise = ramsey.GaussianPairNoise(sigma, args.g1)
        res = ramsey.scan_mw_phase(cfg, timeline, noise, phis, per, _workers(args),
                                   setting_offset=i * phis.size)
        y.append(res.fit.contrast / cfg.C0)
        yerr.append(res.fit.contrast_err / cfg.C0 if res.fit.ok else math.nan)
        var = phase_variance(cfg, timeline, "gaussian", sigma=sigma, g1=args.g1)
        theory.append(math.exp(-var / 2))
        small.append(small_signal_cr(var))
    cols = {"x": args.sigmas, "y": y, "yerr": yerr, "y_theory": theory, "y_small_signal": small}
    out.csv("fig3.csv", cols)
    _plot(args, out, "fig3.png", cols, xlabel="noise amplitude (mV/m)", ylabel="Cr",
          title="contrast reduction")
    return [f"shots_per_phase={per}"] + [
        f"cr[{s:g}]={v:.4f}+-{e:.4f} theory={t:.4f}"
        for s, v, e, t in zip(args.sigmas, y, yerr, theory)
    ]


def _delay_curve(args, cfg, out, name, kind, noise, noise_kw, title):
    shots = _shots(args, 10_000)
    _positive("phi-points", args.phi_points, 3)
    per = _per_setting(shots, args.phi_points)
    taus = _taus(args)
    scan = ramsey.scan_delay(cfg, noise, taus, per, ramsey.default_phi_grid(args.phi_points),
                             _workers(args))
    theory, small = [], []
    for tau in taus:
        tl = sequence.default_sequence(cfg, float(tau))
        theory.append(cfg.C0 * predicted_cr(cfg, tl, kind, **noise_kw))
        small.append(cfg.C0 * small_signal_cr(phase_variance(cfg, tl, kind, **noise_kw)))
    cols = {"x": taus, "y": scan.contrast, "yerr": scan.contrast_err, "y_theory": theory,
            "y_small_signal": small}
    out.csv(f"{name}.csv", cols)
    _plot(args, out, f"{name}.png", cols, xlabel="tau (us)", ylabel="contrast", xscale=1e6,
          title=title)
    return [f"points={taus.size}", f"shots_per_phase={per}"]


def cmd_fig4a(args, cfg, out):
    kw = dict(sigma=args.sigma, j0=args.j0)
    noise = make_noise(args.noise, cfg, trigger=args.trigger, **kw)
    return _delay_curve(args, cfg, out, "fig4a", args.noise, noise, kw,
                        f"{args.noise} noise, sigma={args.sigma:g} mV/m")


def cmd_fig4b(args, cfg, out):
    kw = dict(amplitude=args.amplitude, nu=args.nu)
    noise = ramsey.SineNoise(args.amplitude, args.nu)
    return _delay_curve(args, cfg, out, "fig4b", "sine", noise, kw,
                        f"sine {args.amplitude:g} mV/m, {args.nu / 1e3:g} kHz")


def cmd_noise(args, cfg, out):
    _positive("n-samples", args.n_samples, 2)
    if args.kind == "exp":
        table = fieldgen.gen_exp_correlated(args.n_samples, args.j0, cfg.seed)
        corr_len = args.j0
        max_lag = args.max_lag or int(min(args.n_samples // 2 - 1, 4 * args.j0))
    else:
        table = fieldgen.gen_white_20pt(args.n_samples, cfg.seed)
        corr_len = 20
        max_lag = args.max_lag or min(args.n_samples // 2 - 1, 100)
    _positive("max-lag", max_lag)
    dt = table.sample_period
    est = fieldgen.autocorrelation(table, max_lag * dt)
    n_eff = fieldgen.effective_samples(table, corr_len)
    bound = 3 / math.sqrt(n_eff)
    lag_s = est.lags
    theory = _table_g1(args.kind, args.j0)(lag_s)
    summary = {"kind": args.kind, "n_samples": len(table), "sigma_s": table.sigma,
               "n_eff": n_eff, "g1_bound": bound}
    lines = [f"sigma_s={table.sigma:.4f}"]
    if args.kind == "exp":
        try:
            tau_c, r2 = analysis.fit_exponential_correlation(est)
        except analysis.FitDomainError as exc:
            raise CliError(f"correlation fit failed: {exc}") from None
        summary.update(tau_c=tau_c, r_squared=r2, j0=args.j0)
        lines += [f"tau_c={tau_c * 1e6:.4f} us", f"r_squared={r2:.5f}"]
    else:
        k = np.arange(est.lags.size)
        beyond = np.abs(est.g1[k > 20])
        support = int(k[np.abs(est.g1) > bound].max()) + 1
        summary.update(support=support * dt,
                       max_abs_g1_beyond=float(beyond.max()) if beyond.size else 0.0)
        lines += [f"support={support * dt * 1e9:.0f} ns",
                  f"max_abs_g1_beyond={summary['max_abs_g1_beyond']:.4f}",
                  f"g1_bound={bound:.4f}"]
    out.text(f"noise_{args.kind}.txt", fieldgen.format_waveform(table))
    cols = {"x": lag_s, "y": est.g1, "yerr": np.full(est.lags.size, 1 / math.sqrt(n_eff)),
            "y_theory": theory}
    out.csv(f"noise_{args.kind}_g1.csv", cols)
    out.json(f"noise_{args.kind}_fit.json", summary)
    _plot(args, out, f"noise_{args.kind}_g1.png", cols, xlabel="lag (us)", ylabel="g1",
          xscale=1e6, title=f"{args.kind} table autocorrelation")
    return lines


def cmd_sensitivity(args, cfg, out):
    try:
        report = analysis.sensitivity_report(cfg, args.k)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    lines = report.lines()
    out.text("sensitivity.txt", "\n".join(lines) + "\n")
    return lines


def cmd_calibrate_alpha(args, cfg, out):
    _positive("phi-points", args.phi_points, 3)
    a_plus, a_minus = ramsey.calibrate_alpha(cfg, args.delta_f0, args.phi_points)
    lines = [f"alpha_plus={a_plus:.6g} rad/(mV/m)", f"alpha_minus={a_minus:.6g} rad/(mV/m)",
             f"path={cfg.path}"]
    out.text("calibrate_alpha.txt", "\n".join(lines) + "\n")
    return lines


def cmd_balance_dt(args, cfg, out):
    gap = sequence.balance_delta_t_minus(cfg, args.upper)
    plus, minus = sequence.pair_phase_coefficients(cfg, gap)
    lines = [f"delta_t_minus={gap * 1e9:.4f} ns",
             f"dipole_integral_plus={plus * 1e9:.6g} ns",
             f"dipole_integral_minus={minus * 1e9:.6g} ns"]
    out.text("balance_dt.txt", "\n".join(lines) + "\n")
    return lines


COMMANDS = {
    "fringes": cmd_fringes, "fig2b": cmd_fig2b, "fig2c": cmd_fig2c, "fig3": cmd_fig3,
    "fig4a": cmd_fig4a, "fig4b": cmd_fig4b, "noise": cmd_noise,
    "sensitivity": cmd_sensitivity, "calibrate-alpha": cmd_calibrate_alpha,
    "balance-dt": cmd_balance_dt,
}

_EXPECTED_ERRORS = (CliError, ConfigError, sequence.SequenceSyntaxError,
                    sequence.SequenceValidationError, sequence.BalanceInfeasibleError,
                    fieldgen.TraceRangeError, fieldgen.FieldBoundError,
                    fieldgen.DegenerateFilterError, ramsey.FitError, ValueError)


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def main(argv=None, env=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.time()
    try:
        cfg = resolve_config(args, env)
        out = Outputs(getattr(args, "out", "out"))
        lines = COMMANDS[args.command](args, cfg, out)
        manifest = {
            "software": "rydsense", "version": __version__,
            "subcommand": args.command, "seed": cfg.seed, "config": cfg.to_dict(),
            "arguments": {k: _jsonable(v) for k, v in sorted(vars(args).items())
                          if k not in ("command",)},
            "wall_clock": {
                "started": datetime.datetime.fromtimestamp(
                    started, datetime.timezone.utc).isoformat(),
                "elapsed_s": round(time.time() - started, 3),
            },
        }
        out.commit(f"{args.command}_manifest.json", manifest)
    except _EXPECTED_ERRORS as exc:
        print(f"rydsense {args.command}: error: {exc}", file=sys.stderr)
        return 2
    for line in lines:
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
