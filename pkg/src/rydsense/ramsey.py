"""Ramsey interferometer: phases, single-atom detection and Monte Carlo scans.

The phase picked up by the |51C> branch is computed at one of three
fidelity levels (``cfg.path``):

``analytic``
    instant sampling, ``Phi = alpha (f(t+) - f(t-))`` at the pair centers;
``dipole``
    ``Phi = sum_k w_k f(t_k)`` with weights following the resonant SCS
    dipole ``(1 - cos theta(t)) / 2`` over each pair. With
    ``dipole_normalization="alpha"`` each pair's weights sum to ``+-alpha``;
    with ``"physical"`` they are ``D(t) dt / hbar`` from the ladder dipoles;
``full``
    batched spin-ladder evolution of each pair, optionally with the
    off-resonant n=49 reference transient.

Each shot detects the atom in |49C> with probability
``P0 + (C0/2) cos(Phi - phi_mw)`` clipped to [0, 1].

Monte Carlo shots are grouped in fixed blocks of ``BLOCK`` shots; block
``b`` of setting ``s`` draws from the stream ``(seed, s, b)``, so pooled
results do not depend on the number of worker threads.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from . import spin_ladder as sl
from ._random import generator
from .config import ExperimentConfig
from .fieldgen import FieldTrace, TraceRangeError, pulse_pair
from .sequence import MW, Timeline, default_sequence

BLOCK = 4096
AWG_REPETITION = 311e-6  # experimental cycle; incommensurate with the table length

__all__ = [
    "ExperimentConfig", "PhaseKernel", "phase_kernel", "ShotOutcome", "RamseyResult",
    "FringeFit", "FitError", "NoNoise", "FieldNoise", "GaussianPairNoise", "TableNoise",
    "SineNoise", "fit_fringe", "fit_fringe_probabilities", "run_shot", "expected_p49",
    "scan_mw_phase", "scan_pulse_start", "scan_delay", "scan_frequency_response",
    "calibrate_alpha", "shot_phases", "theory_kernel",
]


class FitError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# phase kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseKernel:
    """Linear phase functional ``Phi = sum(weights * f(times))`` (rad, f in mV/m)."""

    times: np.ndarray
    weights: np.ndarray
    pair_slices: tuple = ()

    def phase(self, fvals):
        return np.asarray(fvals, dtype=float) @ self.weights

    def pair_weights(self, index):
        sl_ = self.pair_slices[index]
        return self.times[sl_], self.weights[sl_]


def _pair_sign(ev):
    return sl.polarization_sign(ev.polarization)


def phase_kernel(cfg, timeline, path=None):
    """Phase kernel of ``timeline`` for the ``analytic`` or ``dipole`` path."""
    path = cfg.path if path is None else path
    pairs = timeline.rf_pairs()
    if path == "analytic":
        times = np.array([ev.center for ev in pairs])
        weights = np.array([_pair_sign(ev) * cfg.alpha for ev in pairs])
        slices = tuple(slice(i, i + 1) for i in range(len(pairs)))
        return PhaseKernel(times, weights, slices)
    if path != "dipole":
        raise ValueError(f"no linear phase kernel for path {path!r}")
    model = sl.DipoleModel(cfg.n)
    times, weights, slices = [], [], []
    start = 0
    for ev in pairs:
        extent = 2 * ev.duration + ev.intra_pair_gap
        n = max(1, int(math.ceil(extent / cfg.dt - 1e-9)))
        h = extent / n
        rel = h * (np.arange(n) + 0.5)
        prof = sl.pair_dipole_profile(rel, ev.duration, ev.rotation_angle, ev.intra_pair_gap)
        if cfg.dipole_normalization == "alpha":
            w = _pair_sign(ev) * cfg.alpha * prof / prof.sum()
        else:
            w = _pair_sign(ev) * model.d_max * prof * h / sl.HBAR * 1e-3
        times.append(ev.start + rel)
        weights.append(w)
        slices.append(slice(start, start + n))
        start += n
    if not pairs:
        return PhaseKernel(np.zeros(0), np.zeros(0), ())
    return PhaseKernel(np.concatenate(times), np.concatenate(weights), tuple(slices))


def theory_kernel(cfg, timeline):
    """Linear kernel matching ``cfg.path`` for closed-form predictions.

    The ``full`` path has no exact linear kernel; its linear response is the
    physical dipole kernel, which is returned instead.
    """
    if cfg.path == "full":
        return phase_kernel(cfg.replace(dipole_normalization="physical"), timeline, "dipole")
    return phase_kernel(cfg, timeline)


def _pair_ladder_drives(cfg, ev):
    detuning = cfg.detuning_plus if ev.polarization == sl.SIGMA_PLUS else cfg.detuning_minus
    return sl.pair_drives(ev.duration, ev.rotation_angle, ev.intra_pair_gap, ev.polarization,
                          detuning, 0.0, ev.return_phase)


def _reference_drives(cfg, ev):
    detuning = (cfg.ref_detuning_plus if ev.polarization == sl.SIGMA_PLUS
                else cfg.ref_detuning_minus)
    omega = sl.two_pi_return_rabi(ev.duration, detuning)
    drives = [sl.RfDrive(omega, detuning, 0.0, ev.polarization, ev.duration)]
    if ev.intra_pair_gap > 0:
        drives.append(sl.RfDrive(0.0, detuning, 0.0, ev.polarization, ev.intra_pair_gap))
    drives.append(sl.RfDrive(omega, detuning, ev.return_phase, ev.polarization, ev.duration))
    return drives


def _full_phases(cfg, timeline, realization):
    phases = None
    J51 = (cfg.n - 1) / 2
    kappa51 = sl.DipoleModel(cfg.n).domega_dF
    for ev in timeline.rf_pairs():
        drives = _pair_ladder_drives(cfg, ev)
        mid, _, _ = sl.step_grid(drives, ev.start, cfg.dt)
        fvals = realization(mid)
        phi, _ = sl.ladder_top_phase(J51, drives, fvals, ev.start, cfg.dt, kappa51)
        if cfg.reference_transient:
            ref = _reference_drives(cfg, ev)
            mid49, _, _ = sl.step_grid(ref, ev.start, cfg.dt)
            phi49, _ = sl.ladder_top_phase((cfg.n - 3) / 2, ref, realization(mid49), ev.start,
                                           cfg.dt, sl.DipoleModel(cfg.n - 2).domega_dF)
            phi = phi - phi49
        phases = phi if phases is None else phases + phi
    return phases


def shot_phases(cfg, timeline, realization, n, kernel=None):
    """Interferometric phase for ``n`` realizations of the field."""
    if not timeline.rf_pairs():
        return np.zeros(n)
    if cfg.path == "full":
        return np.broadcast_to(_full_phases(cfg, timeline, realization), (n,)).copy()
    kernel = phase_kernel(cfg, timeline) if kernel is None else kernel
    return realization(kernel.times) @ kernel.weights


def p49(cfg, phi_tot, phi_mw):
    p = cfg.P0 + 0.5 * cfg.C0 * np.cos(np.asarray(phi_tot) - phi_mw)
    return np.clip(p, 0.0, 1.0)


# ---------------------------------------------------------------------------
# noise models
# ---------------------------------------------------------------------------


class NoNoise:
    label = "none"

    def realize(self, rng, n, first_shot, timeline):
        return lambda t: np.zeros((n, np.size(t)))


@dataclass(frozen=True)
class FieldNoise:
    """Deterministic field, identical in every shot."""

    trace: FieldTrace
    label: str = "field"

    def realize(self, rng, n, first_shot, timeline):
        def f(t):
            return np.broadcast_to(self.trace(t), (n, np.size(t)))
        return f


@dataclass(frozen=True)
class GaussianPairNoise:
    """Gaussian field held constant over each rf pair, correlation ``g1``
    between the sigma+ and sigma- pair values."""

    sigma: float
    g1: float = 0.0
    label: str = "gaussian"

    def __post_init__(self):
        if self.sigma < 0 or not -1 <= self.g1 <= 1:
            raise ValueError("need sigma >= 0 and -1 <= g1 <= 1")

    def realize(self, rng, n, first_shot, timeline):
        z = rng.standard_normal((2, n))
        f1 = self.sigma * z[0]
        f2 = self.sigma * (self.g1 * z[0] + math.sqrt(1 - self.g1 ** 2) * z[1])
        centers = sorted(ev.center for ev in timeline.rf_pairs())
        split = 0.5 * (centers[0] + centers[1]) if len(centers) > 1 else math.inf

        def f(t):
            late = np.asarray(t) >= split
            return np.where(late[None, :], f2[:, None], f1[:, None])
        return f


class TableNoise:
    """Field played from a looping AWG table triggered at a random or
    sequential offset per shot.

    ``sigma`` rescales the table so the field standard deviation is
    ``sigma`` mV/m. ``trigger="sequential"`` advances the offset by
    ``repetition`` seconds per shot, starting from a seeded random offset.
    """

    label = "table"

    def __init__(self, table, sigma=None, trigger="random", repetition=AWG_REPETITION):
        if trigger not in ("random", "sequential"):
            raise ValueError("trigger must be 'random' or 'sequential'")
        self.table = table if sigma is None else table.with_sigma(sigma)
        self.trigger = trigger
        self.repetition = repetition

    def offsets(self, rng, n, first_shot):
        dur = self.table.duration
        if self.trigger == "random":
            return rng.uniform(0.0, dur, n)
        k = first_shot + np.arange(n)
        return np.mod(k * self.repetition, dur)

    def realize(self, rng, n, first_shot, timeline):
        off = self.offsets(rng, n, first_shot)
        w = self.table
        values = w.scale * w.samples

        def f(t):
            k = np.floor((np.asarray(t)[None, :] + off[:, None]) / w.sample_period)
            return values[np.mod(k.astype(np.int64), len(w))]
        return f


@dataclass(frozen=True)
class SineNoise:
    """``A sin(2 pi nu t + phase)``; ``phase=None`` draws it uniformly per shot."""

    amplitude: float
    nu: float
    phase: float = None
    label: str = "sine"

    def realize(self, rng, n, first_shot, timeline):
        if self.phase is None:
            ph = rng.uniform(0.0, 2 * math.pi, n)
        else:
            ph = np.full(n, float(self.phase))
        w = 2 * math.pi * self.nu

        def f(t):
            return self.amplitude * np.sin(w * np.asarray(t)[None, :] + ph[:, None])
        return f


# ---------------------------------------------------------------------------
# fringe fitting
# ---------------------------------------------------------------------------


@dataclass
class FringeFit:
    """Fit of ``offset + (contrast/2) cos(phase - phi_mw)``.

    ``cov`` is the covariance of ``(offset, contrast, phase)``. ``ok`` is
    False when the data carry no resolvable fringe; contrast is then 0.
    """

    offset: float
    contrast: float
    phase: float
    cov: np.ndarray
    ok: bool = True
    message: str = ""

    @property
    def offset_err(self):
        return float(math.sqrt(self.cov[0, 0]))

    @property
    def contrast_err(self):
        return float(math.sqrt(self.cov[1, 1]))

    @property
    def phase_err(self):
        return float(math.sqrt(self.cov[2, 2]))

    def to_dict(self):
        return {
            "offset": self.offset, "offset_err": self.offset_err,
            "contrast": self.contrast, "contrast_err": self.contrast_err,
            "phase": self.phase, "phase_err": self.phase_err,
            "ok": self.ok, "message": self.message,
        }


def _design(phi):
    phi = np.asarray(phi, dtype=float)
    return np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])


def _quadratures_to_fit(beta, cov_beta, ok=True, message=""):
    a, b, c = beta
    r = math.hypot(b, c)
    if r == 0.0 or not ok:
        return FringeFit(float(a), 0.0, 0.0, np.full((3, 3), np.nan), False,
                         message or "flat fringe")
    jac = np.array([
        [1.0, 0.0, 0.0],
        [0.0, 2 * b / r, 2 * c / r],
        [0.0, -c / r ** 2, b / r ** 2],
    ])
    cov = jac @ cov_beta @ jac.T
    return FringeFit(float(a), 2 * r, float(math.atan2(c, b)), cov, True, message)


def _distinct_phases(phi):
    return np.unique(np.round(np.mod(phi, 2 * math.pi), 12)).size


def fit_fringe(phi, successes, shots):
    """Weighted linear least-squares fringe fit to binomial counts.

    Fits ``a + b cos(phi) + c sin(phi)``; contrast ``2 sqrt(b^2 + c^2)``.
    Flat or degenerate data return a fit with ``ok=False`` and zero contrast.
    """
    phi = np.asarray(phi, dtype=float)
    s = np.asarray(successes, dtype=float)
    n = np.asarray(shots, dtype=float)
    if _distinct_phases(phi) < 3:
        return _quadratures_to_fit((np.sum(s) / np.sum(n), 0, 0), None, False,
                                   "need at least three distinct phases")
    p = s / n
    if np.all(s == 0) or np.all(s == n) or np.ptp(p) == 0:
        return _quadratures_to_fit((float(p.mean()), 0, 0), None, False, "flat fringe")
    X = _design(phi)
    beta = np.linalg.lstsq(X, p, rcond=None)[0]
    for _ in range(2):
        mu = np.clip(X @ beta, 0.5 / n, 1 - 0.5 / n)
        w = n / (mu * (1 - mu))
        XtW = X.T * w
        cov_beta = np.linalg.inv(XtW @ X)
        beta = cov_beta @ (XtW @ p)
    return _quadratures_to_fit(beta, cov_beta)


def fit_fringe_probabilities(phi, p):
    """Unweighted fringe fit to exact probabilities (no sampling noise)."""
    phi = np.asarray(phi, dtype=float)
    if _distinct_phases(phi) < 3:
        raise FitError("need at least three distinct phases")
    beta = np.linalg.lstsq(_design(phi), np.asarray(p, dtype=float), rcond=None)[0]
    return _quadratures_to_fit(beta, np.zeros((3, 3)))


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass
class ShotOutcome:
    detected_49: bool
    phi_tot: float
    f_plus: float
    f_minus: float
    p49: float


@dataclass
class RamseyResult:
    """Per-setting detection counts, optional model expectation and fringe fit."""

    settings: np.ndarray
    shots: np.ndarray
    successes: np.ndarray
    expected: np.ndarray = None
    fit: FringeFit = None
    setting_name: str = "phi_mw"

    def __post_init__(self):
        self.settings = np.asarray(self.settings, dtype=float)
        self.shots = np.asarray(self.shots, dtype=np.int64)
        self.successes = np.asarray(self.successes, dtype=np.int64)
        if np.any(self.successes > self.shots) or np.any(self.successes < 0):
            raise ValueError("successes must lie in [0, shots]")

    @property
    def p49(self):
        return self.successes / self.shots

    @property
    def stderr(self):
        p = self.p49
        return np.sqrt(p * (1 - p) / self.shots)

    def rows(self):
        return [
            (float(x), int(n), int(k), float(p), float(e))
            for x, n, k, p, e in zip(self.settings, self.shots, self.successes, self.p49,
                                     self.stderr)
        ]


@dataclass
class DelayScan:
    taus: np.ndarray
    contrast: np.ndarray
    contrast_err: np.ndarray
    ok: np.ndarray
    results: list = field(default_factory=list)


@dataclass
class FrequencyScan:
    nus: np.ndarray
    gain_ratio: np.ndarray
    gain_err: np.ndarray
    results: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Monte Carlo engine
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Task:
    timeline: Timeline
    noise: object
    phi_mw: float
    shots: int
    setting: int


def _run_block(cfg, task, kernel, block, seed):
    first = block * BLOCK
    n = min(BLOCK, task.shots - first)
    rng = generator(seed, task.setting, block)
    realization = task.noise.realize(rng, n, task.setting * task.shots + first, task.timeline)
    phi = shot_phases(cfg, task.timeline, realization, n, kernel)
    p = p49(cfg, phi, task.phi_mw)
    return int(np.count_nonzero(rng.random(n) < p))


def _simulate(cfg, tasks, workers=1, seed=None):
    """Return the success count of every task."""
    seed = cfg.seed if seed is None else seed
    for t in tasks:
        if t.shots < 1:
            raise ValueError("shots must be >= 1 per setting")
    kernels = {}
    for t in tasks:
        key = id(t.timeline)
        if key not in kernels:
            kernels[key] = None if cfg.path == "full" else phase_kernel(cfg, t.timeline)
    jobs = [(i, b) for i, t in enumerate(tasks) for b in range(-(-t.shots // BLOCK))]

    def work(job):
        i, b = job
        t = tasks[i]
        return _run_block(cfg, t, kernels[id(t.timeline)], b, seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(work, jobs))
    else:
        counts = [work(j) for j in jobs]
    totals = [0] * len(tasks)
    for (i, _), c in zip(jobs, counts):
        totals[i] += c
    return np.array(totals, dtype=np.int64)


def _check_trace(trace, timeline):
    for ev in timeline.rf_pairs():
        if not trace.covers(ev.start, ev.end):
            raise TraceRangeError(
                f"trace window [{trace.t_min}, {trace.t_max}] s does not cover the rf pair "
                f"[{ev.start}, {ev.end}] s"
            )


def expected_p49(cfg, timeline, trace, phi_mw):
    """Detection probability for a deterministic field (no sampling)."""
    _check_trace(trace, timeline)
    phi = shot_phases(cfg, timeline, FieldNoise(trace).realize(None, 1, 0, timeline), 1)
    return float(p49(cfg, phi, phi_mw)[0])


def run_shot(cfg, timeline, trace, phi_mw, rng=None):
    """Simulate one atom through ``timeline`` under field ``trace``."""
    _check_trace(trace, timeline)
    rng = generator(cfg.seed) if rng is None else rng
    phi = float(shot_phases(cfg, timeline, FieldNoise(trace).realize(rng, 1, 0, timeline), 1)[0])
    p = float(p49(cfg, phi, phi_mw))
    centers = {ev.polarization: ev.center for ev in timeline.rf_pairs()}
    f_plus = float(trace(centers["sigma+"])) if "sigma+" in centers else math.nan
    f_minus = float(trace(centers["sigma-"])) if "sigma-" in centers else math.nan
    return ShotOutcome(bool(rng.random() < p), phi, f_plus, f_minus, p)


def default_phi_grid(points=8):
    return np.linspace(0.0, 2 * math.pi, points, endpoint=False)


def scan_mw_phase(cfg, timeline=None, noise=None, phi_grid=None, shots=1000, workers=1,
                  seed=None, setting_offset=0):
    """Fringe scan over ``phi_mw`` with ``shots`` atoms per phase."""
    timeline = default_sequence(cfg) if timeline is None else timeline
    noise = NoNoise() if noise is None else noise
    phi_grid = default_phi_grid() if phi_grid is None else np.asarray(phi_grid, dtype=float)
    tasks = [_Task(timeline, noise, float(phi), int(shots), setting_offset + i)
             for i, phi in enumerate(phi_grid)]
    counts = _simulate(cfg, tasks, workers, seed)
    shots_arr = np.full(phi_grid.size, int(shots))
    return RamseyResult(phi_grid, shots_arr, counts, fit=fit_fringe(phi_grid, counts, shots_arr))


def scan_pulse_start(cfg, f0, ts_grid, shots=10_000, workers=1, seed=None, phi_mw=math.pi / 2,
                     timeline=None):
    """Scan the start of a deterministic pulse pair, ``t_s - t+`` in ``ts_grid`` (s)."""
    timeline = default_sequence(cfg) if timeline is None else timeline
    t_plus = timeline.pair("sigma+").center
    ts_grid = np.asarray(ts_grid, dtype=float)
    tasks, expected = [], []
    for i, ts in enumerate(ts_grid):
        trace = pulse_pair(f0, t_plus + ts)
        tasks.append(_Task(timeline, FieldNoise(trace), phi_mw, int(shots), i))
        expected.append(expected_p49(cfg, timeline, trace, phi_mw))
    counts = _simulate(cfg, tasks, workers, seed)
    return RamseyResult(ts_grid, np.full(ts_grid.size, int(shots)), counts,
                        expected=np.array(expected), setting_name="ts_minus_tplus")


def scan_delay(cfg, noise, taus, shots=1000, phi_grid=None, workers=1, seed=None):
    """Fringe contrast versus pair separation ``tau``; ``shots`` per phase point."""
    phi_grid = default_phi_grid() if phi_grid is None else np.asarray(phi_grid, dtype=float)
    taus = np.asarray(taus, dtype=float)
    noise = NoNoise() if noise is None else noise
    tasks, timelines = [], []
    for i, tau in enumerate(taus):
        tl = default_sequence(cfg, float(tau))
        timelines.append(tl)
        for j, phi in enumerate(phi_grid):
            tasks.append(_Task(tl, noise, float(phi), int(shots), i * phi_grid.size + j))
    counts = _simulate(cfg, tasks, workers, seed).reshape(taus.size, phi_grid.size)
    results = []
    for i in range(taus.size):
        shots_arr = np.full(phi_grid.size, int(shots))
        results.append(RamseyResult(phi_grid, shots_arr, counts[i],
                                    fit=fit_fringe(phi_grid, counts[i], shots_arr)))
    contrast = np.array([r.fit.contrast for r in results])
    err = np.array([r.fit.contrast_err if r.fit.ok else math.nan for r in results])
    ok = np.array([r.fit.ok for r in results])
    return DelayScan(taus, contrast, err, ok, results)


def _late_sine(amplitude, nu, phase, t_split, t_ref):
    w = 2 * math.pi * nu

    def f(t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= t_split, amplitude * np.sin(w * (t - t_ref) + phase), 0.0)
    return FieldTrace(f, label=f"late_sine(nu={nu}, phase={phase:.4g})")


def _invert_j1(ratio):
    """Solve ``J1(x) = ratio`` on the rising branch ``x in [0, 1.8412]``."""
    x_max = 1.8411837813406593
    if ratio <= 0:
        return 0.0
    if ratio >= special.j1(x_max):
        return x_max
    return optimize.brentq(lambda x: special.j1(x) - ratio, 0.0, x_max)


def scan_frequency_response(cfg, nus, amplitude=10.0, shots=2000, phase_points=8, workers=1,
                            seed=None):
    """Measure ``G(nu)/G0`` with a sine applied around the sigma- pair only.

    The signal phase is scanned at ``phi_mw = pi/2``; the fitted first
    harmonic ``C0 J1(X)`` of ``P49`` is inverted for the phase amplitude
    ``X``, and ``G/G0 = X / (alpha * amplitude)``.
    """
    timeline = default_sequence(cfg)
    t_plus = timeline.pair("sigma+").center
    t_minus = timeline.pair("sigma-").center
    split = 0.5 * (t_plus + t_minus)
    phases = default_phi_grid(phase_points)
    nus = np.asarray(nus, dtype=float)
    tasks = []
    for i, nu in enumerate(nus):
        for j, ph in enumerate(phases):
            trace = _late_sine(amplitude, nu, ph, split, t_minus)
            tasks.append(_Task(timeline, FieldNoise(trace), math.pi / 2, int(shots),
                               i * phases.size + j))
    counts = _simulate(cfg, tasks, workers, seed).reshape(nus.size, phases.size)
    ratio, err, results = [], [], []
    for i in range(nus.size):
        shots_arr = np.full(phases.size, int(shots))
        fit = fit_fringe(phases, counts[i], shots_arr)
        results.append(RamseyResult(phases, shots_arr, counts[i], fit=fit,
                                    setting_name="signal_phase"))
        if not fit.ok:
            ratio.append(0.0)
            err.append(math.nan)
            continue
        first = fit.contrast / 2  # first-harmonic amplitude
        x = _invert_j1(first / cfg.C0)
        dx = fit.contrast_err / 2 / cfg.C0 / max(special.jvp(1, x), 1e-6)
        ratio.append(x / (cfg.alpha * amplitude))
        err.append(dx / (cfg.alpha * amplitude))
    return FrequencyScan(nus, np.array(ratio), np.array(err), results)


# ---------------------------------------------------------------------------
# alpha calibration
# ---------------------------------------------------------------------------


def calibration_timelines(cfg):
    """Sequences (a) microwaves only, (b) plus the sigma+ pair, (c) plus the sigma- pair."""
    full = default_sequence(cfg)
    mw = [e for e in full.events if e.kind == MW]
    plus = full.pair("sigma+")
    minus = full.pair("sigma-")
    return Timeline(mw), Timeline(mw + [plus]), Timeline(mw + [minus])


def calibrate_alpha(cfg, delta_f0=None, phi_points=16):
    """Recover ``(alpha_plus, alpha_minus)`` from fringe phase shifts.

    Fringes of sequences (a), (b), (c) are computed at ``f = +-delta_f0/2``
    and fitted; ``alpha_+- = (dPhi_b,c - dPhi_a) / delta_f0``. On the
    ``dipole`` path the physical dipole normalization is used, so the
    result is the model prediction rather than the configured alpha.
    """
    from .fieldgen import constant

    if cfg.path == "dipole":
        cfg = cfg.replace(dipole_normalization="physical")
    delta_f0 = cfg.delta_f0 if delta_f0 is None else delta_f0
    phis = default_phi_grid(phi_points)
    shifts = []
    for tl in calibration_timelines(cfg):
        fitted = []
        for f in (delta_f0 / 2, -delta_f0 / 2):
            trace = constant(f)
            probs = [expected_p49(cfg, tl, trace, phi) for phi in phis]
            fit = fit_fringe_probabilities(phis, probs)
            if not fit.ok:
                raise FitError("unresolved fringe in alpha calibration")
            fitted.append(fit.phase)
        shifts.append(float(np.angle(np.exp(1j * (fitted[0] - fitted[1])))))
    d_a, d_b, d_c = shifts
    return (d_b - d_a) / delta_f0, (d_c - d_a) / delta_f0
