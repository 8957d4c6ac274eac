"""Field waveforms seen by the atom.

Two kinds of objects live here:

* :class:`WaveformTable` -- a sample table as stored in an arbitrary
  waveform generator (AWG), values in ``[-1, 1]`` clocked at 100 MS/s and
  multiplied by a field scale in mV/m.
* :class:`FieldTrace` -- a callable ``f(t)`` in mV/m over a time window,
  either closed form (pulses, sines, constants) or read from a table.

All fields are in mV/m and all times in seconds.
"""

import io
import math

import numpy as np

from ._random import generator

SAMPLE_PERIOD = 10e-9
TABLE_LENGTH = 131072
MAX_FIELD = 1000.0  # mV/m, keeps |f| << F0 = 234500 mV/m


class TraceRangeError(ValueError):
    """A field trace was evaluated outside the window it is defined on."""


class FieldBoundError(ValueError):
    """A field amplitude exceeds the small-signal bound ``MAX_FIELD``."""


class DegenerateFilterError(ValueError):
    """The table is too short for the requested correlation length."""


def _check_amplitude(value, what="amplitude"):
    if not abs(value) <= MAX_FIELD:
        raise FieldBoundError(f"{what} {value} mV/m exceeds the {MAX_FIELD} mV/m bound")


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------


class WaveformTable:
    """AWG sample table.

    Parameters
    ----------
    samples : array_like
        Table values, ``max|samples| <= 1``.
    sample_period : float
        Clock period in seconds (10 ns for the 100 MS/s AWG).
    scale : float
        Field in mV/m produced by a sample value of 1.
    loop : bool
        Whether the table is played in a loop.
    """

    def __init__(self, samples, sample_period=SAMPLE_PERIOD, scale=1.0, loop=True):
        samples = np.array(samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D array")
        if np.max(np.abs(samples)) > 1.0:
            raise ValueError("table samples must lie in [-1, 1]")
        if sample_period <= 0:
            raise ValueError("sample_period must be positive")
        _check_amplitude(scale * np.max(np.abs(samples)), "table peak field")
        samples.setflags(write=False)
        self.samples = samples
        self.sample_period = float(sample_period)
        self.scale = float(scale)
        self.loop = bool(loop)

    def __len__(self):
        return self.samples.size

    def __eq__(self, other):
        if not isinstance(other, WaveformTable):
            return NotImplemented
        return (
            np.array_equal(self.samples, other.samples)
            and self.sample_period == other.sample_period
            and self.scale == other.scale
            and self.loop == other.loop
        )

    def __repr__(self):
        return (
            f"WaveformTable(n={len(self)}, sample_period={self.sample_period!r}, "
            f"scale={self.scale!r}, loop={self.loop})"
        )

    @property
    def duration(self):
        return len(self) * self.sample_period

    @property
    def sigma(self):
        """Standard deviation of the table values (dimensionless)."""
        return float(np.std(self.samples))

    def with_scale(self, scale):
        return WaveformTable(self.samples, self.sample_period, scale, self.loop)

    def with_sigma(self, sigma_f):
        """Copy whose field standard deviation is ``sigma_f`` mV/m."""
        return self.with_scale(sigma_f / self.sigma)


def exp_filter(y0, j0):
    """Circular exponential low-pass filter ``y(i) = sum_j exp(-j/j0) y0(i-j)``.

    The sum runs over the whole table length with wrap-around indexing, as
    for a table played in a loop.
    """
    y0 = np.asarray(y0, dtype=float)
    n = y0.size
    kernel = np.exp(-np.arange(n) / j0)
    return np.fft.irfft(np.fft.rfft(y0) * np.fft.rfft(kernel), n)


def moving_average(y0, width=20):
    """Circular trailing average ``y(i) = mean(y0(i-j), j=0..width-1)``."""
    y0 = np.asarray(y0, dtype=float)
    acc = np.zeros_like(y0)
    for j in range(width):
        acc += np.roll(y0, j)
    return acc / width


def _normalized(y):
    return y / np.max(np.abs(y))


def gen_exp_correlated(n_samples=TABLE_LENGTH, j0=150, seed=0, source=None):
    """Gaussian table with exponential correlation ``exp(-lag/j0)``.

    ``source`` replaces the Gaussian draw (test hook); it must have
    ``n_samples`` entries.
    """
    if j0 < 1:
        raise DegenerateFilterError(f"j0 must be >= 1, got {j0}")
    if n_samples < 2 * j0:
        raise DegenerateFilterError(
            f"n_samples={n_samples} is shorter than twice the correlation length j0={j0}"
        )
    if source is None:
        y0 = generator(seed).standard_normal(n_samples)
    else:
        y0 = np.asarray(source, dtype=float)
        if y0.shape != (n_samples,):
            raise ValueError("source must have n_samples entries")
    return WaveformTable(_normalized(exp_filter(y0, j0)), loop=True)


def gen_white_20pt(n_samples=TABLE_LENGTH, seed=0, source=None):
    """Gaussian table averaged on a 20-point sliding window (200 ns support)."""
    if n_samples < 40:
        raise DegenerateFilterError(f"n_samples must be >= 40, got {n_samples}")
    if source is None:
        y0 = generator(seed).standard_normal(n_samples)
    else:
        y0 = np.asarray(source, dtype=float)
        if y0.shape != (n_samples,):
            raise ValueError("source must have n_samples entries")
    return WaveformTable(_normalized(moving_average(y0, 20)), loop=True)


def apply_line_response(w, freqs, gains):
    """Filter a table through a tabulated line transfer ``lambda(nu)/lambda(0)``.

    ``freqs`` (Hz, ascending) must span ``[0, Nyquist]``; complex ``gains``
    are interpolated linearly in real and imaginary parts. The field
    ``scale * samples`` is filtered as is, with no renormalization; if the
    filtered samples leave ``[-1, 1]`` the excess is moved into ``scale``.
    """
    freqs = np.asarray(freqs, dtype=float)
    gains = np.asarray(gains, dtype=complex)
    if freqs.shape != gains.shape or freqs.ndim != 1:
        raise ValueError("freqs and gains must be 1-D arrays of equal length")
    if np.any(np.diff(freqs) <= 0):
        raise ValueError("freqs must be strictly increasing")
    nyquist = 0.5 / w.sample_period
    if freqs[0] > 0.0 or freqs[-1] < nyquist:
        raise TraceRangeError(
            f"transfer grid [{freqs[0]}, {freqs[-1]}] Hz does not cover [0, {nyquist}] Hz"
        )
    n = len(w)
    nu = np.fft.rfftfreq(n, w.sample_period)
    h = np.interp(nu, freqs, gains.real) + 1j * np.interp(nu, freqs, gains.imag)
    out = np.fft.irfft(np.fft.rfft(w.samples) * h, n)
    peak = np.max(np.abs(out))
    if peak > 1.0:
        return WaveformTable(out / peak, w.sample_period, w.scale * peak, w.loop)
    return WaveformTable(out, w.sample_period, w.scale, w.loop)


# ---------------------------------------------------------------------------
# correlation estimates
# ---------------------------------------------------------------------------


class CorrelationEstimate:
    """Normalized autocorrelation ``g1`` on ``lags`` (s) plus the table variance."""

    def __init__(self, lags, g1, variance):
        self.lags = np.asarray(lags, dtype=float)
        self.g1 = np.asarray(g1, dtype=float)
        self.variance = float(variance)

    def __repr__(self):
        return f"CorrelationEstimate(n_lags={self.lags.size}, variance={self.variance:.4g})"


def autocorrelation(w, max_lag):
    """Circular sample autocorrelation of a table up to ``max_lag`` seconds."""
    n = len(w)
    k_max = int(round(max_lag / w.sample_period))
    if not 0 <= k_max < n / 2:
        raise ValueError("max_lag must be below half the table duration")
    s = w.samples
    spec = np.fft.rfft(s)
    acf = np.fft.irfft(spec * np.conj(spec), n)[: k_max + 1]
    g1 = acf / acf[0]
    g1[0] = 1.0
    return CorrelationEstimate(np.arange(k_max + 1) * w.sample_period, g1, np.var(s))


def effective_samples(w, correlation_lags):
    """Number of independent samples for a table correlated over ``correlation_lags``."""
    return len(w) / max(1.0, float(correlation_lags))


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------


class FieldTrace:
    """Field ``f(t)`` in mV/m defined on ``[t_min, t_max]``."""

    def __init__(self, func, t_min=-np.inf, t_max=np.inf, label="field"):
        self._func = func
        self.t_min = float(t_min)
        self.t_max = float(t_max)
        self.label = label

    def __repr__(self):
        return f"FieldTrace({self.label}, window=[{self.t_min}, {self.t_max}])"

    def covers(self, t_start, t_end):
        return self.t_min <= t_start and t_end <= self.t_max

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if t.size and (np.min(t) < self.t_min or np.max(t) > self.t_max):
            raise TraceRangeError(
                f"{self.label} is defined on [{self.t_min}, {self.t_max}] s, "
                f"evaluated on [{np.min(t)}, {np.max(t)}] s"
            )
        return np.broadcast_to(np.asarray(self._func(t), dtype=float), t.shape).copy()


def constant(value, t_min=-np.inf, t_max=np.inf):
    _check_amplitude(value, "constant field")
    return FieldTrace(lambda t: np.full(np.shape(t), float(value)), t_min, t_max,
                      f"constant({value})")


def zero():
    return constant(0.0)


def trapezoid(t, start, plateau=1e-6, edge=100e-9):
    """Unit trapezoid: linear rise over ``edge`` from ``start``, width ``plateau``
    between edge midpoints."""
    t = np.asarray(t, dtype=float)
    rise = np.clip((t - start) / edge, 0.0, 1.0)
    fall = np.clip((start + plateau + edge - t) / edge, 0.0, 1.0)
    return np.minimum(rise, fall)


def pulse_pair(f0, t_start, width=1e-6, edge=100e-9, separation=8.5e-6):
    """Two trapezoidal field pulses of height ``f0`` starting at ``t_start``
    and ``t_start + separation``."""
    _check_amplitude(f0, "pulse amplitude")

    def f(t):
        return f0 * (trapezoid(t, t_start, width, edge)
                     + trapezoid(t, t_start + separation, width, edge))

    return FieldTrace(f, label=f"pulse_pair(f0={f0}, t_start={t_start})")


def sine(amplitude, nu, phase=0.0, rng=None):
    """``A sin(2 pi nu t + phase)``; ``phase="random"`` draws it from ``rng``."""
    _check_amplitude(amplitude, "sine amplitude")
    if isinstance(phase, str):
        if phase != "random":
            raise ValueError(f"phase must be a number or 'random', got {phase!r}")
        if rng is None:
            raise ValueError("a random phase needs an rng")
        phase = rng.uniform(0.0, 2 * math.pi)
    phase = float(phase)
    w = 2 * math.pi * nu
    return FieldTrace(lambda t: amplitude * np.sin(w * t + phase),
                      label=f"sine(A={amplitude}, nu={nu}, phase={phase:.6g})")


def table_index(w, t, trigger_offset=0.0):
    """Zero-order-hold sample index of table ``w`` at time ``t`` (wrapped if looping)."""
    k = np.floor((np.asarray(t, dtype=float) + trigger_offset) / w.sample_period).astype(np.int64)
    if w.loop:
        return np.mod(k, len(w))
    return k


def sample_trace(w, trigger_offset=0.0):
    """Field played from table ``w`` started ``trigger_offset`` seconds before t=0."""
    if w.loop:
        t_min, t_max = -np.inf, np.inf
    else:
        t_min = -trigger_offset
        t_max = w.duration - trigger_offset - 1e-15

    def f(t):
        return w.scale * w.samples[table_index(w, t, trigger_offset)]

    return FieldTrace(f, t_min, t_max, f"table(offset={trigger_offset})")


# ---------------------------------------------------------------------------
# waveform files
# ---------------------------------------------------------------------------


def format_waveform(w):
    """Two-column text (time_ns, value) with ``#`` header lines."""
    out = io.StringIO()
    out.write(f"# sample_period_s={w.sample_period!r}\n")
    out.write(f"# scale_mV_per_m={w.scale!r}\n")
    out.write(f"# loop={'true' if w.loop else 'false'}\n")
    period_ns = w.sample_period * 1e9
    for i, v in enumerate(w.samples):
        out.write(f"{i * period_ns!r},{float(v)!r}\n")
    return out.getvalue()


def parse_waveform(text):
    header = {}
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                header[key.strip()] = value.strip()
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected two columns, got {line!r}")
        values.append(float(parts[1]))
    try:
        period = float(header["sample_period_s"])
        scale = float(header["scale_mV_per_m"])
        loop = header["loop"].lower()
    except KeyError as exc:
        raise ValueError(f"missing waveform header {exc.args[0]!r}") from None
    if loop not in ("true", "false"):
        raise ValueError(f"loop header must be true or false, got {loop!r}")
    return WaveformTable(values, period, scale, loop == "true")


def write_waveform(path, w):
    with open(path, "w", newline="\n") as fh:
        fh.write(format_waveform(w))


def read_waveform(path):
    with open(path) as fh:
        return parse_waveform(fh.read())
