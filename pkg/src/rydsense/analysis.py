"""Closed-form predictors: contrast reduction, frequency response, sensitivity.

Units: alpha in rad/(mV/m), fields in mV/m, times in s, frequencies in Hz.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .fieldgen import CorrelationEstimate
from .spin_ladder import pair_dipole_profile


class FitDomainError(ValueError):
    """Correlation data outside the domain of the exponential fit."""


# ---------------------------------------------------------------------------
# contrast reduction
# ---------------------------------------------------------------------------


def contrast_small_signal(alpha, sigma_f, g1):
    """Second-order contrast reduction ``1 - (alpha sigma_f)^2 (1 - g1)``.

    Valid for ``alpha * sigma_f <= 0.5``; larger values only warn.
    """
    x = np.asarray(alpha * np.asarray(sigma_f, dtype=float))
    if np.any(np.abs(x) > 0.5):
        warnings.warn("contrast_small_signal used outside alpha*sigma_f <= 0.5", stacklevel=2)
    out = 1.0 - x ** 2 * (1.0 - np.asarray(g1, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def contrast_gaussian(alpha, sigma_f, g1):
    """Gaussian-field contrast reduction ``exp(-(alpha sigma_f)^2 (1 - g1))``."""
    out = np.exp(-(alpha * np.asarray(sigma_f, dtype=float)) ** 2
                 * (1.0 - np.asarray(g1, dtype=float)))
    return float(out) if np.ndim(out) == 0 else out


def contrast_sine(alpha, amplitude, nu, tau):
    """Contrast reduction for a sine of random phase: ``|J0(2 alpha A sin(pi nu tau))|``."""
    out = np.abs(special.j0(2 * alpha * amplitude * np.sin(math.pi * nu * np.asarray(tau))))
    return float(out) if np.ndim(out) == 0 else out


def exponential_g1(tau, tau_c):
    return np.exp(-np.abs(np.asarray(tau, dtype=float)) / tau_c)


def boxcar_g1(tau, width=200e-9):
    """Correlation of white noise averaged on a window of ``width``: triangular."""
    return np.clip(1.0 - np.abs(np.asarray(tau, dtype=float)) / width, 0.0, None)


def contrast_gaussian_kernel(times, weights, sigma_f, g1):
    """Contrast reduction for a Gaussian field seen through a phase kernel.

    ``Phi = sum(weights * f(times))`` is Gaussian with variance
    ``sigma_f^2 w^T G w``, ``G_ij = g1(t_i - t_j)``, and
    ``Cr = exp(-Var(Phi) / 2)``.
    """
    t = np.asarray(times, dtype=float)
    w = np.asarray(weights, dtype=float)
    gmat = g1(t[:, None] - t[None, :])
    return float(math.exp(-0.5 * sigma_f ** 2 * float(w @ gmat @ w)))


def kernel_transfer(times, weights, nu):
    """``|sum(weights * exp(2 pi i nu times))|``: phase per unit sine amplitude."""
    t = np.asarray(times, dtype=float)
    w = np.asarray(weights, dtype=float)
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    out = np.abs(np.exp(2j * math.pi * nu[:, None] * t[None, :]) @ w)
    return out


def contrast_sine_kernel(times, weights, amplitude, nu):
    """Random-phase sine through a phase kernel: ``|J0(A |W(nu)|)|``."""
    return float(np.abs(special.j0(amplitude * kernel_transfer(times, weights, nu)[0])))


# ---------------------------------------------------------------------------
# frequency response
# ---------------------------------------------------------------------------


@dataclass
class FrequencyResponse:
    nu: np.ndarray
    gain_ratio: np.ndarray
    cutoff_3db: float


def window_gain(times, window, nu):
    """``|int D(t) e^{2 pi i nu t} dt| / int D(t) dt`` for a sampled window on a
    uniform grid."""
    window = np.asarray(window, dtype=float)
    return kernel_transfer(times, window, nu) / window.sum()


def cutoff_frequency(gain, nu_max=50e6, n_scan=2000):
    """First frequency where ``gain(nu)`` falls to ``1/sqrt(2)`` (amplitude)."""
    target = 1 / math.sqrt(2)
    grid = np.linspace(0.0, nu_max, n_scan)
    values = np.array([float(np.atleast_1d(gain(v))[0]) for v in grid])
    below = np.nonzero(values < target)[0]
    if below.size == 0:
        return math.inf
    hi = grid[below[0]]
    lo = grid[below[0] - 1]
    return optimize.bisect(lambda v: float(np.atleast_1d(gain(v))[0]) - target, lo, hi,
                           xtol=1.0)


def sigma_minus_window(cfg, dt=0.1e-9):
    """Resonant-SCS dipole profile of the sigma- pair, including the gap."""
    extent = 2 * cfg.t_rf_minus + cfg.delta_t_minus
    n = int(math.ceil(extent / dt))
    t = (np.arange(n) + 0.5) * (extent / n)
    return t, pair_dipole_profile(t, cfg.t_rf_minus, cfg.theta2, cfg.delta_t_minus)


def frequency_response(cfg, nu=None):
    """Relative sensitivity ``G(nu)/G0`` of the sigma- pair dipole window.

    The cutoff uses the amplitude convention ``G/G0 = 1/sqrt(2)``.
    """
    nu = np.linspace(0.0, 20e6, 201) if nu is None else np.asarray(nu, dtype=float)
    t, window = sigma_minus_window(cfg)
    ratio = window_gain(t, window, nu)
    cutoff = cutoff_frequency(lambda v: window_gain(t, window, v))
    return FrequencyResponse(nu, ratio, cutoff)


# ---------------------------------------------------------------------------
# sensitivity and standard quantum limit
# ---------------------------------------------------------------------------


@dataclass
class SensitivityReport:
    sigma_1: float  # mV/m
    sigma_k: float  # mV/m
    k: int
    sigma_sql: float  # mV/m
    sigma_sql_naive: float  # mV/m
    db_below_sql: float
    T: float
    n: int

    def lines(self):
        return [
            f"sigma1={self.sigma_1:.2f} mV/m",
            f"sigma_k={self.sigma_k:.3f} mV/m",
            f"k={self.k}",
            f"sql={self.sigma_sql:.2f} mV/m",
            f"sql_naive={self.sigma_sql_naive:.2f} mV/m",
            f"db={self.db_below_sql:.3f}",
            f"T={self.T * 1e9:.6g} ns",
            f"n={self.n}",
        ]


def sensitivity(alpha, C0, k=1):
    """Single-atom and ``k``-atom field sensitivities ``1/(alpha C0)`` and that
    over ``sqrt(k)``, in mV/m."""
    if k < 1:
        raise ValueError("k must be >= 1")
    s1 = 1.0 / (alpha * C0)
    return s1, s1 / math.sqrt(k)


def sql(n, T, domega_dF):
    """Standard quantum limit ``1/(T sqrt(n-1) |domega/dF|)`` in mV/m.

    ``domega_dF`` is in rad/s per V/m. Returns ``(sigma_sql, sqrt(2) sigma_sql)``,
    the second being the naive two-measurement bound.
    """
    if not T > 0:
        raise ValueError("T must be > 0")
    s = 1.0 / (T * math.sqrt(n - 1) * abs(domega_dF)) * 1e3
    return s, math.sqrt(2) * s


def db_below(sigma_sql, sigma_1):
    return 20 * math.log10(sigma_sql / sigma_1)


def sensitivity_report(cfg, k=1):
    s1, sk = sensitivity(cfg.alpha, cfg.C0, k)
    s_sql, naive = sql(cfg.n, cfg.T_measure, cfg.domega_dF)
    return SensitivityReport(s1, sk, k, s_sql, naive, db_below(s_sql, s1), cfg.T_measure, cfg.n)


# ---------------------------------------------------------------------------
# correlation fits
# ---------------------------------------------------------------------------


def fit_exponential_correlation(estimate, initial_guess=None):
    """Fit ``g1 = exp(-lag/tau_c)`` by linear regression of ``log g1`` on lag.

    Lags in ``(0, 2 * initial_guess]`` are used; the default guess is the
    first lag where ``g1 < 1/e``. Returns ``(tau_c, r_squared)``.
    """
    lags = np.asarray(estimate.lags, dtype=float)
    g1 = np.asarray(estimate.g1, dtype=float)
    if initial_guess is None:
        below = np.nonzero(g1 < math.exp(-1))[0]
        if below.size == 0:
            raise FitDomainError("g1 never drops below 1/e inside the lag range")
        initial_guess = lags[below[0]]
    sel = (lags > 0) & (lags <= 2 * initial_guess + 1e-15)
    if np.count_nonzero(sel) < 2:
        raise FitDomainError("fewer than two lags inside the fit range")
    if np.any(g1[sel] <= 0):
        raise FitDomainError("non-positive g1 inside the fit range")
    x, y = lags[sel], np.log(g1[sel])
    slope, intercept = np.polyfit(x, y, 1)
    if slope >= 0:
        raise FitDomainError("log g1 does not decrease with lag")
    pred = slope * x + intercept
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum((y - pred) ** 2) / ss_tot if ss_tot > 0 else 1.0
    return -1.0 / slope, float(r2)


__all__ = [
    "CorrelationEstimate", "FitDomainError", "FrequencyResponse", "SensitivityReport",
    "boxcar_g1", "contrast_gaussian", "contrast_gaussian_kernel", "contrast_sine",
    "contrast_sine_kernel", "contrast_small_signal", "cutoff_frequency", "db_below",
    "exponential_g1", "fit_exponential_correlation", "frequency_response",
    "kernel_transfer", "sensitivity", "sensitivity_report", "sigma_minus_window", "sql",
    "window_gain",
]
