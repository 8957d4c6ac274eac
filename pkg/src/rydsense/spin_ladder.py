"""Spin-J model of one edge of a hydrogenic Stark manifold.

The ``2J+1`` levels reached from the circular state by a sigma+ (sigma-)
rf field form a ladder equivalent to a spin ``J = (n-1)/2``. The circular
state is the north pole ``m = +J``; ``k = J - m`` counts ladder steps from
it and the state ``k`` steps down carries a dipole ``sign * k * d``.

Amplitude vectors are stored top first: index ``k`` holds ``m = J - k``.

Time evolution uses the rotating-frame generator (units of hbar)::

    H = -Delta(t) (J - Jz) + Omega (cos(phi) Jx + sin(phi) Jy)

with ``Delta(t) = Delta_0 + sign * (domega/dF) * f(t)``. The generator is
linear in the spin components, so each step is an exact SU(2) rotation;
steps are composed as 2x2 matrices and mapped to the spin-J
representation once (``method="su2"``), or exponentiated directly on the
ladder (``method="expm"``) as a cross-check.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import constants, linalg
from scipy.special import gammaln

from .fieldgen import TraceRangeError

HBAR = constants.hbar
BOHR_RADIUS = constants.physical_constants["Bohr radius"][0]
E_A0 = constants.e * BOHR_RADIUS

SIGMA_PLUS = "sigma+"
SIGMA_MINUS = "sigma-"
_POLARIZATION_ALIASES = {
    "sigma+": SIGMA_PLUS, "sigma_plus": SIGMA_PLUS, "+": SIGMA_PLUS,
    "sigma-": SIGMA_MINUS, "sigma_minus": SIGMA_MINUS, "-": SIGMA_MINUS,
}


class SpinDomainError(ValueError):
    """Invalid spin magnitude or state."""


def polarization_name(polarization):
    try:
        return _POLARIZATION_ALIASES[str(polarization).lower()]
    except KeyError:
        raise ValueError(f"unknown rf polarization {polarization!r}") from None


def polarization_sign(polarization):
    return 1 if polarization_name(polarization) == SIGMA_PLUS else -1


def two_j(J):
    """Return ``2J`` as an int, raising :class:`SpinDomainError` unless J is a
    positive half-integer."""
    twice = 2 * float(J)
    k = int(round(twice))
    if k < 1 or abs(twice - k) > 1e-12:
        raise SpinDomainError(f"J must be a positive half-integer, got {J!r}")
    return k


@lru_cache(maxsize=None)
def _operators(tj):
    J = tj / 2
    m = J - np.arange(tj + 1)
    jz = np.diag(m)
    # <m+1|J+|m> sits at row k-1, column k
    jp = np.zeros((tj + 1, tj + 1))
    mk = m[1:]
    jp[np.arange(tj), np.arange(1, tj + 1)] = np.sqrt(J * (J + 1) - mk * (mk + 1))
    jx = (jp + jp.T) / 2
    jy = (jp - jp.T) / 2j
    ops = (jz.astype(complex), jx.astype(complex), jy)
    for op in ops:
        op.setflags(write=False)
    return ops


def spin_operators(J):
    """``(Jz, Jx, Jy)`` in the top-first ``m = J..-J`` basis."""
    return _operators(two_j(J))


@lru_cache(maxsize=None)
def _jx_eigensystem(tj):
    _, jx, _ = _operators(tj)
    w, v = np.linalg.eigh(jx.real)
    w = np.round(2 * w) / 2  # eigenvalues are exactly m
    return w, v


def m_values(J):
    return J - np.arange(two_j(J) + 1)


class SpinState:
    """Normalized amplitudes over the ``2J+1`` ladder levels (top first)."""

    def __init__(self, J, amplitudes):
        tj = two_j(J)
        amps = np.array(amplitudes, dtype=complex)
        if amps.shape != (tj + 1,):
            raise SpinDomainError(f"expected {tj + 1} amplitudes for J={J}, got {amps.shape}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > 1e-9:
            raise SpinDomainError(f"state is not normalized (norm^2 = {norm!r})")
        amps.setflags(write=False)
        self.J = tj / 2
        self.amplitudes = amps

    def __repr__(self):
        return f"SpinState(J={self.J}, <Jz>={self.jz_mean():.6g})"

    @classmethod
    def top(cls, J):
        """Circular state: all weight on ``m = +J``."""
        amps = np.zeros(two_j(J) + 1, dtype=complex)
        amps[0] = 1.0
        return cls(J, amps)

    @classmethod
    def bottom(cls, J):
        amps = np.zeros(two_j(J) + 1, dtype=complex)
        amps[-1] = 1.0
        return cls(J, amps)

    @property
    def m(self):
        return m_values(self.J)

    @property
    def populations(self):
        return np.abs(self.amplitudes) ** 2

    def norm(self):
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def expectation(self, op):
        return complex(np.vdot(self.amplitudes, op @ self.amplitudes))

    def jz_mean(self):
        return float(np.dot(self.m, self.populations))

    def fidelity(self, other):
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def overlap(self, other):
        """``<self|other>``"""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def coherent_state(J, theta, phi=0.0):
    """Spin coherent state at polar angle ``theta`` and azimuth ``phi``.

    Amplitudes ``sqrt(C(2J, k)) cos(theta/2)^(2J-k) sin(theta/2)^k e^{i k phi}``
    for ``k = J - m``, so that ``<Jz> = J cos(theta)``.
    """
    tj = two_j(J)
    if not -1e-12 <= theta <= math.pi + 1e-12:
        raise SpinDomainError(f"theta must lie in [0, pi], got {theta!r}")
    k = np.arange(tj + 1)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    # binomial weights in log space; exact zeros at the poles
    logc = 0.5 * (gammaln(tj + 1) - gammaln(k + 1) - gammaln(tj - k + 1))
    if c == 0.0:
        mag = np.where(k == tj, 1.0, 0.0)
    elif s == 0.0:
        mag = np.where(k == 0, 1.0, 0.0)
    else:
        mag = np.exp(logc + (tj - k) * math.log(abs(c)) + k * math.log(abs(s)))
    amps = mag * np.exp(1j * k * phi)
    return SpinState(J, amps / np.linalg.norm(amps))


def rotation_operator(J, axis_phase, angle):
    """``exp(-i angle (cos(axis_phase) Jx + sin(axis_phase) Jy))``"""
    tj = two_j(J)
    w, v = _jx_eigensystem(tj)
    rx = (v * np.exp(-1j * angle * w)) @ v.T
    z = np.exp(-1j * axis_phase * m_values(tj / 2))
    return (z[:, None] * rx) * z.conj()[None, :]


def rotate(state, axis_phase, angle):
    """Rotate ``state`` by ``angle`` about the equatorial axis at ``axis_phase``."""
    u = rotation_operator(state.J, axis_phase, angle)
    amps = u @ state.amplitudes
    return SpinState(state.J, amps / np.linalg.norm(amps))


@dataclass(frozen=True)
class DipoleModel:
    """Linear Stark dipoles of one ladder edge of manifold ``n``.

    ``sign`` is +1 for the lower (sigma+) ladder and -1 for the upper
    (sigma-) one.
    """

    n: int = 51
    sign: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise SpinDomainError(f"n must be an integer >= 2, got {self.n!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def J(self):
        return (self.n - 1) / 2

    @property
    def step_dipole(self):
        """Dipole per ladder step, (3/2) n e a0 in C m."""
        return 1.5 * self.n * E_A0

    @property
    def d_max(self):
        """Dipole at the far pole, 2J d = (3/2) n (n-1) e a0."""
        return 2 * self.J * self.step_dipole

    @property
    def domega_dF(self):
        """Stark frequency slope in rad/s per V/m."""
        return self.step_dipole / HBAR


def dipole_expectation(state, model):
    """Mean dipole ``sign * d * (J - <Jz>)`` in C m."""
    if abs(state.J - model.J) > 1e-12:
        raise SpinDomainError(f"state has J={state.J} but the model has J={model.J}")
    return model.sign * model.step_dipole * (state.J - state.jz_mean())


@dataclass(frozen=True)
class RfDrive:
    """One rf pulse in the rotating frame.

    ``rabi_frequency`` and ``detuning`` are angular frequencies (rad/s);
    a zero Rabi frequency describes free evolution.
    """

    rabi_frequency: float
    detuning: float = 0.0
    phase: float = 0.0
    polarization: str = SIGMA_PLUS
    duration: float = 100e-9

    def __post_init__(self):
        if not self.rabi_frequency >= 0:
            raise ValueError(f"rabi_frequency must be >= 0, got {self.rabi_frequency!r}")
        if not self.duration > 0:
            raise ValueError(f"duration must be > 0, got {self.duration!r}")
        object.__setattr__(self, "polarization", polarization_name(self.polarization))

    @property
    def sign(self):
        return polarization_sign(self.polarization)

    @property
    def effective_rabi(self):
        return math.hypot(self.rabi_frequency, self.detuning)


def pair_drives(t_rf, theta, gap=0.0, polarization=SIGMA_PLUS, detuning=0.0,
                phase=0.0, return_phase=math.pi):
    """Drives for an out-and-back rf pair: rotate by ``theta``, wait ``gap``,
    rotate back with the second pulse phase shifted by ``return_phase``."""
    omega = theta / t_rf
    drives = [RfDrive(omega, detuning, phase, polarization, t_rf)]
    if gap > 0:
        drives.append(RfDrive(0.0, detuning, phase, polarization, gap))
    drives.append(RfDrive(omega, detuning, phase + return_phase, polarization, t_rf))
    return drives


def two_pi_return_rabi(t_rf, detuning):
    """Rabi frequency making an off-resonant pulse of length ``t_rf`` a full
    ``2 pi`` turn at the generalized frequency ``sqrt(Omega^2 + delta^2)``."""
    full = 2 * math.pi / t_rf
    if abs(detuning) > full:
        raise ValueError("detuning too large for a 2 pi return in t_rf")
    return math.sqrt(full ** 2 - detuning ** 2)


# ---------------------------------------------------------------------------
# SCS trajectory of an out-and-back pair (linear ramps)
# ---------------------------------------------------------------------------


def pair_extent(t_rf, gap=0.0):
    return 2 * t_rf + gap


def pair_polar_angle(t, t_rf, theta, gap=0.0):
    """Polar angle of the resonant SCS at time ``t`` after the pair starts."""
    t = np.asarray(t, dtype=float)
    up = theta * np.clip(t / t_rf, 0.0, 1.0)
    down = theta * np.clip((2 * t_rf + gap - t) / t_rf, 0.0, 1.0)
    return np.minimum(up, down)


def pair_dipole_profile(t, t_rf, theta, gap=0.0):
    """Dipole along the resonant trajectory in units of ``D_max``:
    ``(1 - cos(theta(t))) / 2``."""
    return 0.5 * (1.0 - np.cos(pair_polar_angle(t, t_rf, theta, gap)))


def pair_dipole_integral(t_rf, theta, gap=0.0):
    """Closed-form time integral of :func:`pair_dipole_profile` (seconds)."""
    sinc = math.sin(theta) / theta if theta != 0 else 1.0
    return t_rf * (1.0 - sinc) + gap * 0.5 * (1.0 - math.cos(theta))


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------


def step_grid(drives, t0=0.0, dt=1e-9):
    """Integration grid for consecutive ``drives`` starting at ``t0``.

    Returns ``(mid, h, index)``: step midpoints, step lengths and the index
    of the drive each step belongs to. Each drive is cut into
    ``ceil(duration/dt)`` equal steps.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    mids, hs, idx = [], [], []
    t = float(t0)
    for i, d in enumerate(drives):
        n = max(1, int(math.ceil(d.duration / dt - 1e-9)))
        h = d.duration / n
        mids.append(t + h * (np.arange(n) + 0.5))
        hs.append(np.full(n, h))
        idx.append(np.full(n, i))
        t += d.duration
    return np.concatenate(mids), np.concatenate(hs), np.concatenate(idx)


def _su2_steps(delta, omega, phase, h):
    """Cayley-Klein parameters ``(a, b)`` of ``exp(-i h (delta sz + omega(cos sx + sin sy))/2)``."""
    w = np.hypot(omega, delta)
    x = 0.5 * w * h
    with np.errstate(invalid="ignore", divide="ignore"):
        sw = np.where(w > 0, np.sin(x) / np.where(w > 0, w, 1.0), 0.5 * h)
    a = np.cos(x) - 1j * sw * delta
    b = -1j * sw * omega * np.exp(1j * phase)
    return a, b


def _compose(a_steps, b_steps):
    """Ordered product (last step leftmost) along the final axis."""
    a = np.ones(a_steps.shape[:-1], dtype=complex)
    b = np.zeros(a_steps.shape[:-1], dtype=complex)
    for k in range(a_steps.shape[-1]):
        ak, bk = a_steps[..., k], b_steps[..., k]
        a, b = ak * a - np.conj(bk) * b, bk * a + np.conj(ak) * b
    return a, b


def su2_to_spin(a, b, J):
    """Spin-J image of ``U = [[a, -b*], [b, a*]]``."""
    s = math.sqrt(a.imag ** 2 + abs(b) ** 2)
    angle = 2 * math.atan2(s, a.real)
    if s == 0.0:
        nx, ny, nz = 0.0, 0.0, 1.0
    else:
        nx, ny, nz = -b.imag / s, b.real / s, -a.imag / s
    jz, jx, jy = spin_operators(J)
    return linalg.expm(-1j * angle * (nx * jx + ny * jy + nz * jz))


def _drive_arrays(drives, idx):
    omega = np.array([d.rabi_frequency for d in drives])[idx]
    delta0 = np.array([d.detuning for d in drives])[idx]
    phase = np.array([d.phase for d in drives])[idx]
    sign = np.array([d.sign for d in drives])[idx]
    return omega, delta0, phase, sign


def _field_at(perturbation, drives, t0, mid):
    t_end = t0 + sum(d.duration for d in drives)
    if perturbation is None:
        return np.zeros_like(mid)
    if hasattr(perturbation, "covers") and not perturbation.covers(t0, t_end):
        raise TraceRangeError(
            f"perturbation window [{perturbation.t_min}, {perturbation.t_max}] s "
            f"does not cover the drive window [{t0}, {t_end}] s"
        )
    return np.asarray(perturbation(mid), dtype=float)


def _detunings(drives, fvals, idx, kappa):
    _, delta0, _, sign = _drive_arrays(drives, idx)
    # f in mV/m, kappa in rad/s per V/m
    return delta0 + sign * kappa * 1e-3 * fvals


def _propagator(J, drives, deltas, idx, h, method):
    omega, _, phase, _ = _drive_arrays(drives, idx)
    global_phase = np.exp(1j * J * np.sum(deltas * h))
    if method == "su2":
        a_s, b_s = _su2_steps(deltas, omega, phase, h)
        a, b = _compose(a_s, b_s)
        return global_phase * su2_to_spin(complex(a), complex(b), J)
    if method == "expm":
        jz, jx, jy = spin_operators(J)
        u = np.eye(jz.shape[0], dtype=complex)
        for k in range(h.size):
            gen = deltas[k] * jz + omega[k] * (math.cos(phase[k]) * jx + math.sin(phase[k]) * jy)
            u = linalg.expm(-1j * h[k] * gen) @ u
        return global_phase * u
    raise ValueError(f"unknown method {method!r}")


def evolve_sequence(state, drives, perturbation=None, t0=0.0, dt=1e-9, model=None,
                    method="su2"):
    """Evolve ``state`` through consecutive ``drives`` under field ``perturbation``.

    Returns the final state and the interferometric phase
    ``arg <psi_ref|psi>`` relative to the same drives with no field,
    wrapped to ``(-pi, pi]``.
    """
    drives = list(drives)
    if not drives:
        raise ValueError("no drives given")
    if model is None:
        model = DipoleModel(n=int(round(2 * state.J)) + 1)
    mid, h, idx = step_grid(drives, t0, dt)
    fvals = _field_at(perturbation, drives, t0, mid)
    deltas = _detunings(drives, fvals, idx, model.domega_dF)
    ref = _detunings(drives, np.zeros_like(fvals), idx, model.domega_dF)
    u = _propagator(state.J, drives, deltas, idx, h, method)
    u_ref = _propagator(state.J, drives, ref, idx, h, method)
    amps = u @ state.amplitudes
    amps_ref = u_ref @ state.amplitudes
    phase = float(np.angle(np.vdot(amps_ref, amps)))
    return SpinState(state.J, amps / np.linalg.norm(amps)), phase


def evolve(state, drive, perturbation=None, t0=0.0, dt=1e-9, model=None, method="su2"):
    """Evolve ``state`` through a single rf ``drive``; see :func:`evolve_sequence`."""
    return evolve_sequence(state, [drive], perturbation, t0, dt, model, method)


def dipole_trajectory(state, drives, perturbation=None, t0=0.0, dt=1e-9, model=None):
    """Mean dipole (C m) at every step boundary of the evolution, starting at ``t0``.

    The model sign follows the drive polarization.
    """
    drives = list(drives)
    if model is None:
        model = DipoleModel(n=int(round(2 * state.J)) + 1)
    mid, h, idx = step_grid(drives, t0, dt)
    fvals = _field_at(perturbation, drives, t0, mid)
    deltas = _detunings(drives, fvals, idx, model.domega_dF)
    omega, _, phase, sign = _drive_arrays(drives, idx)
    a_s, b_s = _su2_steps(deltas, omega, phase, h)
    times = np.concatenate([[t0], t0 + np.cumsum(h)])
    d = model.step_dipole
    amps = state.amplitudes
    m = state.m
    D = np.empty(times.size)
    D[0] = sign[0] * d * (state.J - np.dot(m, np.abs(amps) ** 2))
    for k in range(h.size):
        u = su2_to_spin(complex(a_s[k]), complex(b_s[k]), state.J)
        amps = u @ amps
        D[k + 1] = sign[k] * d * (state.J - np.dot(m, np.abs(amps) ** 2))
    return times, D


def ladder_top_phase(J, drives, fvals, t0=0.0, dt=1e-9, kappa=None):
    """Batched return amplitude of the top state for many field realizations.

    ``fvals`` has shape ``(shots, steps)`` with the field (mV/m) at the
    midpoints given by ``step_grid(drives, t0, dt)``. Returns
    ``(phase, fidelity)``: the phase of ``<top|U|top>`` relative to the
    field-free evolution and the return probability, per shot. Uses
    ``<J,J|D(U)|J,J> = a^(2J)``.
    """
    tj = two_j(J)
    drives = list(drives)
    if kappa is None:
        kappa = DipoleModel(n=tj + 1).domega_dF
    mid, h, idx = step_grid(drives, t0, dt)
    fvals = np.atleast_2d(np.asarray(fvals, dtype=float))
    if fvals.shape[-1] != mid.size:
        raise ValueError(f"fvals must have {mid.size} columns, got {fvals.shape[-1]}")
    omega, _, phase, _ = _drive_arrays(drives, idx)
    deltas = _detunings(drives, fvals, idx, kappa)
    ref = _detunings(drives, np.zeros(mid.size), idx, kappa)
    a, _ = _compose(*_su2_steps(deltas, omega, phase, h))
    a_ref, _ = _compose(*_su2_steps(ref, omega, phase, h))
    rel = tj * np.angle(a / a_ref) + (tj / 2) * np.sum((deltas - ref) * h, axis=-1)
    return rel, np.abs(a) ** (2 * tj)
