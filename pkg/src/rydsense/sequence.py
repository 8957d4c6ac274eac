"""Experiment timelines: microwave pi/2 pulses and rf pulse pairs.

An ``rf_pair`` event is two pulses of ``duration`` each separated by
``gap``: the first rotates the spin by ``rotation_angle`` and the second,
phase-shifted by ``return_phase``, brings it back. Its extent is
``2 * duration + gap`` from ``start``; a pair "centered at t" has the
midpoint of that extent at ``t``.

Times are stored in nanoseconds and angles in degrees, exactly as written
in sequence files, so that parse/serialize round trips are bit-exact.
"""

import json
import math
from dataclasses import dataclass

from scipy import optimize

from .spin_ladder import pair_dipole_integral

MW = "mw_pi_half"
RF_PAIR = "rf_pair"
KINDS = (MW, RF_PAIR)
POLARIZATIONS = ("sigma+", "sigma-", "none")
FORMAT_VERSION = 1


class SequenceSyntaxError(ValueError):
    """Malformed sequence file; carries ``line`` and ``column`` (1-based)."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class SequenceValidationError(ValueError):
    """Semantically invalid timeline; ``events`` lists offending event ids."""

    def __init__(self, problems, events):
        self.problems = list(problems)
        self.events = list(events)
        super().__init__("; ".join(self.problems))


class BalanceInfeasibleError(ValueError):
    pass


@dataclass(frozen=True)
class PulseSpec:
    kind: str
    start_ns: float
    duration_ns: float
    polarization: str = "none"
    rotation_deg: float = 90.0
    gap_ns: float = 0.0
    mw_phase_rad: float = 0.0
    return_phase_rad: float = math.pi

    @property
    def extent_ns(self):
        if self.kind == RF_PAIR:
            return 2 * self.duration_ns + self.gap_ns
        return self.duration_ns

    @property
    def end_ns(self):
        return self.start_ns + self.extent_ns

    # SI views
    @property
    def start(self):
        return self.start_ns * 1e-9

    @property
    def duration(self):
        return self.duration_ns * 1e-9

    @property
    def intra_pair_gap(self):
        return self.gap_ns * 1e-9

    @property
    def end(self):
        return self.end_ns * 1e-9

    @property
    def center(self):
        return (self.start_ns + self.extent_ns / 2) * 1e-9

    @property
    def rotation_angle(self):
        return math.radians(self.rotation_deg)

    @property
    def mw_phase(self):
        return self.mw_phase_rad

    @property
    def return_phase(self):
        return self.return_phase_rad

    def describe(self, index):
        tag = self.polarization if self.kind == RF_PAIR else "mw"
        return f"event[{index}] {self.kind} ({tag}) at {self.start_ns!r} ns"


def _event_problems(ev):
    problems = []
    if ev.kind not in KINDS:
        problems.append(f"unknown kind {ev.kind!r}")
    if ev.polarization not in POLARIZATIONS:
        problems.append(f"unknown polarization {ev.polarization!r}")
    if not ev.duration_ns > 0:
        problems.append(f"duration must be > 0 (got {ev.duration_ns!r} ns)")
    if not ev.gap_ns >= 0:
        problems.append(f"gap must be >= 0 (got {ev.gap_ns!r} ns)")
    if not math.isfinite(ev.start_ns):
        problems.append("start must be finite")
    if ev.kind == RF_PAIR and ev.polarization == "none":
        problems.append("rf pairs need a sigma+ or sigma- polarization")
    if ev.kind == MW and ev.polarization != "none":
        problems.append("microwave pulses have polarization 'none'")
    if ev.kind == MW and ev.gap_ns != 0:
        problems.append("microwave pulses have no gap")
    return problems


def validate_events(events):
    """Raise :class:`SequenceValidationError` for invalid or overlapping events."""
    problems, bad = [], []
    for i, ev in enumerate(events):
        for p in _event_problems(ev):
            problems.append(f"{ev.describe(i)}: {p}")
            bad.append(i)
    if problems:
        raise SequenceValidationError(problems, sorted(set(bad)))
    order = sorted(range(len(events)), key=lambda i: events[i].start_ns)
    for a, b in zip(order, order[1:]):
        ea, eb = events[a], events[b]
        if eb.start_ns < ea.end_ns:
            problems.append(
                f"{ea.describe(a)} (ends {ea.end_ns!r} ns) overlaps {eb.describe(b)}"
            )
            bad.extend([a, b])
    if problems:
        raise SequenceValidationError(problems, sorted(set(bad)))


class Timeline:
    """Validated, start-ordered sequence of pulse events."""

    def __init__(self, events):
        events = list(events)
        validate_events(events)
        self.events = tuple(sorted(events, key=lambda e: e.start_ns))

    def __eq__(self, other):
        if not isinstance(other, Timeline):
            return NotImplemented
        return self.events == other.events

    def __repr__(self):
        return f"Timeline({len(self.events)} events, {self.total_duration * 1e6:.4g} us)"

    @property
    def total_duration(self):
        return max((e.end_ns for e in self.events), default=0.0) * 1e-9

    def rf_pairs(self):
        return [e for e in self.events if e.kind == RF_PAIR]

    def mw_pulses(self):
        return [e for e in self.events if e.kind == MW]

    def pair(self, polarization):
        found = [e for e in self.rf_pairs() if e.polarization == polarization]
        if len(found) != 1:
            raise ValueError(f"timeline has {len(found)} {polarization} pairs, expected 1")
        return found[0]


def _ns(seconds):
    return round(seconds * 1e9, 6)


def default_sequence(cfg, tau=None):
    """mw pi/2 at ``cfg.mw1_start``, sigma+ pair centered at ``cfg.t_plus``,
    sigma- pair centered at ``t_plus + tau``, mw pi/2 at ``cfg.mw2_start``."""
    tau = cfg.tau if tau is None else tau
    t_plus = _ns(cfg.t_plus)
    t_minus = _ns(cfg.t_plus + tau)
    rf_p, gap_p = _ns(cfg.t_rf_plus), _ns(cfg.delta_t_plus)
    rf_m, gap_m = _ns(cfg.t_rf_minus), _ns(cfg.delta_t_minus)
    mw_d = _ns(cfg.mw_duration)
    events = [
        PulseSpec(MW, _ns(cfg.mw1_start), mw_d),
        PulseSpec(RF_PAIR, t_plus - (2 * rf_p + gap_p) / 2, rf_p, "sigma+",
                  cfg.theta1_deg, gap_p),
        PulseSpec(RF_PAIR, t_minus - (2 * rf_m + gap_m) / 2, rf_m, "sigma-",
                  cfg.theta2_deg, gap_m),
        PulseSpec(MW, _ns(cfg.mw2_start), mw_d),
    ]
    timeline = Timeline(events)
    mw1, mw2 = events[0], events[3]
    outside = [i for i in (1, 2)
               if events[i].start_ns < mw1.end_ns or events[i].end_ns > mw2.start_ns]
    if outside:
        raise SequenceValidationError(
            [f"{events[i].describe(i)} lies outside the Ramsey window "
             f"[{mw1.end_ns!r}, {mw2.start_ns!r}] ns" for i in outside], outside)
    return timeline


def min_tau(cfg):
    """Smallest pair separation for which the two rf pairs do not overlap."""
    return (2 * cfg.t_rf_plus + cfg.delta_t_plus) / 2 + (2 * cfg.t_rf_minus + cfg.delta_t_minus) / 2


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

_EVENT_KEYS = {"kind", "start_ns", "duration_ns", "polarization", "rotation_deg",
               "gap_ns", "mw_phase_rad", "return_phase_rad"}
_REQUIRED = ("kind", "start_ns", "duration_ns", "polarization", "rotation_deg")


def serialize_sequence(timeline):
    events = []
    for ev in timeline.events:
        d = {
            "kind": ev.kind,
            "start_ns": ev.start_ns,
            "duration_ns": ev.duration_ns,
            "polarization": ev.polarization,
            "rotation_deg": ev.rotation_deg,
        }
        if ev.kind == RF_PAIR:
            d["gap_ns"] = ev.gap_ns
            if ev.return_phase_rad != math.pi:
                d["return_phase_rad"] = ev.return_phase_rad
        else:
            d["mw_phase_rad"] = ev.mw_phase_rad
        events.append(d)
    return json.dumps({"version": FORMAT_VERSION, "events": events}, indent=2) + "\n"


def _number(value, key, index):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SequenceValidationError(
            [f"event[{index}]: {key} must be a number, got {value!r}"], [index])
    return float(value)


def parse_sequence(text):
    """Parse a sequence file into a :class:`Timeline`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SequenceSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise SequenceSyntaxError("top level must be an object", 1, 1)
    extra = set(doc) - {"version", "events"}
    if extra:
        raise SequenceSyntaxError(f"unknown top-level fields {sorted(extra)}")
    if doc.get("version") != FORMAT_VERSION:
        raise SequenceSyntaxError(f"unsupported version {doc.get('version')!r}")
    raw = doc.get("events")
    if not isinstance(raw, list):
        raise SequenceSyntaxError("'events' must be an array")
    events = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise SequenceValidationError([f"event[{i}]: must be an object"], [i])
        unknown = set(item) - _EVENT_KEYS
        missing = [k for k in _REQUIRED if k not in item]
        if unknown or missing:
            msg = []
            if unknown:
                msg.append(f"unknown fields {sorted(unknown)}")
            if missing:
                msg.append(f"missing fields {missing}")
            raise SequenceValidationError([f"event[{i}]: " + ", ".join(msg)], [i])
        kind = item["kind"]
        if kind == MW and "gap_ns" in item:
            raise SequenceValidationError([f"event[{i}]: gap_ns is for rf_pair only"], [i])
        if kind == RF_PAIR and "mw_phase_rad" in item:
            raise SequenceValidationError([f"event[{i}]: mw_phase_rad is for mw only"], [i])
        events.append(PulseSpec(
            kind=kind,
            start_ns=_number(item["start_ns"], "start_ns", i),
            duration_ns=_number(item["duration_ns"], "duration_ns", i),
            polarization=item["polarization"],
            rotation_deg=_number(item["rotation_deg"], "rotation_deg", i),
            gap_ns=_number(item.get("gap_ns", 0.0), "gap_ns", i),
            mw_phase_rad=_number(item.get("mw_phase_rad", 0.0), "mw_phase_rad", i),
            return_phase_rad=_number(item.get("return_phase_rad", math.pi),
                                     "return_phase_rad", i),
        ))
    return Timeline(events)


def load_sequence(path):
    with open(path) as fh:
        return parse_sequence(fh.read())


def save_sequence(path, timeline):
    with open(path, "w", newline="\n") as fh:
        fh.write(serialize_sequence(timeline))


# ---------------------------------------------------------------------------
# dipole balance
# ---------------------------------------------------------------------------


def pair_phase_coefficients(cfg, delta_t_minus=None):
    """Magnitudes of the time-integrated dipoles (units of D_max * s) of the
    sigma+ and sigma- pairs along the resonant SCS trajectory."""
    gap_m = cfg.delta_t_minus if delta_t_minus is None else delta_t_minus
    plus = pair_dipole_integral(cfg.t_rf_plus, cfg.theta1, cfg.delta_t_plus)
    minus = pair_dipole_integral(cfg.t_rf_minus, cfg.theta2, gap_m)
    return plus, minus


def balance_delta_t_minus(cfg, upper=100e-9, xtol=0.01e-9):
    """Gap between the two sigma- pulses that equalizes the magnitudes of the
    two pairs' integrated dipoles, found by bisection on ``[0, upper]``."""
    def mismatch(gap):
        plus, minus = pair_phase_coefficients(cfg, gap)
        return minus - plus

    lo, hi = mismatch(0.0), mismatch(upper)
    if abs(lo) <= 1e-12 * pair_phase_coefficients(cfg, 0.0)[0]:
        return 0.0
    if lo > 0 or hi < 0:
        raise BalanceInfeasibleError(
            f"no gap in [0, {upper * 1e9:g}] ns balances the pairs "
            f"(mismatch {lo:.3g} s at 0, {hi:.3g} s at the upper bound)"
        )
    return optimize.bisect(mismatch, 0.0, upper, xtol=xtol)
