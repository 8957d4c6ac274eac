"""Experiment constants and calibrations.

Defaults are the published operating point of the n=51 electrometer.
Times are in seconds, angular frequencies in rad/s, fields in mV/m unless
a field name says otherwise.
"""

import dataclasses
import json
import math
from dataclasses import dataclass

PATHS = ("analytic", "dipole", "full")
PATH_ALIASES = {"full_dynamics": "full"}
NORMALIZATIONS = ("alpha", "physical")


class ConfigError(ValueError):
    """Invalid configuration; ``fields`` names the offending entries."""

    def __init__(self, problems):
        self.problems = dict(problems)
        self.fields = sorted(self.problems)
        super().__init__("; ".join(f"{k}: {v}" for k, v in sorted(self.problems.items())))


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 51
    F0: float = 2.345  # V/cm
    f_rf: float = 230e6  # Hz
    alpha: float = 0.0193  # rad/(mV/m)
    C0: float = 0.63
    P0: float = 0.43
    theta1_deg: float = 144.0
    theta2_deg: float = 137.0
    t_rf_plus: float = 102e-9
    t_rf_minus: float = 97e-9
    delta_t_plus: float = 0.0
    delta_t_minus: float = 12e-9
    t_plus: float = 9.8e-6
    tau: float = 9e-6
    mw1_start: float = 9e-6
    mw2_start: float = 35e-6
    mw_duration: float = 0.5e-6
    T_measure: float = 206e-9
    # Stark frequency omega_n / 2 pi per V/cm at n = 51; scaled linearly in n
    stark_MHz_per_Vcm: float = 98.0
    detuning_plus: float = 0.0
    detuning_minus: float = 0.0
    # n = 49 reference: rf detuning (omega_49 - omega_rf) for each polarization
    ref_detuning_plus: float = -2 * math.pi * 9e6
    ref_detuning_minus: float = -2 * math.pi * 9e6
    reference_transient: bool = False
    delta_f0: float = 75.2  # mV/m, alpha calibration step
    path: str = "dipole"
    dipole_normalization: str = "alpha"
    dt: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.path in PATH_ALIASES:
            object.__setattr__(self, "path", PATH_ALIASES[self.path])
        problems = {}
        if int(self.n) != self.n or self.n < 3:
            problems["n"] = f"must be an integer >= 3, got {self.n!r}"
        if not self.alpha > 0:
            problems["alpha"] = "must be > 0"
        if not 0 < self.C0 <= 1:
            problems["C0"] = "must lie in (0, 1]"
        if not 0 <= self.P0 <= 1:
            problems["P0"] = "must lie in [0, 1]"
        elif not (0 <= self.P0 - self.C0 / 2 and self.P0 + self.C0 / 2 <= 1):
            problems["P0"] = "P0 +/- C0/2 must stay inside [0, 1]"
        for name in ("theta1_deg", "theta2_deg"):
            if not 0 < getattr(self, name) < 180:
                problems[name] = "must lie in (0, 180) degrees"
        for name in ("t_rf_plus", "t_rf_minus", "mw_duration", "T_measure", "dt",
                     "stark_MHz_per_Vcm"):
            if not getattr(self, name) > 0:
                problems[name] = "must be > 0"
        for name in ("delta_t_plus", "delta_t_minus"):
            if not getattr(self, name) >= 0:
                problems[name] = "must be >= 0"
        if self.path not in PATHS:
            problems["path"] = f"must be one of {PATHS}"
        if self.dipole_normalization not in NORMALIZATIONS:
            problems["dipole_normalization"] = f"must be one of {NORMALIZATIONS}"
        if int(self.seed) != self.seed or self.seed < 0:
            problems["seed"] = "must be a non-negative integer"
        if problems:
            raise ConfigError(problems)

    @property
    def theta1(self):
        return math.radians(self.theta1_deg)

    @property
    def theta2(self):
        return math.radians(self.theta2_deg)

    @property
    def t_minus(self):
        return self.t_plus + self.tau

    @property
    def domega_dF(self):
        """Stark frequency slope in rad/s per V/m for manifold ``n``."""
        return 2 * math.pi * self.stark_MHz_per_Vcm * 1e6 / 100.0 * self.n / 51

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError({k: "unknown field" for k in unknown})
        return cls(**data)

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError({"<file>": f"{path}: {exc}"}) from None
        if not isinstance(data, dict):
            raise ConfigError({"<file>": "top level must be an object"})
        return cls.from_dict(data)
