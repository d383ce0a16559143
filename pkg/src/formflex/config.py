"""Run configuration: a flat ``key = value`` text file.

Example::

    # FH-R80 defaults
    r_m = 0.03
    R_m = 0.04
    alpha_rad = 0.5235987755982988
    p_stall_max_mbar = 410
    flow_mode = total

Unknown keys are rejected. ``p_stall_max_mbar`` may replace
``p_stall_max_pa``; the blower maximum is taken at 100 % power.
"""
import configparser
import csv
import io
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import DomainError, ParseError
from .geometry import DEFAULT_N_SEGMENTS, LipGeometry, make_grid
from .grasp import APERTURE, GRIPPER_MASS, GraspModes, ObjectSpec
from .pneumatics import P_STALL_MAX, Q_FREE_MAX, AirEnvironment, BlowerConfig, LeakModel
from .calibration import Observation
from .traces import to_si

SECTION = "run"


@dataclass(frozen=True)
class RunConfig:
    r_m: float = 0.03
    R_m: float = 0.04
    alpha_rad: float = math.pi / 6
    b_m: float = 0.002
    E_pa: float = 5e6
    n_segments: int = DEFAULT_N_SEGMENTS
    rho_kgm3: float = 1.225
    p_air_pa: float = 101325.0
    g_ms2: float = 9.81
    p_stall_max_pa: float = P_STALL_MAX
    q_free_max_m3s: float = Q_FREE_MAX
    power: float = 0.4
    leak_kind: str = "linear"
    c0: float = 1e-6
    gap0_m: float = 1e-3
    closure_exponent: float = 2.0
    flow_mode: str = "total"
    interpretation: str = "paper_faithful"
    gripper_mass_kg: float = GRIPPER_MASS
    aperture_m: float = APERTURE
    holding_margin: float = 1.0
    press_depth_m: float = 0.044   # recorded only

    def __post_init__(self):
        # build every component once so invalid values fail at load time
        self.geometry()
        self.environment()
        self.blower_config()
        self.leak()
        self.modes()
        self.grid()
        if not 0.0 <= self.power <= 1.0:
            raise DomainError(f"power must lie in [0, 1], got {self.power}")
        if not self.aperture_m > 0.0:
            raise DomainError("aperture must be positive")

    def geometry(self) -> LipGeometry:
        return LipGeometry(self.r_m, self.R_m, self.alpha_rad, self.b_m, self.E_pa)

    def environment(self) -> AirEnvironment:
        return AirEnvironment(self.rho_kgm3, self.p_air_pa, self.g_ms2)

    def blower_config(self) -> BlowerConfig:
        return BlowerConfig(self.p_stall_max_pa, self.q_free_max_m3s)

    def leak(self) -> LeakModel:
        return LeakModel(self.leak_kind, self.c0, self.gap0_m, self.closure_exponent)

    def modes(self) -> GraspModes:
        return GraspModes(flow_mode=self.flow_mode, interpretation=self.interpretation,
                          gripper_mass=self.gripper_mass_kg, holding_margin=self.holding_margin)

    def grid(self):
        return make_grid(self.n_segments)


_TYPES = {f.name: f.type for f in fields(RunConfig)}
_ALIASES = {"p_stall_max_mbar": ("p_stall_max_pa", 100.0)}


def _coerce(key, raw):
    kind = _TYPES[key]
    try:
        if kind in (int, "int"):
            return int(raw)
        if kind in (float, "float"):
            return float(raw)
    except ValueError:
        raise DomainError(f"config key {key!r}: cannot read {raw!r} as {kind}") from None
    return raw.strip()


def parse_config(text: str, **overrides) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(f"[{SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ParseError(f"malformed config: {exc}") from None
    values = {}
    for key, raw in parser[SECTION].items():
        if key in _ALIASES:
            target, factor = _ALIASES[key]
            values[target] = float(raw) * factor
        elif key in _TYPES:
            values[key] = _coerce(key, raw)
        else:
            raise DomainError(f"unknown config key {key!r}")
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def load_config(path=None, **overrides) -> RunConfig:
    text = "" if path is None else Path(path).read_text()
    return parse_config(text, **overrides)


def _rows(text, required):
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise ParseError("empty CSV")
    names = [n.strip() for n in reader.fieldnames]
    missing = [c for c in required if c not in names]
    if missing:
        raise ParseError(f"missing column(s) {missing}")
    for lineno, row in enumerate(reader, start=2):
        yield lineno, {k.strip(): (v or "").strip() for k, v in row.items() if k is not None}


def parse_objects(text: str):
    """Objects CSV: name, diameter_m, mass_kg, leak_kind, c0, gap0_m, a_seal_m2, mu."""
    cols = ("name", "diameter_m", "mass_kg", "leak_kind", "c0", "gap0_m", "a_seal_m2", "mu")
    out = []
    for lineno, row in _rows(text, cols):
        try:
            leak = LeakModel(row["leak_kind"], float(row["c0"]), float(row["gap0_m"]),
                             float(row.get("closure_exponent") or 2.0))
            out.append(ObjectSpec(row["name"], float(row["diameter_m"]), float(row["mass_kg"]),
                                  leak, float(row["a_seal_m2"]), float(row["mu"])))
        except ValueError as exc:
            raise ParseError(f"row {lineno}: {exc}") from None
    return out


def parse_observations(text: str):
    """Observations CSV: object, power, mhf_n, q_m3h; blank cells mean not measured."""
    out = []
    for lineno, row in _rows(text, ("object", "power", "mhf_n", "q_m3h")):
        try:
            mhf = float(row["mhf_n"]) if row["mhf_n"] else None
            q = float(to_si(float(row["q_m3h"]), "_m3h")) if row["q_m3h"] else None
            out.append(Observation(row["object"], float(row["power"]), mhf, q))
        except ValueError as exc:
            raise ParseError(f"row {lineno}: {exc}") from None
    return out
