"""Scenario files: TOML with unit-suffixed quantities.

Frequencies written as ``"2.9 GHz"`` or ``"6.9 MHz"`` mean ``2*pi x`` that
value and resolve to rad/ns; bare numbers are already rad/ns. Times are ns
unless suffixed, except protocol timings which default to microseconds.
Phases accept ``rad``, ``deg`` or ``turn`` (one turn is 2*pi).
"""

from __future__ import annotations

import copy
import math
import re
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dynamics import DEFAULT_MAX_STEP, DEFAULT_TOLERANCE, METHODS, DonorParams, IonParams, TimeGrid, default_grid
from .errors import ConfigError
from .optimizer import DEFAULT_BOUNDS, PARAMS, OptimizationSpec
from .protocol import ProtocolParams
from .pulse import TWO_PI, PulseShape

WEAK_EXCITATION_LIMIT = 0.1

ARTIFACTS = ("trajectories", "wavefunctions", "overlap", "metrics", "cavity-map", "optimizer-log")
DEFAULT_FILES = {
    "trajectory_donor": "trajectory_donor.csv",
    "trajectory_ion": "trajectory_ion.csv",
    "wavefunction_donor": "wavefunction_donor.csv",
    "wavefunction_ion": "wavefunction_ion.csv",
    "wavefunction_pair": "wavefunctions.csv",
    "overlap": "overlap.json",
    "metrics": "metrics.json",
    "cavity_map": "cavity_map.csv",
    "optimizer_log": "optimizer_log.csv",
    "summary": "summary.json",
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-zµ/]*)\s*$")

_FREQ_UNITS = {"ghz": 1.0, "mhz": 1e-3, "khz": 1e-6, "hz": 1e-9}
_TIME_UNITS = {"ns": 1.0, "ps": 1e-3, "us": 1e3, "µs": 1e3, "ms": 1e6, "s": 1e9}
_PHASE_UNITS = {"rad": 1.0, "turn": TWO_PI, "turns": TWO_PI, "cycle": TWO_PI, "deg": math.pi / 180.0}


def parse_quantity(value: Any, kind: str, key: str) -> float:
    """Resolve a config value to internal units.

    ``kind`` is one of ``angular`` (rad/ns), ``time`` (ns), ``time_us`` (us),
    ``phase`` (rad), ``rate`` (1/ns) or ``plain``.
    """
    if isinstance(value, bool):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(key, f"expected a number or a quantity string, got {value!r}")
    m = _QUANTITY.match(value)
    if not m:
        raise ConfigError(key, f"cannot parse quantity {value!r}")
    number, unit = float(m.group(1)), m.group(2)
    u = unit.lower()
    if not unit:
        return number
    if kind == "angular":
        if u in _FREQ_UNITS:
            return TWO_PI * number * _FREQ_UNITS[u]
        if u == "rad/ns":
            return number
    elif kind in ("time", "time_us"):
        if u in _TIME_UNITS:
            ns = number * _TIME_UNITS[u]
            return ns if kind == "time" else ns * 1e-3
    elif kind == "phase":
        if u in _PHASE_UNITS:
            return number * _PHASE_UNITS[u]
    elif kind == "rate":
        if u in ("/ns", "1/ns"):
            return number
    raise ConfigError(key, f"unit {unit!r} not allowed here")


def _check_keys(table: dict, allowed, prefix: str):
    for k in table:
        if k not in allowed:
            raise ConfigError(f"{prefix}.{k}" if prefix else k, "unknown key")


_PULSE_KINDS = {
    "sigma1": "time", "sigma2": "time", "tau": "time", "t_hold": "time",
    "omega_max": "angular", "theta0": "phase", "theta1": "angular",
}


def _pulse(table: dict, prefix: str) -> PulseShape:
    _check_keys(table, _PULSE_KINDS, prefix)
    values = {}
    for k, kind in _PULSE_KINDS.items():
        if k in table:
            values[k] = parse_quantity(table[k], kind, f"{prefix}.{k}")
        elif k not in ("theta0", "theta1"):
            raise ConfigError(f"{prefix}.{k}", "missing")
    try:
        return PulseShape(**values)
    except ValueError as exc:
        raise ConfigError(prefix, str(exc)) from None


def _decay(table: dict, rate_key: str, prefix: str, default: float) -> float:
    if rate_key in table and "lifetime" in table:
        raise ConfigError(f"{prefix}.lifetime", f"give either lifetime or {rate_key}, not both")
    if "lifetime" in table:
        life = parse_quantity(table["lifetime"], "time", f"{prefix}.lifetime")
        if not life > 0:
            raise ConfigError(f"{prefix}.lifetime", "must be positive")
        return 1.0 / life
    if rate_key in table:
        return parse_quantity(table[rate_key], "rate", f"{prefix}.{rate_key}")
    return default


def _donor(table: dict) -> DonorParams:
    _check_keys(table, ("delta", "g", "kappa", "gamma_in", "lifetime", "pulse"), "donor")
    for k in ("delta", "g", "kappa", "pulse"):
        if k not in table:
            raise ConfigError(f"donor.{k}", "missing")
    try:
        return DonorParams(
            delta=parse_quantity(table["delta"], "angular", "donor.delta"),
            g=parse_quantity(table["g"], "angular", "donor.g"),
            kappa=parse_quantity(table["kappa"], "angular", "donor.kappa"),
            gamma_in=_decay(table, "gamma_in", "donor", 1.0 / 1.4),
            pulse=_pulse(table["pulse"], "donor.pulse"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("donor", str(exc)) from None


def _ion(table: dict) -> IonParams:
    _check_keys(table, ("gamma_yb", "lifetime", "pulse"), "ion")
    if "pulse" not in table:
        raise ConfigError("ion.pulse", "missing")
    try:
        return IonParams(pulse=_pulse(table["pulse"], "ion.pulse"), gamma_yb=_decay(table, "gamma_yb", "ion", 1.0 / 8.1))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("ion", str(exc)) from None


_PROTOCOL_KINDS = {
    "p1_yb": "plain", "p1_in": "plain", "p2_yb": "plain", "p2_in": "plain", "eta": "plain", "f_dyn": "plain",
    "delta_phi": "phase", "t_init": "time_us", "t_pulse": "time_us", "t_readout": "time_us",
}


@dataclass(frozen=True)
class ProtocolSettings:
    params: ProtocolParams
    # "config": p1 values as written; "simulated": the photons' emission probabilities
    p1_source: str = "config"
    epsilon: float = 0.0
    re_overlap: Optional[float] = None


def _protocol(table: dict) -> ProtocolSettings:
    _check_keys(table, (*_PROTOCOL_KINDS, "p1_source", "epsilon", "re_overlap"), "protocol")
    values = {k: parse_quantity(table[k], kind, f"protocol.{k}") for k, kind in _PROTOCOL_KINDS.items() if k in table}
    for k in ("p1_yb", "p1_in"):
        if k in values and not 0.0 <= values[k] <= WEAK_EXCITATION_LIMIT:
            raise ConfigError(f"protocol.{k}", f"weak-excitation bound violated: {values[k]} not in [0, {WEAK_EXCITATION_LIMIT}]")
    source = table.get("p1_source", "config")
    if source not in ("config", "simulated"):
        raise ConfigError("protocol.p1_source", "must be 'config' or 'simulated'")
    re_overlap = None
    if "re_overlap" in table:
        re_overlap = parse_quantity(table["re_overlap"], "plain", "protocol.re_overlap")
        if not -1.0 <= re_overlap <= 1.0:
            raise ConfigError("protocol.re_overlap", "must lie in [-1, 1]")
    try:
        params = ProtocolParams(**values)
    except ValueError as exc:
        raise ConfigError("protocol", str(exc)) from None
    epsilon = parse_quantity(table.get("epsilon", 0.0), "phase", "protocol.epsilon")
    return ProtocolSettings(params, source, epsilon, re_overlap)


def _grid(table: dict, donor: DonorParams, ion: IonParams) -> TimeGrid:
    _check_keys(table, ("t_start", "t_end", "max_step", "tolerance"), "grid")
    auto = default_grid(donor, ion)

    def pick(k, default, kind):
        v = table.get(k, "auto")
        return default if v == "auto" else parse_quantity(v, kind, f"grid.{k}")

    try:
        return TimeGrid(
            pick("t_start", auto.t_start, "time"), pick("t_end", auto.t_end, "time"),
            pick("max_step", DEFAULT_MAX_STEP, "time"), pick("tolerance", DEFAULT_TOLERANCE, "plain"),
        )
    except ValueError as exc:
        raise ConfigError("grid", str(exc)) from None


def _optimization(table: dict, donor: DonorParams, ion: IonParams) -> OptimizationSpec:
    allowed = ("free_side", "target_p1", "p1_tolerance", "max_evaluations", "seed", "restarts", "max_sweeps",
               "initial_width", "bounds")
    _check_keys(table, allowed, "optimization")
    side = table.get("free_side", "donor")
    if side not in ("donor", "ion"):
        raise ConfigError("optimization.free_side", "must be 'donor' or 'ion'")
    if "target_p1" not in table:
        raise ConfigError("optimization.target_p1", "missing")
    target = parse_quantity(table["target_p1"], "plain", "optimization.target_p1")
    if not 0.0 < target <= WEAK_EXCITATION_LIMIT:
        raise ConfigError("optimization.target_p1", f"weak-excitation bound violated: {target} not in (0, {WEAK_EXCITATION_LIMIT}]")
    bounds = dict(DEFAULT_BOUNDS)
    raw_bounds = table.get("bounds", {})
    _check_keys(raw_bounds, PARAMS, "optimization.bounds")
    for k, pair in raw_bounds.items():
        key = f"optimization.bounds.{k}"
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ConfigError(key, "expected [lo, hi]")
        kind = _PULSE_KINDS[k]
        bounds[k] = (parse_quantity(pair[0], kind, key), parse_quantity(pair[1], kind, key))
    extras = {}
    for k, caster in (("p1_tolerance", float), ("max_evaluations", int), ("seed", int), ("restarts", int),
                      ("max_sweeps", int), ("initial_width", float)):
        if k in table:
            try:
                extras[k] = caster(table[k])
            except (TypeError, ValueError):
                raise ConfigError(f"optimization.{k}", f"bad value {table[k]!r}") from None
    fixed = ion.pulse if side == "donor" else donor.pulse
    try:
        return OptimizationSpec(free_side=side, fixed_pulse=fixed, target_p1=target, bounds=bounds, **extras)
    except ValueError as exc:
        raise ConfigError("optimization", str(exc)) from None


@dataclass(frozen=True)
class CavitySweep:
    q_min: float = 1e2
    q_max: float = 1e7
    q_steps: int = 100
    v_min: float = 1e-1
    v_max: float = 1e4
    v_steps: int = 100
    wavelength: float = 369e-9
    refractive_index: float = 2.3


def _cavity(table: dict) -> CavitySweep:
    allowed = ("q_min", "q_max", "q_steps", "v_min", "v_max", "v_steps", "wavelength_nm", "refractive_index")
    _check_keys(table, allowed, "cavity")
    vals = {}
    for k in ("q_min", "q_max", "v_min", "v_max", "refractive_index"):
        if k in table:
            vals[k] = parse_quantity(table[k], "plain", f"cavity.{k}")
    for k in ("q_steps", "v_steps"):
        if k in table:
            if not isinstance(table[k], int) or table[k] < 1:
                raise ConfigError(f"cavity.{k}", "must be a positive integer")
            vals[k] = table[k]
    if "wavelength_nm" in table:
        vals["wavelength"] = parse_quantity(table["wavelength_nm"], "plain", "cavity.wavelength_nm") * 1e-9
    sweep = CavitySweep(**vals)
    if not (0 < sweep.q_min <= sweep.q_max and 0 < sweep.v_min <= sweep.v_max):
        raise ConfigError("cavity", "need 0 < q_min <= q_max and 0 < v_min <= v_max")
    if sweep.refractive_index < 1:
        raise ConfigError("cavity.refractive_index", "must be >= 1")
    return sweep


@dataclass(frozen=True)
class Scenario:
    donor: DonorParams
    ion: IonParams
    grid: TimeGrid
    protocol: ProtocolSettings
    optimization: Optional[OptimizationSpec] = None
    cavity: CavitySweep = field(default_factory=CavitySweep)
    outputs: tuple = ()
    files: dict = field(default_factory=lambda: dict(DEFAULT_FILES))
    method: str = "radau"
    name: str = "scenario"

    def effective(self) -> dict:
        """Fully resolved values (rad/ns, ns, us for protocol timings) for echoing."""
        out = {
            "name": self.name,
            "method": self.method,
            "donor": asdict(self.donor),
            "ion": asdict(self.ion),
            "grid": asdict(self.grid),
            "protocol": {**asdict(self.protocol.params), "p1_source": self.protocol.p1_source,
                         "epsilon": self.protocol.epsilon, "re_overlap": self.protocol.re_overlap},
            "cavity": asdict(self.cavity),
            "outputs": list(self.outputs),
            "files": dict(self.files),
        }
        if self.optimization is not None:
            opt = asdict(self.optimization)
            opt["bounds"] = {k: list(v) for k, v in opt["bounds"].items()}
            out["optimization"] = opt
        return out


def parse_scenario(raw: dict, name: str = "scenario") -> Scenario:
    _check_keys(raw, ("name", "method", "donor", "ion", "grid", "protocol", "optimization", "cavity", "outputs", "files"), "")
    for k in ("donor", "ion"):
        if k not in raw:
            raise ConfigError(k, "missing section")
    donor = _donor(raw["donor"])
    ion = _ion(raw["ion"])
    grid = _grid(raw.get("grid", {}), donor, ion)
    protocol = _protocol(raw.get("protocol", {}))
    optimization = _optimization(raw["optimization"], donor, ion) if "optimization" in raw else None
    cavity = _cavity(raw.get("cavity", {}))
    method = raw.get("method", "radau")
    if method not in METHODS:
        raise ConfigError("method", f"must be one of {METHODS}")

    outputs = raw.get("outputs", ["metrics"])
    if not isinstance(outputs, list):
        raise ConfigError("outputs", "expected a list")
    for item in outputs:
        if item not in ARTIFACTS:
            raise ConfigError("outputs", f"unknown artifact {item!r}; choose from {ARTIFACTS}")
    if len(set(outputs)) != len(outputs):
        raise ConfigError("outputs", "duplicate artifact")
    files = dict(DEFAULT_FILES)
    raw_files = raw.get("files", {})
    _check_keys(raw_files, DEFAULT_FILES, "files")
    files.update(raw_files)
    names = list(files.values())
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise ConfigError("files", f"output paths must be distinct, repeated: {dupes}")
    if "optimizer-log" in outputs and optimization is None:
        raise ConfigError("outputs", "optimizer-log requested without an [optimization] section")
    return Scenario(donor, ion, grid, protocol, optimization, cavity, tuple(outputs), files, method,
                    str(raw.get("name", name)))


def load_raw(path) -> dict:
    path = Path(path)
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"TOML parse error in {path}: {exc}") from None


def load_scenario(path) -> Scenario:
    return parse_scenario(load_raw(path), name=Path(path).stem)


def set_key(raw: dict, dotted: str, value) -> dict:
    """Copy of ``raw`` with ``dotted`` (e.g. ``donor.pulse.omega_max``) set to ``value``.

    ``protocol.p1`` sets both excitation probabilities.
    """
    if dotted == "protocol.p1":
        out = set_key(raw, "protocol.p1_yb", value)
        return set_key(out, "protocol.p1_in", value)
    out = copy.deepcopy(raw)
    parts = dotted.split(".")
    node = out
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(dotted, "not a table path")
    node[parts[-1]] = value
    return out


SWEEPABLE_SECTIONS = {
    "donor": ("delta", "g", "kappa", "gamma_in", "lifetime"),
    "donor.pulse": tuple(_PULSE_KINDS),
    "ion": ("gamma_yb", "lifetime"),
    "ion.pulse": tuple(_PULSE_KINDS),
    "protocol": (*[k for k in _PROTOCOL_KINDS], "p1", "epsilon", "re_overlap"),
    "grid": ("max_step", "tolerance"),
}


def check_sweep_key(dotted: str) -> None:
    section, _, leaf = dotted.rpartition(".")
    if section not in SWEEPABLE_SECTIONS or leaf not in SWEEPABLE_SECTIONS[section]:
        raise ConfigError(dotted, "unknown or non-numeric parameter; sweepable keys are "
                          + ", ".join(f"{s}.{k}" for s, ks in SWEEPABLE_SECTIONS.items() for k in ks))
