"""Run configuration: INI-style files with a fixed schema.

Example::

    scenario = hc            # shorthand for [scenario] kind

    [time]
    dt = 0.5
    t_end = 1800

    [scenario]
    kind = pm
    q_td = 160

    [boundary]
    alpha_c = 35

    [materials]
    tau = 10800

    [initial]
    theta0 = 293.15
    w0 = 0:71.01, 0.12:60     # piecewise-linear profile x:value

    [output]
    directory = out
    snapshots = 900, 1800
    probes = 0.12, 0.11

    [solver]
    advection = upwind

Every key is optional; unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
import dataclasses
import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .fire import SCENARIOS, BoundaryParams, make_scenario
from .materials import MaterialParams
from .solver import Mesh1D, Problem, SolverOptions, SystemState, initial_state

ROOT = "__root__"
DEFAULT_SNAPSHOTS = (900.0, 1800.0)

_SCENARIO_KEYS = {"q_td": float, "opening": float, "b": float, "growth": str, "temperature": float}
_SCENARIO_ALLOWED = {"pm": {"q_td", "opening", "b", "growth"}, "constant": {"temperature"},
                     "iso": set(), "hc": set()}
_BOUNDARY_KEYS = {f.name for f in dataclasses.fields(BoundaryParams)}
_MATERIAL_KEYS = {f.name for f in dataclasses.fields(MaterialParams)}
_SOLVER_KEYS = {"advection": str, "coupling_theta": str, "monitor_policy": str,
                "dense_output": bool, "boundary_enthalpy_term": bool, "negative_tolerance": float}


@dataclass(frozen=True)
class SimulationConfig:
    """Validated settings of one run."""

    ell: float = 0.12
    n_elements: int = 240
    dt: float = 0.5
    t_end: float = 1800.0
    scenario: str = "iso"
    scenario_params: tuple = ()
    boundary: tuple = ()
    materials: tuple = ()
    theta0: object = 293.15
    w0: object = 71.01
    directory: str = "output"
    snapshots: tuple | None = None
    probes: tuple | None = None
    solver: tuple = ()

    def __post_init__(self):
        if not (np.isfinite(self.ell) and self.ell > 0):
            raise ConfigError(f"[geometry] ell must be > 0, got {self.ell!r}")
        if self.n_elements < 2:
            raise ConfigError(f"[mesh] n_elements must be >= 2, got {self.n_elements!r}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"[time] dt must be > 0, got {self.dt!r}")
        if not (np.isfinite(self.t_end) and self.t_end >= 0):
            raise ConfigError(f"[time] t_end must be >= 0, got {self.t_end!r}")
        n = round(self.t_end / self.dt)
        if abs(n * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ConfigError(f"[time] t_end={self.t_end} must be a multiple of dt={self.dt}")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"[scenario] kind must be one of {sorted(SCENARIOS)}, got {self.scenario!r}")
        extra = set(dict(self.scenario_params)) - _SCENARIO_ALLOWED[self.scenario]
        if extra:
            raise ConfigError(f"[scenario] keys {sorted(extra)} do not apply to kind {self.scenario!r}")
        for s in self.snapshot_times:
            if not 0 <= s <= self.t_end:
                raise ConfigError(f"[output] snapshot time {s} outside [0, {self.t_end}]")
        for p in self.probe_points:
            if not 0 <= p <= self.ell:
                raise ConfigError(f"[output] probe {p} outside [0, {self.ell}]")
        for name in ("theta0", "w0"):
            _check_initial(name, getattr(self, name), self.ell)
        # build the parameter objects once so invalid values fail here
        try:
            self.build_scenario()
            self.build_boundary()
            self.build_materials()
            self.build_options()
        except (DomainError, TypeError) as exc:
            raise ConfigError(str(exc)) from None

    # -- derived objects ------------------------------------------------------

    @property
    def snapshot_times(self) -> tuple:
        if self.snapshots is not None:
            return tuple(self.snapshots)
        times = [s for s in DEFAULT_SNAPSHOTS if s <= self.t_end]
        if self.t_end not in times:
            times.append(self.t_end)
        return tuple(times)

    @property
    def probe_points(self) -> tuple:
        if self.probes is not None:
            return tuple(self.probes)
        return (self.ell, max(self.ell - 0.01, 0.0))

    def build_scenario(self):
        return make_scenario(self.scenario, **dict(self.scenario_params))

    def build_boundary(self, scenario=None):
        return BoundaryParams.for_scenario(scenario or self.build_scenario(), **dict(self.boundary))

    def build_materials(self) -> MaterialParams:
        return MaterialParams(**dict(self.materials))

    def build_options(self) -> SolverOptions:
        return SolverOptions(**dict(self.solver))

    def to_problem(self) -> Problem:
        sc = self.build_scenario()
        return Problem(mesh=Mesh1D(self.ell, self.n_elements), scenario=sc,
                       bp=self.build_boundary(sc), mp=self.build_materials(), dt=self.dt,
                       options=self.build_options())

    def initial(self, problem: Problem | None = None) -> SystemState:
        mesh = problem.mesh if problem else Mesh1D(self.ell, self.n_elements)
        return initial_state(mesh, _profile(self.theta0), _profile(self.w0))

    # -- serialisation ----------------------------------------------------------

    def serialize(self) -> str:
        """Canonical INI text; ``parse_config_text(cfg.serialize()) == cfg``."""
        lines = ["[geometry]", f"ell = {self.ell!r}", "", "[mesh]", f"n_elements = {self.n_elements}",
                 "", "[time]", f"dt = {self.dt!r}", f"t_end = {self.t_end!r}", "",
                 "[scenario]", f"kind = {self.scenario}"]
        lines += [f"{k} = {_fmt(v)}" for k, v in self.scenario_params]
        for section, items in (("boundary", self.boundary), ("materials", self.materials)):
            lines += ["", f"[{section}]"] + [f"{k} = {_fmt(v)}" for k, v in items]
        lines += ["", "[initial]", f"theta0 = {_fmt_profile(self.theta0)}",
                  f"w0 = {_fmt_profile(self.w0)}", "", "[output]", f"directory = {self.directory}"]
        if self.snapshots is not None:
            lines.append("snapshots = " + ", ".join(repr(float(s)) for s in self.snapshots))
        if self.probes is not None:
            lines.append("probes = " + ", ".join(repr(float(p)) for p in self.probes))
        lines += ["", "[solver]"] + [f"{k} = {_fmt(v)}" for k, v in self.solver]
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()

    def as_dict(self) -> dict:
        return {"ell": self.ell, "n_elements": self.n_elements, "dt": self.dt, "t_end": self.t_end,
                "scenario": self.scenario, "scenario_params": dict(self.scenario_params),
                "boundary": dict(self.boundary), "materials": dict(self.materials),
                "theta0": _fmt_profile(self.theta0), "w0": _fmt_profile(self.w0),
                "snapshots": list(self.snapshot_times), "probes": list(self.probe_points),
                "solver": dict(self.solver)}


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _fmt_profile(v):
    if isinstance(v, tuple):
        return ", ".join(f"{x!r}:{y!r}" for x, y in v)
    return repr(float(v))


def _profile(v):
    if isinstance(v, tuple):
        xs = np.array([p[0] for p in v])
        ys = np.array([p[1] for p in v])
        return lambda x: np.interp(x, xs, ys)
    return float(v)


def _check_initial(name, v, ell):
    values = [p[1] for p in v] if isinstance(v, tuple) else [v]
    if not all(np.isfinite(y) and y > 0 for y in values):
        raise ConfigError(f"[initial] {name} must be positive everywhere")
    if isinstance(v, tuple):
        xs = [p[0] for p in v]
        if len(xs) < 2 or any(b <= a for a, b in zip(xs, xs[1:])) or xs[0] > 0 or xs[-1] < ell:
            raise ConfigError(f"[initial] {name} profile must have increasing x covering [0, {ell}]")


def _float(section, key, text):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key} must be a number, got {text!r}") from None
    if not np.isfinite(v):
        raise ConfigError(f"[{section}] {key} must be finite, got {text!r}")
    return v


def _bool(section, key, text):
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"[{section}] {key} must be true or false, got {text!r}")


def _str(text):
    return text.strip().strip('"').strip("'").strip()


def _float_list(section, key, text):
    return tuple(_float(section, key, part) for part in text.split(",") if part.strip())


def _initial_value(key, text):
    text = _str(text)
    if ":" not in text:
        return _float("initial", key, text)
    pts = []
    for part in text.split(","):
        if not part.strip():
            continue
        try:
            xs, ys = part.split(":")
        except ValueError:
            raise ConfigError(f"[initial] {key} profile entries must be x:value, got {part!r}") from None
        pts.append((_float("initial", key, xs), _float("initial", key, ys)))
    return tuple(pts)


def parse_config_text(text: str) -> SimulationConfig:
    """Parse and validate configuration text."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None,
                                   default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(f"[{ROOT}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from None

    kw = {}
    scenario_params, boundary, mats, solver = [], [], [], []
    known = {ROOT, "geometry", "mesh", "time", "scenario", "boundary", "materials", "initial",
             "output", "solver"}
    for section in cp.sections():
        if section not in known:
            raise ConfigError(f"unknown section [{section}]; expected one of {sorted(known - {ROOT})}")
        for key, raw in cp.items(section):
            _assign(section, key, raw, kw, scenario_params, boundary, mats, solver)
    kw["scenario_params"] = tuple(scenario_params)
    kw["boundary"] = tuple(boundary)
    kw["materials"] = tuple(mats)
    kw["solver"] = tuple(solver)
    return SimulationConfig(**kw)


def _assign(section, key, raw, kw, scenario_params, boundary, mats, solver):
    def unknown(expected):
        raise ConfigError(f"unknown key {key!r} in [{section}]; expected one of {sorted(expected)}")

    if section == ROOT:
        if key != "scenario":
            unknown({"scenario"})
        kw["scenario"] = _str(raw).lower()
    elif section == "geometry":
        if key != "ell":
            unknown({"ell"})
        kw["ell"] = _float(section, key, raw)
    elif section == "mesh":
        if key != "n_elements":
            unknown({"n_elements"})
        try:
            kw["n_elements"] = int(raw)
        except ValueError:
            raise ConfigError(f"[mesh] n_elements must be an integer, got {raw!r}") from None
    elif section == "time":
        if key not in ("dt", "t_end"):
            unknown({"dt", "t_end"})
        kw[key] = _float(section, key, raw)
    elif section == "scenario":
        if key == "kind":
            kw["scenario"] = _str(raw).lower()
        elif key in _SCENARIO_KEYS:
            conv = _SCENARIO_KEYS[key]
            scenario_params.append((key, _str(raw).lower() if conv is str else _float(section, key, raw)))
        else:
            unknown(set(_SCENARIO_KEYS) | {"kind"})
    elif section == "boundary":
        if key not in _BOUNDARY_KEYS:
            unknown(_BOUNDARY_KEYS)
        boundary.append((key, _float(section, key, raw)))
    elif section == "materials":
        if key not in _MATERIAL_KEYS:
            unknown(_MATERIAL_KEYS)
        mats.append((key, _float(section, key, raw)))
    elif section == "initial":
        if key not in ("theta0", "w0"):
            unknown({"theta0", "w0"})
        kw[key] = _initial_value(key, raw)
    elif section == "output":
        if key == "directory":
            kw["directory"] = _str(raw)
        elif key in ("snapshots", "probes"):
            kw[key] = _float_list(section, key, raw)
        else:
            unknown({"directory", "snapshots", "probes"})
    elif section == "solver":
        if key not in _SOLVER_KEYS:
            unknown(set(_SOLVER_KEYS))
        conv = _SOLVER_KEYS[key]
        if conv is bool:
            solver.append((key, _bool(section, key, raw)))
        elif conv is float:
            solver.append((key, _float(section, key, raw)))
        else:
            solver.append((key, _str(raw)))


def parse_config(path) -> SimulationConfig:
    """Read a configuration file (UTF-8)."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from None
    return parse_config_text(text)


__all__ = ["SimulationConfig", "parse_config", "parse_config_text"]
