"""Scenario files: a flat ``key = value`` format with ``[sections]``.

Grammar (one item per line, ``#`` starts a comment)::

    [run]            t0, T, mode, cfl, samples, record_every, dissipation,
                     reference, oracle, oracle_dt, oracle_samples
    [grid]           min, max, nodes                     (single system)
    [dynamics]       model, u_bound, v_bound, state_dim,
                     drift, control, disturbance,
                     u_lower, u_upper, v_lower, v_upper   (polynomial model)
    [target]         geometry
    [avoid]          geometry                            (optional)
    [separation]     horizontal, vertical                (aircraft runs)
    [aircraft.NAME]  waypoints, entry, tw_kind, tw_waypoint, tw_lower, tw_upper,
                     tw_t_lo, tw_t_hi, grid_min, grid_max, grid_nodes,
                     wind_bound, gamma_max, speed_fraction, speed_table

Vectors are comma separated, matrices and waypoint lists use ``;`` between
rows.  Numbers may carry a unit suffix: ``m``, ``s``, ``km``, ``nmi``, ``ft``
or ``deg``; lengths are stored in meters and angles in radians.
Geometry is written as nested calls, e.g.
``union(box((-1, -1), (0, 0)), cylinder(axis=1, center=(2, 2), radius=0.5, half_height=1))``.
"""

from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .aircraft import FT, NMI, AircraftModel, load_speed_profiles
from .dynamics import (ContractError, DynamicsSpec, InputBox, Polynomial, double_integrator, game_2d,
                       integrator_1d, polynomial_affine, zero_dynamics)
from .grid import Box, Complement, Cylinder, Geometry, Grid, Intersection, Union, evaluate_geometry
from .reach_avoid import HORIZONTAL_SEPARATION, TW_KINDS, AircraftTask, TargetWindow
from .vi_solver import SOLVER_MODES

UNITS = {"": 1.0, "m": 1.0, "s": 1.0, "km": 1000.0, "nmi": NMI, "ft": FT, "deg": math.pi / 180}
_NUMBER = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([a-z]*)\s*$")
CATALOG = ("integrator_1d", "double_integrator", "game_2d", "zero", "polynomial")
REFERENCES = ("none", "analytic_1d")


class ScenarioError(ContractError):
    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


# --- typed sections -------------------------------------------------------


@dataclass(frozen=True)
class RunOptions:
    t0: Optional[float] = None
    T: Optional[float] = None
    mode: str = "terminal"
    cfl: float = 0.5
    samples: int = 3
    record_every: int = 1
    dissipation: str = "hamiltonian"
    reference: str = "none"
    oracle: bool = False
    oracle_dt: Optional[float] = None
    oracle_samples: int = 3


@dataclass(frozen=True)
class DynamicsConfig:
    model: str
    u_bound: float = 1.0
    v_bound: float = 0.0
    state_dim: int = 1
    drift: tuple[Polynomial, ...] = ()
    control: tuple[tuple[Polynomial, ...], ...] = ()
    disturbance: tuple[tuple[Polynomial, ...], ...] = ()
    u_lower: tuple[float, ...] = ()
    u_upper: tuple[float, ...] = ()
    v_lower: tuple[float, ...] = ()
    v_upper: tuple[float, ...] = ()

    @property
    def dim(self) -> int:
        return {"integrator_1d": 1, "double_integrator": 2, "game_2d": 2}.get(
            self.model, self.state_dim if self.model == "zero" else len(self.drift))

    def build(self) -> DynamicsSpec:
        if self.model == "integrator_1d":
            return integrator_1d(self.u_bound, self.v_bound)
        if self.model == "double_integrator":
            return double_integrator(self.u_bound, self.v_bound)
        if self.model == "game_2d":
            return game_2d(self.u_bound, self.v_bound)
        if self.model == "zero":
            return zero_dynamics(self.state_dim)
        return polynomial_affine(self.drift, self.control, self.disturbance,
                                 InputBox(self.u_lower, self.u_upper), InputBox(self.v_lower, self.v_upper))


@dataclass(frozen=True)
class AircraftConfig:
    name: str
    waypoints: tuple[tuple[float, float, float], ...]
    entry: float
    tw_kind: str
    tw_lower: float
    tw_upper: float
    tw_t_lo: float
    tw_t_hi: float
    grid_min: tuple[float, float]
    grid_max: tuple[float, float]
    grid_nodes: tuple[int, int]
    tw_waypoint: Optional[int] = None
    wind_bound: tuple[float, float, float] = (12.0, 12.0, 12.0)
    gamma_max: float = math.radians(5.0)
    speed_fraction: float = 0.1
    speed_table: Optional[str] = None

    def task(self, base: Optional[Path] = None) -> AircraftTask:
        table = None
        if self.speed_table is not None:
            table = Path(self.speed_table)
            if base is not None and not table.is_absolute():
                table = base / table
        model = AircraftModel(self.waypoints, load_speed_profiles(table), self.gamma_max,
                              self.speed_fraction, self.wind_bound)
        wp = len(self.waypoints) - 1 if self.tw_waypoint is None else self.tw_waypoint
        tw = TargetWindow(self.tw_kind, wp, self.tw_lower, self.tw_upper, self.tw_t_lo, self.tw_t_hi)
        return AircraftTask(model, Grid(self.grid_min, self.grid_max, self.grid_nodes), tw, self.entry, self.name)


@dataclass(frozen=True)
class Scenario:
    run: RunOptions = RunOptions()
    grid: Optional[Grid] = None
    dynamics: Optional[DynamicsConfig] = None
    target: Optional[Geometry] = None
    avoid: Optional[Geometry] = None
    aircraft: tuple[AircraftConfig, ...] = ()
    separation: tuple[float, float] = (HORIZONTAL_SEPARATION, 2000 * FT)
    base_dir: Optional[Path] = field(default=None, compare=False)

    @property
    def is_aircraft(self) -> bool:
        return bool(self.aircraft)

    def tasks(self) -> list[AircraftTask]:
        return [a.task(self.base_dir) for a in self.aircraft]


# --- value parsers --------------------------------------------------------


def parse_number(text: str) -> float:
    m = _NUMBER.match(text)
    if not m or m.group(2) not in UNITS:
        raise ValueError(f"expected a number with optional unit, got {text.strip()!r}")
    value = float(m.group(1)) * UNITS[m.group(2)]
    if not math.isfinite(value):
        raise ValueError("number is not finite")
    return value


def parse_vector(text: str) -> tuple[float, ...]:
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    if not parts:
        raise ValueError("empty vector")
    return tuple(parse_number(p) for p in parts)


def parse_int_vector(text: str) -> tuple[int, ...]:
    out = []
    for p in (p for p in re.split(r"[,\s]+", text.strip()) if p):
        if not re.fullmatch(r"[+-]?\d+", p):
            raise ValueError(f"expected an integer, got {p!r}")
        out.append(int(p))
    if not out:
        raise ValueError("empty vector")
    return tuple(out)


def parse_int(text: str) -> int:
    v = parse_int_vector(text)
    if len(v) != 1:
        raise ValueError("expected a single integer")
    return v[0]


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true or false, got {text.strip()!r}")


def parse_rows(text: str) -> list[str]:
    return [r.strip() for r in text.split(";")]


def _literal(node: ast.AST):
    value = ast.literal_eval(node)
    if isinstance(value, (int, float)):
        return float(value)
    return tuple(float(v) for v in (value if isinstance(value, tuple) else (value,)))


_GEOMETRY_ARGS = {"box": ("lower", "upper"), "cylinder": ("axis", "center", "radius", "half_height"),
                  "complement": ("inner",)}


def _geometry(node: ast.AST) -> Geometry:
    if not isinstance(node, ast.Call) or not isinstance(node.func, ast.Name):
        raise ValueError("geometry must be a call such as box(...)")
    name = node.func.id
    if name in ("union", "intersection"):
        if node.keywords:
            raise ValueError(f"{name} takes positional parts only")
        parts = tuple(_geometry(a) for a in node.args)
        if not parts:
            raise ValueError(f"empty {name}")
        return Union(parts) if name == "union" else Intersection(parts)
    if name not in _GEOMETRY_ARGS:
        raise ValueError(f"unknown geometry {name!r}")
    names = _GEOMETRY_ARGS[name]
    if len(node.args) > len(names):
        raise ValueError(f"too many arguments to {name}")
    args = dict(zip(names, node.args))
    for kw in node.keywords:
        if kw.arg not in names or kw.arg in args:
            raise ValueError(f"bad argument {kw.arg!r} to {name}")
        args[kw.arg] = kw.value
    missing = [n for n in names if n not in args]
    if missing:
        raise ValueError(f"{name} is missing {', '.join(missing)}")
    if name == "complement":
        return Complement(_geometry(args["inner"]))
    vals = {k: _literal(v) for k, v in args.items()}
    if name == "box":
        return Box(vals["lower"], vals["upper"])
    return Cylinder(int(vals["axis"]), vals["center"], vals["radius"], vals["half_height"])


def parse_geometry(text: str) -> Geometry:
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse geometry: {exc.msg}") from None
    return _geometry(tree.body)


def format_geometry(geom: Geometry) -> str:
    def vec(v):
        return "(" + ", ".join(repr(float(x)) for x in v) + ("," if len(v) == 1 else "") + ")"

    if isinstance(geom, Box):
        return f"box(lower={vec(geom.lower)}, upper={vec(geom.upper)})"
    if isinstance(geom, Cylinder):
        return (f"cylinder(axis={geom.axis}, center={vec(geom.center)}, radius={geom.radius!r}, "
                f"half_height={geom.half_height!r})")
    if isinstance(geom, (Union, Intersection)):
        name = "union" if isinstance(geom, Union) else "intersection"
        return f"{name}(" + ", ".join(format_geometry(p) for p in geom.parts) + ")"
    if isinstance(geom, Complement):
        return f"complement({format_geometry(geom.inner)})"
    raise TypeError(f"unknown geometry {geom!r}")


# --- file parsing ---------------------------------------------------------

# key -> (parser, required)
_RUN_KEYS = {
    "t0": parse_number, "T": parse_number, "mode": str, "cfl": parse_number, "samples": parse_int,
    "record_every": parse_int, "dissipation": str, "reference": str, "oracle": parse_bool,
    "oracle_dt": parse_number, "oracle_samples": parse_int,
}
_GRID_KEYS = {"min": parse_vector, "max": parse_vector, "nodes": parse_int_vector}
_DYN_KEYS = {
    "model": str, "u_bound": parse_number, "v_bound": parse_number, "state_dim": parse_int,
    "drift": lambda t: tuple(Polynomial.parse(r) for r in parse_rows(t)),
    "control": lambda t: tuple(tuple(Polynomial.parse(c) for c in r.split(",")) for r in parse_rows(t)),
    "disturbance": lambda t: tuple(tuple(Polynomial.parse(c) for c in r.split(",")) for r in parse_rows(t)),
    "u_lower": parse_vector, "u_upper": parse_vector, "v_lower": parse_vector, "v_upper": parse_vector,
}
_GEOM_KEYS = {"geometry": parse_geometry}
_SEP_KEYS = {"horizontal": parse_number, "vertical": parse_number}
_AIRCRAFT_KEYS = {
    "waypoints": lambda t: tuple(parse_vector(r) for r in parse_rows(t)),
    "entry": parse_number, "tw_kind": str, "tw_waypoint": parse_int, "tw_lower": parse_number,
    "tw_upper": parse_number, "tw_t_lo": parse_number, "tw_t_hi": parse_number,
    "grid_min": parse_vector, "grid_max": parse_vector, "grid_nodes": parse_int_vector,
    "wind_bound": parse_vector, "gamma_max": parse_number, "speed_fraction": parse_number,
    "speed_table": str,
}
_AIRCRAFT_REQUIRED = ("waypoints", "entry", "tw_kind", "tw_lower", "tw_upper", "tw_t_lo", "tw_t_hi",
                      "grid_min", "grid_max", "grid_nodes")
_SECTIONS = {"run": _RUN_KEYS, "grid": _GRID_KEYS, "dynamics": _DYN_KEYS, "target": _GEOM_KEYS,
             "avoid": _GEOM_KEYS, "separation": _SEP_KEYS}


class _Section:
    def __init__(self, name: str, line: int):
        self.name = name
        self.line = line
        self.values: dict = {}
        self.lines: dict = {}

    def get(self, key, default=None):
        return self.values.get(key, default)

    def require(self, key):
        if key not in self.values:
            raise ScenarioError(f"missing required key in [{self.name}]", key, self.line)
        return self.values[key]

    def fail(self, key, message):
        raise ScenarioError(message, key, self.lines.get(key, self.line))


def _read_sections(text: str) -> dict[str, _Section]:
    sections: dict[str, _Section] = {}
    current: Optional[_Section] = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[([A-Za-z0-9_.\-]+)\]", line)
        if m:
            name = m.group(1)
            if name in sections:
                raise ScenarioError(f"duplicate section [{name}]", None, lineno)
            if name not in _SECTIONS and not re.fullmatch(r"aircraft\.[A-Za-z0-9_\-]+", name):
                raise ScenarioError(f"unknown section [{name}]", None, lineno)
            current = sections[name] = _Section(name, lineno)
            continue
        if "=" not in line:
            raise ScenarioError(f"expected 'key = value', got {line!r}", None, lineno)
        if current is None:
            raise ScenarioError("key outside of any section", None, lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        keys = _AIRCRAFT_KEYS if current.name.startswith("aircraft.") else _SECTIONS[current.name]
        if key not in keys:
            raise ScenarioError(f"unknown key in [{current.name}]", key, lineno)
        if key in current.values:
            raise ScenarioError("duplicate key", key, lineno)
        try:
            current.values[key] = keys[key](value)
        except (ValueError, ContractError) as exc:
            raise ScenarioError(str(exc), key, lineno) from None
        current.lines[key] = lineno
    return sections


def _choice(sec: _Section, key: str, options, default):
    value = sec.get(key, default)
    if value not in options:
        sec.fail(key, f"must be one of {', '.join(options)}, got {value!r}")
    return value


def _run_options(sec: _Section, aircraft: bool) -> RunOptions:
    run = RunOptions(
        t0=sec.get("t0"), T=sec.get("T"),
        mode=_choice(sec, "mode", tuple(SOLVER_MODES), "terminal"),
        cfl=sec.get("cfl", 0.5), samples=sec.get("samples", 3), record_every=sec.get("record_every", 1),
        dissipation=_choice(sec, "dissipation", ("hamiltonian", "speed"), "hamiltonian"),
        reference=_choice(sec, "reference", REFERENCES, "none"),
        oracle=sec.get("oracle", False), oracle_dt=sec.get("oracle_dt"), oracle_samples=sec.get("oracle_samples", 3),
    )
    if not aircraft:
        sec.require("t0")
        sec.require("T")
    if run.t0 is not None and run.T is not None and run.t0 > run.T:
        sec.fail("t0", f"horizon start t0={run.t0} is after its end T={run.T}")
    if not 0 < run.cfl <= 1:
        sec.fail("cfl", "must lie in (0, 1]")
    if run.samples < 2:
        sec.fail("samples", "must be >= 2")
    if run.oracle_samples < 2:
        sec.fail("oracle_samples", "must be >= 2")
    if run.record_every < 1:
        sec.fail("record_every", "must be >= 1")
    if run.oracle and run.oracle_dt is None:
        sec.fail("oracle", "oracle runs need oracle_dt")
    if run.oracle_dt is not None and not run.oracle_dt > 0:
        sec.fail("oracle_dt", "must be positive")
    return run


def _dynamics(sec: _Section) -> DynamicsConfig:
    sec.require("model")
    model = _choice(sec, "model", CATALOG, None)
    allowed = {"model"}
    if model in ("integrator_1d", "double_integrator", "game_2d"):
        allowed |= {"u_bound", "v_bound"}
    elif model == "zero":
        allowed |= {"state_dim"}
    else:
        allowed |= {"drift", "control", "disturbance", "u_lower", "u_upper", "v_lower", "v_upper"}
    for key in sec.values:
        if key not in allowed:
            sec.fail(key, f"not used by model {model!r}")
    defaults = {"integrator_1d": (1.0, 0.0), "double_integrator": (1.0, 0.0), "game_2d": (1.0, 0.5)}
    if model in defaults:
        u, v = defaults[model]
        cfg = DynamicsConfig(model, sec.get("u_bound", u), sec.get("v_bound", v))
        if cfg.u_bound < 0 or cfg.v_bound < 0:
            sec.fail("u_bound" if cfg.u_bound < 0 else "v_bound", "must be non-negative")
        return cfg
    if model == "zero":
        cfg = DynamicsConfig(model, state_dim=sec.get("state_dim", 1))
        if cfg.state_dim < 1:
            sec.fail("state_dim", "must be >= 1")
        return cfg
    cfg = DynamicsConfig(model, drift=sec.require("drift"), control=sec.get("control", ()),
                         disturbance=sec.get("disturbance", ()), u_lower=sec.get("u_lower", ()),
                         u_upper=sec.get("u_upper", ()), v_lower=sec.get("v_lower", ()),
                         v_upper=sec.get("v_upper", ()))
    n = len(cfg.drift)
    for key, mat, lo, hi in (("control", cfg.control, cfg.u_lower, cfg.u_upper),
                             ("disturbance", cfg.disturbance, cfg.v_lower, cfg.v_upper)):
        width = len(lo)
        if len(hi) != width:
            sec.fail(key, "input bounds differ in length")
        if width and len(mat) != n:
            sec.fail(key, f"needs {n} rows, one per state")
        if any(len(r) != width for r in mat) and width:
            sec.fail(key, f"rows need {width} columns, one per input")
        if mat and not width:
            sec.fail(key, "matrix given without input bounds")
        if width == 0:
            cfg = replace(cfg, **{key: tuple(() for _ in range(n))})
    try:
        cfg.build()
    except ContractError as exc:
        sec.fail("model", str(exc))
    return cfg


def _aircraft(sec: _Section) -> AircraftConfig:
    for key in _AIRCRAFT_REQUIRED:
        sec.require(key)
    v = sec.values
    name = sec.name.split(".", 1)[1]
    if any(len(wp) != 3 for wp in v["waypoints"]):
        sec.fail("waypoints", "each waypoint needs x y z")
    if v["tw_kind"] not in TW_KINDS:
        sec.fail("tw_kind", f"must be one of {', '.join(TW_KINDS)}")
    for key in ("grid_min", "grid_max", "grid_nodes"):
        if len(v[key]) != 2:
            sec.fail(key, "aircraft grids are 2D over (S, z)")
    cfg = AircraftConfig(
        name=name, waypoints=tuple(tuple(wp) for wp in v["waypoints"]), entry=v["entry"],
        tw_kind=v["tw_kind"], tw_lower=v["tw_lower"], tw_upper=v["tw_upper"],
        tw_t_lo=v["tw_t_lo"], tw_t_hi=v["tw_t_hi"], grid_min=v["grid_min"], grid_max=v["grid_max"],
        grid_nodes=v["grid_nodes"], tw_waypoint=v.get("tw_waypoint"),
        wind_bound=tuple(v.get("wind_bound", (12.0, 12.0, 12.0))),
        gamma_max=v.get("gamma_max", math.radians(5.0)), speed_fraction=v.get("speed_fraction", 0.1),
        speed_table=v.get("speed_table"),
    )
    if len(cfg.wind_bound) != 3:
        sec.fail("wind_bound", "needs three components")
    if cfg.tw_t_lo > cfg.tw_t_hi:
        sec.fail("tw_t_lo", "window opens after it closes")
    if cfg.tw_waypoint is not None and not 0 <= cfg.tw_waypoint < len(cfg.waypoints):
        sec.fail("tw_waypoint", "not a waypoint index of the flight plan")
    if cfg.entry > cfg.tw_t_lo:
        sec.fail("entry", "sector entry is after the window opens")
    return cfg


def parse_scenario_text(text: str, base_dir: Optional[Path] = None) -> Scenario:
    sections = _read_sections(text)
    aircraft_secs = [s for n, s in sections.items() if n.startswith("aircraft.")]
    single_secs = [sections[n] for n in ("grid", "dynamics", "target", "avoid") if n in sections]
    if aircraft_secs and single_secs:
        raise ScenarioError(f"[{single_secs[0].name}] cannot be combined with aircraft sections",
                            None, single_secs[0].line)
    if not aircraft_secs and "separation" in sections:
        raise ScenarioError("[separation] needs aircraft sections", None, sections["separation"].line)
    run_sec = sections.get("run") or _Section("run", 1)
    run = _run_options(run_sec, bool(aircraft_secs))
    if aircraft_secs:
        if run.oracle or run.reference != "none":
            run_sec.fail("oracle" if run.oracle else "reference", "only available for single-system scenarios")
        aircraft = []
        for sec in aircraft_secs:
            cfg = _aircraft(sec)
            try:
                task = cfg.task(base_dir)
            except FileNotFoundError as exc:
                sec.fail("speed_table", f"file not found: {exc.filename}")
            except (ValueError, ContractError) as exc:
                raise ScenarioError(str(exc), None, sec.line) from None
            if run.t0 is not None and task.entry < run.t0:
                sec.fail("entry", f"sector entry before the horizon start t0={run.t0}")
            aircraft.append(cfg)
        sep = sections.get("separation") or _Section("separation", 1)
        separation = (sep.get("horizontal", HORIZONTAL_SEPARATION), sep.get("vertical", 2000 * FT))
        if min(separation) <= 0:
            sep.fail("horizontal" if separation[0] <= 0 else "vertical", "must be positive")
        return Scenario(run=run, aircraft=tuple(aircraft), separation=separation, base_dir=base_dir)

    for name in ("grid", "dynamics", "target"):
        if name not in sections:
            raise ScenarioError(f"missing section [{name}]")
    gs = sections["grid"]
    try:
        grid = Grid(gs.require("min"), gs.require("max"), gs.require("nodes"))
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc), "nodes", gs.line) from None
    dyn = _dynamics(sections["dynamics"])
    if dyn.dim != grid.ndim:
        sections["dynamics"].fail("model", f"state dimension {dyn.dim} does not match the {grid.ndim}D grid")
    geoms = {}
    for name in ("target", "avoid"):
        if name not in sections:
            continue
        sec = sections[name]
        geom = sec.require("geometry")
        try:
            evaluate_geometry(geom, np.zeros((grid.ndim, 1)))
        except (ValueError, TypeError) as exc:
            sec.fail("geometry", str(exc))
        geoms[name] = geom
    return Scenario(run=run, grid=grid, dynamics=dyn, target=geoms["target"], avoid=geoms.get("avoid"),
                    base_dir=base_dir)


def parse_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc.strerror}") from None
    return parse_scenario_text(text, path.parent)


# --- serialisation --------------------------------------------------------


def _num(v: float) -> str:
    return repr(float(v))


def _vec(v) -> str:
    return ", ".join(_num(x) for x in v)


def _poly_matrix(rows) -> str:
    return "; ".join(", ".join(p.format() for p in r) for r in rows)


def serialize_scenario(sc: Scenario) -> str:
    r = sc.run
    out = ["[run]"]
    if r.t0 is not None:
        out.append(f"t0 = {_num(r.t0)}")
    if r.T is not None:
        out.append(f"T = {_num(r.T)}")
    out += [f"mode = {r.mode}", f"cfl = {_num(r.cfl)}", f"samples = {r.samples}",
            f"record_every = {r.record_every}", f"dissipation = {r.dissipation}", f"reference = {r.reference}",
            f"oracle = {'true' if r.oracle else 'false'}", f"oracle_samples = {r.oracle_samples}"]
    if r.oracle_dt is not None:
        out.append(f"oracle_dt = {_num(r.oracle_dt)}")
    if sc.is_aircraft:
        out += ["", "[separation]", f"horizontal = {_num(sc.separation[0])}",
                f"vertical = {_num(sc.separation[1])}"]
        for a in sc.aircraft:
            out += ["", f"[aircraft.{a.name}]",
                    "waypoints = " + "; ".join(_vec(wp) for wp in a.waypoints),
                    f"entry = {_num(a.entry)}", f"tw_kind = {a.tw_kind}",
                    f"tw_lower = {_num(a.tw_lower)}", f"tw_upper = {_num(a.tw_upper)}",
                    f"tw_t_lo = {_num(a.tw_t_lo)}", f"tw_t_hi = {_num(a.tw_t_hi)}",
                    f"grid_min = {_vec(a.grid_min)}", f"grid_max = {_vec(a.grid_max)}",
                    f"grid_nodes = {', '.join(str(n) for n in a.grid_nodes)}",
                    f"wind_bound = {_vec(a.wind_bound)}", f"gamma_max = {_num(a.gamma_max)}",
                    f"speed_fraction = {_num(a.speed_fraction)}"]
            if a.tw_waypoint is not None:
                out.append(f"tw_waypoint = {a.tw_waypoint}")
            if a.speed_table is not None:
                out.append(f"speed_table = {a.speed_table}")
        return "\n".join(out) + "\n"
    g = sc.grid
    out += ["", "[grid]", f"min = {_vec(g.mins)}", f"max = {_vec(g.maxs)}",
            f"nodes = {', '.join(str(n) for n in g.nodes)}", "", "[dynamics]", f"model = {sc.dynamics.model}"]
    d = sc.dynamics
    if d.model in ("integrator_1d", "double_integrator", "game_2d"):
        out += [f"u_bound = {_num(d.u_bound)}", f"v_bound = {_num(d.v_bound)}"]
    elif d.model == "zero":
        out.append(f"state_dim = {d.state_dim}")
    else:
        out.append("drift = " + "; ".join(p.format() for p in d.drift))
        if d.u_lower:
            out += [f"control = {_poly_matrix(d.control)}", f"u_lower = {_vec(d.u_lower)}",
                    f"u_upper = {_vec(d.u_upper)}"]
        if d.v_lower:
            out += [f"disturbance = {_poly_matrix(d.disturbance)}", f"v_lower = {_vec(d.v_lower)}",
                    f"v_upper = {_vec(d.v_upper)}"]
    out += ["", "[target]", f"geometry = {format_geometry(sc.target)}"]
    if sc.avoid is not None:
        out += ["", "[avoid]", f"geometry = {format_geometry(sc.avoid)}"]
    return "\n".join(out) + "\n"
