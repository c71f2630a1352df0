"""Reach-avoid sets, Target Windows and the multi-aircraft sweep with conflict detection.

Each aircraft is solved on its own 2D grid over ``(S, z)``: cumulative
along-track distance and altitude.  A Target Window is reached in two stages:
the anytime (frozen) problem on the window ``[t_lo, t_hi]`` and the terminal
problem from ``t_lo`` back to sector entry.  While sweeping backward, every
pair of aircraft in the sector is checked for loss of separation between
their current reach-avoid sets and the conflicting states become a box
obstacle for the next step.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree
from skimage import measure

from .aircraft import FT, NMI, AircraftModel, aircraft_dynamics, along_track_to_3d
from .dynamics import ContractError, per_axis_speed_bound
from .grid import LARGE, Box, Grid, ScalarField, evaluate_geometry, field_max, implicit_field
from .hamiltonian import HamiltonianSpec
from .vi_solver import (NumericalError, SolveOptions, ValueTube, cfl_dt, check_cfl,
                        dissipation_coefficients, pde_update, time_grid)

log = logging.getLogger(__name__)

# Protected zone: 5 nmi radius, 2000 ft tall cylinder centred on the aircraft.
HORIZONTAL_SEPARATION = 5 * NMI
VERTICAL_SEPARATION = 1000 * FT

TW_KINDS = ("adjacent", "superimposed")


# --- sublevel sets --------------------------------------------------------


class SublevelSet(NamedTuple):
    mask: np.ndarray
    # Polylines in physical coordinates, shape (k, ndim) each.
    contours: list


def sublevel_set(fld: ScalarField, level: float = 0.0) -> SublevelSet:
    """Nodes with value ``<= level`` plus the ``level`` contour.

    1D fields give crossing points, 2D fields marching-squares polylines, and
    higher dimensions polylines on every 2D slice over the first two axes.
    """
    vals = fld.values
    mask = vals <= level
    grid = fld.grid
    if not np.isfinite(level):
        return SublevelSet(mask, [])
    if grid.ndim == 1:
        x = grid.axes[0]
        d = vals - level
        out = []
        for k in np.nonzero((d[:-1] <= 0) != (d[1:] <= 0))[0]:
            w = d[k] / (d[k] - d[k + 1]) if d[k] != d[k + 1] else 0.0
            out.append(np.array([[x[k] + w * (x[k + 1] - x[k])]]))
        return SublevelSet(mask, out)
    mins = np.asarray(grid.mins[:2])
    dx = grid.spacing[:2]
    out = []
    for rest in np.ndindex(*grid.shape[2:]):
        plane = vals[(slice(None), slice(None)) + rest]
        if plane.min() > level or plane.max() < level:
            continue
        fixed = [grid.axes[2 + i][k] for i, k in enumerate(rest)]
        for c in measure.find_contours(plane, level):
            xy = mins + c * dx
            out.append(np.column_stack([xy] + [np.full(len(c), f) for f in fixed]))
    return SublevelSet(mask, out)


# --- Target Windows -------------------------------------------------------


@dataclass(frozen=True)
class TargetWindow:
    """Spatial box around a waypoint plus a time window.

    ``adjacent`` windows fix ``S`` at the waypoint and span altitudes
    ``z_wp + [lower, upper]``; ``superimposed`` windows fix ``z`` at the
    waypoint altitude and span ``S_wp + [lower, upper]``.
    """

    kind: str
    center_waypoint: int
    lower: float
    upper: float
    t_lo: float
    t_hi: float

    def __post_init__(self):
        if self.kind not in TW_KINDS:
            raise ContractError(f"target window kind must be one of {TW_KINDS}")
        if not self.lower <= self.upper:
            raise ContractError("target window spatial bounds are not ordered")
        if not self.t_lo <= self.t_hi:
            raise ContractError("target window needs t_lo <= t_hi")


def target_box(model: AircraftModel, tw: TargetWindow, grid: Grid) -> Box:
    """Box in ``(S, z)``; the pinned coordinate gets a half-cell band so the grid can see it."""
    if not 0 <= tw.center_waypoint < len(model.waypoints):
        raise ContractError(f"target window waypoint {tw.center_waypoint} not in flight plan")
    S_wp = float(model.cumulative[tw.center_waypoint])
    z_wp = float(model.waypoints[tw.center_waypoint][2])
    half = grid.spacing / 2
    if tw.kind == "adjacent":
        return Box((S_wp - half[0], z_wp + tw.lower), (S_wp + half[0], z_wp + tw.upper))
    return Box((S_wp + tw.lower, z_wp - half[1]), (S_wp + tw.upper, z_wp + half[1]))


# --- conflicts ------------------------------------------------------------


@dataclass(frozen=True)
class ConflictSlice:
    """States of aircraft ``j`` in conflict with aircraft ``i`` at time ``t``."""

    t: float
    j: int
    i: int
    mask: np.ndarray = field(repr=False)
    box: Optional[Box]


def conflict_mask(model_j: AircraftModel, grid_j: Grid, inside_j: np.ndarray,
                  model_i: AircraftModel, grid_i: Grid, inside_i: np.ndarray,
                  horizontal: float = HORIZONTAL_SEPARATION,
                  vertical: float = VERTICAL_SEPARATION) -> np.ndarray:
    """Nodes of ``inside_j`` within the protected zone of some node of ``inside_i``.

    Horizontal position depends only on ``S`` (axis 0), so the range query
    runs over grid columns and the vertical test over altitude nodes.
    """
    out = np.zeros(grid_j.shape, dtype=bool)
    if not inside_j.any() or not inside_i.any():
        return out
    S_j, z_j = grid_j.axes
    S_i, z_i = grid_i.axes
    occupied = np.nonzero(inside_i.any(axis=1))[0]
    xy_i = along_track_to_3d(model_i, S_i[occupied], 0.0)[:2].T
    xy_j = along_track_to_3d(model_j, S_j, 0.0)[:2].T
    close = np.abs(z_i[:, None] - z_j[None, :]) <= vertical
    # near[b, k]: some occupied altitude in column occupied[b] is vertically within range of z_j[k]
    near = (inside_i[occupied].astype(np.int64) @ close.astype(np.int64)) > 0
    tree = cKDTree(xy_i)
    rows = np.nonzero(inside_j.any(axis=1))[0]
    for a, hits in zip(rows, tree.query_ball_point(xy_j[rows], r=horizontal)):
        if hits:
            out[a] = inside_j[a] & near[hits].any(axis=0)
    return out


def bounding_box(grid: Grid, mask: np.ndarray, inflate: int = 1) -> Optional[Box]:
    """Axis-aligned box around the masked nodes, grown by ``inflate`` cells."""
    if not mask.any():
        return None
    idx = np.nonzero(mask)
    pad = inflate * grid.spacing
    lo = [grid.axes[k][idx[k].min()] - pad[k] for k in range(grid.ndim)]
    hi = [grid.axes[k][idx[k].max()] + pad[k] for k in range(grid.ndim)]
    return Box(tuple(lo), tuple(hi))


def obstacle_field(mask: np.ndarray, grid: Grid) -> ScalarField:
    """``h`` positive exactly inside the inflated bounding box of ``mask``; ``-LARGE`` if empty."""
    box = bounding_box(grid, mask)
    if box is None:
        return grid.fill(-LARGE)
    return ScalarField(grid, -evaluate_geometry(box, grid.coords))


def combine_obstacles(grid: Grid, fields: Sequence[ScalarField]) -> ScalarField:
    out = grid.fill(-LARGE)
    for f in fields:
        out = field_max(out, f)
    return out


def conflict_detect(tube_j: ValueTube, tube_i: ValueTube, models: tuple[AircraftModel, AircraftModel],
                    t: float, j: int = 0, i: int = 1) -> ConflictSlice:
    """Conflict states of ``j`` against ``i`` using both tubes at ``t`` (linear in time)."""
    for tube in (tube_j, tube_i):
        if not tube.covers(t):
            raise ContractError(f"tube does not cover t={t}")
    inside_j = tube_j.at(t).values <= 0
    inside_i = tube_i.at(t).values <= 0
    mask = conflict_mask(models[0], tube_j.grid, inside_j, models[1], tube_i.grid, inside_i)
    return ConflictSlice(t, j, i, mask, bounding_box(tube_j.grid, mask))


# --- two-stage pipeline ---------------------------------------------------


@dataclass(frozen=True)
class AircraftTask:
    """One aircraft of a multi-aircraft run: plan, grid, window and sector entry time."""

    model: AircraftModel
    grid: Grid
    tw: TargetWindow
    entry: float
    name: str = ""

    def __post_init__(self):
        if self.grid.ndim != 2:
            raise ContractError("aircraft grids are 2D over (S, z)")
        if self.entry > self.tw.t_lo:
            raise ContractError(f"aircraft {self.name!r} enters the sector after its window opens")


@dataclass
class ReachAvoidResult:
    task: AircraftTask
    stage1: ValueTube
    stage2: ValueTube
    # Obstacle field at each recorded time, aligned with the tube fields.
    obstacles1: list = field(default_factory=list)
    obstacles2: list = field(default_factory=list)
    conflicts: list = field(default_factory=list)

    def tube(self) -> ValueTube:
        """Both stages as one tube from ``t_hi`` down to entry (the handoff frame appears once)."""
        out = ValueTube(self.stage1.grid, warnings=self.stage1.warnings + self.stage2.warnings,
                        steps=self.stage1.steps + self.stage2.steps)
        for t, f in zip(self.stage1.times, self.stage1.fields):
            out.record(t, f)
        for t, f in zip(self.stage2.times[1:], self.stage2.fields[1:]):
            out.record(t, f)
        return out

    def obstacles(self) -> list:
        return self.obstacles1 + self.obstacles2[1:]

    def masks(self) -> list:
        return [f.values <= 0 for f in self.tube().fields]


class Intruder(NamedTuple):
    """Precomputed aircraft whose tube acts as a moving obstacle."""

    model: AircraftModel
    tube: ValueTube


class _Agent:
    def __init__(self, index: int, task: AircraftTask, opts: SolveOptions):
        self.index = index
        self.task = task
        self.dyn = aircraft_dynamics(task.model)
        self.frozen = HamiltonianSpec(self.dyn, opts.samples_per_input_axis, "frozen")
        self.standard = HamiltonianSpec(self.dyn, opts.samples_per_input_axis, "standard")
        self.speed = per_axis_speed_bound(self.dyn, task.grid, opts.samples_per_input_axis)
        self.alpha = dissipation_coefficients(self.standard, task.grid, opts, self.speed)
        self.target = implicit_field(task.grid, target_box(task.model, task.tw, task.grid))
        self.V: Optional[ScalarField] = None
        self.steps = 0
        self.warned = False
        self.result = ReachAvoidResult(task, ValueTube(task.grid), ValueTube(task.grid))

    def in_sector(self, t: float) -> bool:
        return self.task.entry <= t <= self.task.tw.t_hi

    def candidate(self, t_hi: float, t_lo: float, workers: int, pool) -> ScalarField:
        if self.V is None:
            return self.target
        spec = self.frozen if t_lo >= self.task.tw.t_lo else self.standard
        new = pde_update(self.V, spec, t_hi - t_lo, self.alpha, workers, pool)
        if not np.all(np.isfinite(new)):
            raise NumericalError(f"aircraft {self.index}: non-finite values at t={t_lo}")
        return ScalarField(self.task.grid, new)

    def accept(self, t: float, V: ScalarField, h: ScalarField, record_every: int):
        tw = self.task.tw
        first = self.V is None
        self.V = V
        res = self.result
        forced = first or t == tw.t_lo or t == self.task.entry
        if not first:
            self.steps += 1
            (res.stage1 if t >= tw.t_lo else res.stage2).steps += 1
        if t >= tw.t_lo:
            if forced or self.steps % record_every == 0:
                res.stage1.record(t, V)
                res.obstacles1.append(h)
        else:
            if forced or self.steps % record_every == 0:
                res.stage2.record(t, V)
                res.obstacles2.append(h)
        if t == tw.t_lo:
            # Stage 2 terminal condition max(V~(t_lo), h(t_lo)); V is already masked with h.
            res.stage2.record(t, field_max(V, h))
            res.obstacles2.append(h)
        if not self.warned and _touches_boundary(V):
            self.warned = True
            msg = f"aircraft {self.index}: reach-avoid set reaches the grid boundary at t={t}"
            (res.stage1 if t >= tw.t_lo else res.stage2).warnings.append(msg)
            log.warning(msg)


def _touches_boundary(fld: ScalarField) -> bool:
    v = fld.values <= 0
    return bool(v[0].any() or v[-1].any() or v[:, 0].any() or v[:, -1].any())


@dataclass(frozen=True)
class SweepPlan:
    T: float
    t0: float
    dt: float
    times: tuple[float, ...]


def plan_sweep(tasks: Sequence[AircraftTask], opts: SolveOptions, dt: Optional[float] = None,
               extra_breakpoints: Sequence[float] = (), t0: Optional[float] = None) -> SweepPlan:
    """Shared time axis: from the latest window close down to the earliest sector entry.

    The step is the smallest CFL step over all aircraft and the grid lands
    exactly on every window edge and entry time.
    """
    if not tasks:
        raise ContractError("need at least one aircraft")
    T = max(t.tw.t_hi for t in tasks)
    start = min(t.entry for t in tasks) if t0 is None else float(t0)
    for task in tasks:
        if task.entry < start or task.tw.t_hi > T:
            raise ContractError(f"aircraft {task.name!r} has its window outside [{start}, {T}]")
    if dt is None:
        dt = opts.dt
    if dt is None:
        steps = []
        for task in tasks:
            dyn = aircraft_dynamics(task.model)
            speed = per_axis_speed_bound(dyn, task.grid, opts.samples_per_input_axis)
            steps.append(cfl_dt(task.grid, speed, opts.cfl_number, T - start))
        dt = min(steps)
    marks = set(opts.breakpoints) | set(extra_breakpoints)
    for task in tasks:
        marks |= {task.tw.t_lo, task.tw.t_hi, task.entry}
    return SweepPlan(T, start, dt, tuple(time_grid(T, start, dt, sorted(marks))))


def _detect(agents: Sequence[_Agent], cands: dict, intruders: Sequence[Intruder], t: float,
            hsep: float, vsep: float) -> tuple[dict, list]:
    inside = {a.index: cands[a.index].values <= 0 for a in agents if a.index in cands}
    obstacles = {}
    events = []
    for a in agents:
        if a.index not in cands:
            continue
        parts = []
        for b in agents:
            if b is a or b.index not in cands:
                continue
            m = conflict_mask(a.task.model, a.task.grid, inside[a.index],
                              b.task.model, b.task.grid, inside[b.index], hsep, vsep)
            if m.any():
                events.append(ConflictSlice(t, a.index, b.index, m, bounding_box(a.task.grid, m)))
                parts.append(obstacle_field(m, a.task.grid))
        for k, intr in enumerate(intruders):
            if not intr.tube.covers(t):
                continue
            m = conflict_mask(a.task.model, a.task.grid, inside[a.index],
                              intr.model, intr.tube.grid, intr.tube.at(t).values <= 0, hsep, vsep)
            if m.any():
                events.append(ConflictSlice(t, a.index, -1 - k, m, bounding_box(a.task.grid, m)))
                parts.append(obstacle_field(m, a.task.grid))
        obstacles[a.index] = combine_obstacles(a.task.grid, parts)
    return obstacles, events


def _sweep(tasks: Sequence[AircraftTask], opts: SolveOptions, plan: SweepPlan,
           intruders: Sequence[Intruder] = (), hsep: float = HORIZONTAL_SEPARATION,
           vsep: float = VERTICAL_SEPARATION) -> tuple[list[ReachAvoidResult], list[ConflictSlice]]:
    agents = [_Agent(k, task, opts) for k, task in enumerate(tasks)]
    for a in agents:
        check_cfl(a.task.grid, a.alpha, plan.dt)
    events: list[ConflictSlice] = []
    pool = ThreadPoolExecutor(opts.workers) if opts.workers > 1 else None
    try:
        prev = None
        for t in plan.times:
            cands = {}
            for a in agents:
                if not a.in_sector(t):
                    continue
                cands[a.index] = a.candidate(prev, t, opts.workers, pool)
            obstacles, found = _detect(agents, cands, intruders, t, hsep, vsep)
            events.extend(found)
            for a in agents:
                if a.index in cands:
                    h = obstacles[a.index]
                    a.accept(t, field_max(cands[a.index], h), h, opts.record_every)
                    if found:
                        a.result.conflicts.extend(e for e in found if e.j == a.index)
            prev = t
    finally:
        if pool is not None:
            pool.shutdown()
    return [a.result for a in agents], events


def two_stage_tw(model: AircraftModel, grid: Grid, tw: TargetWindow, entry: float,
                 intruders: Sequence[Intruder] = (), opts: SolveOptions = SolveOptions(),
                 horizon: Optional[float] = None) -> ReachAvoidResult:
    """Stage 1 (anytime problem on the window) then Stage 2 (terminal problem back to entry).

    Intruder tubes are fixed; their reach-avoid sets act as a moving obstacle.
    """
    if horizon is not None and tw.t_hi > horizon:
        raise ContractError(f"window closes at {tw.t_hi}, after the horizon {horizon}")
    task = AircraftTask(model, grid, tw, entry)
    plan = plan_sweep([task], opts)
    results, _ = _sweep([task], opts, plan, intruders)
    return results[0]


@dataclass
class Algorithm1Result:
    plan: SweepPlan
    results: list[ReachAvoidResult]
    conflicts: list[ConflictSlice]


def run_algorithm1(tasks: Sequence[AircraftTask], opts: SolveOptions = SolveOptions(),
                   dt: Optional[float] = None, extra_breakpoints: Sequence[float] = (),
                   t0: Optional[float] = None, horizontal: float = HORIZONTAL_SEPARATION,
                   vertical: float = VERTICAL_SEPARATION) -> Algorithm1Result:
    """Single backward sweep over all aircraft with per-step conflict detection.

    ``dt`` and ``extra_breakpoints`` pin the time axis, which lets separate
    runs reproduce the time steps of a joint one.
    """
    plan = plan_sweep(tasks, opts, dt, extra_breakpoints, t0)
    results, events = _sweep(tasks, opts, plan, (), horizontal, vertical)
    return Algorithm1Result(plan, results, events)


def format_conflict_report(events: Sequence[ConflictSlice]) -> str:
    """One line per event: ``t j i S_lo S_hi z_lo z_hi nodes``."""
    lines = ["# t j i S_lo S_hi z_lo z_hi nodes"]
    for e in events:
        b = e.box
        lines.append(f"{e.t:.17g} {e.j} {e.i} {b.lower[0]:.17g} {b.upper[0]:.17g} "
                     f"{b.lower[1]:.17g} {b.upper[1]:.17g} {int(e.mask.sum())}")
    return "\n".join(lines) + "\n"
