"""Explicit backward integration of the reach-avoid variational inequalities.

``terminal`` mode integrates ``max{h - V, V_t + H} = 0`` and ``anytime`` mode
the same inequality with the frozen Hamiltonian ``min{0, H}``.  The obstacle
is enforced by masking ``V <- max(V, h)`` after each Lax-Friedrichs step.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import ContractError, DynamicsSpec, per_axis_speed_bound
from .grid import Grid, ScalarField, field_max, one_sided_values
from .hamiltonian import HamiltonianSpec, hamiltonian_slope_bound, lax_friedrichs_values

log = logging.getLogger(__name__)

SOLVER_MODES = {"terminal": "standard", "anytime": "frozen"}
# Relative slack when landing on a breakpoint or comparing times.
TIME_EPS = 1e-9

ObstacleFn = Callable[[float, ScalarField], ScalarField]


class NumericalError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveOptions:
    cfl_number: float = 0.5
    record_every: int = 1
    mode: str = "terminal"
    samples_per_input_axis: int = 3
    workers: int = 1
    # Extra times the integrator lands on exactly and always records.
    breakpoints: tuple[float, ...] = ()
    # Fixed step; defaults to the CFL step.
    dt: Optional[float] = None
    # Lax-Friedrichs coefficients: "hamiltonian" uses max |dH/dp_i|, "speed" uses max |f_i|.
    dissipation: str = "hamiltonian"

    def __post_init__(self):
        if not 0 < self.cfl_number <= 1:
            raise ContractError("cfl_number must lie in (0, 1]")
        if self.record_every < 1:
            raise ContractError("record_every must be >= 1")
        if self.mode not in SOLVER_MODES:
            raise ContractError(f"mode must be one of {tuple(SOLVER_MODES)}")
        if self.workers < 1:
            raise ContractError("workers must be >= 1")
        if self.dt is not None and not self.dt > 0:
            raise ContractError("dt must be positive")
        if self.dissipation not in ("hamiltonian", "speed"):
            raise ContractError("dissipation must be 'hamiltonian' or 'speed'")
        object.__setattr__(self, "breakpoints", tuple(float(t) for t in self.breakpoints))


@dataclass
class ValueTube:
    """Value fields recorded at descending times."""

    grid: Grid
    times: list[float] = field(default_factory=list)
    fields: list[ScalarField] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    steps: int = 0

    def record(self, t: float, fld: ScalarField):
        if self.times and not t < self.times[-1]:
            raise ValueError("tube times must be strictly descending")
        self.times.append(float(t))
        self.fields.append(fld)

    @property
    def t_start(self) -> float:
        return self.times[-1]

    @property
    def t_end(self) -> float:
        return self.times[0]

    def covers(self, t: float) -> bool:
        span = max(abs(self.t_end), abs(self.t_start), 1.0)
        return bool(self.times) and self.t_start - TIME_EPS * span <= t <= self.t_end + TIME_EPS * span

    def index_of(self, t: float) -> Optional[int]:
        span = max(abs(t), 1.0)
        for k, tk in enumerate(self.times):
            if abs(tk - t) <= TIME_EPS * span:
                return k
        return None

    def at(self, t: float) -> ScalarField:
        """Field at ``t``, linearly interpolated between bracketing records."""
        if not self.covers(t):
            raise ValueError(f"time {t} outside tube [{self.t_start}, {self.t_end}]")
        k = self.index_of(t)
        if k is not None:
            return self.fields[k]
        times = np.array(self.times)
        k = int(np.searchsorted(-times, -t))  # first record with time < t
        t_hi, t_lo = times[k - 1], times[k]
        w = (t - t_lo) / (t_hi - t_lo)
        return ScalarField(self.grid, w * self.fields[k - 1].values + (1 - w) * self.fields[k].values)

    def final(self) -> ScalarField:
        return self.fields[-1]


def cfl_dt(grid: Grid, alpha, cfl_number: float, horizon: Optional[float] = None) -> float:
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0):
        raise ContractError("speed bounds must be non-negative")
    moving = alpha > 0
    if not np.any(moving):
        if horizon is None:
            return float("inf")
        return float(horizon)
    return float(cfl_number * np.min(grid.spacing[moving] / alpha[moving]))


def time_grid(T: float, t0: float, dt: float, breakpoints: Sequence[float] = ()) -> list[float]:
    """Descending times from ``T`` to ``t0`` landing on every breakpoint in between.

    Within each interval steps of ``dt`` are taken from the top and the last
    step is shortened to land on the interval end.
    """
    if t0 > T:
        raise ContractError(f"horizon start {t0} after end {T}")
    stops = sorted({float(b) for b in breakpoints if t0 < b < T} | {float(t0)}, reverse=True)
    times = [float(T)]
    top = float(T)
    for bottom in stops:
        if bottom >= top:
            continue
        k = 1
        while True:
            t = top - k * dt
            if t <= bottom + TIME_EPS * dt:
                times.append(bottom)
                break
            times.append(t)
            k += 1
        top = bottom
    return times


def _chunks(n: int, workers: int) -> list[slice]:
    edges = np.linspace(0, n, min(workers, n) + 1).astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def pde_update(V_next: ScalarField, spec: HamiltonianSpec, dt: float, alpha: np.ndarray,
               workers: int = 1, pool: Optional[ThreadPoolExecutor] = None) -> np.ndarray:
    """Unmasked explicit Euler step of ``V_t + H = 0`` from ``t`` to ``t - dt``.

    In backward time the equation reads ``V_s - H = 0``, so the monotone
    update is ``V - dt * LF[-H]``.  Frozen mode never lets the value rise.
    """
    grid = V_next.grid
    dx = grid.spacing
    vals = V_next.values
    derivs = [one_sided_values(vals, i, dx[i]) for i in range(grid.ndim)]
    dm = np.stack([d[0] for d in derivs]).reshape(grid.ndim, -1)
    dp = np.stack([d[1] for d in derivs]).reshape(grid.ndim, -1)
    x = grid.coords.reshape(grid.ndim, -1)

    def work(sl: slice) -> np.ndarray:
        return lax_friedrichs_values(spec, dm[:, sl], dp[:, sl], x[:, sl], alpha, reverse=True)

    slices = _chunks(grid.size, workers)
    if len(slices) > 1:
        if pool is None:
            with ThreadPoolExecutor(len(slices)) as ex:
                parts = list(ex.map(work, slices))
        else:
            parts = list(pool.map(work, slices))
        hhat = np.concatenate(parts)
    else:
        hhat = work(slice(None))
    if spec.mode == "frozen":
        hhat = np.maximum(hhat, 0.0)
    return vals - dt * hhat.reshape(grid.shape)


def check_cfl(grid: Grid, alpha, dt: float):
    """Monotonicity limit of the explicit scheme: ``dt * sum_i alpha_i / dx_i <= 1``."""
    rate = float(np.sum(np.asarray(alpha, dtype=float) / grid.spacing))
    if dt * rate > 1 + TIME_EPS:
        raise ContractError(f"time step {dt} violates CFL limit {1 / rate}")


def step_backward(V_next: ScalarField, h: ScalarField, spec: HamiltonianSpec, dt: float,
                  alpha=None, workers: int = 1) -> ScalarField:
    """One masked step from ``t`` to ``t - dt``; ``alpha`` are the dissipation coefficients."""
    if V_next.grid != h.grid:
        raise ValueError("value and obstacle fields live on different grids")
    if alpha is None:
        alpha = per_axis_speed_bound(spec.dyn, V_next.grid, spec.samples_per_input_axis)
    alpha = np.asarray(alpha, dtype=float)
    check_cfl(V_next.grid, alpha, dt)
    new = pde_update(V_next, spec, dt, alpha, workers)
    if not np.all(np.isfinite(new)):
        raise NumericalError("non-finite value after step")
    return ScalarField(V_next.grid, np.maximum(new, h.values))


def boundary_touched(fld: ScalarField) -> bool:
    vals = fld.values
    for axis in range(vals.ndim):
        if np.any(np.take(vals, 0, axis=axis) <= 0) or np.any(np.take(vals, -1, axis=axis) <= 0):
            return True
    return False


def _as_obstacle_fn(h) -> ObstacleFn:
    if isinstance(h, ScalarField):
        return lambda t, candidate: h
    return h


def dissipation_coefficients(spec: HamiltonianSpec, grid: Grid, opts: SolveOptions,
                             speed: np.ndarray) -> np.ndarray:
    if opts.dissipation == "speed":
        return speed
    return np.minimum(hamiltonian_slope_bound(spec, grid), speed)


def solve(dyn: DynamicsSpec, l: ScalarField, h, T: float, t0: float,
          opts: SolveOptions = SolveOptions(), alpha=None) -> ValueTube:
    """Integrate from ``V(., T) = max(l, h)`` back to ``t0``.

    ``h`` is a static obstacle field or a callable ``h(t, candidate)`` that
    returns the obstacle at time ``t`` given the unmasked field there.
    """
    if t0 > T:
        raise ContractError(f"horizon start {t0} after end {T}")
    grid = l.grid
    obstacle = _as_obstacle_fn(h)
    spec = HamiltonianSpec(dyn, opts.samples_per_input_axis, SOLVER_MODES[opts.mode])
    speed = per_axis_speed_bound(dyn, grid, opts.samples_per_input_axis)
    if alpha is None:
        alpha = dissipation_coefficients(spec, grid, opts, speed)
    alpha = np.asarray(alpha, dtype=float)
    dt = opts.dt if opts.dt is not None else cfl_dt(grid, speed, opts.cfl_number, T - t0)
    check_cfl(grid, alpha, dt)

    tube = ValueTube(grid)
    h_T = obstacle(T, l)
    V = field_max(l, h_T)
    tube.record(T, V)
    if T == t0:
        return tube

    times = time_grid(T, t0, dt, opts.breakpoints)
    forced = set(opts.breakpoints)
    warned = False
    pool = ThreadPoolExecutor(opts.workers) if opts.workers > 1 else None
    try:
        for k, (t_hi, t_lo) in enumerate(zip(times[:-1], times[1:]), 1):
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    new = pde_update(V, spec, t_hi - t_lo, alpha, opts.workers, pool)
            except FloatingPointError as exc:
                raise NumericalError(f"{exc} at t={t_lo}") from exc
            if not np.all(np.isfinite(new)):
                bad = int(np.sum(~np.isfinite(new)))
                raise NumericalError(f"{bad} non-finite values at t={t_lo}")
            candidate = ScalarField(grid, new)
            V = field_max(candidate, obstacle(t_lo, candidate))
            tube.steps += 1
            if k % opts.record_every == 0 or t_lo == t0 or t_lo in forced:
                tube.record(t_lo, V)
            if not warned and boundary_touched(V):
                warned = True
                msg = f"zero sublevel set reaches the grid boundary at t={t_lo}"
                tube.warnings.append(msg)
                log.warning(msg)
    finally:
        if pool is not None:
            pool.shutdown()
    return tube
