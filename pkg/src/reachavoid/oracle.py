"""Brute-force dynamic programming on the grid, used as ground truth for the PDE solver.

One step of the recursion is

    V_k(x) = max(h(x), max_v min_u V_{k+1}(x + dt f(x, u, v)))

with multilinear lookups.  In anytime mode the controller may also freeze,
which adds ``V_{k+1}(x)`` to the inner minimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ContractError, DynamicsSpec
from .grid import ScalarField, field_max, interpolate_values
from .vi_solver import TIME_EPS, ValueTube


@dataclass(frozen=True)
class OracleOptions:
    dt: float
    control_samples: int = 3
    disturbance_samples: int = 3
    mode: str = "terminal"

    def __post_init__(self):
        if not self.dt > 0:
            raise ContractError("oracle dt must be positive")
        if self.mode not in ("terminal", "anytime"):
            raise ContractError(f"unknown oracle mode {self.mode!r}")


def _n_steps(T: float, t0: float, dt: float) -> int:
    n = int(round((T - t0) / dt))
    if abs(n * dt - (T - t0)) > TIME_EPS * max(abs(T - t0), 1.0) * 1e3:
        raise ContractError(f"oracle dt={dt} does not divide the horizon {T - t0}")
    return n


def dp_solve(dyn: DynamicsSpec, l: ScalarField, h: ScalarField, T: float, t0: float,
             opts: OracleOptions) -> ValueTube:
    if t0 > T:
        raise ContractError(f"horizon start {t0} after end {T}")
    if l.grid != h.grid:
        raise ValueError("target and obstacle fields live on different grids")
    grid = l.grid
    n = _n_steps(T, t0, opts.dt)
    x = grid.coords.reshape(grid.ndim, -1)
    pts_shape = (grid.size, grid.ndim)
    lo = np.asarray(grid.mins)[:, None] - grid.spacing[:, None]
    hi = np.asarray(grid.maxs)[:, None] + grid.spacing[:, None]
    controls = dyn.control.samples(opts.control_samples)
    disturbances = dyn.disturbance.samples(opts.disturbance_samples)
    successors = [[x + opts.dt * np.asarray(dyn.flow(x, u, v), dtype=float) for u in controls]
                  for v in disturbances]

    tube = ValueTube(grid)
    V = field_max(l, h)
    tube.record(T, V)
    escaped = 0
    for k in range(1, n + 1):
        t = T - k * opts.dt if k < n else t0
        prev = V.values
        game = None
        for row in successors:
            inner = None
            for nxt in row:
                if k == 1:
                    escaped += int(np.sum(np.any((nxt < lo) | (nxt > hi), axis=0)))
                val = interpolate_values(grid, prev, nxt.T.reshape(pts_shape))
                inner = val if inner is None else np.minimum(inner, val)
            game = inner if game is None else np.maximum(game, inner)
        if opts.mode == "anytime":
            game = np.minimum(game, prev.reshape(-1))
        V = ScalarField(grid, np.maximum(game.reshape(grid.shape), h.values))
        tube.record(t, V)
        tube.steps += 1
    if escaped:
        tube.warnings.append(f"{escaped} successor states leave the grid by more than one cell (clamped)")
    return tube


def _check_comparable(a: ValueTube, b: ValueTube):
    if a.grid != b.grid:
        raise ValueError("tubes live on different grids")
    if len(a.times) != len(b.times) or not np.allclose(a.times, b.times, rtol=0,
                                                        atol=TIME_EPS * max(1.0, abs(a.times[0]))):
        raise ValueError("tubes are recorded at different times")


def compare_tubes(a: ValueTube, b: ValueTube) -> tuple[float, int]:
    """L-infinity difference and number of node/time pairs whose zero-sublevel membership differs."""
    _check_comparable(a, b)
    linf = 0.0
    mismatch = 0
    for fa, fb in zip(a.fields, b.fields):
        linf = max(linf, float(np.max(np.abs(fa.values - fb.values))))
        mismatch += int(np.sum((fa.values <= 0) != (fb.values <= 0)))
    return linf, mismatch


def contour_band(values: np.ndarray) -> np.ndarray:
    """Nodes with a sign change of ``values <= 0`` within their 3^n neighbourhood."""
    inside = values <= 0
    band = np.zeros_like(inside)
    for offset in np.ndindex(*(3,) * values.ndim):
        shift = tuple(o - 1 for o in offset)
        if not any(shift):
            continue
        src = [slice(None)] * values.ndim
        dst = [slice(None)] * values.ndim
        for ax, s in enumerate(shift):
            if s > 0:
                src[ax], dst[ax] = slice(s, None), slice(None, -s)
            elif s < 0:
                src[ax], dst[ax] = slice(None, s), slice(-s, None)
        band[tuple(dst)] |= inside[tuple(dst)] != inside[tuple(src)]
    return band


def mismatches_outside_band(a: ValueTube, b: ValueTube) -> int:
    """Membership disagreements that are not within one cell of either zero contour."""
    _check_comparable(a, b)
    count = 0
    for fa, fb in zip(a.fields, b.fields):
        diff = (fa.values <= 0) != (fb.values <= 0)
        band = contour_band(fa.values) | contour_band(fb.values)
        count += int(np.sum(diff & ~band))
    return count
