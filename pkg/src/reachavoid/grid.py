"""Uniform Cartesian grids, nodal scalar fields and implicit geometry."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence, Union as TUnion

import numpy as np

# Fill value for "no obstacle" fields.
LARGE = 1.0e6


@dataclass(frozen=True)
class Grid:
    """Uniform node-centred grid; node k on axis i sits at ``mins[i] + k * spacing[i]``."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    nodes: tuple[int, ...]

    def __post_init__(self):
        mins = tuple(float(v) for v in np.atleast_1d(self.mins))
        maxs = tuple(float(v) for v in np.atleast_1d(self.maxs))
        nodes = tuple(int(v) for v in np.atleast_1d(self.nodes))
        if not (len(mins) == len(maxs) == len(nodes)):
            raise ValueError("grid bounds and node counts must have equal length")
        for lo, hi, n in zip(mins, maxs, nodes):
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
                raise ValueError(f"grid axis needs finite min < max, got [{lo}, {hi}]")
            if n < 2:
                raise ValueError(f"grid axis needs at least 2 nodes, got {n}")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)
        object.__setattr__(self, "nodes", nodes)

    @property
    def ndim(self) -> int:
        return len(self.nodes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.nodes

    @property
    def size(self) -> int:
        return int(np.prod(self.nodes))

    @property
    def spacing(self) -> np.ndarray:
        return np.array([(hi - lo) / (n - 1) for lo, hi, n in zip(self.mins, self.maxs, self.nodes)])

    @property
    def axes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, n) for lo, hi, n in zip(self.mins, self.maxs, self.nodes)]

    @cached_property
    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``(ndim, *shape)``."""
        pts = np.stack(np.meshgrid(*self.axes, indexing="ij"))
        pts.flags.writeable = False
        return pts

    def points(self) -> np.ndarray:
        """Node coordinates as an ``(size, ndim)`` array in row-major order."""
        return self.coords.reshape(self.ndim, -1).T.copy()

    def fill(self, value: float) -> "ScalarField":
        return ScalarField(self, np.full(self.shape, float(value)))


@dataclass(frozen=True)
class ScalarField:
    """Finite nodal values on a grid, stored read-only in row-major order."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(self.grid.shape)
        if not np.all(np.isfinite(vals)):
            raise ValueError("scalar field contains non-finite values")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.grid, -self.values)

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


def _check_same_grid(a: ScalarField, b: ScalarField):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def field_max(a: ScalarField, b: ScalarField) -> ScalarField:
    _check_same_grid(a, b)
    return ScalarField(a.grid, np.maximum(a.values, b.values))


def field_min(a: ScalarField, b: ScalarField) -> ScalarField:
    _check_same_grid(a, b)
    return ScalarField(a.grid, np.minimum(a.values, b.values))


# --- geometry -------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"box bounds must be ordered and equal length: {lo}, {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)


@dataclass(frozen=True)
class Cylinder:
    """Finite cylinder: extent ``half_height`` along ``axis``, disc of ``radius`` in the other axes."""

    axis: int
    center: tuple[float, ...]
    radius: float
    half_height: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))
        object.__setattr__(self, "axis", int(self.axis))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "half_height", float(self.half_height))
        if self.radius < 0 or self.half_height < 0:
            raise ValueError("cylinder radius and half height must be non-negative")


@dataclass(frozen=True)
class Union:
    parts: tuple["Geometry", ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))


@dataclass(frozen=True)
class Intersection:
    parts: tuple["Geometry", ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))


@dataclass(frozen=True)
class Complement:
    inner: "Geometry"


Geometry = TUnion[Box, Cylinder, Union, Intersection, Complement]


def _box_sdf(pts: np.ndarray, lower, upper) -> np.ndarray:
    # pts: (ndim, ...)
    lo = np.asarray(lower).reshape((-1,) + (1,) * (pts.ndim - 1))
    hi = np.asarray(upper).reshape(lo.shape)
    q = np.maximum(lo - pts, pts - hi)
    outside = np.sqrt(np.sum(np.maximum(q, 0.0) ** 2, axis=0))
    inside = np.minimum(np.max(q, axis=0), 0.0)
    return outside + inside


def _cylinder_sdf(pts: np.ndarray, cyl: Cylinder) -> np.ndarray:
    c = np.asarray(cyl.center).reshape((-1,) + (1,) * (pts.ndim - 1))
    rel = pts - c
    other = [i for i in range(pts.shape[0]) if i != cyl.axis]
    radial = np.sqrt(np.sum(rel[other] ** 2, axis=0)) - cyl.radius
    vertical = np.abs(rel[cyl.axis]) - cyl.half_height
    q = np.stack([radial, vertical])
    return np.sqrt(np.sum(np.maximum(q, 0.0) ** 2, axis=0)) + np.minimum(np.max(q, axis=0), 0.0)


def evaluate_geometry(geom: Geometry, pts: np.ndarray) -> np.ndarray:
    """Level-set values of ``geom`` at points of shape ``(ndim, ...)``."""
    ndim = pts.shape[0]
    if isinstance(geom, Box):
        if len(geom.lower) != ndim:
            raise ValueError(f"box has dimension {len(geom.lower)}, grid has {ndim}")
        return _box_sdf(pts, geom.lower, geom.upper)
    if isinstance(geom, Cylinder):
        if len(geom.center) != ndim or not 0 <= geom.axis < ndim:
            raise ValueError("cylinder is inconsistent with grid dimension")
        return _cylinder_sdf(pts, geom)
    if isinstance(geom, (Union, Intersection)):
        if not geom.parts:
            raise ValueError(f"empty {type(geom).__name__.lower()}")
        combine = np.minimum if isinstance(geom, Union) else np.maximum
        out = evaluate_geometry(geom.parts[0], pts)
        for part in geom.parts[1:]:
            out = combine(out, evaluate_geometry(part, pts))
        return out
    if isinstance(geom, Complement):
        return -evaluate_geometry(geom.inner, pts)
    raise TypeError(f"unknown geometry {geom!r}")


def implicit_field(grid: Grid, geom: Geometry) -> ScalarField:
    """Nodal level-set function of ``geom``: <= 0 inside, > 0 outside."""
    return ScalarField(grid, evaluate_geometry(geom, grid.coords))


# --- interpolation and differences ----------------------------------------


def interpolate_values(grid: Grid, values: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of nodal ``values`` at ``pts`` of shape ``(N, ndim)``.

    Queries outside the grid are clamped onto the boundary.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    dx = grid.spacing
    idx0 = []
    weights = []
    for i in range(grid.ndim):
        n = grid.nodes[i]
        u = (np.clip(pts[:, i], grid.mins[i], grid.maxs[i]) - grid.mins[i]) / dx[i]
        k = np.clip(np.floor(u).astype(np.int64), 0, n - 2)
        idx0.append(k)
        weights.append(np.clip(u - k, 0.0, 1.0))
    out = np.zeros(len(pts))
    for corner in np.ndindex(*(2,) * grid.ndim):
        w = np.ones(len(pts))
        index = []
        for i, bit in enumerate(corner):
            w = w * (weights[i] if bit else 1.0 - weights[i])
            index.append(idx0[i] + bit)
        out += w * values[tuple(index)]
    return out


def interpolate(fld: ScalarField, x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if x.shape[1] != fld.grid.ndim:
        raise ValueError("query point dimension does not match grid")
    return float(interpolate_values(fld.grid, fld.values, x)[0])


def one_sided_values(values: np.ndarray, axis: int, dx: float) -> tuple[np.ndarray, np.ndarray]:
    """Backward and forward differences along ``axis`` with one-sided extrapolation at the ends."""
    diff = np.diff(values, axis=axis) / dx
    n = values.shape[axis]
    first = [slice(None)] * values.ndim
    last = [slice(None)] * values.ndim
    first[axis] = slice(0, 1)
    last[axis] = slice(n - 2, n - 1)
    dminus = np.concatenate([diff[tuple(first)], diff], axis=axis)
    dplus = np.concatenate([diff, diff[tuple(last)]], axis=axis)
    return dminus, dplus


def one_sided_derivatives(fld: ScalarField, axis: int) -> tuple[ScalarField, ScalarField]:
    dm, dp = one_sided_values(fld.values, axis, fld.grid.spacing[axis])
    return ScalarField(fld.grid, dm), ScalarField(fld.grid, dp)


# --- CSV ------------------------------------------------------------------


def write_field_csv(fld: ScalarField, path: str | Path) -> Path:
    path = Path(path)
    grid = fld.grid
    header = [f"axis{i}" for i in range(grid.ndim)] + ["value"]
    rows = np.column_stack([grid.points(), fld.flat()])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return path


def read_field_csv(path: str | Path) -> ScalarField:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader if row])
    ndim = len(header) - 1
    axes = [np.unique(data[:, i]) for i in range(ndim)]
    grid = Grid(tuple(a[0] for a in axes), tuple(a[-1] for a in axes), tuple(len(a) for a in axes))
    if len(data) != grid.size:
        raise ValueError(f"{path}: expected {grid.size} rows, found {len(data)}")
    return ScalarField(grid, data[:, -1])
