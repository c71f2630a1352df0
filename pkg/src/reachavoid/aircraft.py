"""Reduced aircraft model: along-track distance and altitude on a piecewise-linear flight plan.

Each aircraft follows its flight plan laterally and only its along-track
distance ``s`` within the current segment, its altitude ``z`` and time are
modelled.  For grid computations the hybrid segment index is unrolled into a
cumulative along-track coordinate ``S``, so that the reset ``s -> 0`` at a
waypoint becomes continuous motion in ``S``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .dynamics import ContractError, DynamicsSpec, InputBox

PHASES = ("climb", "cruise", "descent")
MAX_PATH_ANGLE = math.radians(5.0)
NMI = 1852.0
FT = 0.3048


class SpeedTableRangeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SpeedProfile:
    phase: str
    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if self.phase not in PHASES:
            raise ValueError(f"unknown flight phase {self.phase!r}")
        knots = tuple((float(a), float(s)) for a, s in self.knots)
        if not knots:
            raise ValueError(f"{self.phase} profile has no knots")
        alt = np.array([k[0] for k in knots])
        if np.any(np.diff(alt) <= 0):
            raise ValueError(f"{self.phase} profile altitudes must be strictly increasing")
        if any(s <= 0 for _, s in knots):
            raise ValueError(f"{self.phase} profile airspeeds must be positive")
        object.__setattr__(self, "knots", knots)

    @property
    def altitudes(self) -> np.ndarray:
        return np.array([k[0] for k in self.knots])

    @property
    def airspeeds(self) -> np.ndarray:
        return np.array([k[1] for k in self.knots])

    def airspeed(self, z) -> np.ndarray:
        """Piecewise-linear nominal airspeed; saturates outside the table."""
        return np.interp(z, self.altitudes, self.airspeeds)


def speed_lookup(profile: SpeedProfile, z: float) -> float:
    lo, hi = profile.knots[0][0], profile.knots[-1][0]
    if z < lo or z > hi:
        warnings.warn(f"altitude {z} m outside {profile.phase} table [{lo}, {hi}]; clamping",
                      SpeedTableRangeWarning, stacklevel=2)
    return float(profile.airspeed(z))


def parse_speed_profiles(text: str) -> dict[str, SpeedProfile]:
    rows: dict[str, list] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'phase altitude_m airspeed_mps', got {line!r}")
        rows.setdefault(parts[0], []).append((float(parts[1]), float(parts[2])))
    return {phase: SpeedProfile(phase, tuple(knots)) for phase, knots in rows.items()}


def load_speed_profiles(path: str | Path | None = None) -> dict[str, SpeedProfile]:
    """Read a profile table; ``None`` loads the table shipped with the package."""
    if path is None:
        text = resources.files("reachavoid").joinpath("data/a320_speed_profiles.txt").read_text()
    else:
        text = Path(path).read_text()
    return parse_speed_profiles(text)


@dataclass(frozen=True)
class AircraftModel:
    waypoints: tuple[tuple[float, float, float], ...]
    profiles: tuple[SpeedProfile, ...]
    gamma_max: float = MAX_PATH_ANGLE
    speed_fraction: float = 0.1
    wind_bound: tuple[float, float, float] = (12.0, 12.0, 12.0)

    def __post_init__(self):
        wps = tuple(tuple(float(c) for c in wp) for wp in self.waypoints)
        if len(wps) < 2 or any(len(wp) != 3 for wp in wps):
            raise ValueError("flight plan needs at least two (x, y, z) waypoints")
        profiles = self.profiles.values() if isinstance(self.profiles, dict) else self.profiles
        profiles = tuple(sorted(profiles, key=lambda p: PHASES.index(p.phase)))
        if tuple(p.phase for p in profiles) != PHASES:
            raise ValueError(f"need exactly one speed profile per phase {PHASES}")
        if not 0 <= self.gamma_max <= MAX_PATH_ANGLE + 1e-12:
            raise ValueError("gamma_max must lie in [0, 5 deg]")
        wind = tuple(float(w) for w in np.broadcast_to(np.asarray(self.wind_bound, dtype=float), (3,)))
        if any(w < 0 for w in wind):
            raise ValueError("wind bound must be non-negative")
        object.__setattr__(self, "waypoints", wps)
        object.__setattr__(self, "profiles", profiles)
        object.__setattr__(self, "gamma_max", float(self.gamma_max))
        object.__setattr__(self, "speed_fraction", float(self.speed_fraction))
        object.__setattr__(self, "wind_bound", wind)
        if np.any(self.segment_lengths <= 0):
            raise ValueError("flight plan has a zero-length horizontal segment")

    @property
    def n_segments(self) -> int:
        return len(self.waypoints) - 1

    @cached_property
    def _wp(self) -> np.ndarray:
        return np.array(self.waypoints)

    @cached_property
    def segment_lengths(self) -> np.ndarray:
        d = np.diff(self._wp[:, :2], axis=0)
        return np.hypot(d[:, 0], d[:, 1])

    @cached_property
    def headings(self) -> np.ndarray:
        d = np.diff(self._wp, axis=0)
        return np.arctan2(d[:, 1], d[:, 0])

    @cached_property
    def path_angles(self) -> np.ndarray:
        d = np.diff(self._wp[:, 2])
        return np.arctan2(d, self.segment_lengths)

    @cached_property
    def cumulative(self) -> np.ndarray:
        """Along-track distance of each waypoint from the first one."""
        return np.concatenate([[0.0], np.cumsum(self.segment_lengths)])

    def phase(self, segment: int) -> str:
        angle = self.path_angles[segment]
        return "climb" if angle > 0 else "descent" if angle < 0 else "cruise"

    def profile(self, phase: str) -> SpeedProfile:
        return self.profiles[PHASES.index(phase)]

    def gamma_interval(self, segment: int) -> tuple[float, float]:
        phase = self.phase(segment)
        if phase == "climb":
            return 0.0, self.gamma_max
        if phase == "descent":
            return -self.gamma_max, 0.0
        return 0.0, 0.0

    def segment_of(self, S) -> np.ndarray:
        """Segment index for cumulative along-track distances (ends extrapolate)."""
        idx = np.searchsorted(self.cumulative, S, side="right") - 1
        return np.clip(idx, 0, self.n_segments - 1)

    def nominal_speed(self, segment: int, z) -> np.ndarray:
        return self.profile(self.phase(segment)).airspeed(z)


def _check_segment(model: AircraftModel, segment: int):
    if not 0 <= segment < model.n_segments:
        raise ContractError(f"segment {segment} outside 0..{model.n_segments - 1}")


def aircraft_flow(model: AircraftModel, segment: int, state: Sequence[float], inputs: Sequence[float],
                  wind: Sequence[float]) -> tuple[float, float, float]:
    """Vector field ``(sdot, zdot, tdot)`` with sin(gamma) ~ gamma and cos(gamma) ~ 1."""
    _check_segment(model, segment)
    _, z, _ = state
    b, gamma = inputs
    if abs(b) > 1.0 + 1e-12:
        raise ContractError(f"speed input b={b} outside [-1, 1]")
    if abs(gamma) > model.gamma_max + 1e-12:
        raise ContractError(f"path angle {gamma} exceeds {model.gamma_max}")
    wx, wy, wz = wind
    if any(abs(w) > bound + 1e-12 for w, bound in zip(wind, model.wind_bound)):
        raise ContractError(f"wind {tuple(wind)} exceeds bound {model.wind_bound}")
    airspeed = (1.0 + model.speed_fraction * b) * float(model.nominal_speed(segment, z))
    psi = model.headings[segment]
    sdot = airspeed + wx * math.cos(psi) + wy * math.sin(psi)
    zdot = airspeed * gamma + wz
    return sdot, zdot, 1.0


class Transition(NamedTuple):
    next_segment: Optional[int]
    s: float
    terminal: bool


def segment_transition(model: AircraftModel, segment: int, s: float) -> Optional[Transition]:
    """Guard/reset of the hybrid automaton; ``None`` while inside the segment."""
    _check_segment(model, segment)
    if s <= model.segment_lengths[segment]:
        return None
    if segment == model.n_segments - 1:
        return Transition(None, s, True)
    return Transition(segment + 1, 0.0, False)


def map_to_3d(model: AircraftModel, segment: int, s: float, z: float) -> tuple[float, float, float]:
    _check_segment(model, segment)
    d = model.segment_lengths[segment]
    if s < -1e-9 * d or s > d * (1 + 1e-9):
        raise ContractError(f"s={s} outside segment {segment} of length {d}")
    x0, y0, _ = model.waypoints[segment]
    psi = model.headings[segment]
    return x0 + math.cos(psi) * s, y0 + math.sin(psi) * s, float(z)


def along_track_to_3d(model: AircraftModel, S, z) -> np.ndarray:
    """Vectorised ``map_to_3d`` on cumulative distance; returns shape ``(3, ...)``."""
    S = np.asarray(S, dtype=float)
    seg = model.segment_of(S)
    s = S - model.cumulative[seg]
    wp = model._wp[seg]
    psi = model.headings[seg]
    return np.stack([wp[..., 0] + np.cos(psi) * s, wp[..., 1] + np.sin(psi) * s,
                     np.broadcast_to(np.asarray(z, dtype=float), S.shape)])


def aircraft_dynamics(model: AircraftModel) -> DynamicsSpec:
    """Grid dynamics on ``x = (S, z)`` with control ``(b, gamma)`` and wind ``(wx, wy, wz)``.

    The path angle input ranges over ``[-gamma_max, gamma_max]`` and is
    projected onto the phase interval of the current segment, so climb,
    descent and cruise segments see ``[0, g]``, ``[-g, 0]`` and ``{0}``.
    """
    profiles = [model.profile(p) for p in PHASES]
    phase_idx = np.array([PHASES.index(model.phase(k)) for k in range(model.n_segments)])
    gamma_lo = np.array([model.gamma_interval(k)[0] for k in range(model.n_segments)])
    gamma_hi = np.array([model.gamma_interval(k)[1] for k in range(model.n_segments)])
    cos_psi, sin_psi = np.cos(model.headings), np.sin(model.headings)

    def nominal(seg, z):
        out = np.empty(np.shape(z))
        for k, prof in enumerate(profiles):
            sel = phase_idx[seg] == k
            if np.any(sel):
                out[sel] = prof.airspeed(z[sel])
        return out

    def gain(x):
        seg = model.segment_of(x[0])
        zeros = np.zeros(np.shape(x[0]))
        return np.stack([np.stack([cos_psi[seg], sin_psi[seg], zeros]),
                         np.stack([zeros, zeros, zeros + 1.0])])

    def flow(x, u, v):
        S, z = np.asarray(x[0], dtype=float), np.asarray(x[1], dtype=float)
        seg = model.segment_of(S)
        gamma = np.clip(u[1], gamma_lo[seg], gamma_hi[seg])
        airspeed = (1.0 + model.speed_fraction * u[0]) * nominal(seg, z)
        sdot = airspeed + v[0] * cos_psi[seg] + v[1] * sin_psi[seg]
        zdot = airspeed * gamma + v[2]
        return np.stack([sdot, zdot])

    return DynamicsSpec(
        2, flow,
        InputBox((-1.0, -model.gamma_max), (1.0, model.gamma_max)),
        InputBox.symmetric(model.wind_bound),
        disturbance_gain=gain,
        name="aircraft",
    )


def simulate_plan(model: AircraftModel, z0: float, dt: float, steps: int, b: float = 0.0,
                  wind: Sequence[float] = (0.0, 0.0, 0.0)) -> list[tuple[int, float, float, float]]:
    """Forward-Euler run of the hybrid automaton with constant inputs.

    Returns the visited ``(segment, s, z, t)`` states; stops at the end of the plan.
    """
    seg, s, z, t = 0, 0.0, float(z0), 0.0
    trace = [(seg, s, z, t)]
    for _ in range(steps):
        gamma = sum(model.gamma_interval(seg)) / 2.0
        sdot, zdot, tdot = aircraft_flow(model, seg, (s, z, t), (b, gamma), wind)
        s, z, t = s + dt * sdot, z + dt * zdot, t + dt * tdot
        jump = segment_transition(model, seg, s)
        if jump is not None:
            if jump.terminal:
                break
            seg, s = jump.next_segment, jump.s
        trace.append((seg, s, z, t))
    return trace
