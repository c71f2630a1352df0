"""Game dynamics ``xdot = f(x, u, v)`` with box-bounded control and disturbance."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .grid import Grid

# Flows are vectorised over trailing state axes: x has shape (n, ...), u (m,), v (p,).
Flow = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
Gain = Callable[[np.ndarray], np.ndarray]


class ContractError(ValueError):
    """Raised when an argument violates an operation's precondition."""


@dataclass(frozen=True)
class InputBox:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(np.asarray(self.lower, dtype=float)))
        hi = tuple(float(v) for v in np.atleast_1d(np.asarray(self.upper, dtype=float)))
        if len(lo) != len(hi):
            raise ContractError("input box bounds differ in length")
        if any(not (np.isfinite(a) and np.isfinite(b)) or a > b for a, b in zip(lo, hi)):
            raise ContractError(f"input box must be compact with lower <= upper: {lo}, {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def empty(cls) -> "InputBox":
        return cls((), ())

    @classmethod
    def symmetric(cls, bound: float | Sequence[float]) -> "InputBox":
        b = np.atleast_1d(np.asarray(bound, dtype=float))
        return cls(tuple(-b), tuple(b))

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains(self, u, tol: float = 1e-12) -> bool:
        u = np.asarray(u, dtype=float).reshape(-1)
        if len(u) != self.dim:
            return False
        return bool(np.all(u >= np.asarray(self.lower) - tol) and np.all(u <= np.asarray(self.upper) + tol))

    def samples(self, per_axis: int = 3) -> np.ndarray:
        """Uniform lattice of ``per_axis`` points per axis; always contains every vertex."""
        if per_axis < 2:
            raise ContractError("need at least 2 samples per input axis")
        if self.dim == 0:
            return np.zeros((1, 0))
        axes = [np.linspace(lo, hi, per_axis) if hi > lo else np.array([lo])
                for lo, hi in zip(self.lower, self.upper)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)


@dataclass(frozen=True)
class DynamicsSpec:
    """Flow field plus input sets.

    ``control_gain``/``disturbance_gain`` are optional structural hints: when
    given, ``f(x, u, v) = f(x, 0, v) + B(x) u`` (resp. ``+ C(x) v``), with the
    gain returning an array of shape ``(n, m, ...)``.  The Hamiltonian uses them
    to optimise that input analytically instead of by sampling.
    """

    state_dim: int
    flow: Flow
    control: InputBox
    disturbance: InputBox
    speed_bound: Optional[tuple[float, ...]] = None
    control_gain: Optional[Gain] = None
    disturbance_gain: Optional[Gain] = None
    name: str = "custom"

    @property
    def affine_in_inputs(self) -> bool:
        return self.control_gain is not None and self.disturbance_gain is not None

    def __call__(self, x, u, v) -> np.ndarray:
        return self.flow(np.asarray(x, dtype=float), np.asarray(u, dtype=float), np.asarray(v, dtype=float))


def flow_eval(dyn: DynamicsSpec, x, u, v) -> np.ndarray:
    """Checked pointwise evaluation of ``f(x, u, v)``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    if len(x) != dyn.state_dim:
        raise ContractError(f"state has length {len(x)}, expected {dyn.state_dim}")
    if len(u) != dyn.control.dim or len(v) != dyn.disturbance.dim:
        raise ContractError("input dimension mismatch")
    if not dyn.control.contains(u):
        raise ContractError(f"control {u} outside {dyn.control}")
    if not dyn.disturbance.contains(v):
        raise ContractError(f"disturbance {v} outside {dyn.disturbance}")
    out = np.asarray(dyn.flow(x, u, v), dtype=float).reshape(-1)
    if len(out) != dyn.state_dim:
        raise ContractError("flow returned wrong dimension")
    return out


def per_axis_speed_bound(dyn: DynamicsSpec, grid: Grid, samples: int = 3, inflation: float = 1.05) -> np.ndarray:
    """Sampled bound ``alpha_i >= max |f_i|`` over the grid nodes and input lattices."""
    x = grid.coords
    alpha = np.zeros(dyn.state_dim)
    for v in dyn.disturbance.samples(samples):
        for u in dyn.control.samples(samples):
            with np.errstate(over="ignore", invalid="ignore"):
                f = np.asarray(dyn.flow(x, u, v), dtype=float)
            if not np.all(np.isfinite(f)):
                raise FloatingPointError(f"non-finite flow for u={u}, v={v}")
            alpha = np.maximum(alpha, np.abs(f).reshape(dyn.state_dim, -1).max(axis=1))
    return alpha * inflation


# --- polynomial control-affine dynamics -----------------------------------

_TERM = re.compile(r"([+-]?)((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?((?:\*?x\d+(?:\^\d+)?)*)")
_FACTOR = re.compile(r"x(\d+)(?:\^(\d+))?")


@dataclass(frozen=True)
class Polynomial:
    """Sum of monomials ``coef * prod_k x_k ** e_k``."""

    terms: tuple[tuple[float, tuple[int, ...]], ...]

    @classmethod
    def constant(cls, c: float) -> "Polynomial":
        return cls(((float(c), ()),)) if c else cls(())

    @classmethod
    def parse(cls, text: str) -> "Polynomial":
        """Parse e.g. ``"1.5*x0^2*x1 - 0.5 + x1"``."""
        src = re.sub(r"(?<=[^eE+\-*^])-", "+-", text.replace(" ", ""))
        terms = []
        for chunk in src.split("+"):
            if not chunk:
                continue
            m = _TERM.fullmatch(chunk)
            if not m or not (m.group(2) or m.group(3)):
                raise ValueError(f"cannot parse term {chunk!r} in {text!r}")
            coef = float(m.group(2)) if m.group(2) else 1.0
            if m.group(1) == "-":
                coef = -coef
            powers: dict[int, int] = {}
            for k, e in _FACTOR.findall(m.group(3)):
                powers[int(k)] = powers.get(int(k), 0) + int(e or 1)
            nvar = max(powers) + 1 if powers else 0
            terms.append((coef, tuple(powers.get(k, 0) for k in range(nvar))))
        if not terms:
            raise ValueError(f"empty polynomial {text!r}")
        return cls(tuple(terms))

    def format(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for coef, exps in self.terms:
            factors = [repr(coef)] + [f"x{k}" if e == 1 else f"x{k}^{e}" for k, e in enumerate(exps) if e]
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(np.shape(x)[1:])
        for coef, exps in self.terms:
            term = np.full(out.shape, coef)
            for k, e in enumerate(exps):
                if e:
                    term = term * x[k] ** e
            out = out + term
        return out


def _eval_matrix(polys, x: np.ndarray) -> np.ndarray:
    return np.stack([np.stack([p(x) for p in row]) for row in polys]) if polys and polys[0] else \
        np.zeros((len(polys), 0) + np.shape(x)[1:])


def polynomial_affine(drift, control_matrix, disturbance_matrix, control: InputBox,
                      disturbance: InputBox, name: str = "polynomial") -> DynamicsSpec:
    """``f = a(x) + B(x) u + C(x) v`` with polynomial entries."""
    drift = tuple(drift)
    B = tuple(tuple(r) for r in control_matrix)
    C = tuple(tuple(r) for r in disturbance_matrix)
    n = len(drift)
    if len(B) != n or len(C) != n:
        raise ContractError("drift and gain matrices disagree on state dimension")
    if any(len(r) != control.dim for r in B) or any(len(r) != disturbance.dim for r in C):
        raise ContractError("gain matrix columns must match input dimensions")

    def bgain(x):
        return _eval_matrix(B, x)

    def cgain(x):
        return _eval_matrix(C, x)

    def flow(x, u, v):
        a = np.stack([p(x) for p in drift])
        return a + np.einsum("ij...,j->i...", bgain(x), u) + np.einsum("ij...,j->i...", cgain(x), v)

    return DynamicsSpec(n, flow, control, disturbance, control_gain=bgain, disturbance_gain=cgain, name=name)


# --- catalogue ------------------------------------------------------------


def _constant_gain(mat: np.ndarray) -> Gain:
    mat = np.asarray(mat, dtype=float)

    def gain(x):
        shape = np.shape(x)[1:]
        return np.broadcast_to(mat.reshape(mat.shape + (1,) * len(shape)), mat.shape + shape)

    return gain


def integrator_1d(u_bound: float = 1.0, v_bound: float = 0.0) -> DynamicsSpec:
    """``xdot = u + v``."""

    def flow(x, u, v):
        return np.broadcast_to(u[0] + v[0], np.shape(x)).copy()

    return DynamicsSpec(1, flow, InputBox.symmetric(u_bound), InputBox.symmetric(v_bound),
                        control_gain=_constant_gain([[1.0]]), disturbance_gain=_constant_gain([[1.0]]),
                        name="integrator_1d")


def double_integrator(u_bound: float = 1.0, v_bound: float = 0.0) -> DynamicsSpec:
    """``x0dot = x1``, ``x1dot = u + v``."""

    def flow(x, u, v):
        return np.stack([np.asarray(x[1], dtype=float), np.zeros(np.shape(x)[1:]) + u[0] + v[0]])

    return DynamicsSpec(2, flow, InputBox.symmetric(u_bound), InputBox.symmetric(v_bound),
                        control_gain=_constant_gain([[0.0], [1.0]]), disturbance_gain=_constant_gain([[0.0], [1.0]]),
                        name="double_integrator")


def game_2d(u_bound: float = 1.0, v_bound: float = 0.5) -> DynamicsSpec:
    """``xdot_i = u_i + v_i`` on both axes."""

    def flow(x, u, v):
        shape = np.shape(x)[1:]
        return np.stack([np.zeros(shape) + u[0] + v[0], np.zeros(shape) + u[1] + v[1]])

    eye = np.eye(2)
    return DynamicsSpec(2, flow, InputBox.symmetric([u_bound] * 2), InputBox.symmetric([v_bound] * 2),
                        control_gain=_constant_gain(eye), disturbance_gain=_constant_gain(eye),
                        name="game_2d")


def zero_dynamics(state_dim: int = 1) -> DynamicsSpec:
    def flow(x, u, v):
        return np.zeros(np.shape(x))

    return DynamicsSpec(state_dim, flow, InputBox.empty(), InputBox.empty(),
                        control_gain=_constant_gain(np.zeros((state_dim, 0))),
                        disturbance_gain=_constant_gain(np.zeros((state_dim, 0))), name="zero")
