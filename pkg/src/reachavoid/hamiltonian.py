"""Game Hamiltonian ``sup_v inf_u p.f(x, u, v)``, its frozen variant and Lax-Friedrichs flux."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ContractError, DynamicsSpec

MODES = ("standard", "frozen")


@dataclass(frozen=True)
class HamiltonianSpec:
    dyn: DynamicsSpec
    samples_per_input_axis: int = 3
    mode: str = "standard"

    def __post_init__(self):
        if self.samples_per_input_axis < 2:
            raise ContractError("samples_per_input_axis must be >= 2")
        if self.mode not in MODES:
            raise ContractError(f"mode must be one of {MODES}, got {self.mode!r}")


def _box_extreme(q: np.ndarray, lower, upper, op) -> np.ndarray:
    # q: (m, ...) coefficients of a linear form in the input
    if q.shape[0] == 0:
        return np.zeros(q.shape[1:])
    lo = np.asarray(lower).reshape((-1,) + (1,) * (q.ndim - 1))
    hi = np.asarray(upper).reshape(lo.shape)
    return np.sum(op(q * lo, q * hi), axis=0)


def _dot(p: np.ndarray, f: np.ndarray) -> np.ndarray:
    return np.sum(p * f, axis=0)


def hamiltonian_values(spec: HamiltonianSpec, p: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Vectorised standard Hamiltonian; ``p`` and ``x`` have shape ``(n, ...)``.

    The disturbance maximises outside, the control minimises inside.  Inputs
    that enter affinely (declared gains) are optimised exactly at box
    vertices; the rest are searched on the sample lattice.
    """
    dyn = spec.dyn
    U, V = dyn.control, dyn.disturbance
    k = spec.samples_per_input_axis
    u0 = np.zeros(U.dim)
    v0 = np.zeros(V.dim)

    if dyn.affine_in_inputs:
        base = _dot(p, dyn.flow(x, u0, v0))
        qu = np.einsum("i...,ij...->j...", p, dyn.control_gain(x))
        qv = np.einsum("i...,ij...->j...", p, dyn.disturbance_gain(x))
        return base + _box_extreme(qu, U.lower, U.upper, np.minimum) + _box_extreme(qv, V.lower, V.upper, np.maximum)

    if dyn.disturbance_gain is not None:
        qv = np.einsum("i...,ij...->j...", p, dyn.disturbance_gain(x))
        inner = None
        for u in U.samples(k):
            val = _dot(p, dyn.flow(x, u, v0))
            inner = val if inner is None else np.minimum(inner, val)
        return inner + _box_extreme(qv, V.lower, V.upper, np.maximum)

    if dyn.control_gain is not None:
        qu = np.einsum("i...,ij...->j...", p, dyn.control_gain(x))
        umin = _box_extreme(qu, U.lower, U.upper, np.minimum)
        outer = None
        for v in V.samples(k):
            val = _dot(p, dyn.flow(x, u0, v)) + umin
            outer = val if outer is None else np.maximum(outer, val)
        return outer

    outer = None
    for v in V.samples(k):
        inner = None
        for u in U.samples(k):
            val = _dot(p, dyn.flow(x, u, v))
            inner = val if inner is None else np.minimum(inner, val)
        outer = inner if outer is None else np.maximum(outer, inner)
    return outer


def mode_values(spec: HamiltonianSpec, p: np.ndarray, x: np.ndarray) -> np.ndarray:
    h = hamiltonian_values(spec, p, x)
    if not np.all(np.isfinite(h)):
        raise FloatingPointError("non-finite Hamiltonian value")
    return np.minimum(h, 0.0) if spec.mode == "frozen" else h


def _point_args(spec: HamiltonianSpec, p, x) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float).reshape(-1)
    n = spec.dyn.state_dim
    if len(p) != n or len(x) != n:
        raise ContractError(f"p and x must have length {n}")
    return p.reshape(n, 1), x.reshape(n, 1)


def ham_value(spec: HamiltonianSpec, p, x) -> float:
    p, x = _point_args(spec, p, x)
    h = hamiltonian_values(spec, p, x)
    if not np.all(np.isfinite(h)):
        raise FloatingPointError("non-finite Hamiltonian value")
    return float(h[0])


def ham_frozen(spec: HamiltonianSpec, p, x) -> float:
    return min(0.0, ham_value(spec, p, x))


def lax_friedrichs_values(spec: HamiltonianSpec, dminus: np.ndarray, dplus: np.ndarray, x: np.ndarray,
                          alpha: np.ndarray, reverse: bool = False) -> np.ndarray:
    """Numerical Hamiltonian ``H(avg(D-, D+)) - sum_i alpha_i (D+_i - D-_i) / 2``.

    This is the monotone flux for ``phi_t + H = 0`` stepped forward in time.
    ``reverse=True`` builds it for ``-H`` instead, which is what a backward
    step ``V(t - dt) = V(t) - dt * Hhat`` needs.
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0):
        raise ContractError("dissipation coefficients must be non-negative")
    a = alpha.reshape((-1,) + (1,) * (dminus.ndim - 1))
    h = mode_values(spec, 0.5 * (dminus + dplus), x)
    if reverse:
        h = -h
    return h - np.sum(a * (dplus - dminus), axis=0) / 2.0


def lax_friedrichs(spec: HamiltonianSpec, dminus, dplus, x, alpha) -> float:
    dm, x_ = _point_args(spec, dminus, x)
    dp, _ = _point_args(spec, dplus, x)
    return float(lax_friedrichs_values(spec, dm, dp, x_, alpha)[0])


def hamiltonian_slope_bound(spec: HamiltonianSpec, grid, n_random: int = 32, eps: float = 1e-6,
                            inflation: float = 1.05) -> np.ndarray:
    """Estimate ``max |dH/dp_i|`` over the grid by central differences in ``p``.

    Costates are taken from the {-1, 0, 1} lattice plus ``n_random`` fixed
    pseudo-random directions.  This is the dissipation Lax-Friedrichs needs;
    it is never larger than the plain speed bound and can be much smaller
    when the players partly cancel each other.
    """
    std = HamiltonianSpec(spec.dyn, spec.samples_per_input_axis, "standard")
    n = grid.ndim
    x = grid.coords.reshape(n, -1)
    lattice = [np.array(d, dtype=float) for d in np.ndindex(*(3,) * n)]
    dirs = [d - 1.0 for d in lattice if np.any(d != 1)]
    rng = np.random.default_rng(0)
    for d in rng.normal(size=(n_random, n)):
        dirs.append(d / np.linalg.norm(d))
    bound = np.zeros(n)
    ones = np.ones(x.shape[1])
    for d in dirs:
        for i in range(n):
            step = np.zeros(n)
            step[i] = eps
            hp = hamiltonian_values(std, (d + step)[:, None] * ones, x)
            hm = hamiltonian_values(std, (d - step)[:, None] * ones, x)
            bound[i] = max(bound[i], float(np.max(np.abs(hp - hm))) / (2 * eps))
    return bound * inflation
