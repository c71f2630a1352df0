"""Grid refinement study on the 1D reach problem with an exact solution.

Usage: python3 scripts/convergence_study.py [--nodes 201 401 801 1601] [--cfl 0.5 1.0]
"""

import argparse
import time

import numpy as np

from reachavoid.dynamics import integrator_1d
from reachavoid.grid import LARGE, Box, Grid, implicit_field
from reachavoid.vi_solver import SolveOptions, solve


def exact(x: np.ndarray, tau: float, r: float = 0.5) -> np.ndarray:
    return np.maximum(0.0, np.abs(x) - tau) - r


def run(nodes: int, cfl: float, dissipation: str, tau: float = 1.0) -> tuple[float, float]:
    g = Grid((-2.0,), (2.0,), (nodes,))
    l = implicit_field(g, Box((-0.5,), (0.5,)))
    start = time.perf_counter()
    tube = solve(integrator_1d(1.0, 0.0), l, g.fill(-LARGE), tau, 0.0,
                 SolveOptions(cfl_number=cfl, dissipation=dissipation, record_every=10**9))
    elapsed = time.perf_counter() - start
    return float(np.max(np.abs(tube.final().values - exact(g.axes[0], tau)))), elapsed


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nodes", type=int, nargs="+", default=[201, 401, 801, 1601])
    p.add_argument("--cfl", type=float, nargs="+", default=[0.5, 1.0])
    p.add_argument("--dissipation", choices=("hamiltonian", "speed"), default="hamiltonian")
    args = p.parse_args()
    print(f"{'cfl':>5} {'nodes':>6} {'linf':>10} {'ratio':>6} {'seconds':>8}")
    for cfl in args.cfl:
        prev = None
        for n in args.nodes:
            err, sec = run(n, cfl, args.dissipation)
            ratio = f"{prev / err:6.2f}" if prev else "     -"
            print(f"{cfl:5.2f} {n:6d} {err:10.5f} {ratio} {sec:8.3f}")
            prev = err


if __name__ == "__main__":
    main()
