"""Command line entry point: ``reachavoid {solve,algorithm1,oracle,diff}``.

Exit status is 0 on success, 2 for invalid input and 3 when the numerics fail.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
import traceback
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .dynamics import ContractError
from .export import read_tube, write_conflict_report, write_contours, write_manifest, write_tube
from .grid import LARGE, Box, ScalarField, implicit_field
from .oracle import OracleOptions, compare_tubes, dp_solve, mismatches_outside_band
from .reach_avoid import run_algorithm1
from .scenario import Scenario, ScenarioError, parse_scenario
from .vi_solver import NumericalError, SolveOptions, ValueTube, solve

log = logging.getLogger("reachavoid")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def solve_options(sc: Scenario, threads: int = 1, record_every: Optional[int] = None,
                  breakpoints: Sequence[float] = ()) -> SolveOptions:
    r = sc.run
    return SolveOptions(cfl_number=r.cfl, record_every=record_every or r.record_every, mode=r.mode,
                        samples_per_input_axis=r.samples, workers=threads, breakpoints=tuple(breakpoints),
                        dissipation=r.dissipation)


def problem_fields(sc: Scenario) -> tuple[ScalarField, ScalarField]:
    """Target ``l`` (<= 0 inside) and obstacle ``h`` (> 0 inside the avoid set)."""
    l = implicit_field(sc.grid, sc.target)
    h = -implicit_field(sc.grid, sc.avoid) if sc.avoid is not None else sc.grid.fill(-LARGE)
    return l, h


def analytic_1d(sc: Scenario, tau: float) -> np.ndarray:
    """``max(0, |x - c| - speed * tau) - r`` for a 1D box target of centre ``c`` and half-width ``r``."""
    if sc.grid.ndim != 1 or not isinstance(sc.target, Box) or sc.avoid is not None:
        raise ScenarioError("reference analytic_1d needs a 1D box target and no avoid set", "reference")
    if sc.dynamics.model != "integrator_1d":
        raise ScenarioError("reference analytic_1d needs the integrator_1d model", "reference")
    speed = max(sc.dynamics.u_bound - sc.dynamics.v_bound, 0.0)
    c = 0.5 * (sc.target.lower[0] + sc.target.upper[0])
    r = 0.5 * (sc.target.upper[0] - sc.target.lower[0])
    x = sc.grid.axes[0]
    return np.maximum(0.0, np.abs(x - c) - speed * tau) - r


def oracle_times(sc: Scenario) -> list[float]:
    n = int(round((sc.run.T - sc.run.t0) / sc.run.oracle_dt))
    return [sc.run.T - k * sc.run.oracle_dt for k in range(1, n)]


def subtube(tube: ValueTube, times: Sequence[float]) -> ValueTube:
    out = ValueTube(tube.grid)
    for t in times:
        k = tube.index_of(t)
        if k is None:
            raise ValueError(f"tube has no record at t={t}")
        out.record(tube.times[k], tube.fields[k])
    return out


def _oracle_tube(sc: Scenario, l, h) -> ValueTube:
    dyn = sc.dynamics.build()
    opts = OracleOptions(sc.run.oracle_dt, sc.run.oracle_samples, sc.run.oracle_samples, sc.run.mode)
    return dp_solve(dyn, l, h, sc.run.T, sc.run.t0, opts)


def _compare_items(pde: ValueTube, oracle: ValueTube) -> list[tuple[str, object]]:
    matched = subtube(pde, oracle.times)
    linf, mismatch = compare_tubes(matched, oracle)
    return [("oracle_linf", linf), ("oracle_mask_mismatch", mismatch),
            ("oracle_mismatch_outside_band", mismatches_outside_band(matched, oracle)),
            ("oracle_warnings", "; ".join(oracle.warnings) or "none")]


def cmd_solve(sc: Scenario, out: Path, threads: int, record_every: Optional[int]) -> list[tuple[str, object]]:
    if sc.is_aircraft:
        raise ScenarioError("aircraft scenarios run with the algorithm1 command")
    l, h = problem_fields(sc)
    dyn = sc.dynamics.build()
    marks = oracle_times(sc) if sc.run.oracle else []
    opts = solve_options(sc, threads, record_every, marks)
    start = time.perf_counter()
    tube = solve(dyn, l, h, sc.run.T, sc.run.t0, opts)
    elapsed = time.perf_counter() - start
    files = write_tube(tube, out) + write_contours(tube, out)
    items: list[tuple[str, object]] = [
        ("dynamics", dyn.name), ("mode", opts.mode), ("cfl", opts.cfl_number),
        ("samples", opts.samples_per_input_axis), ("record_every", opts.record_every),
        ("dissipation", opts.dissipation), ("threads", threads),
        ("grid_min", sc.grid.mins), ("grid_max", sc.grid.maxs), ("grid_nodes", sc.grid.nodes),
        ("t0", sc.run.t0), ("T", sc.run.T), ("steps", tube.steps), ("records", len(tube.times)),
        ("solve_seconds", round(elapsed, 3)),
    ]
    if sc.run.reference == "analytic_1d":
        err = [float(np.max(np.abs(f.values - analytic_1d(sc, sc.run.T - t))))
               for t, f in zip(tube.times, tube.fields)]
        items += [("reference", "analytic_1d"), ("reference_linf_final", err[-1]),
                  ("reference_linf_max", max(err))]
    if sc.run.oracle:
        oracle = _oracle_tube(sc, l, h)
        files += write_tube(oracle, out, "oracle")
        items += _compare_items(tube, oracle)
    items += [("warnings", "; ".join(tube.warnings) or "none"), ("outputs", [p.name for p in files])]
    return items


def cmd_oracle(sc: Scenario, out: Path, threads: int, record_every: Optional[int]) -> list[tuple[str, object]]:
    if sc.is_aircraft:
        raise ScenarioError("the oracle runs on single-system scenarios only")
    if sc.run.oracle_dt is None:
        raise ScenarioError("the oracle needs oracle_dt in [run]", "oracle_dt")
    l, h = problem_fields(sc)
    start = time.perf_counter()
    oracle = _oracle_tube(sc, l, h)
    elapsed = time.perf_counter() - start
    opts = solve_options(sc, threads, 10**9, oracle_times(sc))
    pde = solve(sc.dynamics.build(), l, h, sc.run.T, sc.run.t0, opts)
    files = write_tube(oracle, out, "oracle") + write_tube(pde, out, "value")
    items: list[tuple[str, object]] = [
        ("mode", sc.run.mode), ("oracle_dt", sc.run.oracle_dt), ("oracle_samples", sc.run.oracle_samples),
        ("grid_nodes", sc.grid.nodes), ("t0", sc.run.t0), ("T", sc.run.T), ("steps", oracle.steps),
        ("oracle_seconds", round(elapsed, 3)),
    ]
    items += _compare_items(pde, oracle)
    items.append(("outputs", [p.name for p in files]))
    return items


def cmd_algorithm1(sc: Scenario, out: Path, threads: int, record_every: Optional[int]) -> list[tuple[str, object]]:
    if not sc.is_aircraft:
        raise ScenarioError("algorithm1 needs [aircraft.*] sections")
    tasks = sc.tasks()
    T = max(t.tw.t_hi for t in tasks)
    if sc.run.T is not None and sc.run.T < T:
        raise ScenarioError(f"horizon T={sc.run.T} ends before the last window closes at {T}", "T")
    opts = solve_options(sc, threads, record_every)
    start = time.perf_counter()
    res = run_algorithm1(tasks, opts, t0=sc.run.t0, horizontal=sc.separation[0], vertical=sc.separation[1] / 2)
    elapsed = time.perf_counter() - start
    files: list[Path] = []
    warnings = []
    for task, r in zip(tasks, res.results):
        tube = r.tube()
        files += write_tube(tube, out, f"{task.name}_value") + write_contours(tube, out, f"{task.name}_contour")
        warnings += tube.warnings
    names = [t.name for t in tasks]
    files.append(write_conflict_report(res.conflicts, out / "conflicts.txt", names))
    items: list[tuple[str, object]] = [
        ("aircraft", names), ("mode", "two-stage"), ("cfl", opts.cfl_number), ("samples", opts.samples_per_input_axis),
        ("record_every", opts.record_every), ("dissipation", opts.dissipation), ("threads", threads),
        ("separation_horizontal", sc.separation[0]), ("separation_vertical_half", sc.separation[1] / 2),
        ("t0", res.plan.t0), ("T", res.plan.T), ("dt", res.plan.dt), ("steps", len(res.plan.times) - 1),
        ("conflict_events", len(res.conflicts)), ("solve_seconds", round(elapsed, 3)),
    ]
    for task in tasks:
        items += [(f"{task.name}.grid_nodes", task.grid.nodes), (f"{task.name}.entry", task.entry),
                  (f"{task.name}.window", (task.tw.t_lo, task.tw.t_hi))]
    items += [("warnings", "; ".join(warnings) or "none"), ("outputs", [p.name for p in files])]
    return items


def cmd_diff(left: Path, right: Path) -> list[tuple[str, object]]:
    a, b = read_tube(left), read_tube(right)
    linf, mismatch = compare_tubes(a, b)
    return [("linf", linf), ("mask_mismatch", mismatch)]


COMMANDS = {"solve": cmd_solve, "algorithm1": cmd_algorithm1, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reachavoid", description="Reach-avoid sets by Hamilton-Jacobi grids.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("solve", "solve a single-system scenario"),
                       ("algorithm1", "multi-aircraft Target Window run with conflict detection"),
                       ("oracle", "dynamic-programming reference solve and comparison")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--scenario", required=True, type=Path)
        s.add_argument("--out", required=True, type=Path)
        s.add_argument("--threads", type=int, default=1)
        s.add_argument("--record-every", type=int, default=None)
    d = sub.add_parser("diff", help="compare two exported tubes")
    d.add_argument("left", type=Path, help="tube index CSV or directory with value_index.csv")
    d.add_argument("right", type=Path)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    out = getattr(args, "out", None)
    try:
        if args.command == "diff":
            for k, v in cmd_diff(args.left, args.right):
                print(f"{k} = {v}")
            return EXIT_OK
        if args.threads < 1:
            raise ContractError("--threads must be >= 1")
        if args.record_every is not None and args.record_every < 1:
            raise ContractError("--record-every must be >= 1")
        sc = parse_scenario(args.scenario)
        out.mkdir(parents=True, exist_ok=True)
        items = COMMANDS[args.command](sc, out, args.threads, args.record_every)
        items = [("command", args.command), ("scenario", str(args.scenario))] + items
        write_manifest(out / "manifest.txt", items)
        print(f"wrote {out / 'manifest.txt'}")
        return EXIT_OK
    except (NumericalError, FloatingPointError) as exc:
        return _fail(out, exc, EXIT_NUMERICAL)
    except (ContractError, ValueError, OSError) as exc:
        return _fail(out, exc, EXIT_INVALID)


def _fail(out: Optional[Path], exc: Exception, code: int) -> int:
    kind = "numerical failure" if code == EXIT_NUMERICAL else "invalid input"
    print(f"error ({kind}): {exc}", file=sys.stderr)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "diagnostic.txt").write_text(
                f"status = {code}\nkind = {kind}\nerror = {exc}\n\n" + traceback.format_exc())
        except OSError:
            pass
    return code


if __name__ == "__main__":
    sys.exit(main())
