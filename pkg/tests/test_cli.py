import numpy as np
import pytest

from reachavoid.cli import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, main
from reachavoid.export import read_manifest, read_tube, write_manifest, write_tube
from reachavoid.grid import Grid, ScalarField
from reachavoid.vi_solver import ValueTube

from conftest import SCENARIOS
from test_scenario import MINIMAL


def run(*args):
    return main([str(a) for a in args])


def manifest_outputs(out):
    m = read_manifest(out / "manifest.txt")
    return m, [out / name for name in m["outputs"].split(", ")]


def test_solve_with_analytic_reference(tmp_path):
    out = tmp_path / "solve"
    assert run("solve", "--scenario", SCENARIOS / "integrator_1d.scn", "--out", out) == EXIT_OK
    m, files = manifest_outputs(out)
    assert m["reference"] == "analytic_1d"
    assert float(m["reference_linf_final"]) > 0
    assert all(f.exists() and f.stat().st_size > 0 for f in files)
    tube = read_tube(out)
    assert tube.times[0] == 1.0 and tube.times[-1] == 0.0
    assert len(tube.times) == int(m["records"])


def test_solve_with_oracle(tmp_path):
    out = tmp_path / "game"
    assert run("solve", "--scenario", SCENARIOS / "game_2d.scn", "--out", out, "--threads", 2) == EXIT_OK
    m, files = manifest_outputs(out)
    assert float(m["oracle_linf"]) <= 0.1
    assert int(m["oracle_mismatch_outside_band"]) == 0
    assert all(f.exists() and f.stat().st_size > 0 for f in files)


def test_oracle_command_and_diff(tmp_path, capsys):
    out = tmp_path / "oracle"
    assert run("oracle", "--scenario", SCENARIOS / "game_2d.scn", "--out", out) == EXIT_OK
    m = read_manifest(out / "manifest.txt")
    assert int(m["steps"]) == 20
    capsys.readouterr()
    assert run("diff", out / "value_index.csv", out / "value_index.csv") == EXIT_OK
    assert "linf = 0.0" in capsys.readouterr().out
    assert run("diff", out / "value_index.csv", out / "oracle_index.csv") == EXIT_OK
    assert f"linf = {m['oracle_linf']}" in capsys.readouterr().out


def test_algorithm1_exports(tmp_path):
    out = tmp_path / "case"
    assert run("algorithm1", "--scenario", SCENARIOS / "two_aircraft.scn", "--out", out,
               "--record-every", 50) == EXIT_OK
    m, files = manifest_outputs(out)
    assert m["aircraft"] == "A, B" and int(m["conflict_events"]) > 0
    assert all(f.exists() and f.stat().st_size > 0 for f in files)
    report = (out / "conflicts.txt").read_text().splitlines()
    assert len(report) == 2 + int(m["conflict_events"])
    for name in ("A", "B"):
        assert read_tube(out / f"{name}_value_index.csv").times[0] > 0


def test_validation_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.scn"
    bad.write_text(MINIMAL.replace("T = 1", "T = -1"))
    out = tmp_path / "bad"
    assert run("solve", "--scenario", bad, "--out", out) == EXIT_INVALID
    assert "horizon" in (out / "diagnostic.txt").read_text()
    assert run("solve", "--scenario", SCENARIOS / "two_aircraft.scn", "--out", out) == EXIT_INVALID
    assert run("algorithm1", "--scenario", SCENARIOS / "game_2d.scn", "--out", out) == EXIT_INVALID
    assert run("solve", "--scenario", SCENARIOS / "game_2d.scn", "--out", out, "--threads", 0) == EXIT_INVALID
    assert run("solve", "--scenario", tmp_path / "missing.scn", "--out", out) == EXIT_INVALID


def test_numerical_failure_exits_3(tmp_path):
    blowup = tmp_path / "blowup.scn"
    blowup.write_text(MINIMAL.replace("model = integrator_1d",
                                      "model = polynomial\ndrift = x0^2000\ncontrol = 1\nu_lower = -1\nu_upper = 1"))
    out = tmp_path / "blowup"
    assert run("solve", "--scenario", blowup, "--out", out) == EXIT_NUMERICAL
    assert "numerical failure" in (out / "diagnostic.txt").read_text()


def test_solve_is_byte_identical_across_threads(tmp_path):
    outs = []
    for k, threads in enumerate((1, 3)):
        out = tmp_path / f"run{k}"
        assert run("solve", "--scenario", SCENARIOS / "game_2d.scn", "--out", out, "--threads", threads) == EXIT_OK
        outs.append(out)
    names = sorted(p.name for p in outs[0].glob("*.csv"))
    assert names == sorted(p.name for p in outs[1].glob("*.csv"))
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_tube_and_manifest_round_trip(tmp_path):
    g = Grid((0.0, 0.0), (1.0, 2.0), (3, 4))
    tube = ValueTube(g)
    rng = np.random.default_rng(1)
    for t in (2.0, 1.0 / 3.0, 0.0):
        tube.record(t, ScalarField(g, rng.normal(size=g.shape)))
    write_tube(tube, tmp_path, "x")
    back = read_tube(tmp_path / "x_index.csv")
    assert back.times == tube.times
    for a, b in zip(tube.fields, back.fields):
        assert a.values.tobytes() == b.values.tobytes()
    write_manifest(tmp_path / "m.txt", [("a", 0.1), ("b", [1, 2]), ("c", "x y")])
    assert read_manifest(tmp_path / "m.txt") == {"a": "0.1", "b": "1, 2", "c": "x y"}
