import math
import warnings
from importlib import resources

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reachavoid.aircraft import (AircraftModel, SpeedProfile, SpeedTableRangeWarning, aircraft_dynamics,
                                 aircraft_flow, along_track_to_3d, map_to_3d, parse_speed_profiles,
                                 segment_transition, simulate_plan, speed_lookup)
from reachavoid.dynamics import ContractError, per_axis_speed_bound
from reachavoid.grid import Grid


def shipped_rows():
    # Read the data file directly rather than through the loader.
    text = resources.files("reachavoid").joinpath("data/a320_speed_profiles.txt").read_text()
    rows = []
    for line in text.splitlines():
        line = line.split("#")[0].split()
        if line:
            rows.append((line[0], float(line[1]), float(line[2])))
    return rows


def cruise_model(profiles, wind=(12.0, 12.0, 12.0)):
    return AircraftModel(((0, 0, 9000), (50000, 0, 9000), (50000, 40000, 9000)), profiles, wind_bound=wind)


def test_profile_validation():
    with pytest.raises(ValueError):
        SpeedProfile("cruise", ((1000, 200), (500, 210)))
    with pytest.raises(ValueError):
        SpeedProfile("cruise", ((1000, -1.0),))
    with pytest.raises(ValueError):
        SpeedProfile("taxi", ((1000, 10.0),))
    with pytest.raises(ValueError):
        parse_speed_profiles("cruise 1000")


def test_speed_lookup_examples(profiles):
    cruise = profiles["cruise"]
    for alt, spd in cruise.knots:
        assert speed_lookup(cruise, alt) == spd
    (a1, s1), (a2, s2) = cruise.knots[1], cruise.knots[2]
    assert speed_lookup(cruise, (a1 + a2) / 2) == pytest.approx((s1 + s2) / 2, abs=1e-12)
    with pytest.warns(SpeedTableRangeWarning):
        assert speed_lookup(cruise, cruise.knots[0][0] - 500) == cruise.knots[0][1]


def test_cruise_flow_reads_table_at_knots(profiles):
    model = cruise_model(profiles)
    for phase, alt, spd in shipped_rows():
        if phase != "cruise":
            continue
        assert aircraft_flow(model, 0, (0.0, alt, 0.0), (0.0, 0.0), (0, 0, 0)) == (spd, 0.0, 1.0)


def test_speed_input_and_wind(profiles):
    model = cruise_model(profiles)
    base = aircraft_flow(model, 0, (0, 9000, 0), (0.0, 0.0), (0, 0, 0))[0]
    assert aircraft_flow(model, 0, (0, 9000, 0), (1.0, 0.0), (0, 0, 0))[0] == 1.1 * base
    assert aircraft_flow(model, 0, (0, 9000, 0), (0.0, 0.0), (12, 0, 0))[0] == base + 12
    # Second segment heads north, so only w_y projects onto the track.
    assert aircraft_flow(model, 1, (0, 9000, 0), (0.0, 0.0), (0, 12, 0))[0] == pytest.approx(base + 12, abs=1e-12)


def test_flow_contracts(profiles):
    model = cruise_model(profiles)
    with pytest.raises(ContractError):
        aircraft_flow(model, 2, (0, 9000, 0), (0, 0), (0, 0, 0))
    with pytest.raises(ContractError):
        aircraft_flow(model, 0, (0, 9000, 0), (1.5, 0), (0, 0, 0))
    with pytest.raises(ContractError):
        aircraft_flow(model, 0, (0, 9000, 0), (0, 0.2), (0, 0, 0))
    with pytest.raises(ContractError):
        aircraft_flow(model, 0, (0, 9000, 0), (0, 0), (13, 0, 0))


def test_model_geometry(profiles):
    model = AircraftModel(((0, 0, 8000), (3000, 4000, 9000), (3000, 10000, 9000)), profiles)
    np.testing.assert_allclose(model.segment_lengths, [5000, 6000])
    np.testing.assert_allclose(model.headings, [math.atan2(4000, 3000), math.pi / 2])
    assert model.phase(0) == "climb" and model.phase(1) == "cruise"
    assert model.gamma_interval(0) == (0.0, model.gamma_max)
    assert model.gamma_max <= math.radians(5) and model.speed_fraction == 0.1
    with pytest.raises(ValueError):
        AircraftModel(model.waypoints, profiles, gamma_max=math.radians(6))


def test_zero_input_flow_reproduces_profile_everywhere(profiles):
    model = AircraftModel(((0, 0, 6000), (50000, 0, 9000), (90000, 0, 9000), (120000, 0, 7000)), profiles)
    for seg, phase in enumerate(["climb", "cruise", "descent"]):
        assert model.phase(seg) == phase
        for alt, spd in profiles[phase].knots:
            assert aircraft_flow(model, seg, (0.0, alt, 0.0), (0.0, 0.0), (0, 0, 0))[0] == spd


def test_segment_transition_examples(profiles):
    model = cruise_model(profiles)
    d = model.segment_lengths[0]
    assert segment_transition(model, 0, d / 2) is None
    jump = segment_transition(model, 0, d + 1)
    assert (jump.next_segment, jump.s, jump.terminal) == (1, 0.0, False)
    end = segment_transition(model, 1, model.segment_lengths[1] + 1)
    assert end.next_segment is None and end.terminal


def test_simulation_visits_segments_in_order(profiles):
    model = AircraftModel(((0, 0, 6000), (20000, 0, 8000), (40000, 10000, 8000), (60000, 0, 7000)), profiles)
    trace = simulate_plan(model, 6000, 5.0, 10_000)
    segs = [s for s, *_ in trace]
    assert segs[0] == 0 and segs[-1] == model.n_segments - 1
    assert all(b - a in (0, 1) for a, b in zip(segs, segs[1:]))


def test_map_to_3d_examples(profiles):
    model = AircraftModel(((0, 0, 8000), (1000, 1000, 8000), (1000, 3000, 8000)), profiles)
    assert map_to_3d(model, 0, 0.0, 8000) == (0.0, 0.0, 8000.0)
    end = map_to_3d(model, 0, model.segment_lengths[0], 8000)
    assert end[:2] == pytest.approx((1000.0, 1000.0))
    diag = map_to_3d(model, 0, math.sqrt(2), 1.0)
    assert diag == pytest.approx((1.0, 1.0, 1.0))
    with pytest.raises(ContractError):
        map_to_3d(model, 0, -5.0, 8000)


@given(st.floats(0, 1), st.floats(7000, 11000))
def test_along_track_matches_segment_map(frac, z):
    from reachavoid.aircraft import load_speed_profiles
    model = AircraftModel(((0, 0, 8000), (30000, 40000, 9000), (30000, 90000, 9000)), load_speed_profiles())
    S = frac * model.cumulative[-1]
    seg = int(model.segment_of(S))
    ref = map_to_3d(model, seg, S - model.cumulative[seg], z)
    np.testing.assert_allclose(along_track_to_3d(model, S, z), ref, rtol=0, atol=1e-8)


def test_speed_bound_on_case_domain(crossing_tasks):
    task = crossing_tasks[0]
    rows = shipped_rows()
    zmax = task.grid.maxs[1]
    # Fastest phase speed within the grid's altitude band, then 10 % speed-up plus the along-track wind.
    g_max = max(np.interp(zmax, [a for p, a, _ in rows if p == ph], [s for p, a, s in rows if p == ph])
                for ph in ("climb", "cruise"))
    alpha = per_axis_speed_bound(aircraft_dynamics(task.model), task.grid)
    assert alpha[0] == pytest.approx(1.05 * (1.1 * g_max + 12.0), rel=1e-12)


def test_grid_dynamics_agree_with_pointwise_flow(crossing_tasks):
    task = crossing_tasks[1]
    model = task.model
    dyn = aircraft_dynamics(model)
    rng = np.random.default_rng(5)
    for _ in range(50):
        S = rng.uniform(0, model.cumulative[-1] - 1)
        z = rng.uniform(7000, 11000)
        seg = int(model.segment_of(S))
        lo, hi = model.gamma_interval(seg)
        b, gamma = rng.uniform(-1, 1), rng.uniform(lo, hi)
        w = rng.uniform(-12, 12, 3) * np.array([1, 1, 0])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ref = aircraft_flow(model, seg, (0.0, z, 0.0), (b, gamma), w)
        got = dyn(np.array([[S], [z]]), np.array([b, gamma]), w)[:, 0]
        np.testing.assert_allclose(got, ref[:2], rtol=1e-12, atol=1e-9)
