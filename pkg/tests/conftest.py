from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from reachavoid.aircraft import AircraftModel, load_speed_profiles
from reachavoid.grid import Box, Grid, implicit_field
from reachavoid.reach_avoid import AircraftTask, TargetWindow

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "reachavoid" / "scenarios"


def box_1d(grid, lo=-0.5, hi=0.5):
    return implicit_field(grid, Box((lo,), (hi,)))


def analytic_reach_1d(x, tau, speed=1.0, r=0.5):
    """Terminal-time reach value for xdot = u, |u| <= speed, target |x| <= r."""
    return np.maximum(0.0, np.abs(x) - speed * tau) - r


@pytest.fixture(scope="session")
def profiles():
    return load_speed_profiles()


@pytest.fixture(scope="session")
def crossing_tasks(profiles):
    """Climbing A along x and descending B along y, crossing at 45 km on both plans."""
    grid = Grid((-5000.0, 7000.0), (95000.0, 11000.0), (101, 51))
    wind = (12.0, 12.0, 0.0)
    a = AircraftModel(((0, 0, 8000), (67500, 0, 10000), (90000, 0, 10000)), profiles, wind_bound=wind)
    b = AircraftModel(((45000, -45000, 10000), (45000, 22500, 8000), (45000, 45000, 8000)), profiles,
                      wind_bound=wind)
    return [AircraftTask(a, grid, TargetWindow("adjacent", 2, -600, 600, 355, 515), 0.0, "A"),
            AircraftTask(b, grid, TargetWindow("adjacent", 2, -600, 600, 377, 537), 30.0, "B")]


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
