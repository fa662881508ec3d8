from fractions import Fraction

import numpy as np
import pytest

from proxmeta.config import builtin_scenarios
from proxmeta.engine import Scenario
from proxmeta.geometry import SpaceInstance
from proxmeta.objective import Objective
from proxmeta.schedule import WeightSchedule


def closed_form_scenario(schedule=None, start=(1.0, 0.0)):
    """quadratic(a=0, w=1), gamma = 1: x_n = 2^-n e_1."""
    f = Objective.quadratic([0.0, 0.0], 1.0)
    return Scenario(SpaceInstance(2), f, schedule or WeightSchedule.constant(1), np.array(start), Fraction(1),
                    name="closed_form")


def catalog_objectives(dimension, rng):
    """One objective of every catalog kind, with random parameters."""
    a = rng.uniform(-2, 2, dimension)
    lo = rng.uniform(-2, 0, dimension)
    return [
        Objective.quadratic(a, rng.uniform(0.2, 3)),
        Objective.l1_norm(dimension, rng.uniform(0.2, 2)),
        Objective.ball_indicator(a, rng.uniform(0.3, 2)),
        Objective.box_indicator(lo, lo + rng.uniform(0.1, 2, dimension)),
        Objective.logcosh(a, rng.uniform(0.2, 1.5)),
    ]


def random_scenario(rng, idx=0):
    d = int(rng.integers(1, 4))
    f = catalog_objectives(d, rng)[int(rng.integers(0, 5))]
    kind = ["constant", "linear", "harmonic"][int(rng.integers(0, 3))]
    c = Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 5)))
    start = f.known_minimizer + rng.uniform(-3, 3, d)
    dist = float(np.linalg.norm(start - f.known_minimizer))
    b = Fraction(int(np.ceil(dist * 4)) + 1, 4)
    return Scenario(SpaceInstance(d), f, WeightSchedule(kind, c), start, b, seed=idx, name=f"random_{idx}")


@pytest.fixture
def quad_scenario():
    return closed_form_scenario()


@pytest.fixture(scope="session")
def suite():
    return builtin_scenarios()


@pytest.fixture
def rng():
    return np.random.default_rng(20161207)


#: criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num:2d}: {detail}")
