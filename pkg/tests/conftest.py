import numpy as np
import pytest

from secest.lti import LtiSystem
from secest.quadrotor import build_quadrotor, lqr_gain
from secest.scenario import ScenarioConfig, make_design, make_selection


@pytest.fixture(scope="session")
def quad():
    return build_quadrotor()


@pytest.fixture(scope="session")
def selection():
    return make_selection(ScenarioConfig())


@pytest.fixture(scope="session")
def pp_design(quad, selection):
    return make_design(quad, selection.C, {})


@pytest.fixture(scope="session")
def pp_system(pp_design, selection):
    return LtiSystem(A=pp_design.A, C=selection.C)


@pytest.fixture(scope="session")
def lqr_design(quad, selection):
    return lqr_gain(quad, C=selection.C)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import verdicts

    if verdicts.LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(verdicts.LINES):
            terminalreporter.write_line(verdicts.LINES[k])
