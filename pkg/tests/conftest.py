import pytest

from nmbattery import InitialState, SystemParams, TimeGrid

ACCEPTANCE_LINES = []


@pytest.fixture
def transition_params():
    return SystemParams(eta=1.5, g1=0.7, g2=0.7)


@pytest.fixture
def ground():
    return InitialState()


@pytest.fixture
def short_grid():
    return TimeGrid(10.0, 2000)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
