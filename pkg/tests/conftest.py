import numpy as np
import pytest

from excursion_lab import PathGrid


def tent(n_steps=1024):
    return PathGrid.from_function(lambda t: 1.0 - np.abs(2.0 * t - 1.0), n_steps)


def semicircle(n_steps=2**16):
    return PathGrid.from_function(lambda t: 2.0 * np.sqrt(t * (1.0 - t)), n_steps)


@pytest.fixture
def tent_path():
    return tent()


@pytest.fixture
def zero_path():
    return PathGrid(np.zeros(257))


# one line per acceptance criterion, echoed in the terminal summary
CRITERIA_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA_LINES):
            terminalreporter.write_line(CRITERIA_LINES[k])
