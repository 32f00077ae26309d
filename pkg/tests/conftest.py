import pytest

from whichway import ExperimentGeometry

ACCEPTANCE_LINES = []


@pytest.fixture
def geom():
    return ExperimentGeometry()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
