import re

import pytest

from curlgap.periodic import PiecewisePotential1D


@pytest.fixture(scope="session")
def kp():
    """Two-piece Kronig-Penney potential used throughout."""
    return PiecewisePotential1D([0.0, 0.5], [0.0, 10.0])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        key = lambda s: [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", s.split()[1])]
        for line in sorted(ACCEPTANCE_LINES, key=key):
            terminalreporter.write_line(line)
