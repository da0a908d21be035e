from pathlib import Path

import pytest

from qsetop.dataset import from_values

FIXTURES = Path(__file__).parent / "fixtures"

INTRO_A = [(1, 1, 1, 1), (2, 2, 2, 2), (1, 2, 3, 4)]
INTRO_B = [(3, 3, 3, 3), (4, 4, 4, 4), (1, 2, 3, 4)]

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def intro_sets():
    return from_values(INTRO_A), from_values(INTRO_B)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
