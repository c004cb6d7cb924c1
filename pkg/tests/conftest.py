import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from delaykv import instability_pair  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture
def witness():
    """Marginal pair for lambda_k = 1, theta = pi/3: root at i/sqrt(2)."""
    return instability_pair(1.0, math.pi / 3)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
