import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hardydil.dilations import check_admissible  # noqa: E402
from hardydil.lie import abelian, engel, heisenberg  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def H():
    return heisenberg()


@pytest.fixture(scope="session")
def R2():
    return abelian(2)


@pytest.fixture(scope="session")
def E4():
    return engel()


@pytest.fixture(scope="session")
def diverge_pair(R2):
    return check_admissible(np.diag([1.0, 2.0]), R2), check_admissible(np.diag([2.0, 1.0]), R2)


@pytest.fixture(scope="session")
def control_pair(R2):
    return check_admissible(np.diag([1.0, 2.0]), R2), check_admissible(np.diag([2.0, 4.0]), R2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
