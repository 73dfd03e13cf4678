import math

import numpy as np
import pytest
from hypothesis import settings

from apwcert.apw_basis import MuffinTinGeometry

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")

ACCEPTANCE_LINES = {}


@pytest.fixture
def cube():
    """Cubic cell of side 2 pi with one sphere of radius 1.5 at its center."""
    return MuffinTinGeometry.cubic(2.0 * math.pi, [[math.pi] * 3], [1.5])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance_report():
    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
