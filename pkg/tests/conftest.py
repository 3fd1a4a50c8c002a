from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nhwalk.lattice import reference_lattice

settings.register_profile(
    "nhwalk", deadline=None, derandomize=True, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("nhwalk")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def ref():
    return reference_lattice()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(7)
