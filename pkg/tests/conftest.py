import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gauge_optics.grid import GridSpec, make_grid

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(GridSpec.square(64, 8.0, half_cell_offset=True))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run even when output is captured
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES, key=lambda s: (int(s.split()[1].rstrip("ab")), s)):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
