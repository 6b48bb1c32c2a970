import os

import pytest
from hypothesis import HealthCheck, settings

from sinhlab import exact, parametrix
from sinhlab.equilibrium import Potential, build_measure

settings.register_profile("sinhlab", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "sinhlab"))

# filled by tests/test_acceptance.py, printed once at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def meas1():
    """Equilibrium measure of the linear potential with M = 1 (c = 2)."""
    return build_measure(Potential.linear(1.0))


@pytest.fixture(scope="session")
def bundle1(meas1):
    return parametrix.build_bundle(meas1, 0.0, 0)


@pytest.fixture(scope="session")
def dmpk_systems():
    """Exact systems for the DMPK weight, M = 1, alpha = 0, at n = 20 and 40.

    Degrees reach n + 2 so that the k = 1 formulas and h_{n+1} are available.
    """
    out = {}
    for n in (20, 40):
        out[n] = exact.biorthogonalize(exact.dmpk_weight(1.0, n), n + 2)
    return out
