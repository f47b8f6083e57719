import numpy as np
import pytest

from beamlab.verification import manufacture_steady, manufacture_unsteady


@pytest.fixture(scope="session")
def steady_case():
    return manufacture_steady()


@pytest.fixture(scope="session")
def unsteady_case():
    return manufacture_unsteady()


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


ACCEPTANCE_LINES = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else "FAIL"
    ACCEPTANCE_LINES.append(f"{status}  {name}  ({report.duration:.2f}s)")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
