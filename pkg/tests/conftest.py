import numpy as np
import pytest

from rcheb.moments import Beta, Normal, Uniform
from rcheb.series import TruncatedSolution

TABLE_GRID = np.array([0.1, 0.3, 0.5, 0.7, 0.9])


@pytest.fixture(scope="session")
def gbu():
    """A ~ N(0, variance 1/4), Y0 ~ Be(1,3), Y1 ~ U(0,2)."""
    return Normal.from_variance(0.0, 0.25), Beta(1.0, 3.0), Uniform(0.0, 2.0)


@pytest.fixture(scope="session")
def gbu_ic(gbu):
    _, Y0, Y1 = gbu
    return Y0.raw_moment(1), Y0.raw_moment(2), Y1.raw_moment(1), Y1.raw_moment(2)


@pytest.fixture(scope="session")
def tsm10(gbu):
    return TruncatedSolution.from_models(*gbu, N=10)


# Acceptance report: one PASS/FAIL line per criterion at the end of the run.
_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" in report.nodeid and (report.when == "call" or report.failed):
        num = int(report.nodeid.split("test_criterion_")[1].split("_")[0])
        _acceptance[num] = "PASS" if report.passed and _acceptance.get(num, "PASS") == "PASS" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_acceptance):
        terminalreporter.write_line(f"criterion {num:2d}: {_acceptance[num]}")
