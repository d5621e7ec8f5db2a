import numpy as np
import pytest

from twobarrier import make_system, system_from_dimensionless


@pytest.fixture
def fig1_system():
    return system_from_dimensionless(3 * np.pi, 0.0)


@pytest.fixture
def gapped_system():
    return make_system(V0=2.0, d=0.8, L=1.7, a1=3.0)


_REPORT = []


@pytest.fixture(scope="session")
def acceptance_report():
    return _REPORT


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for r in _REPORT:
        terminalreporter.write_line(r.line())
    passed = sum(r.passed for r in _REPORT)
    terminalreporter.write_line(f"{passed}/{len(_REPORT)} checks passed")
