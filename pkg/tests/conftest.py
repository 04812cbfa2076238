import numpy as np
import pytest

from fermi_klein.algebras import m2_plus_m2, m3, pauli_m2, swap_leg
from fermi_klein.structure import car_fixture

_CRITERIA: dict[str, tuple[int, str]] = {}
_OUTCOMES: dict[int, list[bool]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None and mark.args:
            _CRITERIA[item.nodeid] = (int(mark.args[0]), str(mark.args[1]))


def pytest_runtest_logreport(report):
    info = _CRITERIA.get(report.nodeid)
    if info is None:
        return
    if report.when == "call" or report.failed:
        _OUTCOMES.setdefault(info[0], []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    titles = {num: title for num, title in _CRITERIA.values()}
    for num in sorted(_OUTCOMES):
        verdict = "PASS" if all(_OUTCOMES[num]) else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {verdict}  {titles[num]}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def m2():
    return pauli_m2()


@pytest.fixture(scope="session")
def m2m2():
    return m2_plus_m2()


@pytest.fixture(scope="session")
def m3_alg():
    return m3()


@pytest.fixture(scope="session")
def leg():
    return swap_leg()


@pytest.fixture(scope="session")
def car():
    return car_fixture()
