import pytest

from helpers import four_state, two_state
from multiuntil.formula import parse_query


@pytest.fixture
def four_state_chain():
    return four_state()


@pytest.fixture
def two_state_chain():
    return two_state()


@pytest.fixture
def g():
    return parse_query("a U[1,2] b U[3,4] c")


ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, ok, detail)``."""
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
