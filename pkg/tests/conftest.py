import pytest

from kljn.core import SystemConfig


@pytest.fixture
def default_config():
    return SystemConfig()


@pytest.fixture
def short_config():
    """Small gamma so that starred errors are frequent and runs are cheap."""
    return SystemConfig(gamma=16, beta=0.4, delta=0.4)


ACCEPTANCE_RESULTS = []


def record(criterion, passed, detail):
    """Log one acceptance line; printed in the terminal summary."""
    ACCEPTANCE_RESULTS.append((criterion, bool(passed), detail))
    print(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
