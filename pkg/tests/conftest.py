import pytest

from bouncelab.airy import airy_zeros

# enough zeros for every scan in the suite (lambda up to 1e4 in the sums)
K_MAX = 4300

VERDICTS = []


@pytest.fixture(scope="session")
def table():
    return airy_zeros(K_MAX)


@pytest.fixture
def verdict():
    """Record one acceptance line; printed in the terminal summary."""

    def record(n, ok, detail):
        VERDICTS.append((n, f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}"))
        print(VERDICTS[-1][1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(VERDICTS):
            terminalreporter.write_line(line)
