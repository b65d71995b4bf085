import re

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def single_capacity():
    from hdrelay.capacity import solve_single_relay
    return solve_single_relay().capacity_bits


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: (int(re.match(r"CRITERION (\d+)", s).group(1)), s)):
            terminalreporter.write_line(line)
