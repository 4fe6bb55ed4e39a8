import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_LINES = []


@pytest.fixture
def acceptance_line():
    """Record one pass/fail line per acceptance criterion; printed in the terminal summary."""

    def record(number, passed, text):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {text}"
        _LINES.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
