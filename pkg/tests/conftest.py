"""Shared fixtures: the acceptance log and its terminal summary."""

from __future__ import annotations

import pytest

_acceptance_lines: list[tuple[int, str]] = []


@pytest.fixture
def acceptance_log():
    """Record one pass/fail line per acceptance criterion.

    Returns the boolean so tests can write ``assert acceptance_log(...)``;
    the collected lines are replayed in the terminal summary.
    """

    def record(criterion: int, ok: bool, detail: str) -> bool:
        line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'} - {detail}"
        _acceptance_lines.append((criterion, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_acceptance_lines):
        terminalreporter.write_line(line)
