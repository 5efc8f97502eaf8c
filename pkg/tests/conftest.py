"""Shared fixtures plus a terminal summary for the acceptance criteria.

Each acceptance test records exactly one line through the ``check`` fixture;
the lines are replayed after the run so pass/fail status is visible even when
pytest captures stdout.
"""

import pytest

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def check():
    """Record one '<id> PASS/FAIL  <detail>' line, then assert."""

    def _check(criterion: str, condition: bool, detail: str) -> None:
        status = "PASS" if condition else "FAIL"
        _ACCEPTANCE_LINES.append(f"{criterion} {status}  {detail}")
        assert condition, f"{criterion} failed: {detail}"

    return _check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
