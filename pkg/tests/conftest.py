"""Shared test fixtures; the acceptance suite reports one line per check."""

import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance(request):
    """Record a PASS/FAIL line for the terminal summary, then assert."""

    def report(ok: bool, detail: str):
        status = "PASS" if ok else "FAIL"
        _ACCEPTANCE_LINES.append(f"{status}  {request.node.name}: {detail}")
        assert ok, detail

    return report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance checks")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
