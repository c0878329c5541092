import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    """Record one pass/fail line per acceptance criterion; echoed both at
    test time and in a dedicated terminal-summary section."""

    def record(number: int, name: str, passed: bool, detail: str = ""):
        status = "PASS" if passed else "FAIL"
        line = f"ACCEPTANCE {number} [{name}]: {status}"
        if detail:
            line += f" - {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
