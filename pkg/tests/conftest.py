import pytest

ACCEPTANCE_LINES: list = []


@pytest.fixture
def report_line():
    """Record one ``PASS|FAIL name: summary`` line for the terminal summary."""

    def record(name: str, passed: bool, summary: str):
        line = f"{'PASS' if passed else 'FAIL'}  {name}: {summary}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
