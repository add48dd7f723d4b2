import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record a pass/fail line for an acceptance criterion, then assert it."""
    def check(number: int, title: str, passed: bool, detail: str = ""):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] criterion {number}: {title}" + (f" | {detail}" if detail else ""))
        assert passed, f"criterion {number} failed: {detail}"
    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
