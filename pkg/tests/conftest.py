import pytest

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def report():
    """Record one verdict line per acceptance criterion."""

    def record(number: int, title: str, checks: list[tuple[str, bool, str]]):
        ok = all(passed for _, passed, _ in checks)
        failed = [f"{name} ({detail})" for name, passed, detail in checks if not passed]
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title}"
        if failed:
            line += " | failing: " + "; ".join(failed)
        ACCEPTANCE_LINES[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
