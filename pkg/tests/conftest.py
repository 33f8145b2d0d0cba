import pytest

ACCEPTANCE = {}


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion."""
    def record(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
